#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "resconv/approximators.hpp"
#include "resconv/functions.hpp"
#include "resconv/random.hpp"

using namespace resconv;

namespace {

std::vector<Point> unit_grid(int n, int D, double lo = 0.0, double hi = 1.0) {
    std::vector<Point> g;
    std::vector<int> idx(D, 0);
    while (true) {
        Point p(D);
        for (int j = 0; j < D; ++j) p[j] = lo + (hi - lo) * idx[j] / (n - 1);
        g.push_back(p);
        int j = D - 1;
        while (j >= 0 && idx[j] == n - 1) idx[j--] = 0;
        if (j < 0) break;
        ++idx[j];
    }
    return g;
}

struct Shape {
    int depth = 0, width = 0;
    double norm = 0.0;
};

Shape shape(const FnnBlock& b) { return {b.depth(), b.max_width(), b.max_abs()}; }

double eval1(const FnnBlock& b, const Point& x) { return block_eval(b, x).at(0); }

}  // namespace

TEST_CASE("barron network") {
    RidgeSpec one{{{1.0, 0.0}, 1.0, 0.0}};
    auto f = barron_fnn(one);
    CHECK(fnn_eval(f, Point{0.4, -0.9}) == doctest::Approx(0.4));
    CHECK(fnn_eval(f, Point{-0.4, 0.9}) == 0.0);

    RidgeSpec pair{{{0.5, -0.5}, 1.0, 0.2}, {{0.5, -0.5}, -1.0, 0.2}};
    CHECK(fnn_eval(barron_fnn(pair), Point{0.9, -0.3}) == 0.0);

    Rng rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int t = 0; t < 30; ++t) {
        const int M = 1 + t % 7, D = 2 + t % 4;
        RidgeSpec r;
        for (int m = 0; m < M; ++m) {
            Ridge q{Point(D), U(rng), U(rng)};
            double l1 = 0;
            for (double& v : q.a) l1 += std::fabs(v = U(rng));
            for (double& v : q.a) v /= l1;
            r.push_back(q);
        }
        auto g = barron_fnn(r);
        CHECK(validate_fnn(g).ok);
        CHECK(g.bound_bs == doctest::Approx(1.0 / M));
        auto x = random_point(D, rng);
        double ref = 0.0;
        for (const auto& q : r) {
            double z = -q.t;
            for (int j = 0; j < D; ++j) z += q.a[j] * x[j];
            ref += q.b * std::max(z, 0.0);
        }
        CHECK(fnn_eval(g, x) == doctest::Approx(ref / M));
        auto c = compile_fnn_to_cnn(g, D);  // K = D: single-layer ridges
        CHECK(c.cert.sound());
        CHECK(c.net.bound_conv == doctest::Approx(1.0 / M));
        CHECK(c.net.bound_fc == doctest::Approx(M));
    }
    RidgeSpec bad{{{0.5, 0.4}, 1.0, 0.0}};
    CHECK_THROWS_AS(barron_fnn(bad), DomainError);
}

TEST_CASE("greedy ridge fitting") {
    auto grid = unit_grid(31, 2, -1.0, 1.0);
    auto ridge = named_function("ridge", 2);
    double before = 0.0;
    for (const auto& p : grid) before = std::max(before, std::fabs(ridge.f(p)));
    auto spec = fit_barron_ridges(ridge.f, 2, 1, 2000, grid, 1);
    validate_ridges(spec);
    auto fitted = barron_fnn(spec);
    double after = 0.0;
    for (const auto& p : grid) after = std::max(after, std::fabs(ridge.f(p) - fnn_eval(fitted, p)));
    CHECK(after <= before / 2);

    auto zero = named_function("zero", 2);
    auto z = fit_barron_ridges(zero.f, 2, 4, 50, grid, 2);
    for (const auto& q : z) CHECK(q.b == 0.0);
    auto zf = barron_fnn(z);
    for (const auto& p : grid) CHECK(fnn_eval(zf, p) == 0.0);

    CHECK(fit_barron_ridges(ridge.f, 2, 3, 10, grid, 5).size() == 3);
    auto again = fit_barron_ridges(ridge.f, 2, 3, 10, grid, 5);
    CHECK(again[2].a == fit_barron_ridges(ridge.f, 2, 3, 10, grid, 5)[2].a);
}

TEST_CASE("lattice and hats") {
    auto l = lattice(1, 1);
    CHECK(l == std::vector<Point>{{0.0}, {1.0}});
    CHECK(lattice(2, 2).size() == 9);
    for (const auto& p : lattice(4, 3))
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(std::fabs(v * 4 - std::round(v * 4)) < 1e-15);
        }
    CHECK_THROWS_AS(lattice(0, 2), DomainError);

    for (double x : {0.0, 0.25, 0.7, 1.0}) CHECK(hat_exact(Point{0.0}, 1, Point{x}) == doctest::Approx(1 - x));
    CHECK(hat_exact(Point{0.5, 0.5}, 2, Point{0.5, 1.0}) == 0.0);

    Rng rng(8);
    std::uniform_real_distribution<double> U(0, 1);
    for (int D = 1; D <= 3; ++D)
        for (int Mp : {1, 2, 4}) {
            auto pts = lattice(Mp, D);
            for (int t = 0; t < 50; ++t) {
                Point x(D);
                for (double& v : x) v = U(rng);
                double s = 0.0;
                for (const auto& a : pts) s += hat_exact(a, Mp, x);
                CHECK(std::fabs(std::pow(Mp, D) * s - 1.0) <= 1e-12);
            }
        }
}

TEST_CASE("taylor polynomials") {
    auto c = named_function("const", 2).oracle(3.0);
    CHECK(taylor_exact(c, Point{0.1, 0.2}, Point{0.9, -0.5}) == 0.5);

    auto sq = named_function("square1", 1).oracle(2.0);
    for (double x : {-0.7, 0.3, 1.0}) CHECK(taylor_exact(sq, Point{0.0}, Point{x}) == 0.0);
    CHECK(taylor_indices(2, 2.0).size() == 3);
    CHECK(taylor_indices(2, 2.5).size() == 6);

    // remainder of order beta for sin(pi x1)
    auto s = named_function("sin1", 1);
    auto o = s.oracle(3.0);
    Rng rng(4);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    for (int t = 0; t < 20; ++t) {
        const double a = U(rng);
        for (double r : {0.1, 0.03, 0.01}) {
            const double x = a + r;
            const double err = std::fabs(taylor_exact(o, Point{a}, Point{x}) - s.f(Point{x}));
            CHECK(err <= o.norm * std::pow(r, 3.0));
        }
    }
}

TEST_CASE("mult network contract") {
    auto grid = unit_grid(200, 2);
    for (int m : {1, 2, 4, 8, 12, 20}) {
        auto net = mult_network(m);
        auto sh = shape(net);
        CHECK(sh.depth <= m + 4);
        CHECK(sh.width <= 6);
        CHECK(sh.norm <= 1.0);
        double err = 0.0;
        for (const auto& p : grid) {
            const double v = eval1(net, p);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            err = std::max(err, std::fabs(v - p[0] * p[1]));
        }
        CHECK(err <= std::ldexp(1.0, -m));
    }
}

TEST_CASE("hat network contract") {
    auto h1 = hat_network(Point{0.5}, 2, 6);
    for (const auto& p : unit_grid(101, 1)) CHECK(eval1(h1, p) == doctest::Approx(hat_exact(Point{0.5}, 2, p)));

    for (int D : {2, 3}) {
        const int m = 8, Mp = 2;
        const int Lstar = (m + 5) * static_cast<int>(std::ceil(std::log2(D)));
        for (const auto& a : lattice(Mp, D)) {
            auto h = hat_network(a, Mp, m);
            auto sh = shape(h);
            CHECK(sh.depth <= 2 + Lstar);
            CHECK(sh.width <= 6 * D);
            CHECK(sh.norm <= 1.0);
            double err = 0.0;
            for (const auto& p : unit_grid(D == 2 ? 101 : 21, D))
                err = std::max(err, std::fabs(eval1(h, p) - hat_exact(a, Mp, p)));
            CHECK(err <= std::pow(3.0, D) * std::ldexp(1.0, -m));
        }
    }
}

TEST_CASE("taylor block contract") {
    const int m = 8;
    auto zero = named_function("zero", 2).oracle(2.0);
    auto q0 = q_network(zero, Point{0.5, 0.5}, 1.0, m);
    for (const auto& p : unit_grid(21, 2)) CHECK(std::fabs(eval1(q0, p) - 0.5) <= 9 * std::ldexp(1.0, -m));

    // f(y) = y on [0,1]: P_a(y) = a + (y - a)
    TaylorOracle lin{[](std::span<const double> a, std::span<const int> al) {
                         return al[0] == 0 ? a[0] : (al[0] == 1 ? 1.0 : 0.0);
                     },
                     2.0, 2.0};
    const double B = 4.0;
    for (double a : {0.0, 0.5, 1.0}) {
        auto q = q_network(lin, Point{a}, B, m);
        CHECK(shape(q).norm <= 1.0);
        CHECK(shape(q).depth <= 2);
        for (const auto& p : unit_grid(101, 1)) CHECK(std::fabs(eval1(q, p) - (p[0] / B + 0.5)) <= 3 * std::ldexp(1.0, -m));
    }

    // degree-2 monomials go through mult trees: D=2, beta=3
    auto s = named_function("sinsin", 2).oracle(3.0);
    TaylorOracle g{[&s](std::span<const double> y, std::span<const int> al) {
                       Point x{2 * y[0] - 1, 2 * y[1] - 1};
                       return std::ldexp(s.deriv(x, al), al[0] + al[1]);
                   },
                   s.norm, 3.0};
    const int Cdb = static_cast<int>(binomial(2 + 3, 2));
    const int Lstar = (m + 5) * 1;
    for (const auto& a : lattice(2, 2)) {
        auto q = q_network(g, a, 2 * s.norm, m);
        auto sh = shape(q);
        CHECK(sh.depth <= 1 + Lstar);
        CHECK(sh.width <= 6 * 2 * Cdb);
        CHECK(sh.norm <= 1.0);
        double err = 0.0;
        for (const auto& p : unit_grid(41, 2))
            err = std::max(err, std::fabs(eval1(q, p) - (taylor_exact(g, a, p) / (2 * s.norm) + 0.5)));
        CHECK(err <= 9 * std::ldexp(1.0, -m));
    }
    CHECK_THROWS_AS(q_network(lin, Point{0.5}, 0.5, m), DomainError);
}

TEST_CASE("holder network") {
    auto p = holder_params(named_function("sinsin", 2).oracle(2.0), 30, 2);
    CHECK(p.Mp == 4);
    CHECK(p.m == static_cast<int>(std::ceil(3 * std::log2(30.0))));
    CHECK(p.Lstar == p.m + 5);
    CHECK_THROWS_AS(holder_params(named_function("sinsin", 2).oracle(2.0), 3, 2), DomainError);

    auto c = named_function("const", 2);
    auto oc = c.oracle(2.0);
    auto hc = holder_fnn(oc, 9, 2);
    CHECK(hc.f.blocks.size() == 9);
    CHECK(validate_fnn(hc.f).ok);
    double err = 0.0;
    for (const auto& x : unit_grid(41, 2, -1, 1)) err = std::max(err, std::fabs(fnn_eval(hc.f, x) - 0.5));
    CHECK(err <= holder_budget(oc.norm, 2.0, 2, 9));

    auto s = named_function("sinsin", 2);
    auto os = s.oracle(2.0);
    CHECK(os.norm == doctest::Approx(1 + 2 * std::numbers::pi + 6 * std::numbers::pi * std::numbers::pi));
    auto hs = holder_fnn(os, 25, 2);
    CHECK(hs.f.blocks.size() == 25);
    CHECK(validate_fnn(hs.f).ok);
    CHECK(hs.f.bound_fin == doctest::Approx(2 * os.norm * 25));
    err = 0.0;
    for (const auto& x : unit_grid(41, 2, -1, 1)) err = std::max(err, std::fabs(fnn_eval(hs.f, x) - s.f(x)));
    CHECK(err <= holder_budget(os.norm, 2.0, 2, 25));

    auto one_d = holder_fnn(named_function("sin1", 1).oracle(2.0), 8, 1);
    CHECK(one_d.f.blocks.size() == 8);
    CHECK(validate_fnn(one_d.f).ok);
}

TEST_CASE("holder cnn pipeline") {
    auto os = named_function("sinsin", 2).oracle(2.0);
    auto hc = holder_cnn(os, 9, 2, 2, {false});
    CHECK(hc.k >= 16.0);
    CHECK(hc.compiled.net.bound_conv == doctest::Approx(1.0 / hc.k));
    CHECK(hc.compiled.cert.sound());
    const int L0 = ridge_depth(2, 2);
    for (size_t m = 0; m < hc.fnn.blocks.size(); ++m)
        CHECK(hc.compiled.net.blocks[m].depth() <= hc.fnn.blocks[m].depth() + L0);
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        auto x = random_point(2, rng);
        const double v = fnn_eval(hc.fnn, x);
        CHECK(std::fabs(cnn_eval(hc.compiled.net, x) - v) <= 1e-9 * (1 + std::fabs(v)));
    }
}
