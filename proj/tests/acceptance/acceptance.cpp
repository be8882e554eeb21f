// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
// Usage: acceptance [--only N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../common/oracles.hpp"
#include "resconv/approximators.hpp"
#include "resconv/compiler.hpp"
#include "resconv/complexity.hpp"
#include "resconv/experiments.hpp"
#include "resconv/functions.hpp"
#include "resconv/random.hpp"
#include "resconv/train.hpp"

using namespace resconv;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double rel_dev(double a, double b) { return std::fabs(a - b) / (1.0 + std::fabs(b)); }

// Random FNN with the sweep ranges shared by criteria 1 and 2.
struct SweepCase {
    BlockSparseFnn f;
    int K;
};

SweepCase sweep_case(Rng& rng) {
    FnnShape s;
    s.D = uniform_int(rng, 2, 8);
    s.M = uniform_int(rng, 1, 6);
    s.max_depth = 3;
    s.max_width = 5;
    s.bound_bs = uniform(rng, 0.1, 2.0);
    s.bound_fin = uniform(rng, 0.1, 2.0);
    auto f = random_fnn(s, rng);
    return {std::move(f), uniform_int(rng, 2, s.D)};
}

// 1 and 2 share a sweep; run it once.
struct SweepResult {
    double max_dev = 0.0;
    int cases = 0;
    int violations = 0;
    int norm_violations = 0;  // realized conv norm above B_bs
    double worst_norm_ratio = 0.0;
    std::string first;
};

const SweepResult& compile_sweep() {
    static SweepResult r;
    static bool done = false;
    if (done) return r;
    done = true;
    Rng rng(2024);
    for (int t = 0; t < 200; ++t) {
        auto [f, K] = sweep_case(rng);
        const auto c = compile_fnn_to_cnn(f, K);
        const int D = f.input_dim;
        for (int p = 0; p < 100; ++p) {
            const auto x = random_point(D, rng);
            r.max_dev = std::max(r.max_dev, rel_dev(cnn_eval(c.net, x), fnn_eval(f, x)));
        }
        ++r.cases;
        // independent re-check of every certified quantity against the required bounds
        const int L0 = (D - 1 + K - 2) / (K - 1);
        int width = 0;
        for (const auto& b : f.blocks) width = std::max(width, b.max_width());
        const int Cbound = std::max(3, 4 * width);
        auto note = [&](const std::string& s) {
            ++r.violations;
            if (r.first.empty()) r.first = fmt("case %d: ", t) + s;
        };
        for (size_t m = 0; m < f.blocks.size(); ++m) {
            const auto& b = c.net.blocks[m];
            if (b.depth() > f.blocks[m].depth() + L0) note(fmt("block %zu depth %d", m, b.depth()));
            if (b.max_channels() > Cbound) note(fmt("block %zu channels %d > %d", m, b.max_channels(), Cbound));
            if (b.max_filter() > K) note(fmt("block %zu filter %d > %d", m, b.max_filter(), K));
        }
        if (c.net.channels > Cbound) note("trunk channels");
        double conv = 0.0;
        for (const auto& b : c.net.blocks) conv = std::max(conv, b.max_abs());
        const double fc = c.net.readout.max_abs();
        if (!within_bound(conv, f.bound_bs)) {
            ++r.norm_violations;
            r.worst_norm_ratio = std::max(r.worst_norm_ratio, conv / f.bound_bs);
            note(fmt("conv norm %.4g > B_bs %.4g (K=%d, D=%d)", conv, f.bound_bs, K, D));
        }
        const double fc_bound = f.bound_fin * std::max(1.0, 1.0 / f.bound_bs);
        if (!within_bound(fc, fc_bound)) note(fmt("fc norm %.4g > %.4g", fc, fc_bound));
    }
    return r;
}

Outcome c1_exactness() {
    const auto& r = compile_sweep();
    return {r.max_dev <= 1e-9, fmt("%d models x 100 points, max relative deviation %.3e", r.cases, r.max_dev)};
}

Outcome c2_certificate() {
    const auto& r = compile_sweep();
    Outcome o{r.violations == 0, fmt("%d violations over %d models", r.violations, r.cases)};
    if (r.norm_violations)
        o.detail += fmt("; %d with conv norm above B_bs (worst ratio %.3g; unit shift weights)", r.norm_violations,
                        r.worst_norm_ratio);
    if (!r.first.empty()) o.detail += "; first: " + r.first;
    return o;
}

Outcome c3_rescaling() {
    Rng rng(3);
    double dev = 0.0, bound_err = 0.0;
    int bad_class = 0;
    for (int t = 0; t < 100; ++t) {
        FnnShape s;
        s.D = uniform_int(rng, 2, 6);
        s.M = uniform_int(rng, 1, 5);
        s.bound_bs = uniform(rng, 0.1, 2.0);
        s.bound_fin = uniform(rng, 0.1, 2.0);
        const auto f = random_fnn(s, rng);
        const double L = f.max_depth();
        std::vector<Point> xs;
        for (int p = 0; p < 20; ++p) xs.push_back(random_point(s.D, rng));
        for (double k : {1.0, 2.0, 10.0, 1e3}) {
            const auto g = rescale_fnn(f, k);
            for (const auto& x : xs) dev = std::max(dev, rel_dev(fnn_eval(g, x), fnn_eval(f, x)));
            bound_err = std::max(bound_err, std::fabs(g.bound_bs - f.bound_bs / k) / (f.bound_bs / k));
            const double fin = f.bound_fin * std::pow(k, L);
            bound_err = std::max(bound_err, std::fabs(g.bound_fin - fin) / fin);
            bad_class += !validate_fnn(g).ok;
        }
    }
    return {dev <= 1e-9 && bound_err <= 1e-12 && bad_class == 0,
            fmt("max relative deviation %.3e, bound error %.3e, out-of-class %d", dev, bound_err, bad_class)};
}

Outcome c4_division() {
    Rng rng(4);
    double dev = 0.0, piece_dev = 0.0;
    int count_bad = 0, depth_bad = 0, nets = 0;
    for (int t = 0; t < 100; ++t) {
        FnnShape s;
        s.D = uniform_int(rng, 2, 6);
        s.M = uniform_int(rng, 1, 4);
        s.bound_bs = uniform(rng, 0.2, 2.0);
        s.bound_fin = uniform(rng, 0.2, 2.0);
        const auto f = random_fnn(s, rng);
        const int K = uniform_int(rng, 2, s.D);
        const auto base = compile_fnn_to_cnn(f, K);
        ++nets;
        for (int L = 1; L <= 3; ++L) {
            int expect = 0;
            for (const auto& b : base.net.blocks) {
                const int S0 = (b.depth() + L - 1) / L;
                expect += 2 * S0 - 1;
                // the pieces alone: [x | 0 | 0] -> [x + f(x) | 0 | 0]
                const auto div = divide_block_masked(b, L);
                if (static_cast<int>(div.blocks.size()) != 2 * S0 - 1) ++count_bad;
                ResNetCnn piece;
                piece.input_dim = s.D;
                piece.channels = 3 * div.group;
                piece.blocks = div.blocks;
                piece.masks = div.masks;
                Signal x(s.D, b.in_channels());
                for (double& v : x.data) v = uniform(rng, -1, 1);
                Signal z(s.D, piece.channels);
                for (int a = 0; a < s.D; ++a)
                    for (int i = 0; i < x.channels; ++i) z(a, i) = x(a, i);
                for (size_t m = 0; m < piece.blocks.size(); ++m) z = apply_block(piece, m, z);
                const auto fx = block_forward(b, x);
                for (int a = 0; a < s.D; ++a)
                    for (int i = 0; i < piece.channels; ++i) {
                        const double want = i < x.channels ? x(a, i) + fx(a, i) : 0.0;
                        piece_dev = std::max(piece_dev, rel_dev(z(a, i), want));
                    }
            }
            const auto c = compile_constant_depth(f, L, K);
            if (static_cast<int>(c.net.blocks.size()) != expect) ++count_bad;
            for (const auto& b : c.net.blocks) depth_bad += b.depth() > L;
            for (int p = 0; p < 20; ++p) {
                const auto x = random_point(s.D, rng);
                dev = std::max(dev, rel_dev(cnn_eval(c.net, x), fnn_eval(f, x)));
            }
        }
    }
    return {dev <= 1e-9 && piece_dev <= 1e-9 && count_bad == 0 && depth_bad == 0,
            fmt("%d nets x L in {1,2,3}: max deviation %.3e (pieces %.3e), wrong block counts %d, deep blocks %d",
                nets, dev, piece_dev, count_bad, depth_bad)};
}

Outcome c5_lipschitz() {
    Rng rng(5);
    int violations = 0, runs = 0;
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        CnnShape s;
        s.D = uniform_int(rng, 2, 6);
        s.C0 = uniform_int(rng, 1, 4);
        s.M = uniform_int(rng, 1, 4);
        s.max_depth = 3;
        s.max_channels = 4;
        s.max_filter = 3;
        s.bound_conv = uniform(rng, 0.05, 1.0);
        s.bound_fc = uniform(rng, 0.1, 2.0);
        s.masked = t % 2 == 1;
        const auto net = random_cnn(s, rng);
        for (double eps : {1e-4, 1e-3}) {
            const auto r = lipschitz_check(net, eps, 50, 200, 1000 * t + (eps < 5e-4 ? 1 : 2));
            violations += r.violations;
            worst = std::max(worst, r.max_diff / r.bound);
            ++runs;
        }
    }
    return {violations == 0, fmt("%d runs x 50 perturbations x 200 probes: %d violations, max diff/bound %.3e",
                                 runs, violations, worst)};
}

Outcome c6_layer_bounds() {
    Rng rng(6);
    int violations = 0;
    const int cases = 10000;
    auto sup = [](const std::vector<double>& v) { return max_abs(v); };
    const double tol = 1 + 1e-12;
    for (int t = 0; t < cases; ++t) {
        const int D = uniform_int(rng, 1, 6), I = uniform_int(rng, 1, 4), J = uniform_int(rng, 1, 4);
        const int K = uniform_int(rng, 1, D);
        const Activation act = t % 2 ? Activation::ReLU : Activation::Identity;
        const double scale = uniform(rng, 0.01, 3.0);
        ConvFilter w(K, J, I), w2(K, J, I), dw(K, J, I);
        std::vector<double> b(J), b2(J), db(J);
        for (size_t i = 0; i < w.w.size(); ++i) {
            w.w[i] = uniform(rng, -scale, scale);
            w2.w[i] = uniform_int(rng, 0, 3) == 0 ? w.w[i] : uniform(rng, -scale, scale);
            dw.w[i] = w.w[i] - w2.w[i];
        }
        for (int j = 0; j < J; ++j) {
            b[j] = uniform(rng, -scale, scale);
            b2[j] = uniform(rng, -scale, scale);
            db[j] = b[j] - b2[j];
        }
        Signal x(D, I), y(D, I);
        const double xs = uniform(rng, 0.1, 2.0);
        for (double& v : x.data) v = uniform(rng, -xs, xs);
        for (double& v : y.data) v = uniform(rng, -xs, xs);
        Signal xy(D, I);
        for (size_t i = 0; i < xy.data.size(); ++i) xy.data[i] = x.data[i] - y.data[i];

        // exact-arithmetic bounds, compared with a few ulps of the largest pre-activation as rounding slack
        const double ulp = 16 * std::numeric_limits<double>::epsilon() * (1 + scale * (D * I + 1) * (xs + 1));
        auto over = [&](double lhs, double rhs) { return lhs > rhs * tol + ulp; };
        const double op = op_norm_bound(w);
        // conv: operator, sup, Lipschitz and parameter-difference bounds
        if (over(conv_apply(w, x).sup_norm(), op * x.sup_norm())) ++violations;
        const auto cx = conv_layer(w, b, act, x), cy = conv_layer(w, b, act, y);
        if (over(cx.sup_norm(), (op * x.sup_norm() + sup(b)))) ++violations;
        double lip = 0.0;
        for (size_t i = 0; i < cx.data.size(); ++i) lip = std::max(lip, std::fabs(cx.data[i] - cy.data[i]));
        if (over(lip, op * xy.sup_norm())) ++violations;
        const auto c2 = conv_layer(w2, b2, act, x);
        double diff = 0.0;
        for (size_t i = 0; i < cx.data.size(); ++i) diff = std::max(diff, std::fabs(cx.data[i] - c2.data[i]));
        if (over(diff, (op_norm_bound(dw) * x.sup_norm() + sup(db)))) ++violations;

        // fully-connected layers with random sparsity
        const int out = uniform_int(rng, 1, 3);
        DenseAffine A{Matrix(out, D * I), std::vector<double>(out)}, B{Matrix(out, D * I), std::vector<double>(out)};
        for (size_t i = 0; i < A.weight.a.size(); ++i) {
            if (uniform_int(rng, 0, 2) > 0) A.weight.a[i] = uniform(rng, -scale, scale);
            if (uniform_int(rng, 0, 2) > 0) B.weight.a[i] = uniform(rng, -scale, scale);
        }
        for (int r = 0; r < out; ++r) {
            A.bias[r] = uniform(rng, -scale, scale);
            B.bias[r] = uniform(rng, -scale, scale);
        }
        const double nz = A.weight.nonzeros(), wa = A.weight.max_abs();
        const auto fx = fc_layer(A, act, x), fy = fc_layer(A, act, y), gx = fc_layer(B, act, x);
        if (over(sup(fx), (nz * wa * x.sup_norm() + sup(A.bias)))) ++violations;
        double flip = 0.0, fdiff = 0.0, dW = 0.0, dB = 0.0;
        for (int r = 0; r < out; ++r) {
            flip = std::max(flip, std::fabs(fx[r] - fy[r]));
            fdiff = std::max(fdiff, std::fabs(fx[r] - gx[r]));
            dB = std::max(dB, std::fabs(A.bias[r] - B.bias[r]));
        }
        for (size_t i = 0; i < A.weight.a.size(); ++i) dW = std::max(dW, std::fabs(A.weight.a[i] - B.weight.a[i]));
        if (over(flip, nz * wa * xy.sup_norm())) ++violations;
        if (over(fdiff, ((nz + B.weight.nonzeros()) * dW * x.sup_norm() + dB))) ++violations;
    }
    return {violations == 0, fmt("%d random cases x 7 bounds: %d violations", cases, violations)};
}

Outcome c7_mult() {
    int structure_bad = 0;
    std::string detail;
    bool pass = true;
    for (int m : {4, 8, 12}) {
        const auto net = mult_network(m);
        if (net.depth() > m + 4 || net.max_width() > 6 || net.max_abs() > 1.0) ++structure_bad;
        double err = 0.0;
        for (int i = 0; i < 200; ++i)
            for (int j = 0; j < 200; ++j) {
                const double x = i / 199.0, y = j / 199.0;
                const double v = block_eval(net, std::vector<double>{x, y})[0];
                err = std::max(err, std::fabs(v - x * y));
            }
        pass = pass && err <= std::ldexp(1.0, -m);
        detail += fmt("m=%d err %.3e (limit %.3e) depth %d width %d; ", m, err, std::ldexp(1.0, -m), net.depth(),
                      net.max_width());
    }
    return {pass && structure_bad == 0, detail + fmt("structural violations %d", structure_bad)};
}

Outcome c8_partition() {
    Rng rng(8);
    double worst = 0.0;
    for (int D = 1; D <= 3; ++D)
        for (int Mp : {1, 2, 4}) {
            const auto pts = lattice(Mp, D);
            for (int t = 0; t < 1000; ++t) {
                Point x(D);
                for (double& v : x) v = uniform(rng, 0.0, 1.0);
                double s = 0.0;
                for (const auto& a : pts) s += hat_exact(a, Mp, x);
                worst = std::max(worst, std::fabs(std::pow(Mp, D) * s - 1.0));
            }
        }
    return {worst <= 1e-12, fmt("max |M'^D sum H_a - 1| = %.3e over 9 configurations x 1000 points", worst)};
}

Outcome c9_holder() {
    ApproxRateConfig cfg;
    cfg.kind = "holder";
    cfg.fn = "sinsin";
    cfg.D = 2;
    cfg.beta = 2.0;
    cfg.Ms = {9, 25, 81};
    cfg.grid = 101;
    const auto r = approx_rate_experiment(cfg);
    std::string d;
    for (const auto& p : r.points) d += fmt("M=%g err %.4g (budget %.4g); ", p.sweep, p.error, p.budget);
    const bool slope_ok = std::fabs(r.slope - (-1.0)) <= 0.5;
    return {r.budget_ok && r.exact_ok && slope_ok,
            d + fmt("slope %.3f (target -1 +/- 0.5), compiled exact %s", r.slope, r.exact_ok ? "yes" : "no")};
}

Outcome c10_rates() {
    int bad = 0, checked = 0;
    for (int D = 1; D <= 12; ++D) {
        const auto e = rate_exponent(Rational(1, 2) + Rational(1, D), Rational(1));
        bad += !(e == Rational(-(D + 2), 2 * (D + 1)));
        ++checked;
        for (int beta = 1; beta <= 6; ++beta) {
            const auto h = rate_exponent(Rational(beta, D), Rational(1));
            bad += !(h == Rational(-2 * beta, 2 * beta + D));
            const auto rb = rate_balance(static_cast<double>(beta) / D, 1.0, 1 << 12);
            bad += std::fabs(rb.exponent - h.value()) > 1e-15;
            checked += 2;
        }
    }
    const auto r = rate_balance(1.0, 1.0, 1 << 10);
    bad += r.M != 10;
    ++checked;
    return {bad == 0, fmt("%d exact exponent identities checked, %d mismatches", checked, bad)};
}

Outcome c11_estimation() {
    // gradient check on a net of the trained class first
    auto net = est_architecture(2, 3, 3, 4, 2, 2, 1.0, 4.0);
    init_in_class(net, 1.0, 4.0, 11);
    const auto target = named_function("sinsin", 2);
    const auto data = gen_data(target.f, 2, 64, 0.1, 12);
    const auto gc = gradient_check(net, data, 10.0, 1e-5, 13);
    if (!gc.passed(1e-5))
        return {false, fmt("gradient check failed: max relative error %.3e over %d parameters", gc.max_rel_error,
                           gc.checked)};
    EstRateConfig cfg;
    cfg.fn = "sinsin";
    cfg.D = 2;
    cfg.beta = 2.0;
    cfg.sigma = 0.1;
    cfg.Ns = {256, 512, 1024, 2048, 4096};
    cfg.seeds = {0, 1, 2, 3, 4};
    cfg.train.bound_conv = 1.0;
    cfg.train.bound_fc = 4.0;
    const auto r = estimation_rate_experiment(cfg);
    std::string d = fmt("gradient check max rel err %.2e on %d params; ", gc.max_rel_error, gc.checked);
    for (size_t i = 0; i < r.sweep_values.size(); ++i) d += fmt("N=%g median %.4g; ", r.sweep_values[i], r.medians[i]);
    d += fmt("slope %.3f (predicted %.3f, not gated)", r.slope, r.predicted);
    return {r.monotone, d};
}

Outcome c12_complexity() {
    Rng rng(12);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        ArchSummary a;
        a.D = uniform_int(rng, 1, 16);
        a.C0 = uniform_int(rng, 1, 8);
        a.B_conv = std::exp(uniform(rng, -4, 1));
        a.B_fc = std::exp(uniform(rng, -2, 3));
        a.masked = t % 3 == 0;
        const int M = uniform_int(rng, 0, 8);
        for (int m = 0; m < M; ++m) {
            BlockArch b;
            const int L = uniform_int(rng, 1, 5);
            b.channels.push_back(a.C0);
            for (int l = 0; l < L; ++l) {
                b.channels.push_back(l == L - 1 ? a.C0 : uniform_int(rng, 1, 8));
                b.filters.push_back(uniform_int(rng, 1, a.D));
            }
            a.L = std::max(a.L, L);
            a.blocks.push_back(b);
        }
        const double eps = std::exp(uniform(rng, -10, -1));
        const auto o = oracle::lambdas(a, eps);
        worst = std::max(worst, std::fabs(lambda1(a) - o.lambda1) / o.lambda1);
        worst = std::max(worst, std::fabs(static_cast<double>(lambda2(a)) - o.lambda2) / o.lambda2);
        worst = std::max(worst, std::fabs(covering_log(a, eps) - o.covering) / std::max(1.0, std::fabs(o.covering)));
    }
    int slot_bad = 0;
    for (int t = 0; t < 100; ++t) {
        auto [f, K] = sweep_case(rng);
        const auto c = t % 2 ? compile_fnn_to_cnn(f, K, {t % 4 == 1}) : compile_constant_depth(f, 2, K);
        slot_bad += lambda2(arch_of(c.net)) != oracle::slot_count(c.net);
    }
    return {worst <= 1e-12 && slot_bad == 0,
            fmt("max relative disagreement %.3e over 1000 architectures; slot-count mismatches %d/100", worst,
                slot_bad)};
}

struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "compilation exactness", c1_exactness},
    {2, "certificate soundness", c2_certificate},
    {3, "rescaling invariance", c3_rescaling},
    {4, "masked block division", c4_division},
    {5, "parameter Lipschitz bound", c5_lipschitz},
    {6, "layer operator/sup/Lipschitz bounds", c6_layer_bounds},
    {7, "mult contract", c7_mult},
    {8, "normalized partition of unity", c8_partition},
    {9, "Holder approximation budget and rate", c9_holder},
    {10, "rate-balancing arithmetic", c10_rates},
    {11, "estimation trend (diagnostic)", c11_estimation},
    {12, "complexity cross-validation", c12_complexity},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
            return 2;
        }
    }
    int failed = 0, ran = 0;
    for (const auto& c : kCriteria) {
        if (only && c.id != only) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %2d %-40s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 2;
    }
    return failed ? 1 : 0;
}
