#include "resconv/approximators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace resconv {

void validate_ridges(const RidgeSpec& r) {
    if (r.empty()) throw DomainError("ridge list must be nonempty");
    const size_t D = r.front().a.size();
    for (size_t m = 0; m < r.size(); ++m) {
        const auto& q = r[m];
        const std::string tag = "ridge " + std::to_string(m + 1) + ": ";
        if (q.a.size() != D || D == 0) throw ShapeError(tag + "direction length differs");
        double l1 = 0.0;
        for (double v : q.a) l1 += std::fabs(v);
        if (std::fabs(l1 - 1.0) > 1e-12) throw DomainError(tag + "direction must have unit l1 norm");
        if (!(std::fabs(q.b) <= 1.0)) throw DomainError(tag + "|b| must be <= 1");
        if (!(std::fabs(q.t) <= 1.0)) throw DomainError(tag + "|t| must be <= 1");
    }
}

BlockSparseFnn barron_fnn(const RidgeSpec& r) {
    validate_ridges(r);
    const int M = static_cast<int>(r.size());
    const int D = static_cast<int>(r.front().a.size());
    BlockSparseFnn f;
    f.input_dim = D;
    f.bound_bs = 1.0 / M;
    f.bound_fin = 1.0;
    for (const auto& q : r) {
        DenseLayer l{Matrix(1, D), {q.t / M}};
        for (int j = 0; j < D; ++j) l.weight(0, j) = q.a[j] / M;
        f.blocks.push_back(FnnBlock{{std::move(l)}});
        f.final_weights.push_back({q.b});
    }
    return f;
}

RidgeSpec fit_barron_ridges(const ScalarFn& f, int D, int M, int candidates, const std::vector<Point>& grid,
                            std::uint64_t seed) {
    if (M < 1) throw DomainError("ridge count M must be >= 1");
    if (candidates < 1) throw DomainError("candidate budget must be >= 1");
    if (grid.empty()) throw DomainError("fitting grid must be nonempty");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N01;
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const size_t P = grid.size();
    std::vector<double> r(P), phi(P), best_phi(P);
    for (size_t i = 0; i < P; ++i) r[i] = f(grid[i]);
    auto sup = [&](const std::vector<double>& v) { return max_abs(v); };
    RidgeSpec spec;
    for (int step = 0; step < M; ++step) {
        double best_err = sup(r), best_b = 0.0;
        Ridge best{Point(D, 0.0), 0.0, 0.0};
        best.a[0] = 1.0;
        for (int c = 0; c < candidates; ++c) {
            Ridge q{Point(D), 0.0, U(rng)};
            double l1 = 0.0;
            while (l1 == 0.0) {
                l1 = 0.0;
                for (double& v : q.a) l1 += std::fabs(v = N01(rng));
            }
            for (double& v : q.a) v /= l1;
            double rp = 0.0, pp = 0.0;
            for (size_t i = 0; i < P; ++i) {
                const double z = std::inner_product(q.a.begin(), q.a.end(), grid[i].begin(), 0.0) - q.t;
                phi[i] = z > 0.0 ? z : 0.0;
                rp += r[i] * phi[i];
                pp += phi[i] * phi[i];
            }
            if (pp == 0.0) continue;
            const double b = std::clamp(M * rp / pp, -1.0, 1.0);
            double err = 0.0;
            for (size_t i = 0; i < P; ++i) err = std::max(err, std::fabs(r[i] - b / M * phi[i]));
            if (err < best_err) {
                best_err = err;
                best_b = b;
                best = q;
                best_phi = phi;
            }
        }
        best.b = best_b;
        if (best_b != 0.0)
            for (size_t i = 0; i < P; ++i) r[i] -= best_b / M * best_phi[i];
        spec.push_back(std::move(best));
    }
    return spec;
}

std::vector<Point> lattice(int Mp, int D) {
    if (Mp < 1) throw DomainError("lattice resolution M' must be >= 1");
    if (D < 1) throw DomainError("lattice dimension must be >= 1");
    const double count = std::pow(Mp + 1.0, D);
    if (count > 1e7) throw DomainError("lattice would have more than 1e7 points");
    std::vector<Point> pts;
    std::vector<int> idx(D, 0);
    while (true) {
        Point p(D);
        for (int j = 0; j < D; ++j) p[j] = static_cast<double>(idx[j]) / Mp;
        pts.push_back(std::move(p));
        int j = D - 1;
        while (j >= 0 && idx[j] == Mp) idx[j--] = 0;
        if (j < 0) break;
        ++idx[j];
    }
    return pts;
}

double hat_exact(std::span<const double> a, int Mp, std::span<const double> x) {
    if (a.size() != x.size()) throw ShapeError("hat: point and centre dimensions differ");
    double h = 1.0;
    for (size_t j = 0; j < a.size(); ++j) h *= std::max(0.0, 1.0 / Mp - std::fabs(x[j] - a[j]));
    return h;
}

long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::vector<std::vector<int>> taylor_indices(int D, double beta) {
    std::vector<std::vector<int>> out;
    const int maxdeg = static_cast<int>(std::ceil(beta)) - 1;  // |alpha| < beta
    for (int deg = 0; deg <= maxdeg; ++deg) {
        std::vector<int> a(D, 0);
        std::function<void(int, int)> rec = [&](int j, int left) {
            if (j == D - 1) {
                a[j] = left;
                out.push_back(a);
                return;
            }
            for (int v = left; v >= 0; --v) {
                a[j] = v;
                rec(j + 1, left - v);
            }
        };
        rec(0, deg);
    }
    return out;
}

namespace {

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

double alpha_factorial(std::span<const int> alpha) {
    double r = 1.0;
    for (int v : alpha) r *= factorial(v);
    return r;
}

// Dense ReLU network under construction.
struct Net {
    int in = 0;
    std::vector<DenseLayer> layers;
    int out() const { return layers.empty() ? in : layers.back().weight.rows; }
    int depth() const { return static_cast<int>(layers.size()); }
};

DenseLayer identity_layer(int n) {
    DenseLayer l{Matrix(n, n), std::vector<double>(n, 0.0)};
    for (int i = 0; i < n; ++i) l.weight(i, i) = 1.0;
    return l;
}

// Appends identity layers; valid because every carried value is nonnegative.
Net pad(Net a, int depth) {
    while (a.depth() < depth) a.layers.push_back(identity_layer(a.out()));
    return a;
}

Net compose(Net a, const Net& b) {
    if (b.in != a.out()) throw ShapeError("network composition: width mismatch");
    a.layers.insert(a.layers.end(), b.layers.begin(), b.layers.end());
    return a;
}

// Layer-wise block diagonal; shared=true feeds every part the same input.
Net stack(const std::vector<Net>& parts, bool shared) {
    const int depth = parts.front().depth();
    Net r;
    r.in = shared ? parts.front().in : 0;
    for (const auto& p : parts) {
        if (p.depth() != depth || depth < 1) throw ShapeError("network stacking: depths differ");
        if (shared && p.in != r.in) throw ShapeError("network stacking: input widths differ");
        if (!shared) r.in += p.in;
    }
    for (int l = 0; l < depth; ++l) {
        int rows = 0, cols = 0;
        for (const auto& p : parts) {
            rows += p.layers[l].weight.rows;
            cols += (shared && l == 0) ? 0 : p.layers[l].weight.cols;
        }
        if (shared && l == 0) cols = r.in;
        DenseLayer L{Matrix(rows, cols), {}};
        int r0 = 0, c0 = 0;
        for (const auto& p : parts) {
            const auto& W = p.layers[l].weight;
            const int off = (shared && l == 0) ? 0 : c0;
            for (int i = 0; i < W.rows; ++i)
                for (int j = 0; j < W.cols; ++j) L.weight(r0 + i, off + j) = W(i, j);
            L.bias.insert(L.bias.end(), p.layers[l].bias.begin(), p.layers[l].bias.end());
            r0 += W.rows;
            c0 += W.cols;
        }
        r.layers.push_back(std::move(L));
    }
    return r;
}

// Rewires input i of the first layer to original input idx[i].
Net gather(Net a, int in, const std::vector<int>& idx) {
    auto& W = a.layers.front().weight;
    Matrix G(W.rows, in);
    for (int r = 0; r < W.rows; ++r)
        for (int i = 0; i < W.cols; ++i) G(r, idx[i]) += W(r, i);
    W = std::move(G);
    a.in = in;
    return a;
}

Net mult_net(int m) {
    if (m < 1) throw DomainError("mult accuracy m must be >= 1");
    const int n = (m + 1) / 2;
    Net r;
    r.in = 2;
    // rows: a_u, b_u, a_v, b_v, E with u=(x+y)/2, v=(x-y+1)/2, E=u+1/4
    r.layers.push_back(DenseLayer{Matrix(5, 2, {0.5, 0.5, 0.5, 0.5, 0.5, -0.5, 0.5, -0.5, 0.5, 0.5}),
                                  {0.0, 0.5, -0.5, 0.0, -0.25}});
    // each level emits q_k = q/2 - (q - c/2)_+ with c = 4^-(k-1); q_k = T^k(u)/4^k
    for (int k = 1; k < n; ++k) {
        const double half_c = 0.5 * std::pow(0.25, k);
        r.layers.push_back(DenseLayer{Matrix(5, 5, {0.5, -1, 0, 0, 0,  //
                                                    0.5, -1, 0, 0, 0,  //
                                                    0, 0, 0.5, -1, 0,  //
                                                    0, 0, 0.5, -1, 0,  //
                                                    -0.5, 1, 0.5, -1, 1}),
                                      {0.0, half_c, 0.0, half_c, 0.0}});
    }
    r.layers.push_back(DenseLayer{Matrix(1, 5, {-0.5, 1, 0.5, -1, 1}), {0.5}});
    // clamp to [0,1]
    r.layers.push_back(DenseLayer{Matrix(1, 1, {-1.0}), {-1.0}});
    r.layers.push_back(DenseLayer{Matrix(1, 1, {-1.0}), {-1.0}});
    return r;
}

// Product of k inputs in [0,1] by a balanced tree of mult networks.
Net mult_tree(int k, int m) {
    Net r;
    r.in = k;
    const int mdepth = mult_net(m).depth();
    int c = k;
    while (c > 1) {
        std::vector<Net> parts;
        for (int i = 0; i + 1 < c; i += 2) parts.push_back(mult_net(m));
        if (c % 2) {
            Net id;
            id.in = 1;
            parts.push_back(pad(id, mdepth));
        }
        r = compose(r, stack(parts, false));
        c = (c + 1) / 2;
    }
    return r;
}

FnnBlock to_block(Net n) { return FnnBlock{std::move(n.layers)}; }

Net hat_net(std::span<const double> a, int Mp, int m) {
    const int D = static_cast<int>(a.size());
    Net h;
    h.in = D;
    DenseLayer l1{Matrix(2 * D, D), std::vector<double>(2 * D)};
    DenseLayer l2{Matrix(D, 2 * D), std::vector<double>(D, -1.0 / Mp)};
    for (int j = 0; j < D; ++j) {
        if (a[j] < 0.0 || a[j] > 1.0) throw DomainError("hat centre must lie in [0,1]^D");
        l1.weight(2 * j, j) = 1.0;
        l1.bias[2 * j] = a[j];
        l1.weight(2 * j + 1, j) = -1.0;
        l1.bias[2 * j + 1] = -a[j];
        l2.weight(j, 2 * j) = -1.0;
        l2.weight(j, 2 * j + 1) = -1.0;
    }
    h.layers = {std::move(l1), std::move(l2)};
    return compose(h, mult_tree(D, m));
}

// Coefficients of P_a in the monomial basis x^gamma.
std::vector<double> monomial_coefficients(const TaylorOracle& o, std::span<const double> a,
                                          const std::vector<std::vector<int>>& idx) {
    const int D = static_cast<int>(a.size());
    std::vector<double> c(idx.size()), d(idx.size(), 0.0);
    for (size_t i = 0; i < idx.size(); ++i) {
        c[i] = o.deriv(a, idx[i]) / alpha_factorial(idx[i]);
        if (!std::isfinite(c[i])) throw DomainError("Taylor oracle returned a non-finite derivative");
    }
    for (size_t g = 0; g < idx.size(); ++g)
        for (size_t i = 0; i < idx.size(); ++i) {
            double term = c[i];
            for (int j = 0; j < D && term != 0.0; ++j) {
                const int aj = idx[i][j], gj = idx[g][j];
                if (gj > aj) {
                    term = 0.0;
                    break;
                }
                term *= static_cast<double>(binomial(aj, gj)) * std::pow(-a[j], aj - gj);
            }
            d[g] += term;
        }
    return d;
}

Net q_net(const TaylorOracle& o, std::span<const double> a, double B, int m) {
    const int D = static_cast<int>(a.size());
    if (!(B > 0.0)) throw DomainError("Taylor scale B must be positive");
    const auto idx = taylor_indices(D, o.beta);
    const auto d = monomial_coefficients(o, a, idx);
    double total = 0.0;
    for (double v : d) total += std::fabs(v);
    if (total > B / 2 * (1 + 1e-12)) {
        std::ostringstream s;
        s << "Taylor coefficients at the lattice point sum to " << total << " > B/2 = " << B / 2
          << "; the normalized combination layer would leave [0,1] or exceed unit weights";
        throw DomainError(s.str());
    }
    std::vector<Net> parts;
    std::vector<double> weights;
    bool used_mult = false;
    for (size_t g = 0; g < idx.size(); ++g) {
        std::vector<int> factors;
        for (int j = 0; j < D; ++j)
            for (int r = 0; r < idx[g][j]; ++r) factors.push_back(j);
        if (factors.empty()) continue;
        Net p;
        if (factors.size() == 1) {
            p.in = 1;
            p.layers.push_back(identity_layer(1));
        } else {
            p = mult_tree(static_cast<int>(factors.size()), m);
            used_mult = true;
        }
        parts.push_back(gather(std::move(p), D, factors));
        weights.push_back(d[g] / B);
    }
    Net q;
    q.in = D;
    if (!parts.empty()) {
        int depth = 0;
        for (const auto& p : parts) depth = std::max(depth, p.depth());
        for (auto& p : parts) p = pad(std::move(p), depth);
        q = stack(parts, true);
    }
    DenseLayer comb{Matrix(1, q.out()), {-(d[0] / B + 0.5)}};
    for (size_t i = 0; i < weights.size(); ++i) comb.weight(0, static_cast<int>(i)) = weights[i];
    q.layers.push_back(std::move(comb));
    if (used_mult) {
        q.layers.push_back(DenseLayer{Matrix(1, 1, {-1.0}), {-1.0}});
        q.layers.push_back(DenseLayer{Matrix(1, 1, {-1.0}), {-1.0}});
    }
    return q;
}

}  // namespace

double taylor_exact(const TaylorOracle& o, std::span<const double> a, std::span<const double> x) {
    if (a.size() != x.size()) throw ShapeError("taylor: point dimensions differ");
    const int D = static_cast<int>(a.size());
    double s = 0.0;
    for (const auto& alpha : taylor_indices(D, o.beta)) {
        double term = o.deriv(a, alpha) / alpha_factorial(alpha);
        for (int j = 0; j < D; ++j) term *= std::pow(x[j] - a[j], alpha[j]);
        s += term;
    }
    return s;
}

FnnBlock mult_network(int m) { return to_block(mult_net(m)); }

FnnBlock hat_network(std::span<const double> a, int Mp, int m) {
    if (Mp < 1) throw DomainError("lattice resolution M' must be >= 1");
    if (m < 1) throw DomainError("mult accuracy m must be >= 1");
    return to_block(hat_net(a, Mp, m));
}

FnnBlock q_network(const TaylorOracle& o, std::span<const double> a, double B, int m) {
    return to_block(q_net(o, a, B, m));
}

HolderBuildParams holder_params(const TaylorOracle& o, int M, int D) {
    if (D < 1) throw DomainError("dimension D must be >= 1");
    if (!(o.beta > 0.0)) throw DomainError("smoothness beta must be positive");
    if (!(o.norm > 0.0)) throw DomainError("Holder norm must be positive");
    if (M < (1 << std::min(D, 30))) throw DomainError("block budget M must be >= 2^D");
    HolderBuildParams p;
    p.D = D;
    p.beta = o.beta;
    p.M = M;
    p.Mp = 1;
    while (std::pow(p.Mp + 2.0, D) <= M) ++p.Mp;
    p.m = static_cast<int>(std::ceil((2.0 + o.beta / D) * std::log2(static_cast<double>(M)) - 1e-9));
    p.m = std::max(p.m, 1);
    p.Lstar = (p.m + 5) * static_cast<int>(std::ceil(std::log2(static_cast<double>(D)) - 1e-12));
    p.B = 2.0 * o.norm;
    return p;
}

double holder_budget(double norm, double beta, int D, int M) {
    return norm * (2.0 * std::pow(3.0, D + 1) + std::pow(2.0, beta)) * std::pow(static_cast<double>(M), -beta / D);
}

HolderFnn holder_fnn(const TaylorOracle& o, int M, int D) {
    HolderFnn out;
    out.params = holder_params(o, M, D);
    const auto& p = out.params;
    // g(y) = f(2y - 1) on [0,1]^D
    TaylorOracle g{[&o](std::span<const double> y, std::span<const int> alpha) {
                       Point x(y.size());
                       for (size_t j = 0; j < y.size(); ++j) x[j] = 2.0 * y[j] - 1.0;
                       int order = 0;
                       for (int v : alpha) order += v;
                       return std::ldexp(o.deriv(x, alpha), order);
                   },
                   o.norm, o.beta};
    Net prelude;
    prelude.in = D;
    DenseLayer pl{Matrix(D, D), std::vector<double>(D, -0.5)};
    for (int j = 0; j < D; ++j) pl.weight(j, j) = 0.5;
    prelude.layers.push_back(std::move(pl));
    const Net mult = mult_net(p.m);
    const double scale = p.B * std::pow(static_cast<double>(p.Mp), D);

    auto& f = out.f;
    f.input_dim = D;
    for (const auto& a : lattice(p.Mp, D)) {
        Net q = q_net(g, a, p.B, p.m);
        Net h = hat_net(a, p.Mp, p.m);
        const int depth = std::max(q.depth(), h.depth());
        Net both = stack({pad(std::move(q), depth), pad(std::move(h), depth)}, true);
        f.blocks.push_back(to_block(compose(compose(prelude, both), mult)));
        f.final_weights.push_back({scale});
    }
    f.final_bias = p.B / 2;
    f.bound_bs = 1.0;
    f.bound_fin = 2.0 * o.norm * M;
    return out;
}

HolderCnn holder_cnn(const TaylorOracle& o, int M, int D, int K, const CompileOptions& opt) {
    HolderCnn out;
    auto hf = holder_fnn(o, M, D);
    out.fnn = std::move(hf.f);
    out.params = hf.params;
    const double Lp = out.fnn.max_depth();
    const double Dp = out.fnn.max_width();
    out.k = 16.0 * Dp * K * std::max(std::pow(static_cast<double>(M), 1.0 / Lp), 1.0);
    out.compiled = compile_fnn_to_cnn(rescale_fnn(out.fnn, out.k), K, opt);
    return out;
}

}  // namespace resconv
