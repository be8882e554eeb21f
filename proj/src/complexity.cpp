#include "resconv/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "resconv/parallel.hpp"

namespace resconv {

Growth block_growth(const ArchSummary& a, int m) {
    if (m < 0 || m >= a.M()) throw DomainError("block index out of range");
    const auto& b = a.blocks[m];
    Growth g{1.0, 1.0};
    for (int l = 0; l < b.depth(); ++l) {
        const double f = static_cast<double>(b.channels[l]) * b.filters[l] * a.B_conv;
        g.rho *= f;
        g.rho_plus *= std::max(1.0, f);
    }
    return g;
}

double varrho(const ArchSummary& a) {
    double v = 1.0;
    for (int m = 0; m < a.M(); ++m) v *= 1.0 + block_growth(a, m).rho;
    return v;
}

double varrho_plus(const ArchSummary& a) {
    double v = 1.0;
    for (int m = 0; m < a.M(); ++m) v += a.blocks[m].depth() * block_growth(a, m).rho_plus;
    return v;
}

double lambda1(const ArchSummary& a) {
    return (2.0 * a.M() + 3.0) * a.C0 * a.D * std::max(1.0, a.B_fc) * std::max(1.0, a.B_conv) * varrho(a) *
           varrho_plus(a);
}

std::int64_t lambda2(const ArchSummary& a) {
    std::int64_t n = 0;
    for (const auto& b : a.blocks)
        for (int l = 0; l < b.depth(); ++l)
            n += static_cast<std::int64_t>(b.channels[l]) * b.channels[l + 1] * b.filters[l] + b.channels[l + 1];
    return n + static_cast<std::int64_t>(a.C0) * a.D + 1;
}

double covering_log(const ArchSummary& a, double eps) {
    if (!(eps > 0.0)) throw DomainError("covering_log requires eps > 0");
    const double B = std::max(a.B_conv, a.B_fc);
    double v = static_cast<double>(lambda2(a)) * std::log(2.0 * B * lambda1(a) / eps);
    if (a.masked) v += static_cast<double>(a.C0) * a.M() * a.L * std::log(2.0);
    return v;
}

ComplexityReport complexity_report(const ArchSummary& a, double eps) {
    ComplexityReport r;
    for (int m = 0; m < a.M(); ++m) {
        auto g = block_growth(a, m);
        r.rho.push_back(g.rho);
        r.rho_plus.push_back(g.rho_plus);
    }
    r.varrho = varrho(a);
    r.varrho_plus = varrho_plus(a);
    r.lambda1 = lambda1(a);
    r.lambda2 = lambda2(a);
    r.eps = eps;
    r.covering_log = covering_log(a, eps);
    r.B = std::max(a.B_conv, a.B_fc);
    return r;
}

double estimation_bound(const ArchSummary& a, double approx_err_sq, long long N, double f_inf, double sigma,
                        double C0) {
    if (N < 1) throw DomainError("sample size N must be >= 1");
    if (!(sigma > 0.0)) throw DomainError("noise level must be positive");
    if (approx_err_sq < 0.0 || f_inf < 0.0) throw DomainError("approximation error and f_inf must be nonnegative");
    const double logcov = covering_log(a, 1.0 / static_cast<double>(N));
    if (logcov < std::log(3.0)) throw DomainError("covering number at 1/N is below 3");
    const double Ft = std::max(f_inf / sigma, 0.5);
    return C0 * (approx_err_sq + Ft * Ft / static_cast<double>(N) * logcov);
}

LipschitzReport lipschitz_check(const ResNetCnn& net, double eps, int trials, int probes, std::uint64_t seed) {
    if (eps < 0.0) throw DomainError("eps must be nonnegative");
    LipschitzReport rep;
    rep.eps = eps;
    rep.trials = trials;
    rep.probes = probes;
    rep.lambda1 = lambda1(arch_of(net));
    rep.bound = rep.lambda1 * eps;
    std::vector<double> diffs(trials, 0.0);
    std::vector<int> bad(trials, 0);
    parallel_for(trials, [&](int t) {
        std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (t + 1));
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        auto perturb = [&](double& p, double B) { p = std::clamp(p + eps * U(rng), -B, B); };
        ResNetCnn q = net;
        for (auto& b : q.blocks)
            for (auto& l : b.layers) {
                for (double& v : l.filter.w) perturb(v, net.bound_conv);
                for (double& v : l.bias) perturb(v, net.bound_conv);
            }
        for (double& v : q.readout.weight.a) perturb(v, net.bound_fc);
        for (double& v : q.readout.bias) perturb(v, net.bound_fc);
        std::vector<double> x(net.input_dim);
        for (int p = 0; p < probes; ++p) {
            for (double& v : x) v = U(rng);
            const double d = std::fabs(cnn_eval(net, x) - cnn_eval(q, x));
            diffs[t] = std::max(diffs[t], d);
            if (d > rep.bound) ++bad[t];
        }
    });
    for (int t = 0; t < trials; ++t) {
        rep.max_diff = std::max(rep.max_diff, diffs[t]);
        rep.violations += bad[t];
    }
    return rep;
}

Rational::Rational(long long n, long long d) {
    if (d == 0) throw DomainError("rational with zero denominator");
    if (d < 0) n = -n, d = -d;
    const long long g = std::gcd(n < 0 ? -n : n, d);
    num = n / (g ? g : 1);
    den = d / (g ? g : 1);
}

Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
Rational operator/(Rational a, Rational b) { return {a.num * b.den, a.den * b.num}; }

RateChoice rate_balance(double gamma1, double gamma2, long long N) {
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw DomainError("rate exponents must be positive");
    if (N < 1) throw DomainError("N must be >= 1");
    const double alpha = 1.0 / (2.0 * gamma1 + gamma2);
    RateChoice r;
    // nudge keeps exact powers (e.g. 1000^(1/3)) from rounding down
    r.M = static_cast<long long>(std::floor(std::exp(alpha * std::log(static_cast<double>(N))) * (1.0 + 1e-12)));
    r.exponent = -2.0 * gamma1 * alpha;
    return r;
}

Rational rate_exponent(Rational gamma1, Rational gamma2) {
    if (gamma1.num <= 0 || gamma2.num <= 0) throw DomainError("rate exponents must be positive");
    const Rational two_g1 = Rational(2) * gamma1;
    return -(two_g1 / (two_g1 + gamma2));
}

}  // namespace resconv
