#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "resconv/cnn.hpp"

namespace resconv {

struct Growth {
    double rho = 0.0;
    double rho_plus = 0.0;
};

Growth block_growth(const ArchSummary& a, int m);
double varrho(const ArchSummary& a);
double varrho_plus(const ArchSummary& a);
double lambda1(const ArchSummary& a);
std::int64_t lambda2(const ArchSummary& a);
double covering_log(const ArchSummary& a, double eps);

struct ComplexityReport {
    std::vector<double> rho, rho_plus;
    double varrho = 0.0, varrho_plus = 0.0;
    double lambda1 = 0.0;
    std::int64_t lambda2 = 0;
    double eps = 0.0;
    double covering_log = 0.0;
    double B = 0.0;
};

ComplexityReport complexity_report(const ArchSummary& a, double eps);

// C0 * (approx + Ft^2/N * log covering number at 1/N), Ft = (f_inf/sigma) v 1/2.
// Requires the covering number at 1/N to be at least 3.
double estimation_bound(const ArchSummary& a, double approx_err_sq, long long N, double f_inf, double sigma,
                        double C0 = 1.0);

struct LipschitzReport {
    double eps = 0.0;
    double lambda1 = 0.0;
    double bound = 0.0;
    double max_diff = 0.0;
    int violations = 0;
    int trials = 0;
    int probes = 0;
    bool passed() const { return violations == 0; }
};

// Perturbs every parameter by at most eps, clamped to the declared class
// bounds, and compares outputs on random probes against Lambda1*eps.
LipschitzReport lipschitz_check(const ResNetCnn& net, double eps, int trials, int probes, std::uint64_t seed);

struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d = 1);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend Rational operator+(Rational a, Rational b);
    friend Rational operator*(Rational a, Rational b);
    friend Rational operator/(Rational a, Rational b);
    friend Rational operator-(Rational a) { return {-a.num, a.den}; }
    friend bool operator==(const Rational&, const Rational&) = default;
};

struct RateChoice {
    long long M = 0;
    double exponent = 0.0;
};

RateChoice rate_balance(double gamma1, double gamma2, long long N);
// -2 g1 / (2 g1 + g2), exactly.
Rational rate_exponent(Rational gamma1, Rational gamma2);

}  // namespace resconv
