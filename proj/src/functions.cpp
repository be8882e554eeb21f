#include "resconv/functions.hpp"

#include <cmath>
#include <numbers>

namespace resconv {

namespace {

enum Kind { One = 0, Ident = 1, Square = 2, SinPi = 3 };

// k-th derivative of a one-dimensional factor.
double factor_deriv(int kind, int k, double t) {
    const double pi = std::numbers::pi;
    switch (kind) {
        case One: return k == 0 ? 1.0 : 0.0;
        case Ident: return k == 0 ? t : (k == 1 ? 1.0 : 0.0);
        case Square: return k == 0 ? t * t : (k == 1 ? 2 * t : (k == 2 ? 2.0 : 0.0));
        default: return std::pow(pi, k) * std::sin(pi * t + k * pi / 2);
    }
}

// sup over [-1,1] of |k-th derivative|.
double factor_sup(int kind, int k) {
    switch (kind) {
        case One: return k == 0 ? 1.0 : 0.0;
        case Ident: return k <= 1 ? 1.0 : 0.0;
        case Square: return k == 0 ? 1.0 : (k <= 2 ? 2.0 : 0.0);
        default: return std::pow(std::numbers::pi, k);
    }
}

double separable_sup(const std::vector<int>& kinds, const std::vector<int>& alpha) {
    double s = 1.0;
    for (size_t j = 0; j < kinds.size(); ++j) s *= factor_sup(kinds[j], alpha[j]);
    return s;
}

// Upper bound on the Holder norm: sup norms below the top order, then the
// top-order Holder seminorm bounded by min(2A, Lip*r)/r^s maximized over r.
double holder_norm(const std::vector<int>& kinds, double coef, double beta) {
    const int D = static_cast<int>(kinds.size());
    const int top = static_cast<int>(std::floor(beta));
    const double s = beta - top;
    double total = 0.0;
    std::vector<int> alpha(D, 0);
    std::function<void(int, int, int)> rec = [&](int j, int left, int deg) {
        if (j == D - 1) {
            alpha[j] = left;
            const double A = std::fabs(coef) * separable_sup(kinds, alpha);
            if (deg < top) {
                total += A;
            } else if (s == 0.0) {
                total += 2 * A;
            } else {
                double lip2 = 0.0;
                for (int i = 0; i < D; ++i) {
                    auto up = alpha;
                    ++up[i];
                    const double g = std::fabs(coef) * separable_sup(kinds, up);
                    lip2 += g * g;
                }
                const double lip = std::sqrt(lip2);
                total += lip == 0.0 ? 0.0 : std::pow(2 * A, 1 - s) * std::pow(lip, s);
            }
            return;
        }
        for (int v = left; v >= 0; --v) {
            alpha[j] = v;
            rec(j + 1, left - v, deg);
        }
    };
    for (int deg = 0; deg <= top; ++deg) rec(0, deg, deg);
    return total;
}

NamedFunction separable(const std::string& name, std::vector<int> kinds, double coef) {
    NamedFunction nf;
    nf.name = name;
    nf.D = static_cast<int>(kinds.size());
    nf.kinds = kinds;
    nf.coef = coef;
    nf.has_oracle = true;
    nf.f = [kinds, coef](std::span<const double> x) {
        double v = coef;
        for (size_t j = 0; j < kinds.size(); ++j) v *= factor_deriv(kinds[j], 0, x[j]);
        return v;
    };
    nf.sup = std::fabs(coef) * separable_sup(kinds, std::vector<int>(kinds.size(), 0));
    return nf;
}

}  // namespace

TaylorOracle NamedFunction::oracle(double beta) const {
    if (!has_oracle) throw DomainError("function '" + name + "' has no derivative oracle");
    TaylorOracle o;
    o.beta = beta;
    o.norm = holder_norm(kinds, coef, beta);
    auto ks = kinds;
    const double c = coef;
    o.deriv = [ks, c](std::span<const double> a, std::span<const int> alpha) {
        if (a.size() != ks.size() || alpha.size() != ks.size()) throw ShapeError("oracle: dimension mismatch");
        double v = c;
        for (size_t j = 0; j < ks.size(); ++j) v *= factor_deriv(ks[j], alpha[j], a[j]);
        return v;
    };
    return o;
}

NamedFunction named_function(const std::string& name, int D) {
    if (D < 1) throw DomainError("dimension must be >= 1");
    auto first = [&](int k) {
        std::vector<int> v(D, One);
        v[0] = k;
        return v;
    };
    if (name == "zero") return separable(name, std::vector<int>(D, One), 0.0);
    if (name == "const") return separable(name, std::vector<int>(D, One), 0.5);
    if (name == "x1") return separable(name, first(Ident), 1.0);
    if (name == "square1") return separable(name, first(Square), 1.0);
    if (name == "sin1") return separable(name, first(SinPi), 1.0);
    if (name == "sinsin") return separable(name, std::vector<int>(D, SinPi), 1.0);

    NamedFunction nf;
    nf.name = name;
    nf.D = D;
    const double rootD = std::sqrt(static_cast<double>(D));
    if (name == "barron_cos") {
        // f(0) = 0 and grad f(0) = 0
        nf.f = [rootD](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v;
            return 1.0 - std::cos(s / rootD);
        };
        nf.sup = 1.0 - std::cos(rootD);
        return nf;
    }
    if (name == "barron_gauss") {
        nf.f = [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return 1.0 - std::exp(-s / 2);
        };
        nf.sup = 1.0 - std::exp(-D / 2.0);
        return nf;
    }
    if (name == "ridge") {
        // a single admissible ridge: (0.6 x1 - 0.4 x2 - 0.1)_+ (x2 term dropped when D = 1)
        nf.f = [D](std::span<const double> x) {
            const double z = (D == 1 ? x[0] : 0.6 * x[0] - 0.4 * x[1]) - 0.1;
            return z > 0 ? z : 0.0;
        };
        nf.sup = 0.9;
        return nf;
    }
    throw DomainError("unknown function '" + name + "'");
}

std::vector<std::string> function_names() {
    return {"zero", "const", "x1", "square1", "sin1", "sinsin", "barron_cos", "barron_gauss", "ridge"};
}

}  // namespace resconv
