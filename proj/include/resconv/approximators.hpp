#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "resconv/compiler.hpp"
#include "resconv/fnn.hpp"

namespace resconv {

using Point = std::vector<double>;
using ScalarFn = std::function<double(std::span<const double>)>;

struct Ridge {
    Point a;
    double b = 0.0;
    double t = 0.0;
};
using RidgeSpec = std::vector<Ridge>;

void validate_ridges(const RidgeSpec& r);

// (1/M) sum_m b_m (a_m.x - t_m)_+ as M width-1 blocks, B_bs = 1/M, B_fin = 1.
BlockSparseFnn barron_fnn(const RidgeSpec& r);

// Greedy matching pursuit over random admissible ridges.
RidgeSpec fit_barron_ridges(const ScalarFn& f, int D, int M, int candidates, const std::vector<Point>& grid,
                            std::uint64_t seed);

std::vector<Point> lattice(int Mp, int D);
double hat_exact(std::span<const double> a, int Mp, std::span<const double> x);

struct TaylorOracle {
    // derivative of multi-index alpha at point a
    std::function<double(std::span<const double>, std::span<const int>)> deriv;
    double norm = 0.0;  // Holder norm
    double beta = 1.0;
};

// Multi-indices with |alpha| < beta, graded then lexicographic.
std::vector<std::vector<int>> taylor_indices(int D, double beta);
double taylor_exact(const TaylorOracle& o, std::span<const double> a, std::span<const double> x);
long long binomial(int n, int k);

// Product network on [0,1]^2 with error <= 2^-(m+1).
FnnBlock mult_network(int m);
FnnBlock hat_network(std::span<const double> a, int Mp, int m);
// Approximates P_a/B + 1/2 on [0,1]^D; the oracle is read in [0,1]^D coordinates.
FnnBlock q_network(const TaylorOracle& o, std::span<const double> a, double B, int m);

struct HolderBuildParams {
    int D = 0;
    double beta = 0.0;
    int M = 0;
    int Mp = 0;
    int m = 0;
    int Lstar = 0;
    double B = 0.0;
};

HolderBuildParams holder_params(const TaylorOracle& o, int M, int D);
double holder_budget(double norm, double beta, int D, int M);

struct HolderFnn {
    BlockSparseFnn f;
    HolderBuildParams params;
};

// Oracle derivatives are taken in the [-1,1]^D coordinates of f.
HolderFnn holder_fnn(const TaylorOracle& o, int M, int D);

struct HolderCnn {
    Compiled compiled;
    BlockSparseFnn fnn;  // before rescaling
    HolderBuildParams params;
    double k = 1.0;
};

HolderCnn holder_cnn(const TaylorOracle& o, int M, int D, int K, const CompileOptions& opt = {});

}  // namespace resconv
