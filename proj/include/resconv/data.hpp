#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "resconv/approximators.hpp"

namespace resconv {

struct RegressionDataset {
    int D = 0;
    std::vector<Point> inputs;  // uniform on [-1,1]^D
    std::vector<double> targets;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string fn_name;

    int size() const { return static_cast<int>(inputs.size()); }
};

RegressionDataset gen_data(const ScalarFn& f, int D, int N, double sigma, std::uint64_t seed,
                           const std::string& name = "");

using Predictor = std::function<double(std::span<const double>)>;

// (1/N) sum (y_n - f(x_n))^2
double empirical_risk(const Predictor& f, const RegressionDataset& data);

struct L2Estimate {
    double value = 0.0;  // Monte-Carlo mean of (f - target)^2 under uniform inputs
    double std_error = 0.0;
    int probes = 0;
};

L2Estimate l2_error(const Predictor& f, const ScalarFn& target, int D, int probes, std::uint64_t seed);

// Evaluation points on [lo,hi]^D: a uniform grid with n points per axis when
// D <= 2, otherwise a Latin-hypercube sample of `samples` points.
std::vector<Point> eval_points(int D, int n, int samples, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

// max |f| over eval_points; used as the default clip level.
double probe_sup(const ScalarFn& f, int D, std::uint64_t seed = 0);

}  // namespace resconv
