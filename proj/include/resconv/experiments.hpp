#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resconv/train.hpp"

namespace resconv {

struct RatePoint {
    double sweep = 0.0;  // M or N
    std::uint64_t seed = 0;
    double error = 0.0;
    double runtime_s = 0.0;
    double reference_error = 0.0;  // FNN error (approx) or empirical risk (estimation)
    double budget = 0.0;           // explicit bound when one exists, else 0
    long long blocks = 0;
};

struct RateReport {
    std::string kind;
    std::string sweep_name;
    std::vector<RatePoint> points;  // sorted by (sweep, seed)
    std::vector<double> sweep_values;
    std::vector<double> medians;
    double slope = 0.0;
    double predicted = 0.0;
    double runtime_s = 0.0;
    bool diagnostic = false;
    bool budget_ok = true;
    bool exact_ok = true;
    bool monotone = true;  // medians non-increasing (strictly decreasing for estimation)
    std::vector<std::string> notes;
};

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
double median(std::vector<double> v);

struct ApproxRateConfig {
    std::string kind = "holder";  // or "barron"
    std::string fn = "sinsin";
    int D = 2;
    double beta = 2.0;
    std::vector<int> Ms{9, 25, 81};
    std::vector<std::uint64_t> seeds{0};
    int K = 2;
    int grid = 101;          // points per axis for D <= 2
    int samples = 100000;    // Latin-hypercube points for D >= 3
    int candidates = 400;    // ridge candidates per greedy step
    int fit_grid = 31;
};

RateReport approx_rate_experiment(const ApproxRateConfig& cfg);

struct EstRateConfig {
    std::string fn = "sinsin";
    int D = 2;
    double beta = 2.0;
    std::vector<long long> Ns{256, 512, 1024, 2048, 4096};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    double sigma = 0.1;
    // per-block architecture of the trained class
    int C0 = 3;
    int width = 4;
    int depth = 2;
    int K = 2;
    TrainConfig train;  // steps is replaced by epochs * N / batch when epochs > 0
    int epochs = 100;
    double clip = -1.0;  // < 0: probe sup of the target
    int probes = 20000;
    bool grad_check = true;
};

// M blocks of `depth` layers C0 -> width -> ... -> C0 with filter K, zero parameters.
ResNetCnn est_architecture(int D, int M, int C0, int width, int depth, int K, double bound_conv, double bound_fc);

RateReport estimation_rate_experiment(const EstRateConfig& cfg);

// CSV with header sweep_var,seed,error,runtime_s
std::string report_csv(const RateReport& r);

}  // namespace resconv
