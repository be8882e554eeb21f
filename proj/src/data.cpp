#include "resconv/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "resconv/error.hpp"

namespace resconv {

RegressionDataset gen_data(const ScalarFn& f, int D, int N, double sigma, std::uint64_t seed,
                           const std::string& name) {
    if (N < 1) throw DomainError("N must be >= 1");
    if (D < 1) throw DomainError("D must be >= 1");
    if (!(sigma >= 0.0)) throw DomainError("noise level must be >= 0");
    RegressionDataset d;
    d.D = D;
    d.sigma = sigma;
    d.seed = seed;
    d.fn_name = name;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    d.inputs.reserve(N);
    d.targets.reserve(N);
    for (int n = 0; n < N; ++n) {
        Point x(D);
        for (double& v : x) v = U(rng);
        const double xi = noise(rng);
        d.targets.push_back(f(x) + sigma * xi);
        d.inputs.push_back(std::move(x));
    }
    return d;
}

double empirical_risk(const Predictor& f, const RegressionDataset& data) {
    if (data.size() == 0) throw DomainError("empty dataset");
    double s = 0.0;
    for (int n = 0; n < data.size(); ++n) {
        const double r = data.targets[n] - f(data.inputs[n]);
        s += r * r;
    }
    return s / data.size();
}

L2Estimate l2_error(const Predictor& f, const ScalarFn& target, int D, int probes, std::uint64_t seed) {
    if (probes < 2) throw DomainError("l2_error needs at least 2 probes");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double mean = 0.0, m2 = 0.0;
    Point x(D);
    for (int n = 0; n < probes; ++n) {
        for (double& v : x) v = U(rng);
        const double e = f(x) - target(x);
        const double v = e * e;
        const double delta = v - mean;
        mean += delta / (n + 1);
        m2 += delta * (v - mean);
    }
    L2Estimate out;
    out.value = mean;
    out.probes = probes;
    out.std_error = std::sqrt(m2 / (probes - 1) / probes);
    return out;
}

std::vector<Point> eval_points(int D, int n, int samples, std::uint64_t seed, double lo, double hi) {
    if (D < 1) throw DomainError("D must be >= 1");
    std::vector<Point> pts;
    if (D <= 2) {
        if (n < 2) throw DomainError("grid needs at least 2 points per axis");
        std::vector<int> idx(D, 0);
        while (true) {
            Point p(D);
            for (int j = 0; j < D; ++j) p[j] = lo + (hi - lo) * idx[j] / (n - 1);
            pts.push_back(std::move(p));
            int j = D - 1;
            while (j >= 0 && idx[j] == n - 1) idx[j--] = 0;
            if (j < 0) break;
            ++idx[j];
        }
        return pts;
    }
    if (samples < 1) throw DomainError("sample count must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    pts.assign(samples, Point(D));
    std::vector<int> perm(samples);
    for (int j = 0; j < D; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int s = 0; s < samples; ++s) pts[s][j] = lo + (hi - lo) * (perm[s] + U(rng)) / samples;
    }
    return pts;
}

double probe_sup(const ScalarFn& f, int D, std::uint64_t seed) {
    double m = 0.0;
    for (const auto& p : eval_points(D, D == 1 ? 10001 : 101, 100000, seed)) m = std::max(m, std::fabs(f(p)));
    return m;
}

}  // namespace resconv
