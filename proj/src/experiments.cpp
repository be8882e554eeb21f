#include "resconv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "resconv/complexity.hpp"
#include "resconv/error.hpp"
#include "resconv/functions.hpp"
#include "resconv/parallel.hpp"

namespace resconv {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void summarize(RateReport& r) {
    std::sort(r.points.begin(), r.points.end(), [](const RatePoint& a, const RatePoint& b) {
        return a.sweep != b.sweep ? a.sweep < b.sweep : a.seed < b.seed;
    });
    r.sweep_values.clear();
    r.medians.clear();
    for (size_t i = 0; i < r.points.size();) {
        size_t j = i;
        std::vector<double> e;
        while (j < r.points.size() && r.points[j].sweep == r.points[i].sweep) e.push_back(r.points[j++].error);
        r.sweep_values.push_back(r.points[i].sweep);
        r.medians.push_back(median(e));
        i = j;
    }
    bool positive = r.sweep_values.size() >= 2;
    for (double m : r.medians) positive = positive && m > 0.0;
    r.slope = positive ? loglog_slope(r.sweep_values, r.medians) : std::nan("");
    if (!positive) r.notes.push_back("slope undefined: need >= 2 sweep values with positive medians");
}

}  // namespace

double median(std::vector<double> v) {
    if (v.empty()) throw DomainError("median of empty set");
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs >= 2 paired values");
    double mx = 0, my = 0;
    const double n = static_cast<double>(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw DomainError("log-log fit needs positive values");
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw DomainError("slope fit needs distinct sweep values");
    return sxy / sxx;
}

RateReport approx_rate_experiment(const ApproxRateConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.kind != "holder" && cfg.kind != "barron") throw DomainError("approximation kind must be holder or barron");
    if (cfg.Ms.empty() || cfg.seeds.empty()) throw DomainError("empty M grid or seed list");
    const auto target = named_function(cfg.fn, cfg.D);
    const int K = std::min(cfg.K, cfg.D);
    if (cfg.kind == "holder" && !target.has_oracle)
        throw DomainError("function '" + cfg.fn + "' has no derivative oracle for the Holder construction");
    const auto pts = eval_points(cfg.D, cfg.D == 1 ? cfg.grid * cfg.grid : cfg.grid, cfg.samples, 7);
    const auto fit_pts = eval_points(cfg.D, cfg.fit_grid, 2000, 11);

    RateReport r;
    r.kind = cfg.kind;
    r.sweep_name = "M";
    r.predicted = cfg.kind == "holder" ? -cfg.beta / cfg.D : -(0.5 + 1.0 / cfg.D);
    std::vector<std::pair<int, std::uint64_t>> jobs;
    for (int M : cfg.Ms)
        for (auto s : cfg.kind == "holder" ? std::vector<std::uint64_t>{cfg.seeds.front()} : cfg.seeds)
            jobs.emplace_back(M, s);
    r.points.resize(jobs.size());
    std::vector<char> exact(jobs.size(), 1);
    parallel_for(static_cast<int>(jobs.size()), [&](int j) {
        const auto ts = std::chrono::steady_clock::now();
        const auto [M, seed] = jobs[j];
        BlockSparseFnn f;
        ResNetCnn net;
        RatePoint p;
        if (cfg.kind == "holder") {
            auto o = target.oracle(cfg.beta);
            auto h = holder_cnn(o, M, cfg.D, K, {false});
            f = std::move(h.fnn);
            net = std::move(h.compiled.net);
            p.budget = holder_budget(o.norm, cfg.beta, cfg.D, M);
        } else {
            f = barron_fnn(fit_barron_ridges(target.f, cfg.D, M, cfg.candidates, fit_pts, seed));
            net = compile_fnn_to_cnn(f, K, {false}).net;
        }
        double err = 0.0, ferr = 0.0;
        for (const auto& x : pts) {
            const double fv = fnn_eval(f, x), cv = cnn_eval(net, x), t = target.f(x);
            err = std::max(err, std::fabs(cv - t));
            ferr = std::max(ferr, std::fabs(fv - t));
            if (std::fabs(cv - fv) > 1e-9 * (1.0 + std::fabs(fv))) exact[j] = 0;
        }
        p.sweep = M;
        p.seed = seed;
        p.error = err;
        p.reference_error = ferr;
        p.blocks = static_cast<long long>(f.blocks.size());
        p.runtime_s = seconds_since(ts);
        r.points[j] = p;
    });
    for (size_t j = 0; j < jobs.size(); ++j) {
        r.exact_ok = r.exact_ok && exact[j];
        if (cfg.kind == "holder" && r.points[j].error > r.points[j].budget) r.budget_ok = false;
    }
    summarize(r);
    for (size_t i = 1; i < r.medians.size(); ++i)
        if (r.medians[i] > r.medians[i - 1]) r.monotone = false;
    if (cfg.kind == "barron") {
        r.diagnostic = true;
        r.notes.push_back("greedy ridge fit is a heuristic; slope is diagnostic");
    }
    r.notes.push_back("error is the max over " + std::to_string(pts.size()) + " evaluation points");
    r.runtime_s = seconds_since(t0);
    return r;
}

ResNetCnn est_architecture(int D, int M, int C0, int width, int depth, int K, double bound_conv, double bound_fc) {
    if (D < 1 || M < 0 || C0 < 1 || width < 1 || depth < 1 || K < 1 || K > D)
        throw DomainError("invalid estimation architecture");
    ResNetCnn net;
    net.input_dim = D;
    net.channels = C0;
    net.bound_conv = bound_conv;
    net.bound_fc = bound_fc;
    for (int m = 0; m < M; ++m) {
        ResidualBlock b;
        int prev = C0;
        for (int l = 0; l < depth; ++l) {
            const int c = l == depth - 1 ? C0 : width;
            b.layers.push_back({ConvFilter(K, c, prev), std::vector<double>(c, 0.0), Activation::ReLU});
            prev = c;
        }
        b.set_standard_activations();
        net.blocks.push_back(std::move(b));
    }
    net.readout.weight = Matrix(1, D * C0);
    net.readout.bias = {0.0};
    return net;
}

RateReport estimation_rate_experiment(const EstRateConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.Ns.empty() || cfg.seeds.empty()) throw DomainError("empty N grid or seed list");
    const auto target = named_function(cfg.fn, cfg.D);
    const double F = cfg.clip >= 0.0 ? cfg.clip : probe_sup(target.f, cfg.D);
    const int K = std::min(cfg.K, cfg.D);

    RateReport r;
    r.kind = "estimation";
    r.sweep_name = "N";
    r.diagnostic = true;
    r.predicted = -2.0 * cfg.beta / (2.0 * cfg.beta + cfg.D);
    r.notes.push_back("clipped ERM approximated by projected " + std::string(cfg.train.adam ? "Adam" : "SGD") +
                      "; results are diagnostic");
    r.notes.push_back("clip level F = " + std::to_string(F));

    if (cfg.grad_check) {
        const long long M = rate_balance(cfg.beta / cfg.D, 1.0, cfg.Ns.front()).M;
        auto net = est_architecture(cfg.D, static_cast<int>(std::max(1LL, std::min(M, 3LL))), cfg.C0, cfg.width,
                                    cfg.depth, K, cfg.train.bound_conv, cfg.train.bound_fc);
        init_in_class(net, cfg.train.bound_conv, cfg.train.bound_fc, 99);
        auto data = gen_data(target.f, cfg.D, 64, cfg.sigma, 98, cfg.fn);
        auto gc = gradient_check(net, data, std::max(F, 1e3), 1e-5, 97);
        if (!gc.passed()) throw NumericError("gradient check failed: max relative error " +
                                             std::to_string(gc.max_rel_error));
        r.notes.push_back("gradient check passed on " + std::to_string(gc.checked) + " parameters");
    }

    std::vector<std::pair<long long, std::uint64_t>> jobs;
    for (long long N : cfg.Ns)
        for (auto s : cfg.seeds) jobs.emplace_back(N, s);
    r.points.resize(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), [&](int j) {
        const auto ts = std::chrono::steady_clock::now();
        const auto [N, seed] = jobs[j];
        const long long M = std::max(1LL, rate_balance(cfg.beta / cfg.D, 1.0, N).M);
        auto net = est_architecture(cfg.D, static_cast<int>(M), cfg.C0, cfg.width, cfg.depth, K,
                                    cfg.train.bound_conv, cfg.train.bound_fc);
        init_in_class(net, cfg.train.bound_conv, cfg.train.bound_fc, seed * 7919 + 1);
        auto data = gen_data(target.f, cfg.D, static_cast<int>(N), cfg.sigma, seed * 104729 + N, cfg.fn);
        TrainConfig tc = cfg.train;
        tc.clip = F;
        tc.seed = seed;
        if (cfg.epochs > 0) tc.steps = static_cast<int>(cfg.epochs * ((N + tc.batch - 1) / tc.batch));
        auto res = erm_train(net, data, tc);
        const auto& trained = res.net;
        auto pred = [&trained, F](std::span<const double> x) { return clip_output(cnn_eval(trained, x), F); };
        RatePoint p;
        p.sweep = static_cast<double>(N);
        p.seed = seed;
        p.error = l2_error(pred, target.f, cfg.D, cfg.probes, seed + 31337).value;
        p.reference_error = res.final_risk;
        p.blocks = M;
        p.runtime_s = seconds_since(ts);
        r.points[j] = p;
    });
    summarize(r);
    for (size_t i = 1; i < r.medians.size(); ++i)
        if (!(r.medians[i] < r.medians[i - 1])) r.monotone = false;
    r.runtime_s = seconds_since(t0);
    return r;
}

std::string report_csv(const RateReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "sweep_var,seed,error,runtime_s\n";
    for (const auto& p : r.points) os << p.sweep << ',' << p.seed << ',' << p.error << ',' << p.runtime_s << '\n';
    return os.str();
}

}  // namespace resconv
