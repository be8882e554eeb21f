#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "resconv/approximators.hpp"
#include "resconv/compiler.hpp"
#include "resconv/complexity.hpp"
#include "resconv/experiments.hpp"
#include "resconv/functions.hpp"
#include "resconv/parallel.hpp"
#include "resconv/random.hpp"
#include "resconv/serialize.hpp"

using namespace resconv;

namespace {

// Exit codes: 0 ok, 1 a checked property failed, 2 usage or input error.
constexpr int kFailed = 1;
constexpr int kError = 2;

void save(const std::string& path, const json& j) {
    if (!path.empty()) write_text_file(path, j.dump(2) + "\n");
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if constexpr (std::is_same_v<T, double>)
            out.push_back(std::stod(item));
        else
            out.push_back(static_cast<T>(std::stoll(item)));
    }
    if (out.empty()) throw DomainError("empty list '" + s + "'");
    return out;
}

std::string cert_path_for(const std::string& out) {
    const auto dot = out.rfind(".json");
    return (dot == std::string::npos ? out : out.substr(0, dot)) + ".cert.json";
}

void print_summary(const RateReport& r) {
    std::printf("%s rate over %s (%s)\n", r.kind.c_str(), r.sweep_name.c_str(), r.diagnostic ? "diagnostic" : "checked");
    for (size_t i = 0; i < r.sweep_values.size(); ++i)
        std::printf("  %s=%-8g median error %.6g\n", r.sweep_name.c_str(), r.sweep_values[i], r.medians[i]);
    std::printf("  slope %.4f, predicted %.4f\n", r.slope, r.predicted);
    for (const auto& n : r.notes) std::printf("  note: %s\n", n.c_str());
    std::printf("  runtime %.2f s\n", r.runtime_s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compile block-sparse ReLU networks into residual CNNs and measure their complexity and rates"};
    app.require_subcommand(1);
    int status = 0;

    // compile
    auto* compile = app.add_subcommand("compile", "compile an FNN JSON model into a CNN JSON model");
    std::string c_in, c_out, c_cert;
    int c_K = 2, c_L = 0;
    bool c_hetero = false;
    compile->add_option("--in", c_in, "input FNN model")->required()->check(CLI::ExistingFile);
    compile->add_option("--out", c_out, "output CNN model")->required();
    compile->add_option("--filter-size", c_K, "filter size K")->required()->check(CLI::PositiveNumber);
    compile->add_option("--constant-depth", c_L, "split blocks to depth <= L with masked identities");
    compile->add_option("--cert", c_cert, "certificate path (default <out>.cert.json)");
    compile->add_flag("--per-layer-channels", c_hetero, "keep per-layer channel counts instead of a uniform trunk");
    compile->callback([&] {
        const auto f = fnn_from_json(read_json_file(c_in));
        const CompileOptions opt{!c_hetero};
        const auto c = c_L > 0 ? compile_constant_depth(f, c_L, c_K, opt) : compile_fnn_to_cnn(f, c_K, opt);
        save(c_out, to_json(c.net));
        save(c_cert.empty() ? cert_path_for(c_out) : c_cert, to_json(c.cert));
        const auto v = c.cert.violations();
        std::printf("compiled %zu blocks, trunk channels %d, L0 %d, conv bound %.6g, fc bound %.6g\n",
                    c.net.blocks.size(), c.net.channels, c.cert.L0, c.net.bound_conv, c.net.bound_fc);
        for (const auto& s : v) std::printf("  violation: %s\n", s.c_str());
        std::printf("certificate %s\n", v.empty() ? "sound" : "has violations");
        if (!v.empty()) status = kFailed;
    });

    // verify
    auto* verify = app.add_subcommand("verify", "exactness sweep: compiled CNN against its FNN");
    std::string v_in, v_cnn;
    int v_K = 2, v_trials = 50, v_points = 100, v_L = 0;
    std::uint64_t v_seed = 0;
    double v_tol = 1e-9;
    verify->add_option("--in", v_in, "FNN model (default: random models)");
    verify->add_option("--cnn", v_cnn, "compiled CNN to check against --in (default: compile here)");
    verify->add_option("--filter-size", v_K, "filter size K for random models or compilation");
    verify->add_option("--constant-depth", v_L, "also divide blocks to depth <= L");
    verify->add_option("--trials", v_trials, "random models");
    verify->add_option("--points", v_points, "probe points per model");
    verify->add_option("--seed", v_seed);
    verify->add_option("--tol", v_tol, "relative tolerance");
    verify->callback([&] {
        Rng rng(v_seed);
        double worst = 0.0;
        int unsound = 0, models = 0;
        auto check = [&](const BlockSparseFnn& f, const ResNetCnn& net) {
            ++models;
            for (int p = 0; p < v_points; ++p) {
                const auto x = random_point(f.input_dim, rng);
                const double a = fnn_eval(f, x), b = cnn_eval(net, x);
                worst = std::max(worst, std::fabs(a - b) / (1.0 + std::fabs(a)));
            }
        };
        if (!v_in.empty()) {
            const auto f = fnn_from_json(read_json_file(v_in));
            if (!v_cnn.empty()) {
                check(f, cnn_from_json(read_json_file(v_cnn)));
            } else {
                const auto c = v_L > 0 ? compile_constant_depth(f, v_L, v_K) : compile_fnn_to_cnn(f, v_K);
                unsound += !c.cert.sound();
                check(f, c.net);
            }
        } else {
            std::uniform_int_distribution<int> Dd(2, 8), Md(1, 6);
            std::uniform_real_distribution<double> Bd(0.1, 2.0);
            for (int t = 0; t < v_trials; ++t) {
                FnnShape s;
                s.D = Dd(rng);
                s.M = Md(rng);
                s.bound_bs = Bd(rng);
                s.bound_fin = Bd(rng);
                const auto f = random_fnn(s, rng);
                const int K = std::uniform_int_distribution<int>(2, s.D)(rng);
                const auto c = v_L > 0 ? compile_constant_depth(f, v_L, K) : compile_fnn_to_cnn(f, K);
                unsound += !c.cert.sound();
                check(f, c.net);
            }
        }
        std::printf("models %d, max relative deviation %.3e (tol %.1e), unsound certificates %d\n", models, worst,
                    v_tol, unsound);
        if (worst > v_tol) status = kFailed;
    });

    // complexity
    auto* complexity = app.add_subcommand("complexity", "complexity functionals of an architecture");
    std::string x_arch, x_out;
    double x_eps = 1e-3;
    bool x_masked = false;
    complexity->add_option("--arch", x_arch, "architecture JSON (resconv.arch or resconv.cnn)")
        ->required()
        ->check(CLI::ExistingFile);
    complexity->add_option("--eps", x_eps, "covering radius");
    complexity->add_flag("--masked", x_masked, "include the mask term");
    complexity->add_option("--out", x_out, "report JSON path");
    complexity->callback([&] {
        auto a = arch_from_json(read_json_file(x_arch));
        if (x_masked) a.masked = true;
        const auto r = complexity_report(a, x_eps);
        const auto j = to_json(r);
        save(x_out, j);
        std::cout << j.dump(2) << "\n";
    });

    // approx
    auto* approx = app.add_subcommand("approx", "build an approximator for a named function");
    approx->require_subcommand(1);
    std::string a_fn = "sinsin", a_out, a_csv, a_cnn_out;
    int a_D = 2, a_M = 9, a_K = 2, a_grid = 101, a_candidates = 400;
    double a_beta = 2.0;
    std::uint64_t a_seed = 0;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--dim", a_D, "input dimension D")->required();
        s->add_option("--budget", a_M, "number of blocks M")->required();
        s->add_option("--fn", a_fn, "target function")->check(CLI::IsMember(function_names()));
        s->add_option("--filter-size", a_K, "filter size for the compiled CNN");
        s->add_option("--grid", a_grid, "grid points per axis for the error report");
        s->add_option("--out", a_out, "FNN model JSON");
        s->add_option("--cnn-out", a_cnn_out, "compiled CNN model JSON");
        s->add_option("--csv", a_csv, "error report CSV");
    };
    auto* holder = approx->add_subcommand("holder", "Holder-class construction");
    add_common(holder);
    holder->add_option("--beta", a_beta, "smoothness")->required();
    auto* barron = approx->add_subcommand("barron", "Barron-class ridge fit");
    add_common(barron);
    barron->add_option("--candidates", a_candidates, "ridge candidates per greedy step");
    barron->add_option("--seed", a_seed);
    auto run_approx = [&](bool is_holder) {
        ApproxRateConfig cfg;
        cfg.kind = is_holder ? "holder" : "barron";
        cfg.fn = a_fn;
        cfg.D = a_D;
        cfg.beta = a_beta;
        cfg.Ms = {a_M};
        cfg.seeds = {a_seed};
        cfg.K = a_K;
        cfg.grid = a_grid;
        cfg.candidates = a_candidates;
        const auto target = named_function(a_fn, a_D);
        const int K = std::min(a_K, a_D);
        BlockSparseFnn f;
        Compiled c;
        if (is_holder) {
            auto h = holder_cnn(target.oracle(a_beta), a_M, a_D, K, {false});
            f = std::move(h.fnn);
            c = std::move(h.compiled);
        } else {
            const auto fit = eval_points(a_D, cfg.fit_grid, 2000, 11);
            f = barron_fnn(fit_barron_ridges(target.f, a_D, a_M, a_candidates, fit, a_seed));
            c = compile_fnn_to_cnn(f, K, {false});
        }
        save(a_out, to_json(f));
        if (!a_cnn_out.empty()) {
            save(a_cnn_out, to_json(c.net));
            save(cert_path_for(a_cnn_out), to_json(c.cert));
        }
        const auto r = approx_rate_experiment(cfg);
        if (!a_csv.empty()) write_text_file(a_csv, report_csv(r));
        const auto& p = r.points.front();
        std::printf("%s approximation of %s, D=%d, M=%d: %zu blocks, sup error %.6g", cfg.kind.c_str(),
                    a_fn.c_str(), a_D, a_M, f.blocks.size(), p.error);
        if (is_holder) std::printf(" (budget %.6g)", p.budget);
        std::printf(", compiled exact: %s\n", r.exact_ok ? "yes" : "no");
        if (!r.exact_ok || !r.budget_ok) status = kFailed;
    };
    holder->callback([&] { run_approx(true); });
    barron->callback([&] { run_approx(false); });

    // experiment
    auto* experiment = app.add_subcommand("experiment", "rate experiments");
    experiment->require_subcommand(1);
    std::string e_csv, e_json, e_fn = "sinsin", e_Ms = "9,25,81", e_Ns = "256,512,1024,2048,4096", e_seeds = "";
    std::string e_kind = "holder";
    int e_D = 2, e_K = 2, e_grid = 101, e_epochs = 100, e_batch = 32, e_width = 4, e_depth = 2, e_C0 = 3;
    double e_beta = 2.0, e_sigma = 0.1, e_lr = 0.01, e_bconv = 1.0, e_bfc = 4.0;
    bool e_adam = false, e_at_end = false;
    auto add_exp_common = [&](CLI::App* s) {
        s->add_option("--fn", e_fn, "target function")->check(CLI::IsMember(function_names()));
        s->add_option("--dim", e_D, "input dimension D");
        s->add_option("--beta", e_beta, "smoothness");
        s->add_option("--seeds", e_seeds, "comma-separated seeds");
        s->add_option("--filter-size", e_K);
        s->add_option("--csv", e_csv, "report CSV (sweep_var,seed,error,runtime_s)");
        s->add_option("--json", e_json, "report JSON");
    };
    auto* arate = experiment->add_subcommand("approx-rate", "sup error against the block budget M");
    add_exp_common(arate);
    arate->add_option("--kind", e_kind)->check(CLI::IsMember({"holder", "barron"}));
    arate->add_option("--Ms", e_Ms, "comma-separated budgets");
    arate->add_option("--grid", e_grid, "grid points per axis");
    auto* erate = experiment->add_subcommand("est-rate", "trained L2 error against the sample size N");
    add_exp_common(erate);
    erate->add_option("--Ns", e_Ns, "comma-separated sample sizes");
    erate->add_option("--sigma", e_sigma, "noise level");
    erate->add_option("--epochs", e_epochs);
    erate->add_option("--batch", e_batch);
    erate->add_option("--lr", e_lr);
    erate->add_option("--bound-conv", e_bconv);
    erate->add_option("--bound-fc", e_bfc);
    erate->add_option("--width", e_width, "hidden channels per block layer");
    erate->add_option("--depth", e_depth, "layers per block");
    erate->add_option("--trunk", e_C0, "trunk channels");
    erate->add_flag("--adam", e_adam);
    erate->add_flag("--project-at-end", e_at_end);
    auto finish = [&](const RateReport& r) {
        if (!e_csv.empty()) write_text_file(e_csv, report_csv(r));
        save(e_json, to_json(r));
        print_summary(r);
    };
    arate->callback([&] {
        ApproxRateConfig cfg;
        cfg.kind = e_kind;
        cfg.fn = e_fn;
        cfg.D = e_D;
        cfg.beta = e_beta;
        cfg.Ms = parse_list<int>(e_Ms);
        if (!e_seeds.empty()) cfg.seeds = parse_list<std::uint64_t>(e_seeds);
        cfg.K = e_K;
        cfg.grid = e_grid;
        const auto r = approx_rate_experiment(cfg);
        finish(r);
        if (!r.exact_ok || !r.budget_ok) status = kFailed;
    });
    erate->callback([&] {
        EstRateConfig cfg;
        cfg.fn = e_fn;
        cfg.D = e_D;
        cfg.beta = e_beta;
        cfg.Ns = parse_list<long long>(e_Ns);
        if (!e_seeds.empty()) cfg.seeds = parse_list<std::uint64_t>(e_seeds);
        cfg.sigma = e_sigma;
        cfg.K = e_K;
        cfg.C0 = e_C0;
        cfg.width = e_width;
        cfg.depth = e_depth;
        cfg.epochs = e_epochs;
        cfg.train.batch = e_batch;
        cfg.train.lr = e_lr;
        cfg.train.bound_conv = e_bconv;
        cfg.train.bound_fc = e_bfc;
        cfg.train.adam = e_adam;
        cfg.train.projection = e_at_end ? Projection::AtEnd : Projection::PerStep;
        finish(estimation_rate_experiment(cfg));
    });

    // lipschitz
    auto* lip = app.add_subcommand("lipschitz", "empirical check of the parameter-Lipschitz bound");
    std::string l_model, l_out;
    std::string l_eps = "1e-4,1e-3";
    int l_trials = 50, l_probes = 200, l_nets = 10;
    std::uint64_t l_seed = 0;
    lip->add_option("--model", l_model, "CNN model (default: random in-class networks)");
    lip->add_option("--eps", l_eps, "comma-separated perturbation sizes");
    lip->add_option("--trials", l_trials, "perturbations per network");
    lip->add_option("--probes", l_probes, "inputs per perturbation");
    lip->add_option("--nets", l_nets, "random networks when no model is given");
    lip->add_option("--seed", l_seed);
    lip->add_option("--out", l_out, "JSON array of reports");
    lip->callback([&] {
        std::vector<ResNetCnn> nets;
        Rng rng(l_seed);
        if (!l_model.empty()) {
            nets.push_back(cnn_from_json(read_json_file(l_model)));
        } else {
            for (int i = 0; i < l_nets; ++i) {
                CnnShape s;
                s.masked = i % 2 == 1;
                nets.push_back(random_cnn(s, rng));
            }
        }
        json all = json::array();
        int violations = 0;
        for (size_t i = 0; i < nets.size(); ++i)
            for (double eps : parse_list<double>(l_eps)) {
                const auto r = lipschitz_check(nets[i], eps, l_trials, l_probes, l_seed + i);
                all.push_back(to_json(r));
                violations += r.violations;
                std::printf("net %zu eps %.1e: max diff %.3e, bound %.3e, violations %d\n", i, eps, r.max_diff,
                            r.bound, r.violations);
            }
        save(l_out, all);
        if (violations > 0) status = kFailed;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kError;
    }
    return status;
}
