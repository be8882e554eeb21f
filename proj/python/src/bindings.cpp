#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "resconv/approximators.hpp"
#include "resconv/compiler.hpp"
#include "resconv/complexity.hpp"
#include "resconv/experiments.hpp"
#include "resconv/functions.hpp"
#include "resconv/random.hpp"
#include "resconv/serialize.hpp"

namespace py = pybind11;
using namespace resconv;

namespace {

std::string dump(const json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Block-sparse ReLU networks compiled into residual CNNs, with complexity and rate tools.";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);

    py::class_<BlockSparseFnn>(m, "Fnn")
        .def_static("from_json", [](const std::string& s) { return fnn_from_json(parse_json(s)); })
        .def("to_json", [](const BlockSparseFnn& f) { return dump(to_json(f)); })
        .def("__call__", [](const BlockSparseFnn& f, const std::vector<double>& x) { return fnn_eval(f, x); })
        .def_readonly("input_dim", &BlockSparseFnn::input_dim)
        .def_readonly("bound_bs", &BlockSparseFnn::bound_bs)
        .def_readonly("bound_fin", &BlockSparseFnn::bound_fin)
        .def_property_readonly("blocks", [](const BlockSparseFnn& f) { return f.blocks.size(); })
        .def_property_readonly("max_depth", &BlockSparseFnn::max_depth)
        .def_property_readonly("max_width", &BlockSparseFnn::max_width)
        .def("valid", [](const BlockSparseFnn& f) { return validate_fnn(f).ok; })
        .def("rescale", &rescale_fnn, py::arg("k"));

    py::class_<ResNetCnn>(m, "Cnn")
        .def_static("from_json", [](const std::string& s) { return cnn_from_json(parse_json(s)); })
        .def("to_json", [](const ResNetCnn& n) { return dump(to_json(n)); })
        .def("__call__", [](const ResNetCnn& n, const std::vector<double>& x) { return cnn_eval(n, x); })
        .def_readonly("input_dim", &ResNetCnn::input_dim)
        .def_readonly("channels", &ResNetCnn::channels)
        .def_readonly("bound_conv", &ResNetCnn::bound_conv)
        .def_readonly("bound_fc", &ResNetCnn::bound_fc)
        .def_property_readonly("blocks", [](const ResNetCnn& n) { return n.blocks.size(); })
        .def_property_readonly("max_depth", &ResNetCnn::max_depth)
        .def_property_readonly("masked", [](const ResNetCnn& n) { return n.masks.has_value(); })
        .def("arch_json", [](const ResNetCnn& n) { return dump(to_json(arch_of(n))); });

    py::class_<Compiled>(m, "Compiled")
        .def_readonly("net", &Compiled::net)
        .def_property_readonly("certificate_json", [](const Compiled& c) { return dump(to_json(c.cert)); })
        .def_property_readonly("sound", [](const Compiled& c) { return c.cert.sound(); })
        .def_property_readonly("violations", [](const Compiled& c) { return c.cert.violations(); });

    m.def(
        "random_fnn",
        [](int D, int M, int max_depth, int max_width, double bound_bs, double bound_fin, std::uint64_t seed) {
            Rng rng(seed);
            return random_fnn({D, M, max_depth, max_width, bound_bs, bound_fin}, rng);
        },
        py::arg("D"), py::arg("M"), py::arg("max_depth") = 3, py::arg("max_width") = 5, py::arg("bound_bs") = 1.0,
        py::arg("bound_fin") = 1.0, py::arg("seed") = 0);

    m.def(
        "compile",
        [](const BlockSparseFnn& f, int K, int constant_depth, bool uniform_channels) {
            const CompileOptions opt{uniform_channels};
            return constant_depth > 0 ? compile_constant_depth(f, constant_depth, K, opt)
                                      : compile_fnn_to_cnn(f, K, opt);
        },
        py::arg("fnn"), py::arg("K"), py::arg("constant_depth") = 0, py::arg("uniform_channels") = true);

    m.def(
        "complexity",
        [](const std::string& arch, double eps) {
            return dump(to_json(complexity_report(arch_from_json(parse_json(arch)), eps)));
        },
        py::arg("arch_json"), py::arg("eps"));
    m.def("lambda1", [](const std::string& arch) { return lambda1(arch_from_json(parse_json(arch))); });
    m.def("lambda2", [](const std::string& arch) { return lambda2(arch_from_json(parse_json(arch))); });
    m.def(
        "lipschitz_check",
        [](const ResNetCnn& n, double eps, int trials, int probes, std::uint64_t seed) {
            return dump(to_json(lipschitz_check(n, eps, trials, probes, seed)));
        },
        py::arg("net"), py::arg("eps"), py::arg("trials") = 50, py::arg("probes") = 200, py::arg("seed") = 0);
    m.def(
        "rate_balance",
        [](double g1, double g2, long long N) {
            const auto r = rate_balance(g1, g2, N);
            return py::make_tuple(r.M, r.exponent);
        },
        py::arg("gamma1"), py::arg("gamma2"), py::arg("N"));

    m.def("function_names", &function_names);
    m.def(
        "holder_cnn",
        [](const std::string& fn, int D, double beta, int M, int K) {
            const auto h = holder_cnn(named_function(fn, D).oracle(beta), M, D, std::min(K, D), {false});
            return py::make_tuple(h.fnn, h.compiled);
        },
        py::arg("fn"), py::arg("D"), py::arg("beta"), py::arg("M"), py::arg("K") = 2);
    m.def(
        "barron_fnn",
        [](const std::string& fn, int D, int M, int candidates, std::uint64_t seed) {
            const auto f = named_function(fn, D);
            return barron_fnn(fit_barron_ridges(f.f, D, M, candidates, eval_points(D, 31, 2000, 11), seed));
        },
        py::arg("fn"), py::arg("D"), py::arg("M"), py::arg("candidates") = 400, py::arg("seed") = 0);
    m.def(
        "mult_network_eval",
        [](int m, double x, double y) { return block_eval(mult_network(m), std::vector<double>{x, y})[0]; },
        py::arg("m"), py::arg("x"), py::arg("y"));

    m.def(
        "approx_rate",
        [](const std::string& kind, const std::string& fn, int D, double beta, const std::vector<int>& Ms, int grid) {
            ApproxRateConfig cfg;
            cfg.kind = kind;
            cfg.fn = fn;
            cfg.D = D;
            cfg.beta = beta;
            cfg.Ms = Ms;
            cfg.grid = grid;
            py::gil_scoped_release release;
            return dump(to_json(approx_rate_experiment(cfg)));
        },
        py::arg("kind"), py::arg("fn"), py::arg("D"), py::arg("beta"), py::arg("Ms"), py::arg("grid") = 101);
}
