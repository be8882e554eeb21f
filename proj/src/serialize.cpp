#include "resconv/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "resconv/error.hpp"

namespace resconv {

namespace {

json header(const std::string& kind) { return {{"schema", "resconv." + kind}, {"version", kSchemaVersion}}; }

// Non-finite doubles are not valid JSON; encode them as strings.
json num(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw SchemaError(path + ": " + what);
}

const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "/" + key, "missing");
    return *it;
}

double get_double(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        if (s == "nan") return NAN;
    }
    fail(path, "expected number");
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected integer");
    return j.get<int>();
}

std::vector<double> get_doubles(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected array");
    std::vector<double> v;
    for (size_t i = 0; i < j.size(); ++i) v.push_back(get_double(j[i], path + "/" + std::to_string(i)));
    return v;
}

std::vector<int> get_ints(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected array");
    std::vector<int> v;
    for (size_t i = 0; i < j.size(); ++i) v.push_back(get_int(j[i], path + "/" + std::to_string(i)));
    return v;
}

void expect_schema(const json& j, const std::string& kind) {
    if (!j.is_object()) fail("", "expected object");
    const std::string want = "resconv." + kind;
    const auto& s = field(j, "schema", "");
    if (!s.is_string() || s.get<std::string>() != want)
        fail("/schema", "expected \"" + want + "\", got " + s.dump());
    const int v = get_int(field(j, "version", ""), "/version");
    if (v != kSchemaVersion)
        fail("/version", "unsupported schema version " + std::to_string(v) + " (supported: " +
                             std::to_string(kSchemaVersion) + ")");
}

json matrix_json(const Matrix& m) { return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}}; }

Matrix matrix_from(const json& j, const std::string& path) {
    const int r = get_int(field(j, "rows", path), path + "/rows");
    const int c = get_int(field(j, "cols", path), path + "/cols");
    auto a = get_doubles(field(j, "data", path), path + "/data");
    if (r < 0 || c < 0 || a.size() != static_cast<size_t>(r) * c) fail(path + "/data", "length != rows*cols");
    return Matrix(r, c, std::move(a));
}

std::string act_name(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

Activation act_from(const json& j, const std::string& path) {
    if (j == "relu") return Activation::ReLU;
    if (j == "identity") return Activation::Identity;
    fail(path, "expected \"relu\" or \"identity\"");
}

json block_arch_json(const BlockArch& b) { return {{"channels", b.channels}, {"filters", b.filters}}; }

}  // namespace

std::string schema_of(const json& j) {
    if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string()) return "";
    return j["schema"].get<std::string>();
}

json to_json(const BlockSparseFnn& f) {
    json j = header("fnn");
    j["input_dim"] = f.input_dim;
    j["bound_bs"] = f.bound_bs;
    j["bound_fin"] = f.bound_fin;
    j["final_bias"] = f.final_bias;
    j["final_weights"] = f.final_weights;
    json blocks = json::array();
    for (const auto& b : f.blocks) {
        json layers = json::array();
        for (const auto& l : b.layers) layers.push_back({{"weight", matrix_json(l.weight)}, {"bias", l.bias}});
        blocks.push_back({{"layers", layers}});
    }
    j["blocks"] = blocks;
    return j;
}

BlockSparseFnn fnn_from_json(const json& j) {
    expect_schema(j, "fnn");
    BlockSparseFnn f;
    f.input_dim = get_int(field(j, "input_dim", ""), "/input_dim");
    f.bound_bs = get_double(field(j, "bound_bs", ""), "/bound_bs");
    f.bound_fin = get_double(field(j, "bound_fin", ""), "/bound_fin");
    f.final_bias = get_double(field(j, "final_bias", ""), "/final_bias");
    const auto& fw = field(j, "final_weights", "");
    if (!fw.is_array()) fail("/final_weights", "expected array");
    for (size_t m = 0; m < fw.size(); ++m) f.final_weights.push_back(get_doubles(fw[m], "/final_weights/" + std::to_string(m)));
    const auto& blocks = field(j, "blocks", "");
    if (!blocks.is_array()) fail("/blocks", "expected array");
    for (size_t m = 0; m < blocks.size(); ++m) {
        const std::string bp = "/blocks/" + std::to_string(m);
        const auto& layers = field(blocks[m], "layers", bp);
        if (!layers.is_array()) fail(bp + "/layers", "expected array");
        FnnBlock b;
        for (size_t l = 0; l < layers.size(); ++l) {
            const std::string lp = bp + "/layers/" + std::to_string(l);
            DenseLayer d;
            d.weight = matrix_from(field(layers[l], "weight", lp), lp + "/weight");
            d.bias = get_doubles(field(layers[l], "bias", lp), lp + "/bias");
            b.layers.push_back(std::move(d));
        }
        f.blocks.push_back(std::move(b));
    }
    if (f.final_weights.size() != f.blocks.size()) fail("/final_weights", "count differs from block count");
    return f;
}

json to_json(const ResNetCnn& net) {
    json j = header("cnn");
    j["input_dim"] = net.input_dim;
    j["channels"] = net.channels;
    j["bound_conv"] = net.bound_conv;
    j["bound_fc"] = net.bound_fc;
    json blocks = json::array();
    for (const auto& b : net.blocks) {
        json layers = json::array();
        for (const auto& l : b.layers)
            layers.push_back({{"size", l.filter.size},
                              {"out_channels", l.filter.out_channels},
                              {"in_channels", l.filter.in_channels},
                              {"filter", l.filter.w},
                              {"bias", l.bias},
                              {"activation", act_name(l.act)}});
        blocks.push_back({{"layers", layers}});
    }
    j["blocks"] = blocks;
    j["masks"] = net.masks ? json(*net.masks) : json(nullptr);
    j["readout"] = {{"weight", matrix_json(net.readout.weight)}, {"bias", net.readout.bias}};
    return j;
}

ResNetCnn cnn_from_json(const json& j) {
    expect_schema(j, "cnn");
    ResNetCnn net;
    net.input_dim = get_int(field(j, "input_dim", ""), "/input_dim");
    net.channels = get_int(field(j, "channels", ""), "/channels");
    net.bound_conv = get_double(field(j, "bound_conv", ""), "/bound_conv");
    net.bound_fc = get_double(field(j, "bound_fc", ""), "/bound_fc");
    const auto& blocks = field(j, "blocks", "");
    if (!blocks.is_array()) fail("/blocks", "expected array");
    for (size_t m = 0; m < blocks.size(); ++m) {
        const std::string bp = "/blocks/" + std::to_string(m);
        const auto& layers = field(blocks[m], "layers", bp);
        if (!layers.is_array()) fail(bp + "/layers", "expected array");
        ResidualBlock b;
        for (size_t l = 0; l < layers.size(); ++l) {
            const std::string lp = bp + "/layers/" + std::to_string(l);
            const auto& L = layers[l];
            ConvLayer c;
            const int K = get_int(field(L, "size", lp), lp + "/size");
            const int co = get_int(field(L, "out_channels", lp), lp + "/out_channels");
            const int ci = get_int(field(L, "in_channels", lp), lp + "/in_channels");
            if (K < 1 || co < 1 || ci < 1) fail(lp, "filter dimensions must be positive");
            c.filter = ConvFilter(K, co, ci);
            c.filter.w = get_doubles(field(L, "filter", lp), lp + "/filter");
            if (c.filter.w.size() != static_cast<size_t>(K) * co * ci) fail(lp + "/filter", "length != K*Cout*Cin");
            c.bias = get_doubles(field(L, "bias", lp), lp + "/bias");
            c.act = act_from(field(L, "activation", lp), lp + "/activation");
            b.layers.push_back(std::move(c));
        }
        net.blocks.push_back(std::move(b));
    }
    const auto& masks = field(j, "masks", "");
    if (!masks.is_null()) {
        if (!masks.is_array()) fail("/masks", "expected array or null");
        net.masks.emplace();
        for (size_t m = 0; m < masks.size(); ++m) net.masks->push_back(get_ints(masks[m], "/masks/" + std::to_string(m)));
    }
    const auto& ro = field(j, "readout", "");
    net.readout.weight = matrix_from(field(ro, "weight", "/readout"), "/readout/weight");
    net.readout.bias = get_doubles(field(ro, "bias", "/readout"), "/readout/bias");
    try {
        net.check();
    } catch (const std::exception& e) {
        fail("", std::string("inconsistent network: ") + e.what());
    }
    return net;
}

json to_json(const CompilationCertificate& c) {
    json j = header("certificate");
    j["K"] = c.K;
    j["L0"] = c.L0;
    j["trunk_channels"] = c.trunk_channels;
    j["uniform_channels"] = c.uniform_channels;
    j["constant_depth"] = c.constant_depth;
    j["layout"] = c.layout;
    j["conv"] = {{"realized", c.conv_realized}, {"claimed", c.conv_claimed}};
    j["fc"] = {{"realized", c.fc_realized}, {"claimed", c.fc_claimed}};
    json blocks = json::array();
    for (const auto& b : c.blocks)
        blocks.push_back({{"depth", b.depth},
                          {"depth_bound", b.depth_bound},
                          {"channels", b.channels},
                          {"channel_bound", b.channel_bound},
                          {"filter", b.filter},
                          {"filter_bound", b.filter_bound}});
    j["blocks"] = blocks;
    j["violations"] = c.violations();
    j["sound"] = c.sound();
    return j;
}

json to_json(const ArchSummary& a) {
    json j = header("arch");
    j["D"] = a.D;
    j["C0"] = a.C0;
    j["B_conv"] = a.B_conv;
    j["B_fc"] = a.B_fc;
    j["masked"] = a.masked;
    j["L"] = a.L;
    json blocks = json::array();
    for (const auto& b : a.blocks) blocks.push_back(block_arch_json(b));
    j["blocks"] = blocks;
    return j;
}

ArchSummary arch_from_json(const json& j) {
    if (schema_of(j) == "resconv.cnn") return arch_of(cnn_from_json(j));
    expect_schema(j, "arch");
    ArchSummary a;
    a.D = get_int(field(j, "D", ""), "/D");
    a.C0 = get_int(field(j, "C0", ""), "/C0");
    a.B_conv = get_double(field(j, "B_conv", ""), "/B_conv");
    a.B_fc = get_double(field(j, "B_fc", ""), "/B_fc");
    if (j.contains("masked")) {
        if (!j["masked"].is_boolean()) fail("/masked", "expected boolean");
        a.masked = j["masked"].get<bool>();
    }
    const auto& blocks = field(j, "blocks", "");
    if (!blocks.is_array()) fail("/blocks", "expected array");
    for (size_t m = 0; m < blocks.size(); ++m) {
        const std::string bp = "/blocks/" + std::to_string(m);
        BlockArch b;
        b.channels = get_ints(field(blocks[m], "channels", bp), bp + "/channels");
        b.filters = get_ints(field(blocks[m], "filters", bp), bp + "/filters");
        if (b.filters.empty() || b.channels.size() != b.filters.size() + 1)
            fail(bp, "need depth >= 1 and channels.size() == filters.size() + 1");
        a.L = std::max(a.L, b.depth());
        a.blocks.push_back(std::move(b));
    }
    if (j.contains("L")) a.L = std::max(a.L, get_int(j["L"], "/L"));
    if (a.D < 1 || a.C0 < 1) fail("", "D and C0 must be >= 1");
    return a;
}

json to_json(const ComplexityReport& r) {
    json j = header("complexity");
    json rho = json::array(), rp = json::array();
    for (double v : r.rho) rho.push_back(num(v));
    for (double v : r.rho_plus) rp.push_back(num(v));
    j["rho"] = rho;
    j["rho_plus"] = rp;
    j["varrho"] = num(r.varrho);
    j["varrho_plus"] = num(r.varrho_plus);
    j["lambda1"] = num(r.lambda1);
    j["lambda2"] = r.lambda2;
    j["eps"] = r.eps;
    j["covering_log"] = num(r.covering_log);
    j["B"] = r.B;
    return j;
}

json to_json(const LipschitzReport& r) {
    json j = header("lipschitz");
    j["eps"] = r.eps;
    j["lambda1"] = num(r.lambda1);
    j["bound"] = num(r.bound);
    j["max_diff"] = r.max_diff;
    j["violations"] = r.violations;
    j["trials"] = r.trials;
    j["probes"] = r.probes;
    j["passed"] = r.passed();
    return j;
}

json to_json(const RateReport& r) {
    json j = header("rate_report");
    j["kind"] = r.kind;
    j["sweep_name"] = r.sweep_name;
    j["sweep_values"] = r.sweep_values;
    j["medians"] = r.medians;
    j["slope"] = num(r.slope);
    j["predicted"] = r.predicted;
    j["runtime_s"] = r.runtime_s;
    j["diagnostic"] = r.diagnostic;
    j["budget_ok"] = r.budget_ok;
    j["exact_ok"] = r.exact_ok;
    j["monotone"] = r.monotone;
    j["notes"] = r.notes;
    json pts = json::array();
    for (const auto& p : r.points)
        pts.push_back({{"sweep", p.sweep},
                       {"seed", p.seed},
                       {"error", p.error},
                       {"runtime_s", p.runtime_s},
                       {"reference_error", p.reference_error},
                       {"budget", p.budget},
                       {"blocks", p.blocks}});
    j["points"] = pts;
    return j;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot write");
    out << text;
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace resconv
