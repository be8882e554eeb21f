#include "resconv/cnn.hpp"

#include <algorithm>
#include <sstream>

namespace resconv {

int ResidualBlock::max_channels() const {
    int c = layers.front().filter.in_channels;
    for (const auto& l : layers) c = std::max(c, l.filter.out_channels);
    return c;
}

int ResidualBlock::max_filter() const {
    int k = 0;
    for (const auto& l : layers) k = std::max(k, l.filter.size);
    return k;
}

double ResidualBlock::max_abs() const {
    double m = 0.0;
    for (const auto& l : layers) m = std::max({m, l.filter.max_abs(), resconv::max_abs(l.bias)});
    return m;
}

void ResidualBlock::check() const {
    if (layers.empty()) throw ShapeError("residual block depth must be >= 1");
    for (size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        if (static_cast<int>(L.bias.size()) != L.filter.out_channels)
            throw ShapeError("layer " + std::to_string(l + 1) + " bias axis: length != output channels");
        if (l > 0 && L.filter.in_channels != layers[l - 1].filter.out_channels)
            throw ShapeError("layer " + std::to_string(l + 1) + " channel axis: does not chain");
        if (!all_finite(L.filter.w) || !all_finite(L.bias)) throw DomainError("non-finite conv parameter");
    }
}

void ResidualBlock::set_standard_activations() {
    for (auto& l : layers) l.act = Activation::ReLU;
    if (!layers.empty()) layers.back().act = Activation::Identity;
}

Signal block_forward(const ResidualBlock& b, const Signal& x) {
    Signal cur = x;
    for (const auto& l : b.layers) cur = conv_layer(l.filter, l.bias, l.act, cur);
    return cur;
}

int ResNetCnn::max_depth() const {
    int d = 0;
    for (const auto& b : blocks) d = std::max(d, b.depth());
    return d;
}

int ResNetCnn::max_channels() const {
    int c = channels;
    for (const auto& b : blocks) c = std::max(c, b.max_channels());
    return c;
}

void ResNetCnn::check() const {
    if (input_dim < 1 || channels < 1) throw ShapeError("network needs D >= 1 and C0 >= 1");
    for (size_t m = 0; m < blocks.size(); ++m) {
        blocks[m].check();
        if (blocks[m].in_channels() != channels || blocks[m].out_channels() != channels)
            throw ShapeError("block " + std::to_string(m + 1) + " channel axis: must map trunk channels " +
                             std::to_string(channels) + " to themselves");
    }
    if (masks) {
        if (masks->size() != blocks.size()) throw ShapeError("mask count differs from block count");
        for (const auto& z : *masks) {
            if (static_cast<int>(z.size()) != channels) throw ShapeError("mask axis: length != trunk channels");
            for (int v : z)
                if (v != 0 && v != 1) throw DomainError("mask entries must be 0 or 1");
        }
    }
    if (readout.weight.rows != 1 || readout.weight.cols != input_dim * channels || readout.bias.size() != 1)
        throw ShapeError("readout must be 1 x (D*C0) with one bias");
}

Signal pad_input(std::span<const double> x, int channels) {
    Signal z(static_cast<int>(x.size()), channels);
    for (size_t b = 0; b < x.size(); ++b) z(static_cast<int>(b), 0) = x[b];
    return z;
}

Signal apply_block(const ResNetCnn& net, size_t m, const Signal& z) {
    Signal out = block_forward(net.blocks[m], z);
    if (out.channels != z.channels) throw ShapeError("block output channel axis differs from trunk");
    if (net.masks) {
        const auto& mask = (*net.masks)[m];
        if (static_cast<int>(mask.size()) != z.channels) throw ShapeError("mask axis: length != trunk channels");
        for (int b = 0; b < z.dim; ++b)
            for (int i = 0; i < z.channels; ++i)
                if (mask[i]) out(b, i) += z(b, i);
    } else {
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += z.data[i];
    }
    return out;
}

std::vector<Signal> trunk_states(const ResNetCnn& net, std::span<const double> x, DomainCheck mode) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw ShapeError("input axis: expected " + std::to_string(net.input_dim) + " coordinates");
    check_domain(x, mode);
    std::vector<Signal> states;
    states.push_back(pad_input(x, net.channels));
    for (size_t m = 0; m < net.blocks.size(); ++m) states.push_back(apply_block(net, m, states.back()));
    return states;
}

double cnn_eval(const ResNetCnn& net, std::span<const double> x, DomainCheck mode) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw ShapeError("input axis: expected " + std::to_string(net.input_dim) + " coordinates");
    if (net.masks && net.masks->size() != net.blocks.size()) throw ShapeError("mask count differs from block count");
    check_domain(x, mode);
    Signal z = pad_input(x, net.channels);
    for (size_t m = 0; m < net.blocks.size(); ++m) z = apply_block(net, m, z);
    return fc_layer(net.readout, Activation::Identity, z)[0];
}

double clip_output(double y, double F) { return std::min(F, std::max(-F, y)); }

ArchSummary arch_of(const ResNetCnn& net) {
    ArchSummary a;
    a.D = net.input_dim;
    a.C0 = net.channels;
    a.B_conv = net.bound_conv;
    a.B_fc = net.bound_fc;
    a.masked = net.masks.has_value();
    for (const auto& b : net.blocks) {
        BlockArch ba;
        ba.channels.push_back(b.in_channels());
        for (const auto& l : b.layers) {
            ba.channels.push_back(l.filter.out_channels);
            ba.filters.push_back(l.filter.size);
        }
        a.L = std::max(a.L, ba.depth());
        a.blocks.push_back(std::move(ba));
    }
    return a;
}

CnnValidation validate_cnn(const ResNetCnn& net, const ArchSummary& expected) {
    CnnValidation r;
    auto fail = [&](const std::string& s) {
        r.ok = false;
        r.issues.push_back(s);
    };
    try {
        net.check();
    } catch (const std::exception& e) {
        fail(e.what());
        return r;
    }
    r.has_masks = net.masks.has_value();
    if (expected.masked != r.has_masks) fail("mask presence differs from expected architecture");
    if (net.input_dim != expected.D) fail("input dimension differs from expected");
    if (net.channels != expected.C0) fail("trunk channels differ from expected");
    if (static_cast<int>(net.blocks.size()) != expected.M()) fail("block count differs from expected");
    for (size_t m = 0; m < net.blocks.size(); ++m) {
        const auto& b = net.blocks[m];
        r.depths.push_back(b.depth());
        r.max_channels.push_back(b.max_channels());
        r.max_filters.push_back(b.max_filter());
        r.conv_norm = std::max(r.conv_norm, b.max_abs());
        if (m >= expected.blocks.size()) continue;
        const auto& e = expected.blocks[m];
        const std::string tag = "block " + std::to_string(m + 1) + ": ";
        if (b.depth() != e.depth()) {
            fail(tag + "depth " + std::to_string(b.depth()) + " != expected " + std::to_string(e.depth()));
            continue;
        }
        for (int l = 0; l < b.depth(); ++l) {
            const auto& f = b.layers[l].filter;
            if (f.size > e.filters[l])
                fail(tag + "layer " + std::to_string(l + 1) + " filter size " + std::to_string(f.size) +
                     " exceeds " + std::to_string(e.filters[l]));
            if (f.in_channels != e.channels[l] || f.out_channels != e.channels[l + 1])
                fail(tag + "layer " + std::to_string(l + 1) + " channel counts differ from expected");
        }
    }
    r.fc_norm = net.readout.max_abs();
    std::ostringstream s;
    if (!within_bound(r.conv_norm, expected.B_conv)) {
        s << "conv parameter norm " << r.conv_norm << " exceeds B_conv " << expected.B_conv;
        fail(s.str());
        s.str("");
    }
    if (!within_bound(r.fc_norm, expected.B_fc)) {
        s << "readout norm " << r.fc_norm << " exceeds B_fc " << expected.B_fc;
        fail(s.str());
    }
    return r;
}

CnnValidation validate_cnn(const ResNetCnn& net) {
    try {
        net.check();
    } catch (const std::exception& e) {
        CnnValidation r;
        r.ok = false;
        r.issues.push_back(e.what());
        return r;
    }
    return validate_cnn(net, arch_of(net));
}

}  // namespace resconv
