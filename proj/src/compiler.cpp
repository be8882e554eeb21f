#include "resconv/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace resconv {

double ConvStack::max_weight() const {
    double m = 0.0;
    for (const auto& l : layers) m = std::max(m, l.filter.max_abs());
    return m;
}

double ConvStack::max_bias() const {
    double m = 0.0;
    for (const auto& l : layers) m = std::max(m, max_abs(l.bias));
    return m;
}

Signal stack_forward(const ConvStack& s, const Signal& x) {
    Signal cur = x;
    for (const auto& l : s.layers) cur = conv_layer(l.filter, l.bias, l.act, cur);
    return cur;
}

int ridge_depth(int D, int K) {
    if (D < 2) throw DomainError("input dimension D must be >= 2, got " + std::to_string(D));
    if (K < 2 || K > D)
        throw DomainError("filter size K must satisfy 2 <= K <= D, got K=" + std::to_string(K) +
                          ", D=" + std::to_string(D));
    return (D - 1 + K - 2) / (K - 1);
}

ConvStack ridge_conv(std::span<const double> a, double t, int K) {
    const int D = static_cast<int>(a.size());
    const int L0 = ridge_depth(D, K);
    ConvStack s;
    auto coef = [&](int idx) { return idx < D ? a[idx] : 0.0; };
    if (L0 == 1) {
        ConvLayer l{ConvFilter(K, 1, 1), {t}, Activation::Identity};
        for (int k = 0; k < K; ++k) l.filter.at(k, 0, 0) = coef(k);
        s.layers.push_back(std::move(l));
        return s;
    }
    ConvLayer first{ConvFilter(K, 2, 1), {0.0, 0.0}, Activation::Identity};
    for (int k = 0; k < K; ++k) first.filter.at(k, 0, 0) = coef(k);
    first.filter.at(K - 1, 1, 0) = 1.0;
    s.layers.push_back(std::move(first));
    for (int l = 1; l < L0; ++l) {
        const bool last = l == L0 - 1;
        ConvLayer cur{ConvFilter(K, last ? 1 : 2, 2), {}, Activation::Identity};
        cur.bias.assign(last ? 1 : 2, 0.0);
        cur.filter.at(0, 0, 0) = 1.0;
        for (int k = 1; k < K; ++k) cur.filter.at(k, 0, 1) = coef(l * (K - 1) + k);
        if (last)
            cur.bias[0] = t;
        else
            cur.filter.at(K - 1, 1, 1) = 1.0;
        s.layers.push_back(std::move(cur));
    }
    return s;
}

ConvStack relu_double(const ConvStack& s) {
    ConvStack d;
    for (size_t l = 0; l < s.layers.size(); ++l) {
        const auto& src = s.layers[l];
        if (src.act != Activation::Identity) throw DomainError("relu_double expects an Identity-activation stack");
        const auto& w = src.filter;
        const int K = w.size, co = w.out_channels, ci = w.in_channels;
        const bool first = l == 0;
        ConvLayer out{ConvFilter(K, 2 * co, first ? ci : 2 * ci), {}, Activation::ReLU};
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < co; ++j)
                for (int i = 0; i < ci; ++i) {
                    const double v = w.at(k, j, i);
                    out.filter.at(k, j, i) = v;
                    out.filter.at(k, co + j, i) = -v;
                    if (!first) {
                        out.filter.at(k, j, ci + i) = -v;
                        out.filter.at(k, co + j, ci + i) = v;
                    }
                }
        out.bias = src.bias;
        for (double b : src.bias) out.bias.push_back(-b);
        d.layers.push_back(std::move(out));
    }
    return d;
}

ConvStack parallel_concat(const ConvStack& s1, const ConvStack& s2) {
    if (s1.depth() != s2.depth())
        throw ShapeError("parallel_concat depth axis: " + std::to_string(s1.depth()) + " vs " +
                         std::to_string(s2.depth()));
    ConvStack r;
    for (int l = 0; l < s1.depth(); ++l) {
        const auto& a = s1.layers[l];
        const auto& b = s2.layers[l];
        if (a.filter.size != b.filter.size)
            throw ShapeError("parallel_concat filter axis: sizes differ at layer " + std::to_string(l + 1));
        if (a.act != b.act) throw DomainError("parallel_concat: activations differ at layer " + std::to_string(l + 1));
        const int K = a.filter.size;
        const int ao = a.filter.out_channels, ai = a.filter.in_channels;
        const int bo = b.filter.out_channels, bi = b.filter.in_channels;
        ConvLayer c{ConvFilter(K, ao + bo, ai + bi), a.bias, a.act};
        c.bias.insert(c.bias.end(), b.bias.begin(), b.bias.end());
        for (int k = 0; k < K; ++k) {
            for (int j = 0; j < ao; ++j)
                for (int i = 0; i < ai; ++i) c.filter.at(k, j, i) = a.filter.at(k, j, i);
            for (int j = 0; j < bo; ++j)
                for (int i = 0; i < bi; ++i) c.filter.at(k, ao + j, ai + i) = b.filter.at(k, j, i);
        }
        r.layers.push_back(std::move(c));
    }
    return r;
}

ConvFilter embed_filter(const ConvFilter& w, int K, int cout, int cin) {
    if (cin < 0) cin = w.in_channels;
    if (K < w.size) throw DomainError("embed_filter: target size smaller than filter size");
    if (cout < w.out_channels || cin < w.in_channels) throw DomainError("embed_filter: target channels too small");
    ConvFilter e(K, cout, cin);
    for (int k = 0; k < w.size; ++k)
        for (int j = 0; j < w.out_channels; ++j)
            for (int i = 0; i < w.in_channels; ++i) e.at(k, j, i) = w.at(k, j, i);
    return e;
}

namespace {

// Places a layer's output rows at offset `row0` of `cout` channels and its
// input columns at offset `col0` of `cin` channels.
ConvLayer place(const ConvLayer& l, int cout, int row0, int cin, int col0) {
    const auto& w = l.filter;
    ConvLayer r{ConvFilter(w.size, cout, cin), std::vector<double>(cout, 0.0), l.act};
    for (int k = 0; k < w.size; ++k)
        for (int j = 0; j < w.out_channels; ++j)
            for (int i = 0; i < w.in_channels; ++i) r.filter.at(k, row0 + j, col0 + i) = w.at(k, j, i);
    for (int j = 0; j < w.out_channels; ++j) r.bias[row0 + j] = l.bias[j];
    return r;
}

// Every row of the concatenated first layer reads exactly one input column;
// fold them all onto trunk channel 0.
ConvLayer fan_in(const ConvLayer& l, int cin) {
    const auto& w = l.filter;
    ConvLayer r{ConvFilter(w.size, w.out_channels, cin), l.bias, l.act};
    for (int k = 0; k < w.size; ++k)
        for (int j = 0; j < w.out_channels; ++j) {
            double s = 0.0;
            for (int i = 0; i < w.in_channels; ++i) s += w.at(k, j, i);
            r.filter.at(k, j, 0) = s;
        }
    return r;
}

ConvLayer dense_as_conv(const Matrix& W, const std::vector<double>& b, int stride_in, Activation act) {
    ConvLayer r{ConvFilter(1, W.rows, W.cols * stride_in), b, act};
    for (int j = 0; j < W.rows; ++j)
        for (int i = 0; i < W.cols; ++i) r.filter.at(0, j, stride_in * i) = W(j, i);
    return r;
}

const char* kLayout =
    "channel 1: input copy; channel 2: positive accumulator; channel 3: negative accumulator; "
    "channels 4+: block workspace";

}  // namespace

std::vector<std::string> CompilationCertificate::violations() const {
    std::vector<std::string> v;
    for (size_t m = 0; m < blocks.size(); ++m) {
        const auto& b = blocks[m];
        const std::string tag = "block " + std::to_string(m + 1) + ": ";
        if (b.depth > b.depth_bound)
            v.push_back(tag + "depth " + std::to_string(b.depth) + " > " + std::to_string(b.depth_bound));
        if (b.channels > b.channel_bound)
            v.push_back(tag + "channels " + std::to_string(b.channels) + " > " + std::to_string(b.channel_bound));
        if (b.filter > b.filter_bound)
            v.push_back(tag + "filter " + std::to_string(b.filter) + " > " + std::to_string(b.filter_bound));
    }
    std::ostringstream s;
    if (!within_bound(conv_realized, conv_claimed)) {
        s << "conv norm " << conv_realized << " > claimed " << conv_claimed;
        v.push_back(s.str());
        s.str("");
    }
    if (!within_bound(fc_realized, fc_claimed)) {
        s << "readout norm " << fc_realized << " > claimed " << fc_claimed;
        v.push_back(s.str());
    }
    return v;
}

Compiled compile_fnn_to_cnn(const BlockSparseFnn& f, int K, const CompileOptions& opt) {
    const int D = f.input_dim;
    const int L0 = ridge_depth(D, K);
    auto val = validate_fnn(f);
    if (!val.ok) throw DomainError("FNN validation failed: " + val.issues.front());
    const double scale = f.bound_bs / f.bound_fin;
    if (!(scale >= 1e-300 && scale <= 1e300))
        throw DomainError("accumulator scale B_bs/B_fin is outside [1e-300, 1e300]; compilation would lose precision");

    const int width = f.max_width();
    const int C = opt.uniform_channels ? std::max(3, 4 * width) : 3;

    Compiled out;
    ResNetCnn& net = out.net;
    net.input_dim = D;
    net.channels = C;

    for (size_t m = 0; m < f.blocks.size(); ++m) {
        const auto& blk = f.blocks[m];
        const auto& W1 = blk.layers[0].weight;
        ConvStack hinges;
        for (int d = 0; d < W1.rows; ++d) {
            std::span<const double> row(&W1.a[static_cast<size_t>(d) * W1.cols], W1.cols);
            auto h = relu_double(ridge_conv(row, blk.layers[0].bias[d], K));
            hinges = d == 0 ? h : parallel_concat(hinges, h);
        }
        hinges.layers[0] = fan_in(hinges.layers[0], C);

        ResidualBlock rb;
        rb.layers = std::move(hinges.layers);
        // hinge outputs are [h1+, h1-, h2+, h2-, ...]; stride 2 picks positive parts
        int stride = 2;
        for (size_t l = 1; l < blk.layers.size(); ++l) {
            rb.layers.push_back(dense_as_conv(blk.layers[l].weight, blk.layers[l].bias, stride, Activation::ReLU));
            stride = 1;
        }
        const auto& w = f.final_weights[m];
        ConvLayer acc{ConvFilter(1, C, rb.layers.back().filter.out_channels), std::vector<double>(C, 0.0),
                      Activation::Identity};
        for (size_t i = 0; i < w.size(); ++i) {
            acc.filter.at(0, 1, stride * i) = scale * std::max(w[i], 0.0);
            acc.filter.at(0, 2, stride * i) = scale * std::max(-w[i], 0.0);
        }
        rb.layers.push_back(std::move(acc));

        if (opt.uniform_channels) {
            for (size_t l = 0; l < rb.layers.size(); ++l) {
                auto& L = rb.layers[l];
                L.filter = embed_filter(L.filter, L.filter.size, C, C);
                L.bias.resize(C, 0.0);
            }
        }
        BlockCertificate bc;
        bc.depth = rb.depth();
        bc.depth_bound = blk.depth() + L0;
        bc.channels = rb.max_channels();
        bc.channel_bound = opt.uniform_channels ? C : std::max(3, 4 * blk.max_width());
        bc.filter = rb.max_filter();
        bc.filter_bound = K;
        out.cert.blocks.push_back(bc);
        net.blocks.push_back(std::move(rb));
    }

    net.readout.weight = Matrix(1, D * C);
    net.readout.weight(0, 1) = 1.0 / scale;
    net.readout.weight(0, 2) = -1.0 / scale;
    net.readout.bias = {f.final_bias};

    // Unit carry/shift weights of the ridge stacks set a floor of 1 on the
    // conv norm whenever more than one layer is needed.
    net.bound_conv = L0 >= 2 ? std::max(f.bound_bs, 1.0) : f.bound_bs;
    net.bound_fc = f.bound_fin * std::max(1.0, 1.0 / f.bound_bs);

    auto& c = out.cert;
    c.K = K;
    c.L0 = L0;
    c.trunk_channels = C;
    c.uniform_channels = opt.uniform_channels;
    c.layout = kLayout;
    for (const auto& b : net.blocks) c.conv_realized = std::max(c.conv_realized, b.max_abs());
    c.conv_claimed = f.bound_bs;
    c.fc_realized = net.readout.max_abs();
    c.fc_claimed = net.bound_fc;
    return out;
}

DividedBlock divide_block_masked(const ResidualBlock& block, int L, int group) {
    if (L < 1) throw DomainError("constant depth L must be >= 1");
    block.check();
    const int Lp = block.depth();
    const int G = std::max(group, block.max_channels());
    const int C3 = 3 * G;
    const int S0 = (Lp + L - 1) / L;
    DividedBlock r;
    r.group = G;
    auto write_group = [&](int s) { return s == S0 - 1 ? 0 : (s % 2 == 0 ? 1 : 2); };
    auto read_group = [&](int s) { return s == 0 ? 0 : write_group(s - 1); };
    auto mask_of = [&](int a, int b, int c) {
        MaskVector z(C3, 0);
        for (int i = 0; i < G; ++i) {
            z[i] = a;
            z[G + i] = b;
            z[2 * G + i] = c;
        }
        return z;
    };
    for (int s = 0; s < S0; ++s) {
        const int lo = s * L, hi = std::min(Lp, lo + L);
        ResidualBlock piece;
        for (int l = lo; l < hi; ++l) {
            const auto& src = block.layers[l];
            const bool first = l == lo, last = l == hi - 1;
            const int cin = first ? C3 : src.filter.in_channels;
            const int col0 = first ? read_group(s) * G : 0;
            const int cout = last ? C3 : src.filter.out_channels;
            const int row0 = last ? write_group(s) * G : 0;
            piece.layers.push_back(place(src, cout, row0, cin, col0));
        }
        r.blocks.push_back(std::move(piece));
        if (s == S0 - 1) {
            r.masks.push_back(S0 == 1 ? mask_of(1, 1, 1) : mask_of(1, 0, 0));
        } else {
            r.masks.push_back(mask_of(1, 1, 1));
            ResidualBlock zero;
            zero.layers.push_back({ConvFilter(1, C3, C3), std::vector<double>(C3, 0.0), Activation::Identity});
            r.blocks.push_back(std::move(zero));
            r.masks.push_back(s % 2 == 0 ? mask_of(1, 1, 0) : mask_of(1, 0, 1));
        }
    }
    return r;
}

Compiled compile_constant_depth(const BlockSparseFnn& f, int L, int K, const CompileOptions& opt) {
    if (L < 1) throw DomainError("constant depth L must be >= 1");
    Compiled base = compile_fnn_to_cnn(f, K, opt);
    const ResNetCnn& src = base.net;
    Compiled out;
    out.cert = base.cert;
    out.cert.constant_depth = L;
    if (src.max_depth() <= L) {
        out.net = src;
        out.net.masks = std::vector<MaskVector>(src.blocks.size(), MaskVector(src.channels, 1));
        return out;
    }
    const int G = src.max_channels();
    const int C3 = 3 * G;
    ResNetCnn& net = out.net;
    net.input_dim = src.input_dim;
    net.channels = C3;
    net.bound_conv = src.bound_conv;
    net.bound_fc = src.bound_fc;
    net.masks.emplace();
    out.cert.blocks.clear();
    out.cert.trunk_channels = C3;
    for (const auto& b : src.blocks) {
        auto div = divide_block_masked(b, L, G);
        for (size_t i = 0; i < div.blocks.size(); ++i) {
            BlockCertificate bc;
            bc.depth = div.blocks[i].depth();
            bc.depth_bound = L;
            bc.channels = div.blocks[i].max_channels();
            bc.channel_bound = 3 * G;
            bc.filter = div.blocks[i].max_filter();
            bc.filter_bound = K;
            out.cert.blocks.push_back(bc);
            net.blocks.push_back(std::move(div.blocks[i]));
            net.masks->push_back(std::move(div.masks[i]));
        }
    }
    const int D = src.input_dim;
    net.readout.weight = Matrix(1, D * C3);
    for (int beta = 0; beta < D; ++beta)
        for (int i = 0; i < src.channels; ++i)
            net.readout.weight(0, beta * C3 + i) = src.readout.weight(0, beta * src.channels + i);
    net.readout.bias = src.readout.bias;
    return out;
}

}  // namespace resconv
