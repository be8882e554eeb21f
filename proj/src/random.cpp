#include "resconv/random.hpp"

#include <algorithm>

namespace resconv {

namespace {

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double unif(Rng& rng, double B) { return std::uniform_real_distribution<double>(-B, B)(rng); }

}  // namespace

BlockSparseFnn random_fnn(const FnnShape& s, Rng& rng) {
    BlockSparseFnn f;
    f.input_dim = s.D;
    f.bound_bs = s.bound_bs;
    f.bound_fin = s.bound_fin;
    for (int m = 0; m < s.M; ++m) {
        FnnBlock b;
        int prev = s.D;
        const int L = pick(rng, 1, s.max_depth);
        for (int l = 0; l < L; ++l) {
            const int w = pick(rng, 1, s.max_width);
            DenseLayer layer{Matrix(w, prev), std::vector<double>(w)};
            for (double& v : layer.weight.a) v = unif(rng, s.bound_bs);
            for (double& v : layer.bias) v = unif(rng, s.bound_bs);
            b.layers.push_back(std::move(layer));
            prev = w;
        }
        std::vector<double> wm(prev);
        for (double& v : wm) v = unif(rng, s.bound_fin);
        f.blocks.push_back(std::move(b));
        f.final_weights.push_back(std::move(wm));
    }
    f.final_bias = unif(rng, s.bound_fin);
    return f;
}

ResNetCnn random_cnn(const CnnShape& s, Rng& rng) {
    ResNetCnn net;
    net.input_dim = s.D;
    net.channels = s.C0;
    net.bound_conv = s.bound_conv;
    net.bound_fc = s.bound_fc;
    for (int m = 0; m < s.M; ++m) {
        ResidualBlock b;
        const int L = pick(rng, 1, s.max_depth);
        int prev = s.C0;
        for (int l = 0; l < L; ++l) {
            const int c = l == L - 1 ? s.C0 : pick(rng, 1, s.max_channels);
            const int k = pick(rng, 1, std::min(s.max_filter, s.D));
            ConvLayer layer{ConvFilter(k, c, prev), std::vector<double>(c), Activation::ReLU};
            for (double& v : layer.filter.w) v = unif(rng, s.bound_conv);
            for (double& v : layer.bias) v = unif(rng, s.bound_conv);
            b.layers.push_back(std::move(layer));
            prev = c;
        }
        b.set_standard_activations();
        net.blocks.push_back(std::move(b));
    }
    if (s.masked) {
        net.masks.emplace();
        for (int m = 0; m < s.M; ++m) {
            MaskVector z(s.C0);
            for (int& v : z) v = pick(rng, 0, 1);
            net.masks->push_back(std::move(z));
        }
    }
    net.readout.weight = Matrix(1, s.D * s.C0);
    for (double& v : net.readout.weight.a) v = unif(rng, s.bound_fc);
    net.readout.bias = {unif(rng, s.bound_fc)};
    return net;
}

std::vector<double> random_point(int D, Rng& rng) {
    std::vector<double> x(D);
    for (double& v : x) v = unif(rng, 1.0);
    return x;
}

}  // namespace resconv
