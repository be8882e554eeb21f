#pragma once

#include <string>
#include <vector>

#include "resconv/cnn.hpp"
#include "resconv/fnn.hpp"

namespace resconv {

struct ConvStack {
    std::vector<ConvLayer> layers;

    int depth() const { return static_cast<int>(layers.size()); }
    int in_channels() const { return layers.front().filter.in_channels; }
    int out_channels() const { return layers.back().filter.out_channels; }
    double max_weight() const;
    double max_bias() const;
};

Signal stack_forward(const ConvStack& s, const Signal& x);

// Number of layers needed to read D entries with filters of size K.
int ridge_depth(int D, int K);

// Identity-activation stack whose output (spatial 1, channel 1) is a.x - t.
// Layer 1 reads taps a_1..a_K into channel 1 and copies x_K into channel 2;
// later layers carry channel 1 forward and add the next K-1 coefficients
// against the shifted copy in channel 2, which moves K-1 further to the left.
ConvStack ridge_conv(std::span<const double> a, double t, int K);

ConvStack relu_double(const ConvStack& s);
ConvStack parallel_concat(const ConvStack& s1, const ConvStack& s2);
ConvFilter embed_filter(const ConvFilter& w, int K, int cout, int cin = -1);

struct CompileOptions {
    bool uniform_channels = true;  // false: per-layer channel counts as built
};

struct BlockCertificate {
    int depth = 0, depth_bound = 0;
    int channels = 0, channel_bound = 0;
    int filter = 0, filter_bound = 0;
};

struct CompilationCertificate {
    int K = 0;
    int L0 = 0;
    int trunk_channels = 0;
    bool uniform_channels = true;
    int constant_depth = 0;  // 0 when blocks were not divided
    std::vector<BlockCertificate> blocks;
    double conv_realized = 0.0, conv_claimed = 0.0;
    double fc_realized = 0.0, fc_claimed = 0.0;
    std::string layout;

    std::vector<std::string> violations() const;
    bool sound() const { return violations().empty(); }
};

struct Compiled {
    ResNetCnn net;
    CompilationCertificate cert;
};

Compiled compile_fnn_to_cnn(const BlockSparseFnn& f, int K, const CompileOptions& opt = {});

struct DividedBlock {
    std::vector<ResidualBlock> blocks;
    std::vector<MaskVector> masks;  // each of length 3*group
    int group = 0;
};

// Splits a residual block into pieces of depth <= L routed through three
// channel groups of width `group` (0 picks the smallest that fits). Applied in
// order with their masks to [x | 0 | 0] the pieces give [x + f(x) | 0 | 0].
DividedBlock divide_block_masked(const ResidualBlock& block, int L, int group = 0);

Compiled compile_constant_depth(const BlockSparseFnn& f, int L, int K, const CompileOptions& opt = {});

}  // namespace resconv
