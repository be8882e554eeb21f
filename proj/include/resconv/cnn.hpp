#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resconv/fnn.hpp"
#include "resconv/tensor.hpp"

namespace resconv {

struct ConvLayer {
    ConvFilter filter;
    std::vector<double> bias;
    Activation act = Activation::ReLU;
};

// A residual block's layers. The usual pattern is ReLU everywhere except an
// Identity last layer; pieces cut out of a deeper block keep whatever
// activation the cut layer had, so the activation is stored per layer.
struct ResidualBlock {
    std::vector<ConvLayer> layers;

    int depth() const { return static_cast<int>(layers.size()); }
    int in_channels() const { return layers.front().filter.in_channels; }
    int out_channels() const { return layers.back().filter.out_channels; }
    int max_channels() const;
    int max_filter() const;
    double max_abs() const;
    void check() const;

    // Sets ReLU on all layers but the last, which becomes Identity.
    void set_standard_activations();
};

Signal block_forward(const ResidualBlock& b, const Signal& x);

using MaskVector = std::vector<int>;

struct ResNetCnn {
    int input_dim = 0;
    int channels = 0;  // trunk C^(0)
    std::vector<ResidualBlock> blocks;
    std::optional<std::vector<MaskVector>> masks;
    DenseAffine readout;  // 1 x (D*C^(0))
    double bound_conv = 1.0;
    double bound_fc = 1.0;

    int max_depth() const;
    int max_channels() const;
    void check() const;
};

Signal pad_input(std::span<const double> x, int channels);
// Applies block m (plus its identity connection) to a trunk signal.
Signal apply_block(const ResNetCnn& net, size_t m, const Signal& z);
// Trunk signal after every block (index 0 is the padded input).
std::vector<Signal> trunk_states(const ResNetCnn& net, std::span<const double> x,
                                 DomainCheck mode = DomainCheck::Strict);
double cnn_eval(const ResNetCnn& net, std::span<const double> x, DomainCheck mode = DomainCheck::Strict);

double clip_output(double y, double F);

struct BlockArch {
    std::vector<int> channels;  // C^(0..L'), channels[0] is the block input
    std::vector<int> filters;   // K^(1..L')
    int depth() const { return static_cast<int>(filters.size()); }
};

struct ArchSummary {
    int D = 0;
    int C0 = 0;
    std::vector<BlockArch> blocks;
    double B_conv = 1.0;
    double B_fc = 1.0;
    bool masked = false;
    int L = 0;  // constant block depth used by the mask term

    int M() const { return static_cast<int>(blocks.size()); }
};

ArchSummary arch_of(const ResNetCnn& net);

struct CnnValidation {
    bool ok = true;
    std::vector<int> depths;
    std::vector<int> max_channels;
    std::vector<int> max_filters;
    double conv_norm = 0.0;
    double fc_norm = 0.0;
    bool has_masks = false;
    std::vector<std::string> issues;
};

CnnValidation validate_cnn(const ResNetCnn& net, const ArchSummary& expected);
CnnValidation validate_cnn(const ResNetCnn& net);

}  // namespace resconv
