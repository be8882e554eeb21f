#pragma once

#include <span>
#include <string>
#include <vector>

#include "resconv/tensor.hpp"

namespace resconv {

enum class DomainCheck { Strict, Warn, Off };

// Checks x against [-1,1]^D; throws, warns on stderr, or does nothing.
void check_domain(std::span<const double> x, DomainCheck mode);

struct DenseLayer {
    Matrix weight;  // D^(l) x D^(l-1)
    std::vector<double> bias;
};

// All layers ReLU.
struct FnnBlock {
    std::vector<DenseLayer> layers;

    int input_dim() const;
    int output_dim() const;
    int depth() const { return static_cast<int>(layers.size()); }
    int max_width() const;
    double max_abs() const;
    void check() const;  // chain dimensions, finiteness
};

std::vector<double> block_eval(const FnnBlock& b, std::span<const double> x);

struct BlockSparseFnn {
    int input_dim = 0;
    std::vector<FnnBlock> blocks;
    std::vector<std::vector<double>> final_weights;
    double final_bias = 0.0;
    double bound_bs = 1.0;
    double bound_fin = 1.0;

    int max_depth() const;
    int max_width() const;
};

double fnn_eval(const BlockSparseFnn& f, std::span<const double> x, DomainCheck mode = DomainCheck::Strict);

struct FnnValidation {
    bool ok = true;
    int blocks = 0;
    std::vector<int> depths;
    std::vector<int> widths;  // max width per block
    double block_norm = 0.0;  // realized max |W|, |b| over blocks
    double final_norm = 0.0;  // realized max |w_m|, |b|
    double declared_bs = 0.0;
    double declared_fin = 0.0;
    std::vector<std::string> issues;
};

// Bounds are inclusive, with a 1e-12 relative allowance for rounding in derived bounds.
bool within_bound(double value, double bound);

FnnValidation validate_fnn(const BlockSparseFnn& f);

BlockSparseFnn rescale_fnn(const BlockSparseFnn& f, double k);

}  // namespace resconv
