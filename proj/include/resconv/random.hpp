#pragma once

#include <random>

#include "resconv/cnn.hpp"
#include "resconv/fnn.hpp"

namespace resconv {

using Rng = std::mt19937_64;

struct FnnShape {
    int D = 2;
    int M = 1;
    int max_depth = 3;
    int max_width = 5;
    double bound_bs = 1.0;
    double bound_fin = 1.0;
};

// Random block-sparse FNN with depths in [1, max_depth], widths in
// [1, max_width] and parameters uniform in the declared bounds.
BlockSparseFnn random_fnn(const FnnShape& s, Rng& rng);

struct CnnShape {
    int D = 4;
    int C0 = 3;
    int M = 2;
    int max_depth = 3;
    int max_channels = 4;
    int max_filter = 2;
    double bound_conv = 0.5;
    double bound_fc = 1.0;
    bool masked = false;
};

// Random in-class ResNet CNN with standard block activations.
ResNetCnn random_cnn(const CnnShape& s, Rng& rng);

std::vector<double> random_point(int D, Rng& rng);

}  // namespace resconv
