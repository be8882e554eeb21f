#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "resconv/cnn.hpp"
#include "resconv/data.hpp"

namespace resconv {

enum class Projection { PerStep, AtEnd };

struct TrainConfig {
    int steps = 1000;
    double lr = 0.01;
    int batch = 32;
    double bound_conv = 1.0;
    double bound_fc = 1.0;
    double clip = 1.0;  // F
    std::uint64_t seed = 0;
    Projection projection = Projection::PerStep;
    bool adam = false;
    double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
};

struct TrainResult {
    ResNetCnn net;
    std::vector<double> epoch_loss;  // mean minibatch loss per pass over the data
    double initial_risk = 0.0;
    double final_risk = 0.0;
};

// Parameters in a fixed order: per block and layer the filter then the bias,
// then the readout weight and bias. Masks are not parameters.
std::vector<double> flatten_params(const ResNetCnn& net);
void assign_params(ResNetCnn& net, std::span<const double> theta);
// true for readout entries, false for convolution entries
std::vector<char> fc_param_mask(const ResNetCnn& net);

// Mean over idx of (clip(net(x), F) - y)^2 and its gradient in flatten order.
double loss_and_grad(const ResNetCnn& net, const RegressionDataset& data, std::span<const int> idx, double F,
                     std::vector<double>* grad);

// Smallest |pre-activation| and |output| - F distance over a sample, used to
// keep finite-difference probes away from kinks.
double kink_margin(const ResNetCnn& net, std::span<const double> x, double F);

struct GradCheck {
    double max_rel_error = 0.0;
    int checked = 0;
    int skipped = 0;  // coordinates whose perturbation crossed a kink
    int resampled = 0;
    bool passed(double tol = 1e-5) const { return checked > 0 && max_rel_error <= tol; }
};

// Central differences with step h on every parameter of a random small net.
GradCheck gradient_check(const ResNetCnn& net, const RegressionDataset& data, double F, double h,
                         std::uint64_t seed, int samples = 4);

// Uniform in [-B/sqrt(fan_in), B/sqrt(fan_in)], clipped to [-B, B].
void init_in_class(ResNetCnn& net, double bound_conv, double bound_fc, std::uint64_t seed);

void project_params(ResNetCnn& net, double bound_conv, double bound_fc);

using StepHook = std::function<void(int step, const ResNetCnn&)>;

TrainResult erm_train(const ResNetCnn& net, const RegressionDataset& data, const TrainConfig& cfg,
                      const StepHook& hook = {});

}  // namespace resconv
