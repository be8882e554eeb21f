#include "resconv/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "resconv/error.hpp"

namespace resconv {

namespace {

template <class Net, class F>
void visit_params(Net& net, F f) {
    for (auto& b : net.blocks)
        for (auto& l : b.layers) {
            for (auto& v : l.filter.w) f(v, false);
            for (auto& v : l.bias) f(v, false);
        }
    for (auto& v : net.readout.weight.a) f(v, true);
    for (auto& v : net.readout.bias) f(v, true);
}

struct Tape {
    std::vector<std::vector<Signal>> in;   // input of every layer, per block
    std::vector<std::vector<Signal>> pre;  // pre-activation of every layer, per block
    Signal last;
    double y = 0.0;
};

double forward(const ResNetCnn& net, std::span<const double> x, Tape& t) {
    Signal z = pad_input(x, net.channels);
    t.in.assign(net.blocks.size(), {});
    t.pre.assign(net.blocks.size(), {});
    for (size_t m = 0; m < net.blocks.size(); ++m) {
        Signal cur = z;
        for (const auto& l : net.blocks[m].layers) {
            t.in[m].push_back(cur);
            Signal p = conv_apply(l.filter, cur);
            for (int b = 0; b < p.dim; ++b)
                for (int j = 0; j < p.channels; ++j) p(b, j) -= l.bias[j];
            cur = p;
            if (l.act == Activation::ReLU)
                for (double& v : cur.data) v = std::max(v, 0.0);
            t.pre[m].push_back(std::move(p));
        }
        if (net.masks) {
            const auto& mask = (*net.masks)[m];
            for (int b = 0; b < z.dim; ++b)
                for (int i = 0; i < z.channels; ++i)
                    if (mask[i]) cur(b, i) += z(b, i);
        } else {
            for (size_t i = 0; i < cur.data.size(); ++i) cur.data[i] += z.data[i];
        }
        z = std::move(cur);
    }
    double y = -net.readout.bias[0];
    for (size_t i = 0; i < z.data.size(); ++i) y += net.readout.weight.a[i] * z.data[i];
    t.last = std::move(z);
    t.y = y;
    return y;
}

// Gradient views laid out like the network so backward can index by layer.
struct GradNet {
    std::vector<std::vector<ConvFilter>> w;
    std::vector<std::vector<std::vector<double>>> b;
    std::vector<double> ro_w;
    double ro_b = 0.0;

    explicit GradNet(const ResNetCnn& net) {
        for (const auto& blk : net.blocks) {
            w.emplace_back();
            b.emplace_back();
            for (const auto& l : blk.layers) {
                w.back().emplace_back(l.filter.size, l.filter.out_channels, l.filter.in_channels);
                b.back().emplace_back(l.bias.size(), 0.0);
            }
        }
        ro_w.assign(net.readout.weight.a.size(), 0.0);
    }

    void flatten_into(std::vector<double>& g) const {
        g.clear();
        for (size_t m = 0; m < w.size(); ++m)
            for (size_t l = 0; l < w[m].size(); ++l) {
                g.insert(g.end(), w[m][l].w.begin(), w[m][l].w.end());
                g.insert(g.end(), b[m][l].begin(), b[m][l].end());
            }
        g.insert(g.end(), ro_w.begin(), ro_w.end());
        g.push_back(ro_b);
    }
};

void backward(const ResNetCnn& net, const Tape& t, double dy, GradNet& g) {
    for (size_t i = 0; i < g.ro_w.size(); ++i) g.ro_w[i] += dy * t.last.data[i];
    g.ro_b -= dy;
    Signal dz(t.last.dim, t.last.channels);
    for (size_t i = 0; i < dz.data.size(); ++i) dz.data[i] = dy * net.readout.weight.a[i];
    for (size_t m = net.blocks.size(); m-- > 0;) {
        const auto& layers = net.blocks[m].layers;
        Signal skip = dz;
        if (net.masks) {
            const auto& mask = (*net.masks)[m];
            for (int b = 0; b < skip.dim; ++b)
                for (int i = 0; i < skip.channels; ++i)
                    if (!mask[i]) skip(b, i) = 0.0;
        }
        Signal da = dz;
        for (size_t l = layers.size(); l-- > 0;) {
            const auto& L = layers[l];
            const Signal& pre = t.pre[m][l];
            const Signal& in = t.in[m][l];
            Signal dp = da;
            if (L.act == Activation::ReLU)
                for (size_t i = 0; i < dp.data.size(); ++i)
                    if (!(pre.data[i] > 0.0)) dp.data[i] = 0.0;
            auto& gw = g.w[m][l];
            auto& gb = g.b[m][l];
            Signal din(in.dim, in.channels);
            const int D = in.dim, K = L.filter.size, Cin = L.filter.in_channels, Cout = L.filter.out_channels;
            for (int beta = 0; beta < D; ++beta)
                for (int j = 0; j < Cout; ++j) {
                    const double d = dp(beta, j);
                    if (d == 0.0) continue;
                    gb[j] -= d;
                    for (int k = 0; k < K && beta + k < D; ++k)
                        for (int i = 0; i < Cin; ++i) {
                            gw.at(k, j, i) += d * in(beta + k, i);
                            din(beta + k, i) += L.filter.at(k, j, i) * d;
                        }
                }
            da = std::move(din);
        }
        for (size_t i = 0; i < dz.data.size(); ++i) dz.data[i] = da.data[i] + skip.data[i];
    }
}

}  // namespace

std::vector<double> flatten_params(const ResNetCnn& net) {
    std::vector<double> theta;
    visit_params(net, [&](const double& v, bool) { theta.push_back(v); });
    return theta;
}

void assign_params(ResNetCnn& net, std::span<const double> theta) {
    size_t i = 0;
    visit_params(net, [&](double& v, bool) {
        if (i >= theta.size()) throw ShapeError("parameter vector too short");
        v = theta[i++];
    });
    if (i != theta.size()) throw ShapeError("parameter vector too long");
}

std::vector<char> fc_param_mask(const ResNetCnn& net) {
    std::vector<char> fc;
    visit_params(net, [&](const double&, bool is_fc) { fc.push_back(is_fc); });
    return fc;
}

double loss_and_grad(const ResNetCnn& net, const RegressionDataset& data, std::span<const int> idx, double F,
                     std::vector<double>* grad) {
    if (idx.empty()) throw DomainError("empty batch");
    GradNet g(net);
    Tape t;
    double loss = 0.0;
    const double scale = 1.0 / static_cast<double>(idx.size());
    for (int n : idx) {
        const double y = forward(net, data.inputs[n], t);
        const double r = clip_output(y, F) - data.targets[n];
        loss += r * r;
        if (grad && std::fabs(y) < F) backward(net, t, 2.0 * r * scale, g);
    }
    if (grad) g.flatten_into(*grad);
    return loss * scale;
}

double kink_margin(const ResNetCnn& net, std::span<const double> x, double F) {
    Tape t;
    const double y = forward(net, x, t);
    double m = std::fabs(std::fabs(y) - F);
    for (size_t b = 0; b < net.blocks.size(); ++b)
        for (size_t l = 0; l < net.blocks[b].layers.size(); ++l)
            if (net.blocks[b].layers[l].act == Activation::ReLU)
                for (double v : t.pre[b][l].data) m = std::min(m, std::fabs(v));
    return m;
}

namespace {

std::vector<char> activation_pattern(const ResNetCnn& net, const RegressionDataset& data, std::span<const int> idx,
                                     double F) {
    std::vector<char> p;
    Tape t;
    for (int n : idx) {
        const double y = forward(net, data.inputs[n], t);
        p.push_back(y > F ? 2 : (y < -F ? 0 : 1));
        for (size_t b = 0; b < net.blocks.size(); ++b)
            for (size_t l = 0; l < net.blocks[b].layers.size(); ++l)
                if (net.blocks[b].layers[l].act == Activation::ReLU)
                    for (double v : t.pre[b][l].data) p.push_back(v > 0.0);
    }
    return p;
}

}  // namespace

GradCheck gradient_check(const ResNetCnn& net, const RegressionDataset& data, double F, double h,
                         std::uint64_t seed, int samples) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, data.size() - 1);
    GradCheck out;
    std::vector<int> idx;
    for (int tries = 0; static_cast<int>(idx.size()) < samples; ++tries) {
        if (tries > 1000 * samples) throw NumericError("gradient check: no sample away from activation kinks");
        const int n = pick(rng);
        if (kink_margin(net, data.inputs[n], F) < 1e-8) {
            ++out.resampled;
            continue;
        }
        idx.push_back(n);
    }
    std::vector<double> grad;
    loss_and_grad(net, data, idx, F, &grad);
    const auto base = activation_pattern(net, data, idx, F);
    auto theta = flatten_params(net);
    ResNetCnn probe = net;
    for (size_t i = 0; i < theta.size(); ++i) {
        const double keep = theta[i];
        theta[i] = keep + h;
        assign_params(probe, theta);
        const bool same_up = activation_pattern(probe, data, idx, F) == base;
        const double up = loss_and_grad(probe, data, idx, F, nullptr);
        theta[i] = keep - h;
        assign_params(probe, theta);
        const bool same_down = activation_pattern(probe, data, idx, F) == base;
        const double down = loss_and_grad(probe, data, idx, F, nullptr);
        theta[i] = keep;
        if (!same_up || !same_down) {
            ++out.skipped;
            continue;
        }
        const double fd = (up - down) / (2.0 * h);
        const double scale = std::max({std::fabs(fd), std::fabs(grad[i]), 1e-3});
        out.max_rel_error = std::max(out.max_rel_error, std::fabs(fd - grad[i]) / scale);
        ++out.checked;
    }
    return out;
}

void init_in_class(ResNetCnn& net, double bound_conv, double bound_fc, std::uint64_t seed) {
    if (!(bound_conv > 0.0) || !(bound_fc > 0.0)) throw DomainError("parameter bounds must be positive");
    std::mt19937_64 rng(seed);
    auto fill = [&](std::vector<double>& v, double B, int fan_in) {
        const double r = std::min(B, B / std::sqrt(static_cast<double>(std::max(fan_in, 1))));
        std::uniform_real_distribution<double> U(-r, r);
        for (double& x : v) x = U(rng);
    };
    for (auto& b : net.blocks)
        for (auto& l : b.layers) {
            const int fan = l.filter.size * l.filter.in_channels;
            fill(l.filter.w, bound_conv, fan);
            fill(l.bias, bound_conv, fan);
        }
    const int fan = net.readout.weight.cols;
    fill(net.readout.weight.a, bound_fc, fan);
    fill(net.readout.bias, bound_fc, fan);
    net.bound_conv = bound_conv;
    net.bound_fc = bound_fc;
}

void project_params(ResNetCnn& net, double bound_conv, double bound_fc) {
    visit_params(net, [&](double& v, bool fc) {
        const double B = fc ? bound_fc : bound_conv;
        v = std::clamp(v, -B, B);
    });
}

TrainResult erm_train(const ResNetCnn& net, const RegressionDataset& data, const TrainConfig& cfg,
                      const StepHook& hook) {
    if (cfg.steps < 0 || cfg.batch < 1 || !(cfg.lr > 0.0) || !(cfg.clip >= 0.0))
        throw DomainError("train config: steps >= 0, batch >= 1, lr > 0 and clip >= 0 required");
    if (data.size() == 0) throw DomainError("empty dataset");
    const auto v = validate_cnn(net);
    if (!within_bound(v.conv_norm, cfg.bound_conv) || !within_bound(v.fc_norm, cfg.bound_fc))
        throw DomainError("initial network is outside the training class bounds");

    TrainResult res;
    res.net = net;
    res.net.bound_conv = cfg.bound_conv;
    res.net.bound_fc = cfg.bound_fc;
    std::vector<int> all(data.size());
    std::iota(all.begin(), all.end(), 0);
    res.initial_risk = loss_and_grad(res.net, data, all, cfg.clip, nullptr);

    auto theta = flatten_params(res.net);
    const auto fc = fc_param_mask(res.net);
    std::vector<double> grad, m1(theta.size(), 0.0), m2(theta.size(), 0.0);
    std::mt19937_64 rng(cfg.seed);
    std::vector<int> order = all;
    size_t cursor = order.size();
    double epoch_sum = 0.0;
    int epoch_batches = 0;
    for (int step = 0; step < cfg.steps; ++step) {
        std::vector<int> batch;
        while (static_cast<int>(batch.size()) < cfg.batch) {
            if (cursor == order.size()) {
                if (epoch_batches > 0) {
                    res.epoch_loss.push_back(epoch_sum / epoch_batches);
                    epoch_sum = 0.0;
                    epoch_batches = 0;
                }
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            batch.push_back(order[cursor++]);
            if (static_cast<int>(batch.size()) == data.size()) break;
        }
        const double loss = loss_and_grad(res.net, data, batch, cfg.clip, &grad);
        if (!std::isfinite(loss) || !all_finite(grad))
            throw NumericError("non-finite loss or gradient at step " + std::to_string(step));
        epoch_sum += loss;
        ++epoch_batches;
        for (size_t i = 0; i < theta.size(); ++i) {
            double d = grad[i];
            if (cfg.adam) {
                m1[i] = cfg.beta1 * m1[i] + (1 - cfg.beta1) * d;
                m2[i] = cfg.beta2 * m2[i] + (1 - cfg.beta2) * d * d;
                const double mh = m1[i] / (1 - std::pow(cfg.beta1, step + 1));
                const double vh = m2[i] / (1 - std::pow(cfg.beta2, step + 1));
                d = mh / (std::sqrt(vh) + cfg.adam_eps);
            }
            theta[i] -= cfg.lr * d;
            if (cfg.projection == Projection::PerStep) {
                const double B = fc[i] ? cfg.bound_fc : cfg.bound_conv;
                theta[i] = std::clamp(theta[i], -B, B);
            }
        }
        assign_params(res.net, theta);
        if (hook) hook(step, res.net);
    }
    if (epoch_batches > 0) res.epoch_loss.push_back(epoch_sum / epoch_batches);
    if (cfg.projection == Projection::AtEnd) project_params(res.net, cfg.bound_conv, cfg.bound_fc);
    res.final_risk = loss_and_grad(res.net, data, all, cfg.clip, nullptr);
    if (!std::isfinite(res.final_risk)) throw NumericError("non-finite final risk");
    return res;
}

}  // namespace resconv
