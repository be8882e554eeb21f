#include "resconv/fnn.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace resconv {

void check_domain(std::span<const double> x, DomainCheck mode) {
    if (mode == DomainCheck::Off) return;
    for (size_t j = 0; j < x.size(); ++j) {
        if (std::isfinite(x[j]) && x[j] >= -1.0 && x[j] <= 1.0) continue;
        std::ostringstream msg;
        msg << "input coordinate " << j << " = " << x[j] << " outside [-1,1]";
        if (mode == DomainCheck::Strict) throw DomainError(msg.str());
        std::clog << "warning: " << msg.str() << "\n";
        return;
    }
}

int FnnBlock::input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols; }
int FnnBlock::output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows; }

int FnnBlock::max_width() const {
    int w = 0;
    for (const auto& l : layers) w = std::max(w, l.weight.rows);
    return w;
}

double FnnBlock::max_abs() const {
    double m = 0.0;
    for (const auto& l : layers) m = std::max({m, l.weight.max_abs(), resconv::max_abs(l.bias)});
    return m;
}

void FnnBlock::check() const {
    if (layers.empty()) throw ShapeError("block depth must be >= 1");
    for (size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        if (static_cast<int>(L.bias.size()) != L.weight.rows)
            throw ShapeError("layer " + std::to_string(l + 1) + " bias axis: length does not match weight rows");
        if (l > 0 && L.weight.cols != layers[l - 1].weight.rows)
            throw ShapeError("layer " + std::to_string(l + 1) + " input axis: does not chain with previous layer");
        if (!all_finite(L.weight.a) || !all_finite(L.bias)) throw DomainError("non-finite block parameter");
    }
}

std::vector<double> block_eval(const FnnBlock& b, std::span<const double> x) {
    std::vector<double> cur(x.begin(), x.end()), next;
    for (const auto& L : b.layers) {
        if (static_cast<int>(cur.size()) != L.weight.cols) throw ShapeError("block input axis: dimension mismatch");
        next.assign(L.weight.rows, 0.0);
        for (int r = 0; r < L.weight.rows; ++r) {
            const double* row = &L.weight.a[static_cast<size_t>(r) * L.weight.cols];
            double s = 0.0;
            for (int c = 0; c < L.weight.cols; ++c) s += row[c] * cur[c];
            s -= L.bias[r];
            next[r] = s > 0.0 ? s : 0.0;
        }
        cur.swap(next);
    }
    return cur;
}

int BlockSparseFnn::max_depth() const {
    int d = 0;
    for (const auto& b : blocks) d = std::max(d, b.depth());
    return d;
}

int BlockSparseFnn::max_width() const {
    int w = 0;
    for (const auto& b : blocks) w = std::max(w, b.max_width());
    return w;
}

double fnn_eval(const BlockSparseFnn& f, std::span<const double> x, DomainCheck mode) {
    if (static_cast<int>(x.size()) != f.input_dim)
        throw ShapeError("input axis: expected " + std::to_string(f.input_dim) + " coordinates, got " +
                         std::to_string(x.size()));
    if (f.final_weights.size() != f.blocks.size()) throw ShapeError("final weights: one vector per block required");
    check_domain(x, mode);
    double y = 0.0;
    for (size_t m = 0; m < f.blocks.size(); ++m) {
        auto h = block_eval(f.blocks[m], x);
        const auto& w = f.final_weights[m];
        if (w.size() != h.size()) throw ShapeError("final weight axis: length does not match block output width");
        for (size_t i = 0; i < h.size(); ++i) y += w[i] * h[i];
    }
    return y - f.final_bias;
}

bool within_bound(double value, double bound) { return value <= bound * (1.0 + 1e-12); }

FnnValidation validate_fnn(const BlockSparseFnn& f) {
    FnnValidation r;
    r.blocks = static_cast<int>(f.blocks.size());
    r.declared_bs = f.bound_bs;
    r.declared_fin = f.bound_fin;
    auto fail = [&](std::string s) {
        r.ok = false;
        r.issues.push_back(std::move(s));
    };
    if (f.input_dim < 1) fail("input dimension must be >= 1");
    if (f.blocks.empty()) fail("at least one block required");
    if (f.final_weights.size() != f.blocks.size()) fail("final weight count differs from block count");
    if (!(f.bound_bs > 0.0) || !(f.bound_fin > 0.0)) fail("declared bounds must be positive");
    for (size_t m = 0; m < f.blocks.size(); ++m) {
        const auto& b = f.blocks[m];
        try {
            b.check();
            if (b.input_dim() != f.input_dim) fail("block " + std::to_string(m + 1) + ": input width != D");
        } catch (const std::exception& e) {
            fail("block " + std::to_string(m + 1) + ": " + e.what());
            continue;
        }
        r.depths.push_back(b.depth());
        r.widths.push_back(b.max_width());
        r.block_norm = std::max(r.block_norm, b.max_abs());
        if (m < f.final_weights.size()) {
            if (static_cast<int>(f.final_weights[m].size()) != b.output_dim())
                fail("final weight " + std::to_string(m + 1) + ": length != block output width");
            r.final_norm = std::max(r.final_norm, max_abs(f.final_weights[m]));
        }
    }
    r.final_norm = std::max(r.final_norm, std::fabs(f.final_bias));
    if (!within_bound(r.block_norm, f.bound_bs)) {
        std::ostringstream s;
        s << "block norm " << r.block_norm << " exceeds B_bs " << f.bound_bs;
        fail(s.str());
    }
    if (!within_bound(r.final_norm, f.bound_fin)) {
        std::ostringstream s;
        s << "final norm " << r.final_norm << " exceeds B_fin " << f.bound_fin;
        fail(s.str());
    }
    return r;
}

BlockSparseFnn rescale_fnn(const BlockSparseFnn& f, double k) {
    if (!(k >= 1.0) || !std::isfinite(k)) throw DomainError("rescale factor k must be a finite value >= 1");
    BlockSparseFnn g = f;
    if (k == 1.0) return g;
    const double L = f.max_depth();
    const double lk = std::log(k);
    for (size_t m = 0; m < g.blocks.size(); ++m) {
        auto& b = g.blocks[m];
        const double e = L / b.depth();
        const double ws = std::exp(-e * lk);
        for (size_t l = 0; l < b.layers.size(); ++l) {
            const double bs = std::exp(-static_cast<double>(l + 1) * e * lk);
            for (double& v : b.layers[l].weight.a) v *= ws;
            for (double& v : b.layers[l].bias) v *= bs;
        }
        const double up = std::exp(L * lk);
        for (double& v : g.final_weights[m]) v *= up;
    }
    g.bound_bs = f.bound_bs / k;
    g.bound_fin = f.bound_fin * std::exp(L * lk);
    return g;
}

}  // namespace resconv
