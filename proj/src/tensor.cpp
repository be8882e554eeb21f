#include "resconv/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace resconv {

double activate(Activation a, double v) {
    return a == Activation::ReLU ? (v > 0.0 ? v : 0.0) : v;
}

Signal::Signal(int d, int c) : dim(d), channels(c) {
    if (d < 1) throw ShapeError("signal spatial dimension must be >= 1, got " + std::to_string(d));
    if (c < 1) throw ShapeError("signal channel count must be >= 1, got " + std::to_string(c));
    data.assign(static_cast<size_t>(d) * c, 0.0);
}

Signal::Signal(int d, int c, std::vector<double> values) : Signal(d, c) {
    if (values.size() != data.size())
        throw ShapeError("signal data length " + std::to_string(values.size()) + " != D*C = " +
                         std::to_string(data.size()));
    if (!all_finite(values)) throw DomainError("signal entries must be finite");
    data = std::move(values);
}

Signal Signal::from_vector(std::span<const double> x) {
    return Signal(static_cast<int>(x.size()), 1, std::vector<double>(x.begin(), x.end()));
}

double Signal::sup_norm() const { return max_abs(data); }

ConvFilter::ConvFilter(int k, int cout, int cin) : size(k), out_channels(cout), in_channels(cin) {
    if (k < 1) throw ShapeError("filter size K must be >= 1, got " + std::to_string(k));
    if (cout < 1) throw ShapeError("filter output channels must be >= 1");
    if (cin < 1) throw ShapeError("filter input channels must be >= 1");
    w.assign(static_cast<size_t>(k) * cout * cin, 0.0);
}

double ConvFilter::max_abs() const { return resconv::max_abs(w); }

Matrix::Matrix(int r, int c) : rows(r), cols(c) {
    if (r < 0 || c < 0) throw ShapeError("matrix dimensions must be nonnegative");
    a.assign(static_cast<size_t>(r) * c, 0.0);
}

Matrix::Matrix(int r, int c, std::vector<double> values) : Matrix(r, c) {
    if (values.size() != a.size()) throw ShapeError("matrix data length does not match rows*cols");
    a = std::move(values);
}

double Matrix::max_abs() const { return resconv::max_abs(a); }

int Matrix::nonzeros() const {
    return static_cast<int>(std::count_if(a.begin(), a.end(), [](double v) { return v != 0.0; }));
}

double DenseAffine::max_abs() const { return std::max(weight.max_abs(), resconv::max_abs(bias)); }

Signal conv_apply(const ConvFilter& w, const Signal& x, Padding pad) {
    if (w.in_channels != x.channels)
        throw ShapeError("channel axis: filter expects " + std::to_string(w.in_channels) +
                         " input channels, signal has " + std::to_string(x.channels));
    const int D = x.dim, K = w.size;
    int offset = 0;
    if (pad == Padding::OneSided) {
        if (K > D)
            throw DomainError("filter size K=" + std::to_string(K) + " exceeds spatial dimension D=" +
                              std::to_string(D) + " (one-sided padding)");
    } else {
        if (K > D / 2)
            throw DomainError("equal padding requires K <= floor(D/2), got K=" + std::to_string(K));
        offset = (K - 1) / 2;
    }
    Signal y(D, w.out_channels);
    const int Cin = w.in_channels, Cout = w.out_channels;
    for (int beta = 0; beta < D; ++beta) {
        double* out = &y.data[static_cast<size_t>(beta) * Cout];
        for (int k = 0; k < K; ++k) {
            const int src = beta + k - offset;
            if (src < 0 || src >= D) continue;
            const double* in = &x.data[static_cast<size_t>(src) * Cin];
            const double* wk = &w.w[static_cast<size_t>(k) * Cout * Cin];
            for (int j = 0; j < Cout; ++j) {
                const double* row = wk + static_cast<size_t>(j) * Cin;
                double s = 0.0;
                for (int i = 0; i < Cin; ++i) s += row[i] * in[i];
                out[j] += s;
            }
        }
    }
    return y;
}

Signal conv_layer(const ConvFilter& w, std::span<const double> bias, Activation act, const Signal& x,
                  Padding pad) {
    if (static_cast<int>(bias.size()) != w.out_channels)
        throw ShapeError("bias axis: length " + std::to_string(bias.size()) + " != output channels " +
                         std::to_string(w.out_channels));
    Signal y = conv_apply(w, x, pad);
    for (int beta = 0; beta < y.dim; ++beta)
        for (int j = 0; j < y.channels; ++j) y(beta, j) = activate(act, y(beta, j) - bias[j]);
    return y;
}

std::vector<double> fc_layer(const DenseAffine& a, Activation act, const Signal& x) {
    const int n = x.dim * x.channels;
    if (a.weight.cols != n)
        throw ShapeError("fc input axis: weight has " + std::to_string(a.weight.cols) + " columns, vec(x) has " +
                         std::to_string(n));
    if (static_cast<int>(a.bias.size()) != a.weight.rows) throw ShapeError("fc bias axis: length mismatch");
    std::vector<double> y(a.weight.rows);
    for (int r = 0; r < a.weight.rows; ++r) {
        double s = 0.0;
        const double* row = &a.weight.a[static_cast<size_t>(r) * n];
        for (int c = 0; c < n; ++c) s += row[c] * x.data[c];
        y[r] = activate(act, s - a.bias[r]);
    }
    return y;
}

double op_norm_bound(const ConvFilter& w) {
    return static_cast<double>(w.in_channels) * w.size * w.max_abs();
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace resconv
