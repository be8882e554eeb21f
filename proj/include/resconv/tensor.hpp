#pragma once

#include <span>
#include <vector>

#include "resconv/error.hpp"

namespace resconv {

enum class Activation { ReLU, Identity };
enum class Padding { OneSided, Equal };

double activate(Activation a, double v);

// D x C signal stored spatial-major: entry (beta, i) at beta*C + i, which is
// also the vec() order used by fully-connected layers.
struct Signal {
    int dim = 0;
    int channels = 0;
    std::vector<double> data;

    Signal() = default;
    Signal(int d, int c);
    Signal(int d, int c, std::vector<double> values);

    double& operator()(int beta, int i) { return data[static_cast<size_t>(beta) * channels + i]; }
    double operator()(int beta, int i) const { return data[static_cast<size_t>(beta) * channels + i]; }

    static Signal from_vector(std::span<const double> x);  // D x 1
    double sup_norm() const;
};

// K x C_out x C_in, entry (k, j, i) at (k*C_out + j)*C_in + i.
struct ConvFilter {
    int size = 0;
    int out_channels = 0;
    int in_channels = 0;
    std::vector<double> w;

    ConvFilter() = default;
    ConvFilter(int k, int cout, int cin);

    double& at(int k, int j, int i) { return w[(static_cast<size_t>(k) * out_channels + j) * in_channels + i]; }
    double at(int k, int j, int i) const { return w[(static_cast<size_t>(k) * out_channels + j) * in_channels + i]; }
    double max_abs() const;
};

// Row-major dense matrix.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c);
    Matrix(int r, int c, std::vector<double> values);

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
    double max_abs() const;
    int nonzeros() const;
};

// y = W vec(x) - b, W has rows = outputs, cols = D*C.
struct DenseAffine {
    Matrix weight;
    std::vector<double> bias;
    double max_abs() const;
};

Signal conv_apply(const ConvFilter& w, const Signal& x, Padding pad = Padding::OneSided);
// sigma(L^w x - 1 (x) b)
Signal conv_layer(const ConvFilter& w, std::span<const double> bias, Activation act, const Signal& x,
                  Padding pad = Padding::OneSided);
std::vector<double> fc_layer(const DenseAffine& a, Activation act, const Signal& x);

// Upper bound on the sup-to-sup operator norm of L^w: C_in * K * max|w|.
double op_norm_bound(const ConvFilter& w);

double max_abs(std::span<const double> v);
bool all_finite(std::span<const double> v);

}  // namespace resconv
