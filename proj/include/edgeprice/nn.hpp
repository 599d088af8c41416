#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "edgeprice/rng.hpp"

namespace edgeprice {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class OutputActivation { Linear, Tanh };

/// Fully connected network with ReLU hidden layers. Batches are columns.
class Mlp {
public:
    Mlp() = default;

    /// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), except the
    /// output layer which uses U(-final_range, final_range) when given.
    Mlp(std::vector<int> sizes, OutputActivation output, RngStream& rng, double final_range = 0.0);

    struct Cache {
        std::vector<Matrix> inputs;  // input to each layer
        std::vector<Matrix> pre;     // pre-activation of each layer
    };

    struct Gradients {
        std::vector<Matrix> weights;
        std::vector<Vector> biases;
        Matrix input;  // d loss / d network input
    };

    Matrix forward(const Matrix& x) const;
    Matrix forward(const Matrix& x, Cache& cache) const;

    /// Backpropagates d loss / d output through the cached pass.
    Gradients backward(const Cache& cache, const Matrix& grad_output) const;

    const std::vector<int>& sizes() const { return sizes_; }
    OutputActivation output_activation() const { return output_; }
    std::size_t layer_count() const { return weights_.size(); }
    std::vector<Matrix>& weights() { return weights_; }
    const std::vector<Matrix>& weights() const { return weights_; }
    std::vector<Vector>& biases() { return biases_; }
    const std::vector<Vector>& biases() const { return biases_; }

    std::size_t parameter_count() const;
    /// Weights then bias of each layer, column-major.
    std::vector<double> flat() const;
    void set_flat(const std::vector<double>& values);

    /// this <- tau * online + (1 - tau) * this
    void soft_update(const Mlp& online, double tau);

private:
    std::vector<int> sizes_;
    OutputActivation output_ = OutputActivation::Linear;
    std::vector<Matrix> weights_;  // out x in
    std::vector<Vector> biases_;
};

/// Adam optimizer state for one network.
class Adam {
public:
    Adam() = default;
    Adam(const Mlp& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

    /// Descends along `grads`.
    void step(Mlp& net, const Mlp::Gradients& grads);

    double learning_rate() const { return lr_; }
    long steps() const { return t_; }

    /// First and second moments, flattened like Mlp::flat().
    std::vector<double> first_moment() const;
    std::vector<double> second_moment() const;
    void restore(long steps, const std::vector<double>& m, const std::vector<double>& v);

private:
    double lr_ = 1e-3, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    std::vector<Matrix> mw_, vw_;
    std::vector<Vector> mb_, vb_;
};

}  // namespace edgeprice
