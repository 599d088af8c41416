#include "edgeprice/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace edgeprice {

namespace {

template <typename M>
void fill_uniform(M& m, double range, RngStream& rng) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-range, range);
}

template <typename Fn>
void for_each_block(std::vector<Matrix>& w, std::vector<Vector>& b, Fn&& fn) {
    for (std::size_t l = 0; l < w.size(); ++l) {
        fn(w[l].data(), static_cast<std::size_t>(w[l].size()));
        fn(b[l].data(), static_cast<std::size_t>(b[l].size()));
    }
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, OutputActivation output, RngStream& rng, double final_range)
    : sizes_(std::move(sizes)), output_(output) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        Matrix w(sizes_[l + 1], sizes_[l]);
        Vector b(sizes_[l + 1]);
        bool last = l + 2 == sizes_.size();
        double range = last && final_range > 0.0 ? final_range : 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
        fill_uniform(w, range, rng);
        fill_uniform(b, range, rng);
        weights_.push_back(std::move(w));
        biases_.push_back(std::move(b));
    }
}

Matrix Mlp::forward(const Matrix& x) const {
    Cache unused;
    return forward(x, unused);
}

Matrix Mlp::forward(const Matrix& x, Cache& cache) const {
    cache.inputs.clear();
    cache.pre.clear();
    Matrix a = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        cache.inputs.push_back(a);
        Matrix z = (weights_[l] * a).colwise() + biases_[l];
        cache.pre.push_back(z);
        if (l + 1 < weights_.size()) {
            a = z.cwiseMax(0.0);
        } else {
            a = output_ == OutputActivation::Tanh ? Matrix(z.array().tanh().matrix()) : z;
        }
    }
    return a;
}

Mlp::Gradients Mlp::backward(const Cache& cache, const Matrix& grad_output) const {
    Gradients g;
    g.weights.resize(weights_.size());
    g.biases.resize(weights_.size());
    Matrix delta = grad_output;
    for (std::size_t k = weights_.size(); k-- > 0;) {
        const Matrix& z = cache.pre[k];
        if (k + 1 == weights_.size()) {
            if (output_ == OutputActivation::Tanh) {
                delta = delta.cwiseProduct(Matrix((1.0 - z.array().tanh().square()).matrix()));
            }
        } else {
            delta = delta.cwiseProduct(Matrix((z.array() > 0.0).cast<double>().matrix()));
        }
        g.weights[k] = delta * cache.inputs[k].transpose();
        g.biases[k] = delta.rowwise().sum();
        delta = weights_[k].transpose() * delta;
    }
    g.input = std::move(delta);
    return g;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
}

std::vector<double> Mlp::flat() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        out.insert(out.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
        out.insert(out.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
    }
    return out;
}

void Mlp::set_flat(const std::vector<double>& values) {
    if (values.size() != parameter_count()) throw std::invalid_argument("Mlp::set_flat: parameter count mismatch");
    std::size_t pos = 0;
    for_each_block(weights_, biases_, [&](double* p, std::size_t n) {
        std::copy(values.begin() + pos, values.begin() + pos + n, p);
        pos += n;
    });
}

void Mlp::soft_update(const Mlp& online, double tau) {
    if (online.sizes_ != sizes_) throw std::invalid_argument("Mlp::soft_update: shape mismatch");
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        weights_[l] = tau * online.weights_[l] + (1.0 - tau) * weights_[l];
        biases_[l] = tau * online.biases_[l] + (1.0 - tau) * biases_[l];
    }
}

Adam::Adam(const Mlp& net, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), b1_(beta1), b2_(beta2), eps_(epsilon) {
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        mw_.push_back(Matrix::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
        vw_.push_back(mw_.back());
        mb_.push_back(Vector::Zero(net.biases()[l].size()));
        vb_.push_back(mb_.back());
    }
}

void Adam::step(Mlp& net, const Mlp::Gradients& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = b1_ * m + (1.0 - b1_) * g;
        v = b2_ * v + (1.0 - b2_) * g.cwiseProduct(g);
        param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
    };
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        update(net.weights()[l], mw_[l], vw_[l], grads.weights[l]);
        update(net.biases()[l], mb_[l], vb_[l], grads.biases[l]);
    }
}

std::vector<double> Adam::first_moment() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < mw_.size(); ++l) {
        out.insert(out.end(), mw_[l].data(), mw_[l].data() + mw_[l].size());
        out.insert(out.end(), mb_[l].data(), mb_[l].data() + mb_[l].size());
    }
    return out;
}

std::vector<double> Adam::second_moment() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < vw_.size(); ++l) {
        out.insert(out.end(), vw_[l].data(), vw_[l].data() + vw_[l].size());
        out.insert(out.end(), vb_[l].data(), vb_[l].data() + vb_[l].size());
    }
    return out;
}

void Adam::restore(long steps, const std::vector<double>& m, const std::vector<double>& v) {
    auto load = [](std::vector<Matrix>& w, std::vector<Vector>& b, const std::vector<double>& src) {
        std::size_t total = 0;
        for_each_block(w, b, [&](double*, std::size_t n) { total += n; });
        if (src.size() != total) throw std::invalid_argument("Adam::restore: moment size mismatch");
        std::size_t pos = 0;
        for_each_block(w, b, [&](double* p, std::size_t n) {
            std::copy(src.begin() + pos, src.begin() + pos + n, p);
            pos += n;
        });
    };
    load(mw_, mb_, m);
    load(vw_, vb_, v);
    t_ = steps;
}

}  // namespace edgeprice
