#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "edgeprice/nn.hpp"

namespace gradcheck {

using namespace edgeprice;

/// Same order as Mlp::flat().
inline std::vector<double> flatten(const Mlp::Gradients& g) {
    std::vector<double> out;
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        out.insert(out.end(), g.weights[l].data(), g.weights[l].data() + g.weights[l].size());
        out.insert(out.end(), g.biases[l].data(), g.biases[l].data() + g.biases[l].size());
    }
    return out;
}

/// Sign pattern of every hidden ReLU over the batch.
inline std::vector<bool> relu_pattern(const Mlp& net, const Matrix& x) {
    Mlp::Cache cache;
    net.forward(x, cache);
    std::vector<bool> out;
    for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l) {
        for (double v : cache.pre[l].reshaped()) out.push_back(v > 0.0);
    }
    return out;
}

/// Critic input [state; action] for the actor's current actions.
inline Matrix actor_critic_input(const Mlp& actor, const Matrix& states) {
    Matrix actions = actor.forward(states);
    Matrix in(states.rows() + actions.rows(), states.cols());
    in << states, actions;
    return in;
}

struct Report {
    double worst = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;  // perturbation crossed a ReLU kink
};

/// Compares `analytic` with central differences of `loss` over every
/// parameter of `net`. When `pattern` is given, coordinates whose +-h
/// perturbation changes it are skipped: the loss is not differentiable on
/// that interval. Gradients below `floor` are compared absolutely, since the
/// difference quotient is roundoff-limited there.
inline Report check(Mlp& net, const std::vector<double>& analytic, const std::function<double()>& loss,
                    const std::function<std::vector<bool>()>& pattern = {}, double h = 1e-5, double floor = 1e-6) {
    std::vector<double> theta = net.flat();
    std::vector<bool> base = pattern ? pattern() : std::vector<bool>{};
    Report r;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        double keep = theta[i];
        theta[i] = keep + h;
        net.set_flat(theta);
        double up = loss();
        bool kink = pattern && pattern() != base;
        theta[i] = keep - h;
        net.set_flat(theta);
        double down = loss();
        kink = kink || (pattern && pattern() != base);
        theta[i] = keep;
        if (kink) {
            ++r.skipped;
            continue;
        }
        ++r.checked;
        double numeric = (up - down) / (2 * h);
        double scale = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
        r.worst = std::max(r.worst, std::abs(numeric - analytic[i]) / scale);
    }
    net.set_flat(theta);
    return r;
}

inline double max_relative_error(Mlp& net, const std::vector<double>& analytic, const std::function<double()>& loss,
                                 double h = 1e-5) {
    return check(net, analytic, loss, {}, h).worst;
}

}  // namespace gradcheck
