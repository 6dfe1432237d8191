#include "fwi/optimize.hpp"

#include <cmath>
#include <stdexcept>

namespace fwi {

Strategy strategy_from_name(const std::string& name) {
    if (name == "adjoint-constant") return Strategy::AdjointConstant;
    if (name == "backprop-nn") return Strategy::BackpropNN;
    if (name == "hybrid") return Strategy::Hybrid;
    if (name == "full-domain-pinn") return Strategy::FullDomainPinn;
    throw std::invalid_argument("train.strategy: unknown strategy '" + name + "'");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::AdjointConstant: return "adjoint-constant";
        case Strategy::BackpropNN: return "backprop-nn";
        case Strategy::Hybrid: return "hybrid";
        case Strategy::FullDomainPinn: return "full-domain-pinn";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("train.lr: must be > 0");
    if (epochs < 1) throw std::invalid_argument("train.epochs: must be >= 1");
    if (!(decay_a <= 0.0)) throw std::invalid_argument("train.decay_a: must be <= 0");
    if (!(decay_b >= 0.0)) throw std::invalid_argument("train.decay_b: must be >= 0");
    if (!(clip_threshold > 0.0)) throw std::invalid_argument("train.clip_threshold: must be > 0");
    if (strategy == Strategy::FullDomainPinn && !(lr_max > 0.0))
        throw std::invalid_argument("train.lr_max: must be > 0 for full-domain-pinn");
}

double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
    return cfg.lr * std::pow(cfg.decay_b * static_cast<double>(epoch) + 1.0, cfg.decay_a);
}

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void clip_gradient(std::vector<double>& grad, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("clip: threshold must be > 0");
    const double norm = l2_norm(grad);
    if (norm <= threshold) return;
    const double scale = threshold / norm;
    for (double& g : grad) g *= scale;
}

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               double lr) {
    if (params.size() != grad.size() || state.m.size() != params.size())
        throw std::invalid_argument("adam: shape mismatch");
    state.step += 1;
    const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / b1t;
        const double vhat = state.v[i] / b2t;
        params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

}  // namespace fwi
