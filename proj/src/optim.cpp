#include "semdt/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace semdt {

namespace {
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kRmsSmoothing = 0.99;
constexpr double kEps = 1e-8;
}  // namespace

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    if (name == "rmsprop") return OptimizerKind::rmsprop;
    throw std::invalid_argument("unknown optimizer: " + name);
}

std::string to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::adam: return "adam";
        case OptimizerKind::rmsprop: return "rmsprop";
    }
    return "?";
}

SchedulerType scheduler_from_string(const std::string& name) {
    if (name == "linear") return SchedulerType::linear;
    if (name == "cosine") return SchedulerType::cosine;
    throw std::invalid_argument("unknown scheduler_type: " + name);
}

std::string to_string(SchedulerType type) {
    return type == SchedulerType::linear ? "linear" : "cosine";
}

void OptimConfig::validate() const {
    if (lr <= 0.0) throw std::invalid_argument("config: lr must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) {
        throw std::invalid_argument("config: mtm must be in [0, 1)");
    }
    if (scheduler_decay <= 0.0 || scheduler_decay > 1.0) {
        throw std::invalid_argument("config: scheduler_decay must be in (0, 1]");
    }
    if (lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
    if (grad_clip && *grad_clip <= 0.0) {
        throw std::invalid_argument("config: grad_clip must be > 0");
    }
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("config: epoch must be >= 1");
    for (int w : overparams) {
        if (w < 1) throw std::invalid_argument("config: overparam widths must be >= 1");
    }
}

std::vector<TensorRef> trainable_tensors(SemNet& net, Gradients& grads) {
    std::vector<TensorRef> tensors;
    if (net.has_chain()) {
        for (std::size_t f = 0; f < net.chain.factors.size(); ++f) {
            Matrix& factor = net.chain.factors[f];
            tensors.push_back({factor.data(), grads.d_factors[f].data(), factor.size()});
        }
    } else {
        tensors.push_back({net.params.weights.data(), grads.d_weights.data(),
                           net.params.weights.size()});
        tensors.push_back({net.params.biases.data(), grads.d_biases.data(),
                           net.params.biases.size()});
    }
    for (std::size_t d = 0; d < net.regressors.size(); ++d) {
        tensors.push_back({net.regressors[d].data(), grads.d_regressors[d].data(),
                           net.regressors[d].size()});
    }
    return tensors;
}

OptimState make_optim_state(const std::vector<TensorRef>& tensors,
                            const OptimConfig& config) {
    OptimState state;
    state.current_lr = config.lr;
    for (const TensorRef& t : tensors) {
        state.moment1.emplace_back(t.size, 0.0);
        state.moment2.emplace_back(t.size, 0.0);
    }
    return state;
}

void step(OptimState& state, std::vector<TensorRef>& tensors,
          const OptimConfig& config) {
    if (state.moment1.size() != tensors.size()) {
        throw std::invalid_argument("step: state/tensor count mismatch");
    }
    state.step_count += 1;
    const double lr = state.current_lr;

    for (std::size_t t = 0; t < tensors.size(); ++t) {
        TensorRef& ref = tensors[t];
        if (state.moment1[t].size() != ref.size) {
            throw std::invalid_argument("step: buffer shape mismatch");
        }
        double* m1 = state.moment1[t].data();
        double* m2 = state.moment2[t].data();

        switch (config.optimizer) {
            case OptimizerKind::sgd:
                for (std::size_t i = 0; i < ref.size; ++i) {
                    m1[i] = config.momentum * m1[i] + ref.grads[i];
                    ref.values[i] -= lr * m1[i];
                }
                break;
            case OptimizerKind::rmsprop:
                for (std::size_t i = 0; i < ref.size; ++i) {
                    const double g = ref.grads[i];
                    m2[i] = kRmsSmoothing * m2[i] + (1.0 - kRmsSmoothing) * g * g;
                    const double update = g / (std::sqrt(m2[i]) + kEps);
                    m1[i] = config.momentum * m1[i] + update;
                    ref.values[i] -= lr * m1[i];
                }
                break;
            case OptimizerKind::adam: {
                const double bc1 = 1.0 - std::pow(kAdamBeta1, state.step_count);
                const double bc2 = 1.0 - std::pow(kAdamBeta2, state.step_count);
                for (std::size_t i = 0; i < ref.size; ++i) {
                    const double g = ref.grads[i];
                    m1[i] = kAdamBeta1 * m1[i] + (1.0 - kAdamBeta1) * g;
                    m2[i] = kAdamBeta2 * m2[i] + (1.0 - kAdamBeta2) * g * g;
                    ref.values[i] -= lr * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + kEps);
                }
                break;
            }
        }
    }
}

double decay_lr(OptimState& state, const OptimConfig& config, int epoch) {
    if (epoch < 0) throw std::invalid_argument("decay_lr: epoch must be >= 0");
    double lr = config.lr;
    if (config.scheduler_type == SchedulerType::linear) {
        lr = config.lr * std::pow(config.scheduler_decay, epoch);
    } else {
        const double phase =
            std::numbers::pi * static_cast<double>(epoch) / config.epochs;
        lr = config.lr * 0.5 * (1.0 + std::cos(phase));
    }
    state.current_lr = lr;
    return lr;
}

void clip_grads(std::vector<TensorRef>& tensors, double max_norm) {
    if (max_norm <= 0.0) throw std::invalid_argument("clip_grads: max_norm must be > 0");
    double sq = 0.0;
    for (const TensorRef& t : tensors) {
        for (std::size_t i = 0; i < t.size; ++i) sq += t.grads[i] * t.grads[i];
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm) return;
    const double scale = max_norm / norm;
    for (TensorRef& t : tensors) {
        for (std::size_t i = 0; i < t.size; ++i) t.grads[i] *= scale;
    }
}

void clip_grads(Gradients& grads, double max_norm) {
    std::vector<TensorRef> tensors;
    auto add = [&tensors](Matrix& m) {
        tensors.push_back({m.data(), m.data(), m.size()});
    };
    add(grads.d_weights);
    tensors.push_back({grads.d_biases.data(), grads.d_biases.data(),
                       grads.d_biases.size()});
    for (Matrix& m : grads.d_regressors) add(m);
    for (Matrix& m : grads.d_factors) add(m);
    clip_grads(tensors, max_norm);
}

}  // namespace semdt
