#ifndef SEMDT_OPTIM_HPP
#define SEMDT_OPTIM_HPP

#include <optional>
#include <string>
#include <vector>

#include "semdt/backprop.hpp"
#include "semdt/semnet.hpp"

namespace semdt {

enum class OptimizerKind { sgd, adam, rmsprop };

enum class SchedulerType { linear, cosine };

OptimizerKind optimizer_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);
SchedulerType scheduler_from_string(const std::string& name);
std::string to_string(SchedulerType type);

struct OptimConfig {
    OptimizerKind optimizer = OptimizerKind::adam;
    double lr = 0.01;
    double momentum = 0.0;             // mtm in [0, 1)
    SchedulerType scheduler_type = SchedulerType::linear;
    double scheduler_decay = 1.0;      // per-epoch multiplicative factor
    double lambda = 0.0;               // L1 on decision weights
    std::optional<double> grad_clip;   // global L2 cap
    int batch_size = 128;
    int epochs = 50;
    std::vector<int> overparams;       // hidden widths; empty = plain matrix

    void validate() const;
};

// Mutable view over one trainable tensor and its gradient.
struct TensorRef {
    double* values = nullptr;
    double* grads = nullptr;
    std::size_t size = 0;
};

// All trainables of a network, in a fixed order (decision rows or chain
// factors first, then regressor blocks).
std::vector<TensorRef> trainable_tensors(SemNet& net, Gradients& grads);

struct OptimState {
    std::vector<std::vector<double>> moment1;  // adam m / sgd velocity / rmsprop buf
    std::vector<std::vector<double>> moment2;  // adam v / rmsprop square average
    long step_count = 0;
    double current_lr = 0.0;
};

OptimState make_optim_state(const std::vector<TensorRef>& tensors,
                            const OptimConfig& config);

// One update at state.current_lr. SGD: v <- mtm v + g, w <- w - lr v.
// RMSProp: square-average smoothing 0.99, eps 1e-8, momentum mtm.
// Adam: beta (0.9, 0.999), eps 1e-8, bias-corrected.
void step(OptimState& state, std::vector<TensorRef>& tensors,
          const OptimConfig& config);

// lr_e = lr0 * decay^e for the linear scheduler; half-cosine from lr0 to 0
// over config.epochs otherwise.
double decay_lr(OptimState& state, const OptimConfig& config, int epoch);

// Scales all gradients so their global L2 norm is at most max_norm.
void clip_grads(std::vector<TensorRef>& tensors, double max_norm);
void clip_grads(Gradients& grads, double max_norm);

}  // namespace semdt

#endif
