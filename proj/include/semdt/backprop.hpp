#ifndef SEMDT_BACKPROP_HPP
#define SEMDT_BACKPROP_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "semdt/semnet.hpp"

namespace semdt {

// Gradient buffers mirroring the trainable parameters. When the network
// carries an over-parameterization chain, d_factors replaces
// d_weights/d_biases (the plain decision matrix is not trained then).
struct Gradients {
    Matrix d_weights;                  // K x n
    std::vector<double> d_biases;      // K
    std::vector<Matrix> d_regressors;  // per output dim, L x (n+1)
    std::vector<Matrix> d_factors;     // per chain factor

    bool finite() const;
};

Gradients make_gradients(const SemNet& net);

struct LossReport {
    double loss = 0.0;        // batch mean, plus the L1 term when lambda > 0
    double l1_penalty = 0.0;  // lambda * sum |w|, zero until add_l1 runs
    std::size_t ste_substitutions = 0;  // argmax bypasses taken in backward
};

// Softmax cross-entropy with max-subtraction; label indexes scores.
double loss_cross_entropy(std::span<const double> class_scores, int label);

// Mean cross-entropy gradient over the batch. The max-pool routes gradient
// only to each class's argmax leaf; the ReLU subgradient at 0 is 0 on both
// branches. No estimator anywhere on this path.
LossReport backward_classification(const SemNet& net,
                                   std::span<const std::vector<double>> batch,
                                   std::span<const int> labels, Gradients& grads);

// Mean squared error on the selected-leaf outputs. Regressor gradients are
// exact; the argmax one-hot is bypassed with a single identity
// straight-through substitution per forward graph, after which gradient flows
// through leaf_mask, ReLU and the decision layer exactly as in classification.
LossReport backward_regression(const SemNet& net,
                               std::span<const std::vector<double>> batch,
                               const Matrix& targets, Gradients& grads);

// Adds lambda * sign(w) to the decision-weight gradients (factor entries when
// chained) and the matching penalty to the report. Biases and regressors are
// untouched; sign(0) = 0.
void add_l1(Gradients& grads, const SemNet& net, double lambda, LossReport& report);

}  // namespace semdt

#endif
