#include "semdt/backprop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace semdt {

namespace {

bool all_finite(const double* values, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(values[i])) return false;
    }
    return true;
}

}  // namespace

bool Gradients::finite() const {
    if (!all_finite(d_weights.data(), d_weights.size())) return false;
    if (!all_finite(d_biases.data(), d_biases.size())) return false;
    for (const Matrix& m : d_regressors) {
        if (!all_finite(m.data(), m.size())) return false;
    }
    for (const Matrix& m : d_factors) {
        if (!all_finite(m.data(), m.size())) return false;
    }
    return true;
}

Gradients make_gradients(const SemNet& net) {
    Gradients grads;
    if (net.has_chain()) {
        for (const Matrix& factor : net.chain.factors) {
            grads.d_factors.emplace_back(factor.rows(), factor.cols());
        }
    } else {
        grads.d_weights = Matrix(net.num_nodes(), net.input_dim);
        grads.d_biases.assign(net.num_nodes(), 0.0);
    }
    for (const Matrix& block : net.regressors) {
        grads.d_regressors.emplace_back(block.rows(), block.cols());
    }
    return grads;
}

double loss_cross_entropy(std::span<const double> class_scores, int label) {
    if (label < 0 || label >= static_cast<int>(class_scores.size())) {
        throw std::invalid_argument("cross_entropy: label out of range");
    }
    double max_score = class_scores[0];
    for (double s : class_scores) max_score = std::max(max_score, s);
    double sum_exp = 0.0;
    for (double s : class_scores) sum_exp += std::exp(s - max_score);
    return std::log(sum_exp) - (class_scores[label] - max_score);
}

namespace {

void check_activations(const ForwardRecord& rec, std::size_t row) {
    if (!all_finite(rec.preact.data(), rec.preact.size()) ||
        !all_finite(rec.leaf_scores.data(), rec.leaf_scores.size())) {
        throw std::runtime_error("backward: non-finite activation at batch index " +
                                 std::to_string(row));
    }
}

// Shared tail of both backward passes: leaf-score gradient down through
// leaf_mask, ReLU and the decision layer (or the factor chain).
void backprop_from_leaf_scores(const SemNet& net, std::span<const double> x,
                               const ForwardRecord& rec,
                               const std::vector<double>& d_leaf_scores,
                               Gradients& grads) {
    const int k = net.num_nodes();
    const int num_leaves = net.num_leaves();

    std::vector<double> d_split(2 * k, 0.0);
    for (int j = 0; j < num_leaves; ++j) {
        const double dj = d_leaf_scores[j];
        if (dj == 0.0) continue;
        const double* mask_row = net.leaf_mask.row(j);
        for (int c = 0; c < 2 * k; ++c) d_split[c] += dj * mask_row[c];
    }

    std::vector<double> d_preact(k);
    for (int i = 0; i < k; ++i) {
        double g = 0.0;
        if (rec.preact[i] > 0.0) g = d_split[i];
        else if (rec.preact[i] < 0.0) g = -d_split[k + i];
        d_preact[i] = g;
    }

    if (net.has_chain()) {
        // walk factors last to first: dF = dz_out outer z_in, dz_in = F^T dz_out
        std::vector<double> dz = d_preact;
        for (std::size_t f = net.chain.factors.size(); f-- > 0;) {
            const Matrix& factor = net.chain.factors[f];
            const std::vector<double>& z_in = rec.chain_inputs[f];
            Matrix& d_factor = grads.d_factors[f];
            for (std::size_t r = 0; r < factor.rows(); ++r) {
                const double dr = dz[r];
                if (dr == 0.0) continue;
                double* grad_row = d_factor.row(r);
                for (std::size_t c = 0; c < factor.cols(); ++c) {
                    grad_row[c] += dr * z_in[c];
                }
            }
            if (f > 0) {
                std::vector<double> dz_in(factor.cols());
                matvec_transposed(factor, dz.data(), dz_in.data());
                dz = std::move(dz_in);
            }
        }
    } else {
        for (int i = 0; i < k; ++i) {
            const double di = d_preact[i];
            if (di == 0.0) continue;
            double* grad_row = grads.d_weights.row(i);
            for (int c = 0; c < net.input_dim; ++c) grad_row[c] += di * x[c];
            grads.d_biases[i] += di;
        }
    }
}

}  // namespace

LossReport backward_classification(const SemNet& net,
                                   std::span<const std::vector<double>> batch,
                                   std::span<const int> labels, Gradients& grads) {
    if (batch.empty()) throw std::invalid_argument("backward: empty batch");
    if (batch.size() != labels.size()) {
        throw std::invalid_argument("backward: batch/label size mismatch");
    }
    if (net.task != TreeTask::classification) {
        throw std::logic_error("backward_classification: not a classification net");
    }

    LossReport report;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    const int num_leaves = net.num_leaves();
    std::vector<double> probs(net.num_classes);
    std::vector<double> d_leaf_scores(num_leaves);

    for (std::size_t row = 0; row < batch.size(); ++row) {
        ForwardRecord rec = forward(net, batch[row]);
        check_activations(rec, row);
        report.loss += loss_cross_entropy(rec.class_scores, labels[row]) * inv_batch;

        double max_score = rec.class_scores[0];
        for (double s : rec.class_scores) max_score = std::max(max_score, s);
        double sum_exp = 0.0;
        for (int c = 0; c < net.num_classes; ++c) {
            probs[c] = std::exp(rec.class_scores[c] - max_score);
            sum_exp += probs[c];
        }

        std::fill(d_leaf_scores.begin(), d_leaf_scores.end(), 0.0);
        for (int c = 0; c < net.num_classes; ++c) {
            double d_class = (probs[c] / sum_exp - (c == labels[row] ? 1.0 : 0.0)) * inv_batch;
            // maxpool: gradient reaches only the class's argmax leaf
            d_leaf_scores[rec.class_argmax[c]] += d_class;
        }
        backprop_from_leaf_scores(net, batch[row], rec, d_leaf_scores, grads);
    }
    return report;
}

LossReport backward_regression(const SemNet& net,
                               std::span<const std::vector<double>> batch,
                               const Matrix& targets, Gradients& grads) {
    if (batch.empty()) throw std::invalid_argument("backward: empty batch");
    if (net.task != TreeTask::regression || net.regressors.empty()) {
        throw std::logic_error("backward_regression: regression head missing");
    }
    const int out_dim = net.output_dim();
    if (targets.rows() != batch.size() ||
        static_cast<int>(targets.cols()) != out_dim) {
        throw std::invalid_argument("backward: target shape mismatch");
    }

    LossReport report;
    const int num_leaves = net.num_leaves();
    const double inv_count = 1.0 / static_cast<double>(batch.size() * out_dim);
    std::vector<double> d_leaf_scores(num_leaves);

    for (std::size_t row = 0; row < batch.size(); ++row) {
        const std::vector<double>& x = batch[row];
        ForwardRecord rec = forward(net, x);
        check_activations(rec, row);

        std::fill(d_leaf_scores.begin(), d_leaf_scores.end(), 0.0);
        for (int d = 0; d < out_dim; ++d) {
            const double err = rec.out[d] - targets(row, d);
            report.loss += err * err * inv_count;
            const double g = 2.0 * err * inv_count;

            // exact path: only the selected leaf's regressor moves
            double* reg_row = grads.d_regressors[d].row(rec.selected_leaf);
            for (std::size_t c = 0; c < x.size(); ++c) reg_row[c] += g * x[c];
            reg_row[x.size()] += g;

            // straight-through: the one-hot is treated as identity in L,
            // so every leaf score picks up g * R_j
            for (int j = 0; j < num_leaves; ++j) {
                d_leaf_scores[j] += g * rec.leaf_values(d, j);
            }
        }
        report.ste_substitutions += 1;  // one argmax bypass per forward graph
        backprop_from_leaf_scores(net, x, rec, d_leaf_scores, grads);
    }
    return report;
}

void add_l1(Gradients& grads, const SemNet& net, double lambda, LossReport& report) {
    if (lambda < 0.0) throw std::invalid_argument("add_l1: lambda must be >= 0");
    if (lambda == 0.0) return;

    double penalty = 0.0;
    auto apply = [&](Matrix& d, const Matrix& w) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double v = w.data()[i];
            if (v > 0.0) {
                d.data()[i] += lambda;
            } else if (v < 0.0) {
                d.data()[i] -= lambda;
            }
            penalty += std::abs(v);
        }
    };
    if (net.has_chain()) {
        for (std::size_t f = 0; f < net.chain.factors.size(); ++f) {
            apply(grads.d_factors[f], net.chain.factors[f]);
        }
    } else {
        apply(grads.d_weights, net.params.weights);
    }
    report.l1_penalty = lambda * penalty;
    report.loss += report.l1_penalty;
}

}  // namespace semdt
