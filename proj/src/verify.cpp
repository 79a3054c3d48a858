#include "semdt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "semdt/backprop.hpp"
#include "semdt/optim.hpp"

namespace semdt {

std::vector<std::vector<double>> sample_box(int dim, std::size_t count, Rng& rng) {
    std::vector<std::vector<double>> points(count, std::vector<double>(dim));
    for (auto& x : points) {
        for (double& v : x) v = uniform_range(rng, -3.0, 3.0);
    }
    return points;
}

std::vector<std::vector<double>> boundary_points(const DecisionParams& params,
                                                 Rng& rng, std::size_t per_node) {
    std::vector<std::vector<double>> points;
    const int n = params.dim();
    for (int i = 0; i < params.num_nodes(); ++i) {
        const double* a = params.weights.row(i);
        const double norm_sq = dot(a, a, n);
        if (norm_sq == 0.0) continue;
        for (std::size_t s = 0; s < per_node; ++s) {
            std::vector<double> x(n);
            for (double& v : x) v = uniform_range(rng, -3.0, 3.0);
            const double score = dot(a, x.data(), n) + params.biases[i];
            const double t = score / norm_sq;
            for (int c = 0; c < n; ++c) x[c] -= t * a[c];
            points.push_back(std::move(x));
        }
    }
    return points;
}

EquivReport run_equiv_check(const SemNet& net, std::size_t samples,
                            std::uint64_t seed) {
    // Chained networks are checked in their folded form: that is the network
    // the exported tree must match exactly.
    const SemNet* target = &net;
    SemNet folded;
    if (net.has_chain()) {
        folded = net;
        folded.params = net.effective_params();
        folded.chain.factors.clear();
        target = &folded;
    }
    ObliqueTree decoded = decode(*target);

    Rng rng(seed);
    std::vector<std::vector<double>> inputs = sample_box(net.input_dim, samples, rng);
    std::vector<std::vector<double>> boundary = boundary_points(decoded.params, rng);
    inputs.insert(inputs.end(), boundary.begin(), boundary.end());

    EquivReport report;
    report.samples = inputs.size();
    report.mismatches = check_equivalence(*target, decoded, inputs);
    return report;
}

namespace {

double batch_loss(const SemNet& net, const std::vector<std::vector<double>>& batch,
                  const std::vector<int>& labels, const Matrix& targets) {
    double loss = 0.0;
    if (net.task == TreeTask::classification) {
        for (std::size_t r = 0; r < batch.size(); ++r) {
            ForwardRecord rec = forward(net, batch[r]);
            loss += loss_cross_entropy(rec.class_scores, labels[r]);
        }
        return loss / static_cast<double>(batch.size());
    }
    const int out_dim = net.output_dim();
    for (std::size_t r = 0; r < batch.size(); ++r) {
        ForwardRecord rec = forward(net, batch[r]);
        for (int d = 0; d < out_dim; ++d) {
            const double err = rec.out[d] - targets(r, d);
            loss += err * err;
        }
    }
    return loss / static_cast<double>(batch.size() * out_dim);
}

// mutable parameter spans of a network, regressors included
std::vector<std::pair<double*, std::size_t>> parameter_spans(SemNet& net,
                                                             bool regressors_only) {
    std::vector<std::pair<double*, std::size_t>> spans;
    if (!regressors_only) {
        spans.push_back({net.params.weights.data(), net.params.weights.size()});
        spans.push_back({net.params.biases.data(), net.params.biases.size()});
    }
    for (Matrix& block : net.regressors) spans.push_back({block.data(), block.size()});
    return spans;
}

}  // namespace

GradcheckReport run_gradcheck(TreeTask task, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("gradcheck: trials must be >= 1");
    constexpr double kStep = 1e-6;

    GradcheckReport report;
    report.trials = trials;
    report.ste_paths_skipped = task == TreeTask::regression;
    Rng rng(seed);

    for (int trial = 0; trial < trials; ++trial) {
        const int height = 1 + static_cast<int>(uniform_index(rng, 3));
        const int n = 2 + static_cast<int>(uniform_index(rng, 4));
        const std::size_t batch_size = 4 + uniform_index(rng, 5);

        SemNet net;
        std::vector<int> labels;
        Matrix targets;
        std::vector<std::vector<double>> batch;
        int num_classes = 0;
        if (task == TreeTask::classification) {
            num_classes = 2 + static_cast<int>(uniform_index(rng, (1 << height) - 1));
            net = encode(graft_classifier(height, num_classes), n,
                         TreeTask::classification, rng);
        } else {
            net = encode(build_balanced(height), n, TreeTask::regression, rng);
        }
        for (std::size_t r = 0; r < batch_size; ++r) {
            std::vector<double> x(n);
            for (double& v : x) v = uniform_range(rng, -2.0, 2.0);
            batch.push_back(std::move(x));
        }
        if (task == TreeTask::classification) {
            for (std::size_t r = 0; r < batch_size; ++r) {
                labels.push_back(static_cast<int>(uniform_index(rng, num_classes)));
            }
        } else {
            targets = Matrix(batch_size, 1);
            for (std::size_t r = 0; r < batch_size; ++r) {
                targets(r, 0) = uniform_range(rng, -2.0, 2.0);
            }
        }

        Gradients grads = make_gradients(net);
        if (task == TreeTask::classification) {
            backward_classification(net, batch, labels, grads);
        } else {
            backward_regression(net, batch, targets, grads);
        }

        std::vector<std::pair<double*, std::size_t>> spans =
            parameter_spans(net, task == TreeTask::regression);
        std::vector<const double*> grad_ptrs;
        if (task == TreeTask::classification) {
            grad_ptrs.push_back(grads.d_weights.data());
            grad_ptrs.push_back(grads.d_biases.data());
        }
        for (const Matrix& block : grads.d_regressors) grad_ptrs.push_back(block.data());

        for (std::size_t s = 0; s < spans.size(); ++s) {
            auto [values, size] = spans[s];
            for (std::size_t i = 0; i < size; ++i) {
                const double saved = values[i];
                values[i] = saved + kStep;
                const double up = batch_loss(net, batch, labels, targets);
                values[i] = saved - kStep;
                const double down = batch_loss(net, batch, labels, targets);
                values[i] = saved;
                const double fd = (up - down) / (2.0 * kStep);
                const double analytic = grad_ptrs[s][i];
                const double rel = std::abs(analytic - fd) /
                                   std::max({1.0, std::abs(analytic), std::abs(fd)});
                report.max_rel_error = std::max(report.max_rel_error, rel);
            }
        }
    }
    return report;
}

}  // namespace semdt
