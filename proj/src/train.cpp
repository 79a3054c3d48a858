#include "semdt/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <span>
#include <stdexcept>

namespace semdt {

double evaluate(const ObliqueTree& model, const Dataset& dataset,
                const std::vector<int>& rows) {
    if (rows.empty()) throw std::invalid_argument("evaluate: empty row set");
    if (model.task == TreeTask::classification) {
        std::size_t correct = 0;
        for (int r : rows) {
            std::span<const double> x(dataset.features.row(r), dataset.features.cols());
            if (model.predict_class(x) == dataset.labels[r]) ++correct;
        }
        return 100.0 * static_cast<double>(correct) / static_cast<double>(rows.size());
    }
    // RMSE in original units: predictions and stored targets are both
    // de-standardized with the training statistics
    const Standardizer& stats = dataset.standardizer;
    double sq_sum = 0.0;
    std::size_t count = 0;
    for (int r : rows) {
        std::span<const double> x(dataset.features.row(r), dataset.features.cols());
        std::vector<double> pred = model.predict_values(x);
        for (std::size_t d = 0; d < pred.size(); ++d) {
            const double y_hat = stats.fitted() && !stats.target_stds.empty()
                                     ? stats.destandardize_target(pred[d], d)
                                     : pred[d];
            const double y = stats.fitted() && !stats.target_stds.empty()
                                 ? stats.destandardize_target(dataset.targets(r, d), d)
                                 : dataset.targets(r, d);
            const double err = y_hat - y;
            sq_sum += err * err;
            ++count;
        }
    }
    return std::sqrt(sq_sum / static_cast<double>(count));
}

namespace {

bool metric_improves(TreeTask task, double candidate, double best) {
    return task == TreeTask::classification ? candidate > best : candidate < best;
}

}  // namespace

RunResult fit(const Dataset& dataset, int height, const OptimConfig& config,
              std::uint64_t seed) {
    config.validate();
    if (dataset.train_indices.empty() || dataset.val_indices.empty()) {
        throw std::invalid_argument("fit: dataset needs train and val splits");
    }

    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(seed);

    SemNet net;
    if (dataset.task == TreeTask::classification) {
        net = encode(graft_classifier(height, dataset.num_classes),
                     dataset.num_features(), TreeTask::classification, rng);
    } else {
        net = encode(build_balanced(height), dataset.num_features(),
                     TreeTask::regression, rng);
        if (dataset.output_dim() > 1) set_output_dim(net, dataset.output_dim(), rng);
    }
    if (!config.overparams.empty()) {
        net.chain = make_overparam_chain(net.num_nodes(), net.input_dim,
                                         config.overparams, rng);
    }

    Gradients grads = make_gradients(net);
    std::vector<TensorRef> tensors = trainable_tensors(net, grads);
    OptimState state = make_optim_state(tensors, config);

    RunResult result;
    result.seed = seed;
    result.best_val_metric =
        dataset.task == TreeTask::classification ? -1.0 : std::numeric_limits<double>::infinity();

    std::vector<int> order = dataset.train_indices;
    std::vector<std::vector<double>> batch;
    std::vector<int> batch_labels;
    Matrix batch_targets;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        decay_lr(state, config, epoch);
        shuffle_in_place(order, rng);

        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(),
                                              start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            batch_labels.clear();
            for (std::size_t i = start; i < stop; ++i) {
                const int r = order[i];
                batch.emplace_back(dataset.features.row(r),
                                   dataset.features.row(r) + dataset.features.cols());
                if (dataset.task == TreeTask::classification) {
                    batch_labels.push_back(dataset.labels[r]);
                }
            }

            for (TensorRef& t : tensors) std::fill(t.grads, t.grads + t.size, 0.0);
            LossReport report;
            try {
                if (dataset.task == TreeTask::classification) {
                    report = backward_classification(net, batch, batch_labels, grads);
                } else {
                    batch_targets = Matrix(batch.size(), dataset.targets.cols());
                    for (std::size_t i = start; i < stop; ++i) {
                        for (std::size_t d = 0; d < dataset.targets.cols(); ++d) {
                            batch_targets(i - start, d) = dataset.targets(order[i], d);
                        }
                    }
                    report = backward_regression(net, batch, batch_targets, grads);
                }
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("fit aborted at epoch " + std::to_string(epoch) +
                                         " batch " + std::to_string(batches) + ": " + e.what());
            }
            add_l1(grads, net, config.lambda, report);
            if (!std::isfinite(report.loss)) {
                throw std::runtime_error("fit aborted at epoch " + std::to_string(epoch) +
                                         " batch " + std::to_string(batches) +
                                         ": non-finite loss");
            }
            if (config.grad_clip) clip_grads(tensors, *config.grad_clip);
            step(state, tensors, config);

            epoch_loss += report.loss;
            ++batches;
        }

        // model selection on the decoded hard tree
        ObliqueTree decoded = decode(net);
        const double val_metric = evaluate(decoded, dataset, dataset.val_indices);
        result.epochs.push_back(EpochLog{epoch, state.current_lr,
                                         epoch_loss / std::max(batches, 1), val_metric});
        if (metric_improves(dataset.task, val_metric, result.best_val_metric)) {
            result.best_val_metric = val_metric;
            result.best_epoch = epoch;
            result.best_net = net;
            result.best_tree = std::move(decoded);
        }
    }

    result.test_metric = evaluate(result.best_tree, dataset, dataset.test_indices);
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

AggregateResult run_seeds(const Dataset& dataset, int height,
                          const OptimConfig& config,
                          const std::vector<std::uint64_t>& seeds, int threads,
                          std::vector<RunResult>* runs_out) {
    if (seeds.empty()) throw std::invalid_argument("run_seeds: need at least one seed");

    AggregateResult agg;
    agg.height = height;
    agg.seeds = seeds;

    std::vector<RunResult> runs(seeds.size());
    std::vector<std::string> errors(seeds.size());

    if (threads <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            try {
                runs[i] = fit(dataset, height, config, seeds[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    } else {
        std::vector<std::future<void>> futures;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            futures.push_back(std::async(std::launch::async, [&, i] {
                try {
                    runs[i] = fit(dataset, height, config, seeds[i]);
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            }));
            if (futures.size() == static_cast<std::size_t>(threads)) {
                for (auto& f : futures) f.get();
                futures.clear();
            }
        }
        for (auto& f : futures) f.get();
    }

    double sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!errors[i].empty()) {
            agg.partial = true;
            agg.errors.push_back("seed " + std::to_string(seeds[i]) + ": " + errors[i]);
            continue;
        }
        agg.per_seed.push_back(runs[i].test_metric);
        sum += runs[i].test_metric;
        ++ok;
    }
    if (ok > 0) {
        agg.mean = sum / static_cast<double>(ok);
        double sq = 0.0;
        for (double v : agg.per_seed) sq += (v - agg.mean) * (v - agg.mean);
        agg.stddev = std::sqrt(sq / static_cast<double>(ok));
    }
    if (runs_out) *runs_out = std::move(runs);
    return agg;
}

std::string format_mean_std(double mean, double stddev, TreeTask task) {
    char buf[64];
    if (task == TreeTask::classification) {
        std::snprintf(buf, sizeof(buf), "%.1f ± %.1f", mean, stddev);
    } else {
        std::snprintf(buf, sizeof(buf), "%.3f ± %.3f", mean, stddev);
    }
    return buf;
}

}  // namespace semdt
