#include "semdt/semnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "semdt/hashing.hpp"

namespace semdt {

OverparamChain make_overparam_chain(int num_nodes, int input_dim,
                                    const std::vector<int>& widths, Rng& rng) {
    if (widths.empty()) {
        throw std::invalid_argument("overparam chain: widths must be nonempty");
    }
    for (int w : widths) {
        if (w < 1) throw std::invalid_argument("overparam chain: zero width");
    }
    std::vector<int> dims;
    dims.push_back(input_dim + 1);
    dims.insert(dims.end(), widths.begin(), widths.end());
    dims.push_back(num_nodes);

    OverparamChain chain;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Matrix factor(dims[i + 1], dims[i]);
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
        for (std::size_t k = 0; k < factor.size(); ++k) {
            factor.data()[k] = uniform_range(rng, -bound, bound);
        }
        chain.factors.push_back(std::move(factor));
    }
    return chain;
}

Matrix fold_chain(const OverparamChain& chain) {
    if (chain.empty()) throw std::invalid_argument("fold_chain: empty chain");
    Matrix folded = chain.factors.front();
    for (std::size_t i = 1; i < chain.factors.size(); ++i) {
        folded = matmul(chain.factors[i], folded);
    }
    return folded;
}

DecisionParams SemNet::effective_params() const {
    if (!has_chain()) return params;
    Matrix folded = fold_chain(chain);
    DecisionParams out;
    out.weights = Matrix(folded.rows(), folded.cols() - 1);
    out.biases.resize(folded.rows());
    for (std::size_t r = 0; r < folded.rows(); ++r) {
        for (std::size_t c = 0; c + 1 < folded.cols(); ++c) {
            out.weights(r, c) = folded(r, c);
        }
        out.biases[r] = folded(r, folded.cols() - 1);
    }
    return out;
}

namespace {

void init_decision_rows(Matrix& weights, std::vector<double>& biases, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(weights.cols() + 1));
    for (std::size_t k = 0; k < weights.size(); ++k) {
        weights.data()[k] = uniform_range(rng, -bound, bound);
    }
    biases.assign(weights.rows(), 0.0);
}

Matrix init_regressor_block(int num_leaves, int input_dim, Rng& rng) {
    Matrix block(num_leaves, input_dim + 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim + 1));
    for (int j = 0; j < num_leaves; ++j) {
        double* row = block.row(j);
        for (int c = 0; c < input_dim; ++c) row[c] = uniform_range(rng, -bound, bound);
        row[input_dim] = 0.0;
    }
    return block;
}

}  // namespace

SemNet encode(const TreeStructure& tree, int input_dim, TreeTask task, Rng& rng) {
    if (input_dim < 1) throw std::invalid_argument("encode: input_dim must be >= 1");
    const int k = tree.num_internal();
    const int num_leaves = tree.num_leaves();

    SemNet net;
    net.tree = tree;
    net.task = task;
    net.input_dim = input_dim;

    net.split_mask = Matrix(2 * k, k);
    for (int i = 0; i < k; ++i) {
        net.split_mask(i, i) = 1.0;
        net.split_mask(k + i, i) = -1.0;
    }

    net.leaf_mask = Matrix(num_leaves, 2 * k, 1.0);
    for (int j = 0; j < num_leaves; ++j) {
        for (const SignedDecision& d : leaf_decisions(tree, k + j)) {
            // a left descendant contradicts top_i, a right descendant bot_i
            int col = d.goes_right ? k + d.node : d.node;
            net.leaf_mask(j, col) = 0.0;
        }
    }

    if (task == TreeTask::classification) {
        int max_label = -1;
        for (const Leaf& leaf : tree.leaves()) {
            if (leaf.class_label < 0) {
                throw std::logic_error("encode: class payload unset on a leaf");
            }
            max_label = std::max(max_label, leaf.class_label);
        }
        net.num_classes = max_label + 1;
        net.class_map = Matrix(net.num_classes, num_leaves);
        for (int j = 0; j < num_leaves; ++j) {
            net.class_map(tree.leaves()[j].class_label, j) = 1.0;
        }
    } else {
        net.regressors.push_back(init_regressor_block(num_leaves, input_dim, rng));
    }

    net.params.weights = Matrix(k, input_dim);
    init_decision_rows(net.params.weights, net.params.biases, rng);
    return net;
}

SemNet encode(const TreeStructure& tree, int input_dim, TreeTask task,
              std::uint64_t seed) {
    Rng rng(seed);
    return encode(tree, input_dim, task, rng);
}

void set_output_dim(SemNet& net, int output_dim, Rng& rng) {
    if (net.task != TreeTask::regression) {
        throw std::logic_error("set_output_dim: regression networks only");
    }
    if (output_dim < 1) throw std::invalid_argument("set_output_dim: need >= 1");
    net.regressors.clear();
    for (int d = 0; d < output_dim; ++d) {
        net.regressors.push_back(
            init_regressor_block(net.num_leaves(), net.input_dim, rng));
    }
}

ForwardRecord forward(const SemNet& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.input_dim) {
        throw std::invalid_argument("forward: input dimension mismatch");
    }
    const int k = net.num_nodes();
    const int num_leaves = net.num_leaves();

    ForwardRecord rec;
    rec.preact.resize(k);

    if (net.has_chain()) {
        std::vector<double> z(x.begin(), x.end());
        z.push_back(1.0);
        for (const Matrix& factor : net.chain.factors) {
            rec.chain_inputs.push_back(z);
            std::vector<double> next(factor.rows());
            matvec(factor, z.data(), next.data());
            z = std::move(next);
        }
        rec.preact = z;
    } else {
        for (int i = 0; i < k; ++i) {
            rec.preact[i] =
                dot(net.params.weights.row(i), x.data(), x.size()) + net.params.biases[i];
        }
    }

    rec.split.resize(2 * k);
    for (int i = 0; i < k; ++i) {
        rec.split[i] = rec.preact[i] > 0.0 ? rec.preact[i] : 0.0;
        rec.split[k + i] = rec.preact[i] < 0.0 ? -rec.preact[i] : 0.0;
    }

    rec.leaf_scores.resize(num_leaves);
    matvec(net.leaf_mask, rec.split.data(), rec.leaf_scores.data());

    // Argmax with ties resolved toward the leaf hard traversal reaches when
    // zero decisions go left. With well-formed masks that leaf always attains
    // the maximum, so the tie-break also covers boundary inputs exactly.
    int best = 0;
    for (int j = 1; j < num_leaves; ++j) {
        if (rec.leaf_scores[j] > rec.leaf_scores[best]) best = j;
    }
    int id = net.tree.root();
    while (!net.tree.is_leaf(id)) {
        const InternalNode& node = net.tree.internal(id);
        id = rec.preact[id] > 0.0 ? node.right : node.left;
    }
    const int traversal_slot = id - k;
    rec.selected_leaf =
        rec.leaf_scores[traversal_slot] == rec.leaf_scores[best] ? traversal_slot : best;

    if (net.task == TreeTask::classification) {
        rec.class_scores.assign(net.num_classes, 0.0);
        rec.class_argmax.assign(net.num_classes, -1);
        for (int c = 0; c < net.num_classes; ++c) {
            double best = 0.0;
            int best_j = -1;
            for (int j = 0; j < num_leaves; ++j) {
                if (net.class_map(c, j) == 0.0) continue;
                if (best_j < 0 || rec.leaf_scores[j] > best) {
                    best = rec.leaf_scores[j];
                    best_j = j;
                }
            }
            rec.class_scores[c] = best;
            rec.class_argmax[c] = best_j;
        }
    } else {
        const int out_dim = net.output_dim();
        rec.leaf_values = Matrix(out_dim, num_leaves);
        rec.out.resize(out_dim);
        for (int d = 0; d < out_dim; ++d) {
            const Matrix& block = net.regressors[d];
            for (int j = 0; j < num_leaves; ++j) {
                const double* row = block.row(j);
                rec.leaf_values(d, j) = dot(row, x.data(), x.size()) + row[x.size()];
            }
            rec.out[d] = rec.leaf_values(d, rec.selected_leaf);
        }
    }
    return rec;
}

ObliqueTree decode(const SemNet& net) {
    ObliqueTree decoded;
    decoded.tree = net.tree;
    decoded.task = net.task;
    decoded.params = net.effective_params();
    decoded.regressors = net.regressors;
    return decoded;
}

std::size_t check_equivalence(const SemNet& net, const ObliqueTree& decoded,
                              std::span<const std::vector<double>> inputs) {
    std::size_t mismatches = 0;
    for (const std::vector<double>& x : inputs) {
        ForwardRecord rec = forward(net, x);
        int traversal_leaf = traverse(decoded.tree, decoded.params, x);
        if (rec.selected_leaf != traversal_leaf - net.num_nodes()) ++mismatches;
    }
    return mismatches;
}

std::string masks_hash(const SemNet& net) {
    std::string bytes;
    auto append_matrix = [&bytes](const Matrix& m) {
        char header[64];
        std::snprintf(header, sizeof(header), "%zux%zu:", m.rows(), m.cols());
        bytes += header;
        bytes.append(reinterpret_cast<const char*>(m.data()),
                     m.size() * sizeof(double));
    };
    append_matrix(net.split_mask);
    append_matrix(net.leaf_mask);
    append_matrix(net.class_map);
    return sha256_hex(bytes);
}

}  // namespace semdt
