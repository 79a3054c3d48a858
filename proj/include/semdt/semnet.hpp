#ifndef SEMDT_SEMNET_HPP
#define SEMDT_SEMNET_HPP

#include <span>
#include <string>
#include <vector>

#include "semdt/matrix.hpp"
#include "semdt/rng.hpp"
#include "semdt/tree.hpp"

namespace semdt {

// Chain of factor matrices whose product stands in for the decision matrix
// during training. Factors act on the homogeneous input (x, 1):
//   factors[0] is widths[0] x (n+1), factors.back() is K x widths[p-1].
struct OverparamChain {
    std::vector<Matrix> factors;

    bool empty() const { return factors.empty(); }
    std::size_t size() const { return factors.size(); }
};

OverparamChain make_overparam_chain(int num_nodes, int input_dim,
                                    const std::vector<int>& widths, Rng& rng);

// Product of all factors, shape K x (n+1); identity behavior for params when
// the chain is empty.
Matrix fold_chain(const OverparamChain& chain);

// The tree encoded as a network: a trainable decision layer plus fixed masks.
// Layer layout is frozen for export purposes: split outputs are ordered
// (top_0..top_{K-1}, bot_0..bot_{K-1}) and leaf_mask columns follow suit.
struct SemNet {
    TreeStructure tree;
    TreeTask task = TreeTask::classification;
    int input_dim = 0;
    int num_classes = 0;             // classification only

    DecisionParams params;           // trainable; ignored while chain in use
    OverparamChain chain;            // optional over-parameterization

    Matrix split_mask;               // fixed 2K x K, +1 to top_i, -1 to bot_i
    Matrix leaf_mask;                // fixed L x 2K, 0/1 connectivity
    Matrix class_map;                // fixed n_classes x L (classification)

    std::vector<Matrix> regressors;  // regression: per output dim, L x (n+1)

    int num_nodes() const { return tree.num_internal(); }
    int num_leaves() const { return tree.num_leaves(); }
    int output_dim() const {
        return task == TreeTask::regression ? static_cast<int>(regressors.size()) : 1;
    }
    bool has_chain() const { return !chain.empty(); }

    // Decision rows currently in effect (folds the chain when present).
    DecisionParams effective_params() const;
};

// Per-input activations kept for the backward pass.
struct ForwardRecord {
    std::vector<double> preact;        // I, size K
    std::vector<double> split;         // (top | bot), size 2K, post-ReLU
    std::vector<double> leaf_scores;   // L_j, size num_leaves
    int selected_leaf = -1;            // leaf slot (0-based)

    std::vector<double> class_scores;  // C, classification
    std::vector<int> class_argmax;     // winning leaf slot per class (maxpool)

    Matrix leaf_values;                // R, regression: out_dim x num_leaves
    std::vector<double> out;           // regression output per dimension

    std::vector<std::vector<double>> chain_inputs;  // z fed to each factor
};

SemNet encode(const TreeStructure& tree, int input_dim, TreeTask task, Rng& rng);
SemNet encode(const TreeStructure& tree, int input_dim, TreeTask task,
              std::uint64_t seed = 0);

// Multi-output regression: one regressor block per output dimension.
void set_output_dim(SemNet& net, int output_dim, Rng& rng);

ForwardRecord forward(const SemNet& net, std::span<const double> x);

ObliqueTree decode(const SemNet& net);

// Number of inputs on which the network's argmax leaf disagrees with hard
// traversal of the decoded tree; the contract is zero.
std::size_t check_equivalence(const SemNet& net, const ObliqueTree& decoded,
                              std::span<const std::vector<double>> inputs);

// Hash of the fixed masks; stable across a training run by construction.
std::string masks_hash(const SemNet& net);

}  // namespace semdt

#endif
