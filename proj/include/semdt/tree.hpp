#ifndef SEMDT_TREE_HPP
#define SEMDT_TREE_HPP

#include <span>
#include <vector>

#include "semdt/matrix.hpp"

namespace semdt {

enum class TreeTask { classification, regression };

// Node ids are global: internal nodes occupy [0, K) in breadth-first order
// from the root, leaves occupy [K, K + num_leaves) left to right.
struct InternalNode {
    int id = -1;
    int left = -1;
    int right = -1;
};

struct Leaf {
    int id = -1;
    int class_label = -1;  // classification payload; -1 = unset
    int regressor = -1;    // regression payload: row into a regressor block
};

class TreeStructure {
public:
    TreeStructure() = default;
    TreeStructure(std::vector<InternalNode> internal, std::vector<Leaf> leaves,
                  int height);

    int num_internal() const { return static_cast<int>(internal_.size()); }
    int num_leaves() const { return static_cast<int>(leaves_.size()); }
    int root() const { return 0; }
    int height() const { return height_; }

    bool is_leaf(int id) const { return id >= num_internal(); }
    const InternalNode& internal(int id) const { return internal_[id]; }
    const Leaf& leaf(int id) const { return leaves_[id - num_internal()]; }
    Leaf& leaf(int id) { return leaves_[id - num_internal()]; }
    // leaves indexed by slot (0-based position, id - K)
    const std::vector<Leaf>& leaves() const { return leaves_; }
    std::vector<Leaf>& leaves() { return leaves_; }

    int leaf_depth(int leaf_id) const;

private:
    void validate() const;

    std::vector<InternalNode> internal_;
    std::vector<Leaf> leaves_;
    int height_ = 0;
};

// One trainable hyperplane row per internal node: right iff A_i x + b_i > 0.
struct DecisionParams {
    Matrix weights;               // K x n
    std::vector<double> biases;   // K

    int dim() const { return static_cast<int>(weights.cols()); }
    int num_nodes() const { return static_cast<int>(weights.rows()); }
};

struct SignedDecision {
    int node = -1;
    bool goes_right = false;  // + iff the leaf lies in the node's right subtree
};
using SignedDecisionSet = std::vector<SignedDecision>;

// Complete binary tree: 2^height - 1 internal nodes, 2^height leaves.
TreeStructure build_balanced(int height);

// Minimal-height tree with one class per leaf; labels 0..num_classes-1 left
// to right, extra deep leaf pairs placed leftmost when the count is not a
// power of two.
TreeStructure build_class_subtree(int num_classes);

// Balanced tree of height (height - ceil(log2(num_classes))) whose leaves
// are each replaced by an independent class subtree copy.
TreeStructure graft_classifier(int height, int num_classes);

int class_subtree_height(int num_classes);

// Signed ancestor decisions on the root-to-leaf path, root first.
SignedDecisionSet leaf_decisions(const TreeStructure& tree, int leaf_id);

// Hard traversal: move right iff A_i x + b_i > 0, ties go left.
int traverse(const TreeStructure& tree, const DecisionParams& params,
             std::span<const double> x);

// A decoded, self-contained oblique decision tree: structure, hyperplanes,
// and leaf payloads. Regressor blocks are one (num_leaves x (n+1)) matrix per
// output dimension; row j = [theta_j | alpha_j].
struct ObliqueTree {
    TreeStructure tree;
    DecisionParams params;
    TreeTask task = TreeTask::classification;
    std::vector<Matrix> regressors;

    int output_dim() const {
        return task == TreeTask::regression ? static_cast<int>(regressors.size()) : 1;
    }

    int predict_class(std::span<const double> x) const;
    std::vector<double> predict_values(std::span<const double> x) const;
};

}  // namespace semdt

#endif
