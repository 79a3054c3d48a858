#include "semdt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <utility>

namespace semdt {

TreeStructure::TreeStructure(std::vector<InternalNode> internal,
                             std::vector<Leaf> leaves, int height)
    : internal_(std::move(internal)), leaves_(std::move(leaves)), height_(height) {
    validate();
}

void TreeStructure::validate() const {
    const int k = num_internal();
    const int total = k + num_leaves();
    if (k < 1) throw std::invalid_argument("tree: needs at least one internal node");
    if (num_leaves() != k + 1) {
        throw std::invalid_argument("tree: leaf count must equal internal count + 1");
    }
    std::vector<int> seen(total, 0);
    for (int i = 0; i < k; ++i) {
        const InternalNode& node = internal_[i];
        if (node.id != i) throw std::invalid_argument("tree: internal ids must be 0..K-1");
        if (node.left == node.right) {
            throw std::invalid_argument("tree: children must be distinct");
        }
        for (int child : {node.left, node.right}) {
            if (child <= 0 || child >= total) {
                throw std::invalid_argument("tree: child id out of range");
            }
            if (seen[child]++) throw std::invalid_argument("tree: node has two parents");
        }
    }
    for (int j = 0; j < num_leaves(); ++j) {
        if (leaves_[j].id != k + j) {
            throw std::invalid_argument("tree: leaf ids must be K..K+L-1");
        }
    }
    if (seen[0]) throw std::invalid_argument("tree: root cannot be a child");
    for (int id = 1; id < total; ++id) {
        if (!seen[id]) throw std::invalid_argument("tree: unreachable node");
    }
}

int TreeStructure::leaf_depth(int leaf_id) const {
    return static_cast<int>(leaf_decisions(*this, leaf_id).size());
}

namespace {

// Construction-time node arena; renumbered into canonical ids afterwards.
struct ProtoNode {
    int left = -1;   // arena index
    int right = -1;
    int class_label = -1;
    bool is_leaf() const { return left < 0; }
};

struct Arena {
    std::vector<ProtoNode> nodes;

    int add_leaf(int class_label = -1) {
        nodes.push_back(ProtoNode{-1, -1, class_label});
        return static_cast<int>(nodes.size()) - 1;
    }
    int add_internal(int left, int right) {
        nodes.push_back(ProtoNode{left, right, -1});
        return static_cast<int>(nodes.size()) - 1;
    }
};

// Canonical renumbering: internal nodes breadth-first, leaves left to right.
TreeStructure finalize(const Arena& arena, int root) {
    std::vector<int> internal_order;
    std::deque<int> queue{root};
    while (!queue.empty()) {
        int idx = queue.front();
        queue.pop_front();
        if (arena.nodes[idx].is_leaf()) continue;
        internal_order.push_back(idx);
        queue.push_back(arena.nodes[idx].left);
        queue.push_back(arena.nodes[idx].right);
    }
    const int k = static_cast<int>(internal_order.size());
    std::vector<int> id_of(arena.nodes.size(), -1);
    for (int i = 0; i < k; ++i) id_of[internal_order[i]] = i;

    std::vector<InternalNode> internal(k);
    std::vector<Leaf> leaves;
    int max_depth = 0;
    // iterative in-order walk assigning leaf ids left to right
    struct Frame { int idx; int depth; };
    std::vector<Frame> stack{{root, 0}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        const ProtoNode& node = arena.nodes[f.idx];
        if (node.is_leaf()) {
            int id = k + static_cast<int>(leaves.size());
            id_of[f.idx] = id;
            leaves.push_back(Leaf{id, node.class_label,
                                  static_cast<int>(leaves.size())});
            if (f.depth > max_depth) max_depth = f.depth;
        } else {
            stack.push_back({node.right, f.depth + 1});
            stack.push_back({node.left, f.depth + 1});
        }
    }
    for (int i = 0; i < k; ++i) {
        const ProtoNode& node = arena.nodes[internal_order[i]];
        internal[i] = InternalNode{i, id_of[node.left], id_of[node.right]};
    }
    return TreeStructure(std::move(internal), std::move(leaves), max_depth);
}

int build_balanced_rec(Arena& arena, int height) {
    if (height == 0) return arena.add_leaf();
    int left = build_balanced_rec(arena, height - 1);
    int right = build_balanced_rec(arena, height - 1);
    return arena.add_internal(left, right);
}

// Tree with `count` leaves: a perfect tree of height ceil(log2 count) - 1
// whose leftmost leaves are split into deeper pairs until the count fits.
int build_counted_rec(Arena& arena, int count, int* next_class) {
    if (count == 1) return arena.add_leaf((*next_class)++);
    int depth = static_cast<int>(std::ceil(std::log2(static_cast<double>(count))));
    int perfect = 1 << (depth - 1);
    int extra = count - perfect;
    int left_extra = std::min(extra, perfect / 2);
    int left_count = (perfect > 1) ? perfect / 2 + left_extra : 1;
    int left = build_counted_rec(arena, left_count, next_class);
    int right = build_counted_rec(arena, count - left_count, next_class);
    return arena.add_internal(left, right);
}

}  // namespace

TreeStructure build_balanced(int height) {
    if (height < 1) throw std::invalid_argument("build_balanced: height must be >= 1");
    Arena arena;
    int root = build_balanced_rec(arena, height);
    return finalize(arena, root);
}

int class_subtree_height(int num_classes) {
    if (num_classes < 2) {
        throw std::invalid_argument("class subtree: need at least 2 classes");
    }
    return static_cast<int>(
        std::ceil(std::log2(static_cast<double>(num_classes))));
}

TreeStructure build_class_subtree(int num_classes) {
    class_subtree_height(num_classes);  // validates
    Arena arena;
    int next_class = 0;
    int root = build_counted_rec(arena, num_classes, &next_class);
    return finalize(arena, root);
}

TreeStructure graft_classifier(int height, int num_classes) {
    const int subtree_height = class_subtree_height(num_classes);
    if (height < subtree_height) {
        throw std::invalid_argument("graft_classifier: height too small for class count");
    }
    Arena arena;
    // build top levels, then an independent class subtree copy per leaf
    const int top_height = height - subtree_height;
    struct Builder {
        Arena& arena;
        int num_classes;
        int build(int levels) {
            if (levels == 0) {
                int next_class = 0;
                return build_counted_rec(arena, num_classes, &next_class);
            }
            int left = build(levels - 1);
            int right = build(levels - 1);
            return arena.add_internal(left, right);
        }
    } builder{arena, num_classes};
    int root = builder.build(top_height);
    return finalize(arena, root);
}

SignedDecisionSet leaf_decisions(const TreeStructure& tree, int leaf_id) {
    const int k = tree.num_internal();
    if (leaf_id < k || leaf_id >= k + tree.num_leaves()) {
        throw std::invalid_argument("leaf_decisions: not a leaf id");
    }
    // parent pointers recovered by a walk from the root
    std::vector<int> parent(k + tree.num_leaves(), -1);
    std::vector<bool> from_right(k + tree.num_leaves(), false);
    for (int i = 0; i < k; ++i) {
        const InternalNode& node = tree.internal(i);
        parent[node.left] = i;
        parent[node.right] = i;
        from_right[node.right] = true;
    }
    SignedDecisionSet path;
    for (int id = leaf_id; parent[id] >= 0; id = parent[id]) {
        path.push_back(SignedDecision{parent[id], from_right[id]});
    }
    std::reverse(path.begin(), path.end());
    return path;
}

int traverse(const TreeStructure& tree, const DecisionParams& params,
             std::span<const double> x) {
    if (static_cast<int>(x.size()) != params.dim()) {
        throw std::invalid_argument("traverse: input dimension mismatch");
    }
    if (params.num_nodes() != tree.num_internal()) {
        throw std::invalid_argument("traverse: params do not match tree");
    }
    int id = tree.root();
    while (!tree.is_leaf(id)) {
        double score = dot(params.weights.row(id), x.data(), x.size()) + params.biases[id];
        const InternalNode& node = tree.internal(id);
        id = score > 0.0 ? node.right : node.left;
    }
    return id;
}

int ObliqueTree::predict_class(std::span<const double> x) const {
    int leaf_id = traverse(tree, params, x);
    int label = tree.leaf(leaf_id).class_label;
    if (label < 0) throw std::logic_error("predict: leaf class payload unset");
    return label;
}

std::vector<double> ObliqueTree::predict_values(std::span<const double> x) const {
    if (regressors.empty()) throw std::logic_error("predict: regressors unset");
    int slot = traverse(tree, params, x) - tree.num_internal();
    std::vector<double> out(regressors.size());
    for (std::size_t d = 0; d < regressors.size(); ++d) {
        const Matrix& block = regressors[d];
        const double* row = block.row(slot);
        out[d] = dot(row, x.data(), x.size()) + row[x.size()];
    }
    return out;
}

}  // namespace semdt
