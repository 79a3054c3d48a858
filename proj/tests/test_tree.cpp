#include <doctest.h>

#include "oracles.hpp"
#include "semdt/rng.hpp"
#include "semdt/tree.hpp"

using namespace semdt;

namespace {

// The worked 4-node / 5-leaf fixture used throughout: root 0 with internal
// children 1 (left) and 2 (right); node 1 has internal left child 3 and a
// leaf right child; nodes 3 and 2 have two leaves each. Leaves left to right:
// 4, 5, 6, 7, 8.
TreeStructure five_leaf_fixture() {
    std::vector<InternalNode> internal{
        {0, 1, 2}, {1, 3, 6}, {2, 7, 8}, {3, 4, 5}};
    std::vector<Leaf> leaves;
    for (int j = 0; j < 5; ++j) leaves.push_back({4 + j, -1, j});
    return TreeStructure(std::move(internal), std::move(leaves), 3);
}

DecisionParams random_params(const TreeStructure& tree, int dim, Rng& rng) {
    DecisionParams params;
    params.weights = Matrix(tree.num_internal(), dim);
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        params.weights.data()[i] = uniform_range(rng, -1.0, 1.0);
    }
    params.biases.resize(tree.num_internal());
    for (double& b : params.biases) b = uniform_range(rng, -0.5, 0.5);
    return params;
}

TreeStructure random_tree(Rng& rng) {
    const int height = 1 + static_cast<int>(uniform_index(rng, 4));
    return build_balanced(height);
}

}  // namespace

TEST_CASE("build_balanced node counts") {
    TreeStructure t1 = build_balanced(1);
    CHECK(t1.num_internal() == 1);
    CHECK(t1.num_leaves() == 2);

    TreeStructure t4 = build_balanced(4);
    CHECK(t4.num_internal() == 15);
    CHECK(t4.num_leaves() == 16);
    CHECK(t4.height() == 4);

    TreeStructure t3 = build_balanced(3);
    CHECK(t3.num_leaves() == t3.num_internal() + 1);
    for (int j = 0; j < t3.num_leaves(); ++j) {
        CHECK(t3.leaf_depth(t3.num_internal() + j) == 3);
    }

    CHECK_THROWS_AS(build_balanced(0), std::invalid_argument);
}

TEST_CASE("build_class_subtree shapes") {
    SUBCASE("three classes: right child of the root is a leaf") {
        TreeStructure t = build_class_subtree(3);
        CHECK(t.num_internal() == 2);
        CHECK(t.num_leaves() == 3);
        CHECK(t.height() == 2);
        const InternalNode& root = t.internal(0);
        CHECK(t.is_leaf(root.right));
        CHECK_FALSE(t.is_leaf(root.left));
        // depths left to right: 2, 2, 1
        CHECK(t.leaf_depth(2) == 2);
        CHECK(t.leaf_depth(3) == 2);
        CHECK(t.leaf_depth(4) == 1);
        // distinct classes, left to right
        CHECK(t.leaves()[0].class_label == 0);
        CHECK(t.leaves()[1].class_label == 1);
        CHECK(t.leaves()[2].class_label == 2);
    }
    SUBCASE("two classes") {
        TreeStructure t = build_class_subtree(2);
        CHECK(t.num_internal() == 1);
        CHECK(t.num_leaves() == 2);
    }
    SUBCASE("four classes: complete height-2 tree") {
        TreeStructure t = build_class_subtree(4);
        CHECK(t.num_internal() == 3);
        CHECK(t.num_leaves() == 4);
        for (int j = 0; j < 4; ++j) {
            CHECK(t.leaves()[j].class_label == j);
            CHECK(t.leaf_depth(3 + j) == 2);
        }
    }
    SUBCASE("five and six classes keep deeper pairs leftmost") {
        TreeStructure t5 = build_class_subtree(5);
        CHECK(t5.num_leaves() == 5);
        std::vector<int> depths;
        for (int j = 0; j < 5; ++j) depths.push_back(t5.leaf_depth(4 + j));
        CHECK(depths == std::vector<int>{3, 3, 2, 2, 2});

        TreeStructure t6 = build_class_subtree(6);
        depths.clear();
        for (int j = 0; j < 6; ++j) depths.push_back(t6.leaf_depth(5 + j));
        CHECK(depths == std::vector<int>{3, 3, 3, 3, 2, 2});
    }
    CHECK_THROWS_AS(build_class_subtree(1), std::invalid_argument);
}

TEST_CASE("graft_classifier") {
    SUBCASE("height 2, 3 classes is exactly the class subtree") {
        TreeStructure t = graft_classifier(2, 3);
        CHECK(t.num_internal() == 2);
        CHECK(t.num_leaves() == 3);
        CHECK(t.is_leaf(t.internal(0).right));
    }
    SUBCASE("height 3, 2 classes: 8 leaves alternating") {
        TreeStructure t = graft_classifier(3, 2);
        CHECK(t.num_internal() == 7);
        CHECK(t.num_leaves() == 8);
        for (int j = 0; j < 8; ++j) CHECK(t.leaves()[j].class_label == j % 2);
    }
    SUBCASE("height 4, 4 classes: 16 leaves, 4 per class by traversal") {
        TreeStructure t = graft_classifier(4, 4);
        CHECK(t.num_leaves() == 16);
        // count leaves per class by walking to every leaf
        std::vector<int> counts(4, 0);
        for (const Leaf& leaf : t.leaves()) {
            REQUIRE(leaf.class_label >= 0);
            REQUIRE(leaf.class_label < 4);
            counts[leaf.class_label] += 1;
        }
        CHECK(counts == std::vector<int>{4, 4, 4, 4});
    }
    SUBCASE("every class gets at least one leaf, every leaf one class") {
        for (int height = 2; height <= 4; ++height) {
            for (int classes = 2; classes <= (1 << height); ++classes) {
                TreeStructure t = graft_classifier(height, classes);
                std::vector<int> counts(classes, 0);
                for (const Leaf& leaf : t.leaves()) {
                    REQUIRE(leaf.class_label >= 0);
                    REQUIRE(leaf.class_label < classes);
                    counts[leaf.class_label] += 1;
                }
                for (int c = 0; c < classes; ++c) CHECK(counts[c] >= 1);
                CHECK(t.num_leaves() == t.num_internal() + 1);
            }
        }
    }
    CHECK_THROWS_AS(graft_classifier(1, 3), std::invalid_argument);
}

TEST_CASE("leaf_decisions on the five-leaf fixture") {
    TreeStructure t = five_leaf_fixture();

    // leaf 5: left of root, left of node 1, right of node 3
    SignedDecisionSet d5 = leaf_decisions(t, 5);
    REQUIRE(d5.size() == 3);
    CHECK(d5[0].node == 0);
    CHECK_FALSE(d5[0].goes_right);
    CHECK(d5[1].node == 1);
    CHECK_FALSE(d5[1].goes_right);
    CHECK(d5[2].node == 3);
    CHECK(d5[2].goes_right);

    // leaf 8: right of root, right of node 2
    SignedDecisionSet d8 = leaf_decisions(t, 8);
    REQUIRE(d8.size() == 2);
    CHECK(d8[0].node == 0);
    CHECK(d8[0].goes_right);
    CHECK(d8[1].node == 2);
    CHECK(d8[1].goes_right);

    SUBCASE("height-1 right leaf") {
        TreeStructure t1 = build_balanced(1);
        SignedDecisionSet d = leaf_decisions(t1, 2);
        REQUIRE(d.size() == 1);
        CHECK(d[0].node == 0);
        CHECK(d[0].goes_right);
    }
    SUBCASE("length equals depth") {
        for (int j = 0; j < t.num_leaves(); ++j) {
            const int id = t.num_internal() + j;
            CHECK(static_cast<int>(leaf_decisions(t, id).size()) == t.leaf_depth(id));
        }
    }
    CHECK_THROWS_AS(leaf_decisions(t, 0), std::invalid_argument);
    CHECK_THROWS_AS(leaf_decisions(t, 99), std::invalid_argument);
}

TEST_CASE("traverse") {
    TreeStructure t = build_balanced(1);
    DecisionParams params;
    params.weights = Matrix{{1.0}};
    params.biases = {0.0};

    const std::vector<double> right{2.0};
    const std::vector<double> boundary{0.0};
    CHECK(traverse(t, params, right) == 2);     // 2 > 0: right leaf
    CHECK(traverse(t, params, boundary) == 1);  // boundary goes left

    const std::vector<double> bad{1.0, 2.0};
    CHECK_THROWS_AS(traverse(t, params, bad), std::invalid_argument);
}

TEST_CASE("traverse agrees with per-leaf signed decision check") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        TreeStructure tree = random_tree(rng);
        const int dim = 1 + static_cast<int>(uniform_index(rng, 5));
        DecisionParams params = random_params(tree, dim, rng);
        for (int i = 0; i < 50; ++i) {
            std::vector<double> x(dim);
            for (double& v : x) v = uniform_range(rng, -2.0, 2.0);
            auto expected = oracles::brute_force_leaf(tree, params, x);
            REQUIRE(expected.has_value());  // exactly one leaf satisfied
            CHECK(traverse(tree, params, x) == *expected);
        }
    }
}

TEST_CASE("predict") {
    SUBCASE("classification payload") {
        TreeStructure t = build_balanced(1);
        t.leaves()[0].class_label = 0;
        t.leaves()[1].class_label = 1;
        ObliqueTree model{t, {Matrix{{1.0}}, {0.0}}, TreeTask::classification, {}};
        CHECK(model.predict_class(std::vector<double>{2.0}) == 1);
    }
    SUBCASE("unset payload is an error") {
        ObliqueTree model{build_balanced(1), {Matrix{{1.0}}, {0.0}},
                          TreeTask::classification, {}};
        CHECK_THROWS_AS(model.predict_class(std::vector<double>{2.0}),
                        std::logic_error);
    }
    SUBCASE("regression leaf: theta x + alpha") {
        // right leaf theta = (-1), alpha = 1
        Matrix block(2, 2);
        block(1, 0) = -1.0;
        block(1, 1) = 1.0;
        ObliqueTree model{build_balanced(1), {Matrix{{1.0}}, {0.0}},
                          TreeTask::regression, {block}};
        auto out = model.predict_values(std::vector<double>{2.0});
        REQUIRE(out.size() == 1);
        CHECK(out[0] == doctest::Approx(-1.0));
    }
    SUBCASE("hand-built 2-leaf tree equals the closed-form piecewise function") {
        // split at x = 0; left leaf y = x, right leaf y = -2x + 1
        Matrix block(2, 2);
        block(0, 0) = 1.0;
        block(0, 1) = 0.0;
        block(1, 0) = -2.0;
        block(1, 1) = 1.0;
        ObliqueTree model{build_balanced(1), {Matrix{{1.0}}, {0.0}},
                          TreeTask::regression, {block}};
        Rng rng(3);
        for (int i = 0; i < 100; ++i) {
            const double x = uniform_range(rng, -4.0, 4.0);
            const double expected = oracles::piecewise_target(x);
            CHECK(model.predict_values(std::vector<double>{x})[0] ==
                  doctest::Approx(expected));
        }
    }
}

TEST_CASE("tree structural validation") {
    // duplicate child
    std::vector<InternalNode> bad{{0, 1, 1}};
    std::vector<Leaf> leaves{{1, -1, 0}, {2, -1, 1}};
    CHECK_THROWS_AS(TreeStructure(bad, leaves, 1), std::invalid_argument);

    // leaf count off
    std::vector<InternalNode> ok{{0, 1, 2}};
    std::vector<Leaf> three{{1, -1, 0}, {2, -1, 1}, {3, -1, 2}};
    CHECK_THROWS_AS(TreeStructure(ok, three, 1), std::invalid_argument);
}
