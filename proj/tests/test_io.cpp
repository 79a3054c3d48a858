#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "semdt/registry.hpp"
#include "semdt/train.hpp"
#include "semdt/tree_io.hpp"

using namespace semdt;

namespace {

SemNet trained_toy_net(TreeTask task, std::uint64_t seed) {
    Rng rng(seed);
    if (task == TreeTask::classification) {
        SemNet net = encode(graft_classifier(3, 3), 4, TreeTask::classification, rng);
        for (std::size_t i = 0; i < net.params.weights.size(); ++i) {
            net.params.weights.data()[i] = uniform_range(rng, -1.0, 1.0);
        }
        for (double& b : net.params.biases) b = uniform_range(rng, -0.3, 0.3);
        return net;
    }
    SemNet net = encode(build_balanced(2), 3, TreeTask::regression, rng);
    for (std::size_t i = 0; i < net.params.weights.size(); ++i) {
        net.params.weights.data()[i] = uniform_range(rng, -1.0, 1.0);
    }
    return net;
}

}  // namespace

TEST_CASE("export -> import -> predict roundtrip") {
    SemNet net = trained_toy_net(TreeTask::classification, 61);
    ObliqueTree model = decode(net);
    ObliqueTree restored = import_tree(export_tree(model));

    Rng rng(62);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> x(4);
        for (double& v : x) v = uniform_range(rng, -3.0, 3.0);
        CHECK(restored.predict_class(x) == model.predict_class(x));
        // byte-exact coefficients survive the JSON round trip
    }
    CHECK(restored.params.weights == model.params.weights);
    CHECK(restored.params.biases == model.params.biases);
    CHECK(restored.tree.height() == model.tree.height());
}

TEST_CASE("regression tree roundtrip keeps regressors exactly") {
    SemNet net = trained_toy_net(TreeTask::regression, 63);
    ObliqueTree model = decode(net);
    ObliqueTree restored = import_tree(export_tree(model));
    CHECK(restored.regressors[0] == model.regressors[0]);

    Rng rng(64);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(3);
        for (double& v : x) v = uniform_range(rng, -2.0, 2.0);
        CHECK(restored.predict_values(x)[0] ==
              doctest::Approx(model.predict_values(x)[0]).epsilon(1e-15));
    }
}

TEST_CASE("de-standardized tree on raw inputs equals standardized tree") {
    Standardizer stats;
    stats.means = {2.0, -1.0, 0.5};
    stats.stds = {1.5, 0.25, 3.0};
    stats.target_means = {10.0};
    stats.target_stds = {4.0};

    SUBCASE("classification hyperplanes") {
        SemNet net = trained_toy_net(TreeTask::classification, 65);
        ObliqueTree model = decode(net);
        // 4 features: extend stats
        Standardizer stats4 = stats;
        stats4.means.push_back(1.0);
        stats4.stds.push_back(0.75);
        ObliqueTree raw_model = destandardize_tree(model, stats4);

        Rng rng(66);
        for (int i = 0; i < 500; ++i) {
            std::vector<double> raw(4), standardized(4);
            for (int c = 0; c < 4; ++c) {
                raw[c] = uniform_range(rng, -5.0, 5.0);
                standardized[c] = (raw[c] - stats4.means[c]) / stats4.stds[c];
            }
            CHECK(raw_model.predict_class(raw) == model.predict_class(standardized));
        }
    }
    SUBCASE("regression values come back in original units") {
        SemNet net = trained_toy_net(TreeTask::regression, 67);
        ObliqueTree model = decode(net);
        ObliqueTree raw_model = destandardize_tree(model, stats);

        Rng rng(68);
        for (int i = 0; i < 500; ++i) {
            std::vector<double> raw(3), standardized(3);
            for (int c = 0; c < 3; ++c) {
                raw[c] = uniform_range(rng, -5.0, 5.0);
                standardized[c] = (raw[c] - stats.means[c]) / stats.stds[c];
            }
            const double standardized_out = model.predict_values(standardized)[0];
            const double expected = standardized_out * 4.0 + 10.0;
            CHECK(raw_model.predict_values(raw)[0] ==
                  doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("export of an untrained network is valid and loadable") {
    SemNet net = encode(graft_classifier(2, 2), 5, TreeTask::classification, 1);
    nlohmann::json doc = export_tree(decode(net));
    CHECK(doc.at("n") == 5);
    CHECK(doc.at("task") == "classification");
    CHECK(doc.at("nodes").size() == 3);
    CHECK(doc.at("leaves").size() == 4);
    ObliqueTree restored = import_tree(doc);
    CHECK(restored.tree.num_leaves() == 4);
}

TEST_CASE("checkpoint save and load") {
    SemNet net = trained_toy_net(TreeTask::regression, 71);
    Rng rng(72);
    net.chain = make_overparam_chain(net.num_nodes(), net.input_dim, {8}, rng);

    Standardizer stats;
    stats.means = {0.5, 0.5, 0.5};
    stats.stds = {2.0, 2.0, 2.0};
    stats.target_means = {3.0};
    stats.target_stds = {1.5};

    Checkpoint original{net, stats, {"cfghash", 42, false}};
    nlohmann::json doc = checkpoint_to_json(original);
    Checkpoint restored = checkpoint_from_json(doc);

    CHECK(restored.net.params.weights == net.params.weights);
    CHECK(restored.net.regressors[0] == net.regressors[0]);
    REQUIRE(restored.net.chain.size() == 1u + 1u);
    CHECK(restored.net.chain.factors[0] == net.chain.factors[0]);
    CHECK(restored.meta.seed == 42);
    CHECK(restored.meta.config_hash == "cfghash");
    REQUIRE(restored.standardizer.has_value());
    CHECK(restored.standardizer->target_stds == stats.target_stds);
    CHECK(masks_hash(restored.net) == masks_hash(net));

    SUBCASE("tampered tree structure is rejected by the masks hash") {
        nlohmann::json corrupt = doc;
        // swap one internal node's children: masks no longer match
        auto children = corrupt["tree"]["children"];
        std::swap(children[1][0], children[1][1]);
        corrupt["tree"]["children"] = children;
        CHECK_THROWS_WITH_AS(checkpoint_from_json(corrupt),
                             doctest::Contains("masks hash"), std::runtime_error);
    }
    SUBCASE("unsupported version is rejected") {
        nlohmann::json bad = doc;
        bad["version"] = 999;
        CHECK_THROWS_AS(checkpoint_from_json(bad), std::runtime_error);
    }
}

TEST_CASE("checkpoint json round-trips bit-exact doubles") {
    SemNet net = trained_toy_net(TreeTask::regression, 73);
    net.params.weights(0, 0) = 0.1 + 0.2;  // not exactly representable as text
    Checkpoint original{net, std::nullopt, {"", 0, false}};
    const std::string text = checkpoint_to_json(original).dump();
    Checkpoint restored = checkpoint_from_json(nlohmann::json::parse(text));
    CHECK(restored.net.params.weights(0, 0) == net.params.weights(0, 0));
}
