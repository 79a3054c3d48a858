// Test-only oracles, deliberately independent of the library's own
// computation paths: brute-force leaf selection from signed decision sets,
// naive triple-loop matrix products, central finite differences, and a
// closed-form piecewise-linear generator.
#ifndef SEMDT_TESTS_ORACLES_HPP
#define SEMDT_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "semdt/matrix.hpp"
#include "semdt/tree.hpp"

namespace oracles {

// The leaf whose signed decisions all hold for x, by checking every leaf's
// decision set directly. D_i is true iff A_i x + b_i > 0; a zero score makes
// D_i false, so ties fall to the left like the traversal contract.
inline std::optional<int> brute_force_leaf(const semdt::TreeStructure& tree,
                                           const semdt::DecisionParams& params,
                                           const std::vector<double>& x) {
    std::optional<int> found;
    const int k = tree.num_internal();
    for (int j = 0; j < tree.num_leaves(); ++j) {
        bool all_true = true;
        for (const semdt::SignedDecision& d : semdt::leaf_decisions(tree, k + j)) {
            const double score =
                semdt::dot(params.weights.row(d.node), x.data(), x.size()) +
                params.biases[d.node];
            const bool decision_true = score > 0.0;
            if (decision_true != d.goes_right) {
                all_true = false;
                break;
            }
        }
        if (all_true) {
            if (found) return std::nullopt;  // not unique: contract violation
            found = k + j;
        }
    }
    return found;
}

inline semdt::Matrix naive_product(const semdt::Matrix& a, const semdt::Matrix& b) {
    semdt::Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) sum += a(i, k) * b(k, j);
            c(i, j) = sum;
        }
    }
    return c;
}

// Central finite difference of a scalar function at one coordinate.
inline double central_difference(const std::function<double()>& f, double* value,
                                 double h = 1e-6) {
    const double saved = *value;
    *value = saved + h;
    const double up = f();
    *value = saved - h;
    const double down = f();
    *value = saved;
    return (up - down) / (2.0 * h);
}

// Two-piece noiseless target: y = x for x < 0, y = -2x + 1 otherwise.
inline double piecewise_target(double x) { return x < 0.0 ? x : -2.0 * x + 1.0; }

inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace oracles

#endif
