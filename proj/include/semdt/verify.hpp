#ifndef SEMDT_VERIFY_HPP
#define SEMDT_VERIFY_HPP

#include <cstdint>
#include <vector>

#include "semdt/semnet.hpp"

namespace semdt {

// Uniform samples in the standardized-feature box [-3, 3]^n.
std::vector<std::vector<double>> sample_box(int dim, std::size_t count, Rng& rng);

// One point per internal node, projected onto the node's hyperplane from a
// random box point, so the argmax tie-break sees A_i x + b_i ~ 0 inputs.
std::vector<std::vector<double>> boundary_points(const DecisionParams& params,
                                                 Rng& rng,
                                                 std::size_t per_node = 4);

struct EquivReport {
    std::size_t samples = 0;
    std::size_t mismatches = 0;
};

// Samples the box, adds constructed boundary points, and counts argmax-vs-
// traversal disagreements. A chained network is folded into its plain
// decision matrix first (the exported artifact's semantics).
EquivReport run_equiv_check(const SemNet& net, std::size_t samples,
                            std::uint64_t seed);

struct GradcheckReport {
    int trials = 0;
    double max_rel_error = 0.0;
    bool ste_paths_skipped = false;  // regression: decision side is an estimator
};

// Central finite differences (h = 1e-6) against the analytic gradients over
// random networks and batches. Classification checks every trainable;
// regression checks the exact theta/alpha paths only.
GradcheckReport run_gradcheck(TreeTask task, int trials, std::uint64_t seed);

}  // namespace semdt

#endif
