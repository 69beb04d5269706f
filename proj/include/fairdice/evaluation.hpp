#pragma once

#include "fairdice/momdp.hpp"
#include "fairdice/scalarization.hpp"

#include <vector>

namespace fairdice {

struct PolicyEvaluation {
    std::vector<double> returns;
    WelfareMetrics metrics;
    Occupancy d_pi;
};

/// Exact model-based evaluation: d_pi from the Bellman flow solve,
/// returns J_i = sum d_pi r_i, and the three welfare metrics. Returns are
/// occupancy-normalized (sum d = 1) by default; `normalized = false`
/// rescales them by 1/(1-gamma) to the plain discounted-sum convention.
PolicyEvaluation evaluate_policy(const MOMDP& m, const TabularPolicy& pi,
                                 double clamp_eps = 1e-6, bool normalized = true);

/// D_f(d_star || d_D) = sum d_D f(d_star/d_D), 0 f(0/0) = 0.
double divergence_report(const Occupancy& d_star, const Occupancy& d_D, Divergence family);

} // namespace fairdice
