#pragma once

#include "fairdice/momdp.hpp"
#include "fairdice/scalarization.hpp"

#include <optional>
#include <vector>

namespace fairdice {

enum class PrimalVariant { P1, P2_reg, P3_reg };

/// A small welfare-maximization instance solved directly in occupancy
/// space. Deliberately avoids duality and conjugates so that agreement
/// with the dual solver is a genuine cross-check.
struct PrimalProblem {
    MOMDP m;
    PrimalVariant variant = PrimalVariant::P1;
    double alpha = 1.0;                  // utility family (P1, P2_reg)
    std::optional<Occupancy> d_data;     // required for regularized variants
    double beta = 1.0;                   // regularization (P2_reg, P3_reg)
    Divergence divergence = Divergence::chi2;
    std::vector<double> weights;         // linear scalarization (P3_reg)
};

struct PrimalSolution {
    Occupancy d;
    std::vector<double> k;  // per-objective returns of d
    double objective = 0.0;
    long iterations = 0;
    bool converged = false;
};

/// Projected gradient ascent on d over the Bellman flow polytope (support
/// restricted to d_data for the regularized variants). The projection is
/// exact simplex projection for single-state instances and Dykstra's
/// alternating projection (affine flow subspace / nonnegative orthant)
/// otherwise. Instances are limited to 200 state-action pairs.
///
/// `start` overrides the default interior start (the uniform policy's
/// occupancy for P1, the data distribution for the regularized variants).
PrimalSolution solve_primal(const PrimalProblem& prob, double tol = 1e-10,
                            const Occupancy* start = nullptr);

/// Exhaustive search over the action simplex of a single-state instance
/// (at most 3 actions) at the given resolution. Brackets solve_primal.
PrimalSolution grid_welfare_max(const PrimalProblem& prob, double resolution);

/// Single-state MOMDP with gamma = 0 and one self-loop per action:
/// occupancies are exactly the action simplex. rewards[a][i] is the
/// reward of action a on objective i.
MOMDP make_bandit(const std::vector<std::vector<double>>& rewards);

} // namespace fairdice
