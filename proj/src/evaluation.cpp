#include "fairdice/evaluation.hpp"

#include "fairdice/solver.hpp"

namespace fairdice {

PolicyEvaluation evaluate_policy(const MOMDP& m, const TabularPolicy& pi,
                                 double clamp_eps, bool normalized) {
    PolicyEvaluation out;
    out.d_pi = policy_occupancy(m, pi);
    out.returns = occupancy_returns(m, out.d_pi);
    if (!normalized && m.gamma < 1.0)
        for (auto& r : out.returns)
            r /= 1.0 - m.gamma;
    out.metrics = welfare_metrics(out.returns, clamp_eps);
    return out;
}

double divergence_report(const Occupancy& d_star, const Occupancy& d_D,
                         Divergence family) {
    return f_divergence(d_star, d_D, family);
}

} // namespace fairdice
