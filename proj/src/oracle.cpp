#include "fairdice/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fairdice {

namespace {

struct FreePairs {
    std::vector<int> s, a;
    int count() const { return static_cast<int>(s.size()); }
};

/// Objective value and gradient over the free coordinates. Returns -inf
/// outside the utility domain (rejected by the line search).
struct PrimalObjective {
    const PrimalProblem* prob;
    const FreePairs* pairs;
    std::vector<double> reward; // count * I (or scalarized for P3)
    std::vector<double> d_ref;  // d_data on free pairs (regularized variants)

    double value(const Eigen::VectorXd& d, Eigen::VectorXd* grad) const {
        const auto& p = *prob;
        const int n = pairs->count();
        const int I = p.m.n_objectives;
        if (grad)
            grad->setZero(n);

        double obj = 0.0;
        if (p.variant == PrimalVariant::P3_reg) {
            for (int k = 0; k < n; ++k) {
                obj += d[k] * reward[k];
                if (grad)
                    (*grad)[k] += reward[k];
            }
        } else {
            std::vector<double> returns(I, 0.0);
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < I; ++i)
                    returns[i] += d[k] * reward[k * I + i];
            const AlphaFairness utility(p.alpha);
            for (int i = 0; i < I; ++i) {
                if (returns[i] <= 0.0) {
                    if (p.alpha >= 1.0)
                        return -std::numeric_limits<double>::infinity();
                    returns[i] = 0.0;
                }
                obj += returns[i] > 0.0 ? utility.u(returns[i]) : 0.0;
            }
            if (grad) {
                for (int i = 0; i < I; ++i) {
                    const double up =
                        utility.u_prime(std::max(returns[i], 1e-12));
                    for (int k = 0; k < n; ++k)
                        (*grad)[k] += up * reward[k * I + i];
                }
            }
        }

        if (p.variant != PrimalVariant::P1) {
            for (int k = 0; k < n; ++k) {
                const double ratio = std::max(d[k], 0.0) / d_ref[k];
                obj -= p.beta * d_ref[k] * f_eval(p.divergence, ratio);
                if (grad)
                    (*grad)[k] -=
                        p.beta * f_prime(p.divergence, std::max(ratio, 1e-12));
            }
        }
        return obj;
    }
};

/// Euclidean projection onto {x >= 0, sum x = total} (Michelot).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& x, double total) {
    const int n = static_cast<int>(x.size());
    std::vector<double> u(x.data(), x.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cssv = 0.0, theta = 0.0;
    int rho = 0;
    for (int i = 0; i < n; ++i) {
        cssv += u[i];
        const double t = (cssv - total) / (i + 1);
        if (u[i] - t > 0.0) {
            rho = i + 1;
            theta = t;
        }
    }
    (void)rho;
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i)
        out[i] = std::max(0.0, x[i] - theta);
    return out;
}

/// Projector onto the Bellman flow polytope restricted to the free pairs.
class FlowProjector {
public:
    FlowProjector(const MOMDP& m, const FreePairs& pairs) {
        const int S = m.n_states;
        const int n = pairs.count();
        simplex_only_ = (S == 1);
        total_ = 1.0;
        if (simplex_only_)
            return;
        M_.setZero(S, n);
        for (int k = 0; k < n; ++k) {
            const int s = pairs.s[k];
            const int a = pairs.a[k];
            M_(s, k) += 1.0;
            for (int sp = 0; sp < S; ++sp)
                M_(sp, k) -= m.gamma * m.transition[s][a][sp];
        }
        b_.resize(S);
        for (int s = 0; s < S; ++s)
            b_[s] = (1.0 - m.gamma) * m.p0[s];
        cod_.compute(M_);
    }

    Eigen::VectorXd affine(const Eigen::VectorXd& x) const {
        return x - cod_.solve(M_ * x - b_);
    }

    /// Dykstra's algorithm for the intersection with the orthant.
    Eigen::VectorXd project(const Eigen::VectorXd& x0) const {
        if (simplex_only_)
            return project_simplex(x0, total_);
        Eigen::VectorXd x = x0;
        Eigen::VectorXd p = Eigen::VectorXd::Zero(x.size());
        Eigen::VectorXd q = Eigen::VectorXd::Zero(x.size());
        for (int iter = 0; iter < 4000; ++iter) {
            const Eigen::VectorXd y = affine(x + p);
            p = x + p - y;
            const Eigen::VectorXd z = (y + q).cwiseMax(0.0);
            const double change = (z - x).cwiseAbs().maxCoeff();
            q = y + q - z;
            x = z;
            if (change < 1e-13 && iter > 2)
                break;
        }
        return x;
    }

    double flow_residual(const Eigen::VectorXd& x) const {
        if (simplex_only_)
            return std::abs(x.sum() - total_);
        return (M_ * x - b_).cwiseAbs().maxCoeff();
    }

private:
    bool simplex_only_ = false;
    double total_ = 1.0;
    Eigen::MatrixXd M_;
    Eigen::VectorXd b_;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
};

FreePairs free_pairs(const PrimalProblem& prob) {
    FreePairs pairs;
    for (int s = 0; s < prob.m.n_states; ++s)
        for (int a = 0; a < prob.m.n_actions; ++a) {
            if (prob.variant != PrimalVariant::P1 &&
                prob.d_data->d[s][a] <= 0.0)
                continue;
            pairs.s.push_back(s);
            pairs.a.push_back(a);
        }
    return pairs;
}

PrimalObjective make_objective(const PrimalProblem& prob, const FreePairs& pairs) {
    PrimalObjective obj;
    obj.prob = &prob;
    obj.pairs = &pairs;
    const int I = prob.m.n_objectives;
    for (int k = 0; k < pairs.count(); ++k) {
        const int s = pairs.s[k];
        const int a = pairs.a[k];
        if (prob.variant == PrimalVariant::P3_reg) {
            double w = 0.0;
            for (int i = 0; i < I; ++i)
                w += prob.weights[i] * prob.m.reward[s][a][i];
            obj.reward.push_back(w);
        } else {
            for (int i = 0; i < I; ++i)
                obj.reward.push_back(prob.m.reward[s][a][i]);
        }
        if (prob.variant != PrimalVariant::P1)
            obj.d_ref.push_back(prob.d_data->d[s][a]);
    }
    return obj;
}

void validate_problem(const PrimalProblem& prob) {
    if (prob.m.n_states * prob.m.n_actions > 200)
        throw std::invalid_argument("primal oracle is limited to 200 state-action pairs");
    if (prob.variant != PrimalVariant::P1 && !prob.d_data.has_value())
        throw std::invalid_argument("regularized variants require d_data");
    if (prob.variant == PrimalVariant::P3_reg &&
        static_cast<int>(prob.weights.size()) != prob.m.n_objectives)
        throw std::invalid_argument("P3_reg requires one weight per objective");
}

Occupancy to_occupancy(const MOMDP& m, const FreePairs& pairs, const Eigen::VectorXd& d) {
    Occupancy out = Occupancy::zeros(m.n_states, m.n_actions);
    for (int k = 0; k < pairs.count(); ++k)
        out.d[pairs.s[k]][pairs.a[k]] = std::max(0.0, d[k]);
    return out;
}

} // namespace

PrimalSolution solve_primal(const PrimalProblem& prob, double tol, const Occupancy* start) {
    validate_problem(prob);
    const FreePairs pairs = free_pairs(prob);
    const PrimalObjective objective = make_objective(prob, pairs);
    const FlowProjector projector(prob.m, pairs);
    const int n = pairs.count();

    Eigen::VectorXd d(n);
    if (start) {
        for (int k = 0; k < n; ++k)
            d[k] = start->d[pairs.s[k]][pairs.a[k]];
    } else if (prob.variant == PrimalVariant::P1) {
        const Occupancy d0 = policy_occupancy(prob.m, TabularPolicy::uniform(
                                                          prob.m.n_states, prob.m.n_actions));
        for (int k = 0; k < n; ++k)
            d[k] = d0.d[pairs.s[k]][pairs.a[k]];
    } else {
        for (int k = 0; k < n; ++k)
            d[k] = prob.d_data->d[pairs.s[k]][pairs.a[k]];
    }
    d = projector.project(d);

    Eigen::VectorXd grad(n);
    double obj = objective.value(d, &grad);
    if (!std::isfinite(obj))
        throw std::runtime_error("primal start is outside the utility domain");

    PrimalSolution sol;
    double step = 1.0;
    constexpr long kMaxIters = 100000;
    int small_steps = 0;

    for (long iter = 0; iter < kMaxIters; ++iter) {
        sol.iterations = iter;
        Eigen::VectorXd y;
        double new_obj = -std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            y = projector.project(d + step * grad);
            new_obj = objective.value(y, nullptr);
            const double lin = grad.dot(y - d);
            if (std::isfinite(new_obj) && new_obj >= obj + 1e-4 * lin) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break;

        const double move = (y - d).cwiseAbs().maxCoeff();
        const double improve = new_obj - obj;
        d = y;
        obj = objective.value(d, &grad);
        step = std::min(step * 2.0, 1e6);

        if (move <= tol || improve <= tol * (1.0 + std::abs(obj)))
            ++small_steps;
        else
            small_steps = 0;
        if (small_steps >= 5) {
            sol.converged = true;
            break;
        }
    }

    sol.d = to_occupancy(prob.m, pairs, d);
    sol.k = occupancy_returns(prob.m, sol.d);
    sol.objective = obj;
    if (projector.flow_residual(d) > 1e-6)
        throw std::runtime_error("primal oracle: flow polytope projection failed");
    return sol;
}

PrimalSolution grid_welfare_max(const PrimalProblem& prob, double resolution) {
    validate_problem(prob);
    if (prob.m.n_states != 1 || prob.m.n_actions > 3)
        throw std::invalid_argument("grid search supports single-state instances with <= 3 actions");
    if (resolution <= 0.0 || resolution > 1.0)
        throw std::invalid_argument("resolution must lie in (0, 1]");

    const FreePairs pairs = free_pairs(prob);
    const PrimalObjective objective = make_objective(prob, pairs);
    const int n = pairs.count();
    const long steps = std::lround(1.0 / resolution);

    Eigen::VectorXd best(n), cand(n);
    double best_obj = -std::numeric_limits<double>::infinity();
    auto consider = [&](const Eigen::VectorXd& x) {
        const double v = objective.value(x, nullptr);
        if (v > best_obj) {
            best_obj = v;
            best = x;
        }
    };

    if (n == 1) {
        cand[0] = 1.0;
        consider(cand);
    } else if (n == 2) {
        for (long i = 0; i <= steps; ++i) {
            cand[0] = static_cast<double>(i) / steps;
            cand[1] = 1.0 - cand[0];
            consider(cand);
        }
    } else {
        for (long i = 0; i <= steps; ++i)
            for (long j = 0; i + j <= steps; ++j) {
                cand[0] = static_cast<double>(i) / steps;
                cand[1] = static_cast<double>(j) / steps;
                cand[2] = 1.0 - cand[0] - cand[1];
                consider(cand);
            }
    }

    PrimalSolution sol;
    sol.d = to_occupancy(prob.m, pairs, best);
    sol.k = occupancy_returns(prob.m, sol.d);
    sol.objective = best_obj;
    sol.converged = true;
    return sol;
}

MOMDP make_bandit(const std::vector<std::vector<double>>& rewards) {
    if (rewards.empty())
        throw std::invalid_argument("bandit needs at least one action");
    const int A = static_cast<int>(rewards.size());
    const int I = static_cast<int>(rewards[0].size());
    MOMDP m = MOMDP::zeros(1, A, I, 0.0);
    for (int a = 0; a < A; ++a) {
        if (static_cast<int>(rewards[a].size()) != I)
            throw std::invalid_argument("ragged bandit reward table");
        m.transition[0][a][0] = 1.0;
        m.reward[0][a] = rewards[a];
    }
    m.p0[0] = 1.0;
    return m;
}

} // namespace fairdice
