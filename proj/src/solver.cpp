#include "fairdice/solver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace fairdice {

namespace {

constexpr double kThetaCap = 27.631021115928547; // log(1e12)

/// Flattened view of one dual problem instance: the support of d_D with
/// rewards and sparse bootstrap rows (model modes), or the weighted sample
/// list (sampled mode).
struct Workspace {
    int S = 0, A = 0, I = 0;
    double gamma = 0.0;
    double beta = 0.0;
    Divergence family = Divergence::chi2;
    std::vector<double> p0;

    // Support of d_D, model modes.
    std::vector<int> sup_s, sup_a;
    std::vector<double> sup_dD;
    std::vector<double> sup_r;   // nsup * I
    std::vector<int> row_ptr;    // CSR over support entries
    std::vector<int> col_idx;
    std::vector<double> col_p;

    // Sampled mode.
    bool sampled = false;
    std::vector<int> smp_s, smp_a, smp_next;
    std::vector<double> smp_w;
    std::vector<double> smp_r; // nsmp * I

    const MOMDP* model = nullptr;
    const EmpiricalEstimates* est = nullptr;
};

const std::vector<std::vector<std::vector<double>>>&
transition_source(const MOMDP& m, const EmpiricalEstimates& est, EMode mode) {
    return mode == EMode::mle_model ? est.t_hat : m.transition;
}

Workspace make_workspace(const SolverConfig& cfg, const MOMDP& m,
                         const EmpiricalEstimates& est) {
    Workspace ws;
    ws.S = m.n_states;
    ws.A = m.n_actions;
    ws.I = m.n_objectives;
    ws.gamma = m.gamma;
    ws.beta = cfg.beta;
    ws.family = cfg.divergence;
    ws.p0 = (cfg.e_mode == EMode::exact_model) ? m.p0 : est.p0_hat;
    ws.model = &m;
    ws.est = &est;

    if (est.d_D.n_states() != ws.S || est.d_D.n_actions() != ws.A)
        throw std::invalid_argument("estimates shape does not match MOMDP");
    if (cfg.beta <= 0.0)
        throw std::invalid_argument("beta must be positive");

    if (cfg.e_mode == EMode::sampled) {
        ws.sampled = true;
        if (est.samples.empty())
            throw std::invalid_argument("sampled mode requires dataset-backed estimates");
        for (const auto& t : est.samples) {
            ws.smp_s.push_back(t.state);
            ws.smp_a.push_back(t.action);
            ws.smp_next.push_back(t.next_state);
            ws.smp_w.push_back(t.weight);
            for (int i = 0; i < ws.I; ++i)
                ws.smp_r.push_back(m.reward[t.state][t.action][i]);
        }
        return ws;
    }

    const auto& T = transition_source(m, est, cfg.e_mode);
    ws.row_ptr.push_back(0);
    for (int s = 0; s < ws.S; ++s)
        for (int a = 0; a < ws.A; ++a) {
            const double dD = est.d_D.d[s][a];
            if (dD <= 0.0)
                continue;
            ws.sup_s.push_back(s);
            ws.sup_a.push_back(a);
            ws.sup_dD.push_back(dD);
            for (int i = 0; i < ws.I; ++i)
                ws.sup_r.push_back(m.reward[s][a][i]);
            for (int sp = 0; sp < ws.S; ++sp)
                if (T[s][a][sp] != 0.0) {
                    ws.col_idx.push_back(sp);
                    ws.col_p.push_back(T[s][a][sp]);
                }
            ws.row_ptr.push_back(static_cast<int>(ws.col_idx.size()));
        }
    if (ws.sup_s.empty())
        throw std::invalid_argument("data distribution has empty support");
    return ws;
}

/// Dual objective and gradients at (nu, mu). The utility-conjugate block
/// is included only for objectives flagged in mu_active (empty = none,
/// i.e. frozen mu). Gradients may be null.
double eval_dual(const Workspace& ws, const AlphaFairness* utility,
                 const std::vector<char>& mu_active, const std::vector<double>& nu,
                 const std::vector<double>& mu, std::vector<double>* grad_nu,
                 std::vector<double>* grad_mu) {
    const double beta = ws.beta;
    double loss = 0.0;
    for (int s = 0; s < ws.S; ++s)
        loss += (1.0 - ws.gamma) * ws.p0[s] * nu[s];

    if (grad_nu) {
        grad_nu->assign(ws.S, 0.0);
        for (int s = 0; s < ws.S; ++s)
            (*grad_nu)[s] = (1.0 - ws.gamma) * ws.p0[s];
    }
    if (grad_mu)
        grad_mu->assign(ws.I, 0.0);

    if (!ws.sampled) {
        const std::size_t n = ws.sup_s.size();
        for (std::size_t k = 0; k < n; ++k) {
            const int s = ws.sup_s[k];
            double e = -nu[s];
            for (int j = ws.row_ptr[k]; j < ws.row_ptr[k + 1]; ++j)
                e += ws.gamma * ws.col_p[j] * nu[ws.col_idx[j]];
            const double* r = &ws.sup_r[k * ws.I];
            for (int i = 0; i < ws.I; ++i)
                e += mu[i] * r[i];

            const double dD = ws.sup_dD[k];
            loss += dD * beta * f_conj0(ws.family, e / beta);
            if (grad_nu || grad_mu) {
                const double d = f_conj0_prime(ws.family, e / beta) * dD;
                if (grad_nu) {
                    (*grad_nu)[s] -= d;
                    for (int j = ws.row_ptr[k]; j < ws.row_ptr[k + 1]; ++j)
                        (*grad_nu)[ws.col_idx[j]] += ws.gamma * ws.col_p[j] * d;
                }
                if (grad_mu)
                    for (int i = 0; i < ws.I; ++i)
                        (*grad_mu)[i] += d * r[i];
            }
        }
    } else {
        const std::size_t n = ws.smp_s.size();
        for (std::size_t k = 0; k < n; ++k) {
            double e = ws.gamma * nu[ws.smp_next[k]] - nu[ws.smp_s[k]];
            const double* r = &ws.smp_r[k * ws.I];
            for (int i = 0; i < ws.I; ++i)
                e += mu[i] * r[i];

            const double wk = ws.smp_w[k];
            loss += wk * beta * f_conj0(ws.family, e / beta);
            if (grad_nu || grad_mu) {
                const double d = f_conj0_prime(ws.family, e / beta) * wk;
                if (grad_nu) {
                    (*grad_nu)[ws.smp_s[k]] -= d;
                    (*grad_nu)[ws.smp_next[k]] += ws.gamma * d;
                }
                if (grad_mu)
                    for (int i = 0; i < ws.I; ++i)
                        (*grad_mu)[i] += d * r[i];
            }
        }
    }

    for (int i = 0; i < ws.I; ++i) {
        if (i < static_cast<int>(mu_active.size()) && mu_active[i]) {
            loss += utility->u_conj(-mu[i]);
            if (grad_mu)
                (*grad_mu)[i] -= utility->u_prime_inv(mu[i]);
        }
    }
    return loss;
}

double max_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

struct LbfgsPair {
    std::vector<double> s, y;
    double rho;
};

/// Two-loop recursion; returns the descent direction -H g.
std::vector<double> lbfgs_direction(const std::deque<LbfgsPair>& hist,
                                    const std::vector<double>& g) {
    std::vector<double> q = g;
    std::vector<double> alpha(hist.size());
    for (int k = static_cast<int>(hist.size()) - 1; k >= 0; --k) {
        double dot = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j)
            dot += hist[k].s[j] * q[j];
        alpha[k] = hist[k].rho * dot;
        for (std::size_t j = 0; j < q.size(); ++j)
            q[j] -= alpha[k] * hist[k].y[j];
    }
    if (!hist.empty()) {
        const auto& last = hist.back();
        double sy = 0.0, yy = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            sy += last.s[j] * last.y[j];
            yy += last.y[j] * last.y[j];
        }
        if (yy > 0.0) {
            const double scale = sy / yy;
            for (auto& x : q)
                x *= scale;
        }
    }
    for (auto& x : q)
        x = -x;
    return q;
}

struct MinimizeResult {
    long iterations = 0;
    bool converged = false;
    bool stalled = false;
};

/// Minimizes the dual over x = [nu; theta_active] with mu = exp(theta).
/// Quasi-Newton descent with Armijo backtracking by default; plain
/// fixed-step descent when cfg.fixed_step is set. Deterministic.
MinimizeResult minimize(const Workspace& ws, const SolverConfig& cfg,
                        const AlphaFairness* utility, const std::vector<char>& mu_active,
                        std::vector<double>& nu, std::vector<double>& mu,
                        std::vector<double>& grad_nu, std::vector<double>& grad_mu) {
    const int S = ws.S;
    std::vector<int> active_ids;
    for (int i = 0; i < ws.I; ++i)
        if (i < static_cast<int>(mu_active.size()) && mu_active[i])
            active_ids.push_back(i);
    const int n_theta = static_cast<int>(active_ids.size());
    const int n = S + n_theta;

    std::vector<double> x(n, 0.0);
    for (int s = 0; s < S; ++s)
        x[s] = nu[s];
    for (int j = 0; j < n_theta; ++j)
        x[S + j] = std::log(mu[active_ids[j]]);

    auto unpack = [&](const std::vector<double>& xv) {
        for (int s = 0; s < S; ++s)
            nu[s] = xv[s];
        for (int j = 0; j < n_theta; ++j)
            mu[active_ids[j]] = std::exp(xv[S + j]);
    };
    auto pack_grad = [&](std::vector<double>& g) {
        g.resize(n);
        for (int s = 0; s < S; ++s)
            g[s] = grad_nu[s];
        for (int j = 0; j < n_theta; ++j)
            g[S + j] = mu[active_ids[j]] * grad_mu[active_ids[j]];
    };
    auto grad_converged = [&]() {
        double gm = 0.0;
        for (int id : active_ids)
            gm = std::max(gm, std::abs(grad_mu[id]));
        return std::max(max_norm(grad_nu), gm) <= cfg.grad_tol;
    };

    unpack(x);
    double loss = eval_dual(ws, utility, mu_active, nu, mu, &grad_nu, &grad_mu);
    std::vector<double> g;
    pack_grad(g);

    std::deque<LbfgsPair> hist;
    MinimizeResult res;
    std::vector<double> x_try(n), g_prev;

    for (long iter = 0; iter < cfg.max_iters; ++iter) {
        res.iterations = iter;
        if (grad_converged()) {
            res.converged = true;
            return res;
        }

        std::vector<double> dir;
        if (cfg.fixed_step) {
            dir.resize(n);
            for (int j = 0; j < n; ++j)
                dir[j] = -g[j];
        } else {
            dir = lbfgs_direction(hist, g);
            double gd = 0.0;
            for (int j = 0; j < n; ++j)
                gd += g[j] * dir[j];
            if (!(gd < 0.0)) { // not a descent direction; restart
                hist.clear();
                for (int j = 0; j < n; ++j)
                    dir[j] = -g[j];
            }
        }

        double gd = 0.0;
        for (int j = 0; j < n; ++j)
            gd += g[j] * dir[j];

        double step = cfg.fixed_step ? cfg.learning_rate
                                     : (hist.empty() ? std::min(1.0, cfg.learning_rate) : 1.0);
        double new_loss = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 64; ++bt) {
            for (int j = 0; j < n; ++j)
                x_try[j] = x[j] + step * dir[j];
            for (int j = S; j < n; ++j)
                x_try[j] = std::clamp(x_try[j], -kThetaCap, kThetaCap);
            unpack(x_try);
            new_loss = eval_dual(ws, utility, mu_active, nu, mu, nullptr, nullptr);
            if (cfg.fixed_step || new_loss <= loss + 1e-4 * step * gd) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No decrease at the smallest step: numerically at the optimum.
            unpack(x);
            eval_dual(ws, utility, mu_active, nu, mu, &grad_nu, &grad_mu);
            res.stalled = true;
            res.converged = grad_converged();
            return res;
        }

        g_prev = g;
        std::swap(x, x_try);
        loss = new_loss;
        eval_dual(ws, utility, mu_active, nu, mu, &grad_nu, &grad_mu);
        pack_grad(g);

        if (!cfg.fixed_step) {
            LbfgsPair pair;
            pair.s.resize(n);
            pair.y.resize(n);
            double sy = 0.0, ss = 0.0, yy = 0.0;
            for (int j = 0; j < n; ++j) {
                pair.s[j] = x[j] - x_try[j];
                pair.y[j] = g[j] - g_prev[j];
                sy += pair.s[j] * pair.y[j];
                ss += pair.s[j] * pair.s[j];
                yy += pair.y[j] * pair.y[j];
            }
            if (sy > 1e-12 * std::sqrt(ss * yy) && sy > 0.0) {
                pair.rho = 1.0 / sy;
                hist.push_back(std::move(pair));
                if (hist.size() > 10)
                    hist.pop_front();
            }
        }
    }
    res.iterations = cfg.max_iters;
    res.converged = grad_converged();
    return res;
}

/// Objectives with no reward mass on the data support have no finite
/// optimal weight; they are frozen at mu = 1 and excluded from the
/// conjugate-utility block.
std::vector<char> reward_support_mask(const Workspace& ws, std::vector<double>* mass_out) {
    std::vector<double> mass(ws.I, 0.0);
    if (!ws.sampled) {
        for (std::size_t k = 0; k < ws.sup_s.size(); ++k)
            for (int i = 0; i < ws.I; ++i)
                mass[i] += ws.sup_dD[k] * ws.sup_r[k * ws.I + i];
    } else {
        for (std::size_t k = 0; k < ws.smp_s.size(); ++k)
            for (int i = 0; i < ws.I; ++i)
                mass[i] += ws.smp_w[k] * ws.smp_r[k * ws.I + i];
    }
    std::vector<char> mask(ws.I, 1);
    for (int i = 0; i < ws.I; ++i)
        mask[i] = mass[i] > 0.0 ? 1 : 0;
    if (mass_out)
        *mass_out = mass;
    return mask;
}

DualSolution finalize_solution(const Workspace& ws, const SolverConfig& cfg,
                               const MOMDP& m, const EmpiricalEstimates& est,
                               std::vector<double> nu, std::vector<double> mu,
                               const std::vector<char>& mu_active,
                               const AlphaFairness* utility, SolveDiagnostics diag) {
    DualSolution sol;
    sol.d_star = Occupancy::zeros(ws.S, ws.A);
    sol.w.assign(ws.S, std::vector<double>(ws.A, 0.0));

    if (!ws.sampled) {
        const auto e = advantage(nu, mu, m, est, cfg.e_mode);
        for (int s = 0; s < ws.S; ++s)
            for (int a = 0; a < ws.A; ++a) {
                sol.w[s][a] = f_conj0_prime(cfg.divergence, e[s][a] / cfg.beta);
                sol.d_star.d[s][a] = sol.w[s][a] * est.d_D.d[s][a];
            }
    } else {
        for (std::size_t k = 0; k < ws.smp_s.size(); ++k) {
            double e = ws.gamma * nu[ws.smp_next[k]] - nu[ws.smp_s[k]];
            for (int i = 0; i < ws.I; ++i)
                e += mu[i] * ws.smp_r[k * ws.I + i];
            sol.d_star.d[ws.smp_s[k]][ws.smp_a[k]] +=
                ws.smp_w[k] * f_conj0_prime(cfg.divergence, e / cfg.beta);
        }
        for (int s = 0; s < ws.S; ++s)
            for (int a = 0; a < ws.A; ++a)
                if (est.d_D.d[s][a] > 0.0)
                    sol.w[s][a] = sol.d_star.d[s][a] / est.d_D.d[s][a];
    }

    if (utility) {
        sol.k_star.assign(ws.I, 0.0);
        const auto returns = occupancy_returns(m, sol.d_star);
        for (int i = 0; i < ws.I; ++i)
            sol.k_star[i] = mu_active[i] ? utility->u_prime_inv(mu[i]) : returns[i];
    }
    sol.policy = policy_from_occupancy(sol.d_star, uniform_policy(m));
    sol.nu = std::move(nu);
    sol.mu = std::move(mu);
    sol.diagnostics = std::move(diag);
    return sol;
}

} // namespace

EMode e_mode_from_string(const std::string& tag) {
    if (tag == "exact" || tag == "exact_model")
        return EMode::exact_model;
    if (tag == "mle" || tag == "mle_model")
        return EMode::mle_model;
    if (tag == "sampled")
        return EMode::sampled;
    throw std::invalid_argument("unknown e_mode: " + tag);
}

std::string to_string(EMode mode) {
    switch (mode) {
    case EMode::exact_model: return "exact_model";
    case EMode::mle_model: return "mle_model";
    case EMode::sampled: return "sampled";
    }
    return "?";
}

std::vector<std::vector<double>> advantage(const std::vector<double>& nu,
                                           const std::vector<double>& mu, const MOMDP& m,
                                           const EmpiricalEstimates& est, EMode mode) {
    if (mode == EMode::sampled)
        throw std::invalid_argument(
            "sampled-mode advantages are per transition; use solve directly");
    for (double x : mu)
        if (!(x > 0.0))
            throw std::invalid_argument("mu must be entrywise positive");
    const auto& T = transition_source(m, est, mode);

    std::vector<std::vector<double>> e(m.n_states, std::vector<double>(m.n_actions, 0.0));
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a) {
            double v = -nu[s];
            for (int sp = 0; sp < m.n_states; ++sp)
                if (T[s][a][sp] != 0.0)
                    v += m.gamma * T[s][a][sp] * nu[sp];
            for (int i = 0; i < m.n_objectives; ++i)
                v += mu[i] * m.reward[s][a][i];
            e[s][a] = v;
        }
    return e;
}

double dual_loss(const std::vector<double>& nu, const std::vector<double>& mu,
                 const SolverConfig& cfg, const MOMDP& m, const EmpiricalEstimates& est) {
    const Workspace ws = make_workspace(cfg, m, est);
    const AlphaFairness utility(cfg.alpha == 0.0 ? 1.0 : cfg.alpha);
    std::vector<char> active(ws.I, cfg.alpha != 0.0 ? 1 : 0);
    return eval_dual(ws, &utility, active, nu, mu, nullptr, nullptr);
}

std::pair<std::vector<double>, std::vector<double>>
dual_gradients(const std::vector<double>& nu, const std::vector<double>& mu,
               const SolverConfig& cfg, const MOMDP& m, const EmpiricalEstimates& est) {
    const Workspace ws = make_workspace(cfg, m, est);
    const AlphaFairness utility(cfg.alpha == 0.0 ? 1.0 : cfg.alpha);
    std::vector<char> active(ws.I, cfg.alpha != 0.0 ? 1 : 0);
    std::vector<double> grad_nu, grad_mu;
    eval_dual(ws, &utility, active, nu, mu, &grad_nu, &grad_mu);
    return {std::move(grad_nu), std::move(grad_mu)};
}

DualSolution solve(const SolverConfig& cfg, const MOMDP& m, const EmpiricalEstimates& est) {
    if (cfg.alpha == 0.0) {
        // Linear utility: the marginal utility is constant, so the implicit
        // weights are fixed at 1 and the problem is the regularized
        // utilitarian special case.
        auto sol = solve_fixed(cfg, std::vector<double>(m.n_objectives, 1.0), m, est);
        sol.diagnostics.utilitarian_fixed = true;
        sol.diagnostics.warnings.push_back(
            "alpha = 0 is the linear (utilitarian) case; solved with fixed unit weights");
        const auto returns = occupancy_returns(m, sol.d_star);
        sol.k_star = returns;
        return sol;
    }

    const Workspace ws = make_workspace(cfg, m, est);
    const AlphaFairness utility(cfg.alpha);

    std::vector<double> reward_mass;
    std::vector<char> active = reward_support_mask(ws, &reward_mass);

    SolveDiagnostics diag;
    for (int i = 0; i < ws.I; ++i)
        if (!active[i])
            diag.warnings.push_back("objective " + std::to_string(i) +
                                    " has no reward mass in the data; weight frozen at 1");

    std::vector<double> nu(ws.S, 0.0), mu(ws.I, 1.0);
    std::vector<double> grad_nu, grad_mu;
    const auto res = minimize(ws, cfg, &utility, active, nu, mu, grad_nu, grad_mu);

    diag.iterations = res.iterations;
    diag.converged = res.converged;
    if (res.stalled && !res.converged)
        diag.warnings.push_back("line search stalled before reaching grad_tol");
    if (!res.converged && !res.stalled)
        diag.warnings.push_back("max_iters reached before grad_tol");
    diag.final_loss = eval_dual(ws, &utility, active, nu, mu, &grad_nu, &grad_mu);
    diag.grad_norm_nu = max_norm(grad_nu);
    double gm = 0.0;
    for (int i = 0; i < ws.I; ++i)
        if (active[i])
            gm = std::max(gm, std::abs(grad_mu[i]));
    diag.grad_norm_mu = gm;

    return finalize_solution(ws, cfg, m, est, std::move(nu), std::move(mu), active,
                             &utility, std::move(diag));
}

DualSolution solve_fixed(const SolverConfig& cfg, const std::vector<double>& mu_fixed,
                         const MOMDP& m, const EmpiricalEstimates& est) {
    if (static_cast<int>(mu_fixed.size()) != m.n_objectives)
        throw std::invalid_argument("mu_fixed must have one entry per objective");
    for (double x : mu_fixed)
        if (!(x > 0.0))
            throw std::invalid_argument("mu_fixed must be entrywise positive");

    const Workspace ws = make_workspace(cfg, m, est);
    const std::vector<char> active(ws.I, 0); // mu frozen

    std::vector<double> nu(ws.S, 0.0), mu = mu_fixed;
    std::vector<double> grad_nu, grad_mu;
    const auto res = minimize(ws, cfg, nullptr, active, nu, mu, grad_nu, grad_mu);

    SolveDiagnostics diag;
    diag.iterations = res.iterations;
    diag.converged = res.converged;
    if (res.stalled && !res.converged)
        diag.warnings.push_back("line search stalled before reaching grad_tol");
    if (!res.converged && !res.stalled)
        diag.warnings.push_back("max_iters reached before grad_tol");
    diag.final_loss = eval_dual(ws, nullptr, active, nu, mu, &grad_nu, &grad_mu);
    diag.grad_norm_nu = max_norm(grad_nu);
    diag.grad_norm_mu = 0.0;

    return finalize_solution(ws, cfg, m, est, std::move(nu), std::move(mu), active,
                             nullptr, std::move(diag));
}

double f_divergence(const Occupancy& d, const Occupancy& d_D, Divergence family) {
    if (d.n_states() != d_D.n_states() || d.n_actions() != d_D.n_actions())
        throw std::invalid_argument("occupancy shapes differ");
    double total = 0.0;
    for (int s = 0; s < d.n_states(); ++s)
        for (int a = 0; a < d.n_actions(); ++a) {
            const double base = d_D.d[s][a];
            if (base > 0.0) {
                total += base * f_eval(family, d.d[s][a] / base);
            } else if (d.d[s][a] > 1e-15) {
                return std::numeric_limits<double>::infinity();
            }
        }
    return total;
}

std::string solution_to_json(const DualSolution& sol, const SolverConfig& cfg) {
    nlohmann::json j;
    j["nu"] = sol.nu;
    j["mu"] = sol.mu;
    j["k_star"] = sol.k_star;
    j["w"] = sol.w;
    j["d_star"] = sol.d_star.d;
    j["policy"] = sol.policy.probs;
    j["diagnostics"] = {{"final_loss", sol.diagnostics.final_loss},
                        {"grad_norm_nu", sol.diagnostics.grad_norm_nu},
                        {"grad_norm_mu", sol.diagnostics.grad_norm_mu},
                        {"iterations", sol.diagnostics.iterations},
                        {"converged", sol.diagnostics.converged},
                        {"utilitarian_fixed", sol.diagnostics.utilitarian_fixed},
                        {"warnings", sol.diagnostics.warnings}};
    j["config"] = {{"beta", cfg.beta},
                   {"alpha", cfg.alpha},
                   {"divergence", to_string(cfg.divergence)},
                   {"e_mode", to_string(cfg.e_mode)},
                   {"grad_tol", cfg.grad_tol},
                   {"max_iters", cfg.max_iters}};
    return j.dump(2);
}

DualSolution solution_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    DualSolution sol;
    sol.nu = j.at("nu").get<std::vector<double>>();
    sol.mu = j.at("mu").get<std::vector<double>>();
    sol.k_star = j.at("k_star").get<std::vector<double>>();
    sol.w = j.at("w").get<std::vector<std::vector<double>>>();
    sol.d_star.d = j.at("d_star").get<std::vector<std::vector<double>>>();
    sol.policy.probs = j.at("policy").get<std::vector<std::vector<double>>>();
    const auto& d = j.at("diagnostics");
    sol.diagnostics.final_loss = d.at("final_loss").get<double>();
    sol.diagnostics.grad_norm_nu = d.at("grad_norm_nu").get<double>();
    sol.diagnostics.grad_norm_mu = d.at("grad_norm_mu").get<double>();
    sol.diagnostics.iterations = d.at("iterations").get<long>();
    sol.diagnostics.converged = d.at("converged").get<bool>();
    return sol;
}

} // namespace fairdice
