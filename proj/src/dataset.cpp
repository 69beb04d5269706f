#include "fairdice/dataset.hpp"

#include "fairdice/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fairdice {

namespace {

std::vector<double> scalarize_rewards(const MOMDP& m, const std::vector<double>& weights,
                                      int s) {
    std::vector<double> out(m.n_actions, 0.0);
    for (int a = 0; a < m.n_actions; ++a)
        for (int i = 0; i < m.n_objectives; ++i)
            out[a] += weights[i] * m.reward[s][a][i];
    return out;
}

double scalar_return(const MOMDP& m, const TabularPolicy& pi,
                     const std::vector<double>& weights) {
    const auto returns = occupancy_returns(m, policy_occupancy(m, pi));
    double total = 0.0;
    for (int i = 0; i < m.n_objectives; ++i)
        total += weights[i] * returns[i];
    return total;
}

TabularPolicy mix(const TabularPolicy& a, const TabularPolicy& b, double z) {
    TabularPolicy out = a;
    for (std::size_t s = 0; s < out.probs.size(); ++s)
        for (std::size_t k = 0; k < out.probs[s].size(); ++k)
            out.probs[s][k] = z * a.probs[s][k] + (1.0 - z) * b.probs[s][k];
    return out;
}

/// Absorbing states with all-zero rewards terminate episodes.
std::vector<bool> sink_states(const MOMDP& m) {
    std::vector<bool> sink(m.n_states, true);
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions && sink[s]; ++a) {
            if (m.transition[s][a][s] != 1.0)
                sink[s] = false;
            for (int i = 0; i < m.n_objectives; ++i)
                if (m.reward[s][a][i] != 0.0)
                    sink[s] = false;
        }
    return sink;
}

} // namespace

TabularPolicy uniform_policy(const MOMDP& m) {
    return TabularPolicy::uniform(m.n_states, m.n_actions);
}

TabularPolicy optimal_scalar_policy(const MOMDP& m, const std::vector<double>& weights) {
    if (static_cast<int>(weights.size()) != m.n_objectives)
        throw std::invalid_argument("weights must have one entry per objective");
    for (double w : weights)
        if (!std::isfinite(w))
            throw std::invalid_argument("weights must be finite");

    const int S = m.n_states;
    const int A = m.n_actions;
    std::vector<std::vector<double>> scalar_r(S);
    for (int s = 0; s < S; ++s)
        scalar_r[s] = scalarize_rewards(m, weights, s);

    std::vector<double> value(S, 0.0), next(S, 0.0);
    std::vector<int> best_action(S, 0);
    constexpr int kMaxIters = 200000;
    constexpr double kTol = 1e-10;

    for (int iter = 0; iter < kMaxIters; ++iter) {
        double residual = 0.0;
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int arg = 0;
            for (int a = 0; a < A; ++a) {
                double q = scalar_r[s][a];
                for (int sp = 0; sp < S; ++sp)
                    q += m.gamma * m.transition[s][a][sp] * value[sp];
                if (q > best) {
                    best = q;
                    arg = a;
                }
            }
            next[s] = best;
            best_action[s] = arg;
            residual = std::max(residual, std::abs(next[s] - value[s]));
        }
        value.swap(next);
        if (residual < kTol) {
            TabularPolicy pi;
            pi.probs.assign(S, std::vector<double>(A, 0.0));
            for (int s = 0; s < S; ++s)
                pi.probs[s][best_action[s]] = 1.0;
            return pi;
        }
    }
    throw std::runtime_error("value iteration did not converge; gamma too close to 1?");
}

TabularPolicy mixture_policy_for_optimality(const MOMDP& m, double target,
                                            const std::vector<double>& weights) {
    if (target < 0.0 || target > 1.0)
        throw std::invalid_argument("target optimality must lie in [0, 1]");

    const TabularPolicy unif = uniform_policy(m);
    if (target == 0.0)
        return unif;
    const TabularPolicy opt = optimal_scalar_policy(m, weights);
    if (target == 1.0)
        return opt;

    const double j_unif = scalar_return(m, unif, weights);
    const double j_opt = scalar_return(m, opt, weights);
    if (std::abs(j_opt - j_unif) < 1e-12)
        return unif;

    auto normalized = [&](double z) {
        return (scalar_return(m, mix(opt, unif, z), weights) - j_unif) / (j_opt - j_unif);
    };

    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double g = normalized(mid);
        if (std::abs(g - target) <= 1e-4)
            return mix(opt, unif, mid);
        if (g < target)
            lo = mid;
        else
            hi = mid;
    }
    return mix(opt, unif, 0.5 * (lo + hi));
}

OfflineDataset sample_trajectories(const MOMDP& m, const TabularPolicy& pi, int n,
                                   int horizon, std::uint64_t seed) {
    if (n < 1 || horizon < 1)
        throw std::invalid_argument("need n >= 1 and horizon >= 1");
    if (pi.n_states() != m.n_states || pi.n_actions() != m.n_actions)
        throw std::invalid_argument("policy shape does not match MOMDP");

    const auto sink = sink_states(m);
    OfflineDataset ds;
    ds.env_fingerprint = momdp_fingerprint(m);
    ds.horizon = horizon;
    ds.seed = seed;
    ds.trajectories.resize(n);

    for (int traj = 0; traj < n; ++traj) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(traj));
        int s = static_cast<int>(rng.categorical(m.p0));
        auto& steps = ds.trajectories[traj].steps;
        for (int t = 0; t < horizon; ++t) {
            const int a = static_cast<int>(rng.categorical(pi.probs[s]));
            const int sp = static_cast<int>(rng.categorical(m.transition[s][a]));
            Step step;
            step.state = s;
            step.action = a;
            step.reward = m.reward[s][a];
            step.next_state = sp;
            step.done = sink[sp];
            steps.push_back(std::move(step));
            if (steps.back().done)
                break;
            s = sp;
        }
    }
    return ds;
}

EmpiricalEstimates empirical_estimates(const OfflineDataset& ds, const MOMDP& m,
                                       Weighting weighting) {
    if (ds.trajectories.empty())
        throw std::invalid_argument("dataset is empty");
    const int S = m.n_states;
    const int A = m.n_actions;

    EmpiricalEstimates est;
    est.gamma = m.gamma;
    est.d_D = Occupancy::zeros(S, A);
    est.p0_hat.assign(S, 0.0);
    est.visit_counts.assign(S, std::vector<int>(A, 0));
    est.unvisited.assign(S, std::vector<bool>(A, false));
    std::vector<std::vector<std::vector<double>>> counts(
        S, std::vector<std::vector<double>>(A, std::vector<double>(S, 0.0)));

    double total_weight = 0.0;
    for (const auto& traj : ds.trajectories) {
        if (traj.steps.empty())
            continue;
        est.p0_hat[traj.steps.front().state] += 1.0;
        double w = 1.0;
        for (const auto& step : traj.steps) {
            const double weight = (weighting == Weighting::discounted) ? w : 1.0;
            est.d_D.d[step.state][step.action] += weight;
            total_weight += weight;
            est.visit_counts[step.state][step.action] += 1;
            counts[step.state][step.action][step.next_state] += 1.0;
            est.samples.push_back({step.state, step.action, step.next_state, weight});
            w *= m.gamma;
        }
        // A terminated episode stays in its absorbing state forever; the
        // remaining discounted mass gamma^T / (1-gamma) is attributed to
        // that state, spread uniformly over actions. Only meaningful for
        // discounted weighting.
        const auto& last = traj.steps.back();
        if (last.done && weighting == Weighting::discounted && m.gamma > 0.0) {
            const double tail = w / (1.0 - m.gamma);
            for (int a = 0; a < A; ++a) {
                est.d_D.d[last.next_state][a] += tail / A;
                est.samples.push_back({last.next_state, a, last.next_state, tail / A});
            }
            total_weight += tail;
        }
    }

    for (auto& row : est.d_D.d)
        for (auto& x : row)
            x /= total_weight;
    for (auto& s : est.samples)
        s.weight /= total_weight;

    double n_traj = 0.0;
    for (const auto& traj : ds.trajectories)
        n_traj += traj.steps.empty() ? 0.0 : 1.0;
    for (auto& x : est.p0_hat)
        x /= n_traj;

    est.t_hat.assign(S, std::vector<std::vector<double>>(A, std::vector<double>(S, 0.0)));
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            double n = 0.0;
            for (int sp = 0; sp < S; ++sp)
                n += counts[s][a][sp];
            if (n > 0.0) {
                for (int sp = 0; sp < S; ++sp)
                    est.t_hat[s][a][sp] = counts[s][a][sp] / n;
            } else {
                est.unvisited[s][a] = true;
                est.t_hat[s][a][s] = 1.0; // self-loop placeholder
            }
        }
    return est;
}

EmpiricalEstimates exact_estimates(const MOMDP& m, const Occupancy& d_data) {
    if (d_data.n_states() != m.n_states || d_data.n_actions() != m.n_actions)
        throw std::invalid_argument("occupancy shape does not match MOMDP");
    EmpiricalEstimates est;
    est.gamma = m.gamma;
    est.d_D = d_data;
    const double mass = est.d_D.total_mass();
    if (mass <= 0.0)
        throw std::invalid_argument("data distribution has no mass");
    for (auto& row : est.d_D.d)
        for (auto& x : row)
            x /= mass;
    est.p0_hat = m.p0;
    est.t_hat = m.transition;
    est.visit_counts.assign(m.n_states, std::vector<int>(m.n_actions, 1));
    est.unvisited.assign(m.n_states, std::vector<bool>(m.n_actions, false));
    return est;
}

void save_dataset(const OfflineDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    nlohmann::json header;
    header["version"] = 1;
    header["env_fingerprint"] = ds.env_fingerprint;
    header["horizon"] = ds.horizon;
    header["seed"] = ds.seed;
    out << header.dump() << "\n";
    for (const auto& traj : ds.trajectories) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : traj.steps)
            steps.push_back({s.state, s.action, s.reward, s.next_state, s.done});
        nlohmann::json line;
        line["steps"] = std::move(steps);
        out << line.dump() << "\n";
    }
}

OfflineDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("dataset file is empty: " + path);

    OfflineDataset ds;
    try {
        nlohmann::json header = nlohmann::json::parse(line);
        if (header.at("version").get<int>() != 1)
            throw std::runtime_error("unsupported dataset schema version");
        ds.env_fingerprint = header.at("env_fingerprint").get<std::string>();
        ds.horizon = header.at("horizon").get<int>();
        ds.seed = header.at("seed").get<std::uint64_t>();

        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            nlohmann::json j = nlohmann::json::parse(line);
            Trajectory traj;
            for (const auto& step : j.at("steps")) {
                Step s;
                s.state = step.at(0).get<int>();
                s.action = step.at(1).get<int>();
                s.reward = step.at(2).get<std::vector<double>>();
                s.next_state = step.at(3).get<int>();
                s.done = step.at(4).get<bool>();
                traj.steps.push_back(std::move(s));
            }
            ds.trajectories.push_back(std::move(traj));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed dataset file " + path + ": " + e.what());
    }
    if (ds.trajectories.empty())
        throw std::runtime_error("dataset contains no trajectories: " + path);
    return ds;
}

std::vector<std::string> check_dataset_against_env(const OfflineDataset& ds,
                                                   const MOMDP& m) {
    std::vector<std::string> warnings;
    if (ds.env_fingerprint != momdp_fingerprint(m))
        warnings.push_back("dataset fingerprint does not match the environment");
    for (const auto& traj : ds.trajectories)
        for (const auto& s : traj.steps)
            if (s.state < 0 || s.state >= m.n_states || s.action < 0 ||
                s.action >= m.n_actions || s.next_state < 0 || s.next_state >= m.n_states) {
                warnings.push_back("dataset contains out-of-range indices");
                return warnings;
            }
    return warnings;
}

} // namespace fairdice
