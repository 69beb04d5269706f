#include "fairdice/momdp.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fairdice {

namespace {

constexpr double kRowSumTol = 1e-9;

bool is_prob_vector(const std::vector<double>& v, double tol) {
    double sum = 0.0;
    for (double x : v) {
        if (!std::isfinite(x) || x < 0.0)
            return false;
        sum += x;
    }
    return std::abs(sum - 1.0) <= tol;
}

} // namespace

MOMDP MOMDP::zeros(int n_states, int n_actions, int n_objectives, double gamma) {
    MOMDP m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.n_objectives = n_objectives;
    m.gamma = gamma;
    m.transition.assign(n_states, std::vector<std::vector<double>>(
                                      n_actions, std::vector<double>(n_states, 0.0)));
    m.reward.assign(n_states, std::vector<std::vector<double>>(
                                  n_actions, std::vector<double>(n_objectives, 0.0)));
    m.p0.assign(n_states, 0.0);
    return m;
}

TabularPolicy TabularPolicy::uniform(int n_states, int n_actions) {
    TabularPolicy pi;
    pi.probs.assign(n_states, std::vector<double>(n_actions, 1.0 / n_actions));
    return pi;
}

Occupancy Occupancy::zeros(int n_states, int n_actions) {
    Occupancy d;
    d.d.assign(n_states, std::vector<double>(n_actions, 0.0));
    return d;
}

double Occupancy::total_mass() const {
    double sum = 0.0;
    for (const auto& row : d)
        for (double x : row)
            sum += x;
    return sum;
}

std::vector<std::string> validate_momdp(const MOMDP& m) {
    std::vector<std::string> report;
    auto add = [&report](const std::string& msg) { report.push_back(msg); };

    if (m.n_states <= 0 || m.n_actions <= 0 || m.n_objectives <= 0)
        add("n_states, n_actions and n_objectives must be positive");
    if (!(m.gamma >= 0.0 && m.gamma < 1.0))
        add("gamma must lie in [0, 1)");
    if (static_cast<int>(m.transition.size()) != m.n_states ||
        static_cast<int>(m.reward.size()) != m.n_states ||
        static_cast<int>(m.p0.size()) != m.n_states) {
        add("table shapes do not match n_states");
        return report; // further indexing would be unsafe
    }

    for (int s = 0; s < m.n_states; ++s) {
        if (static_cast<int>(m.transition[s].size()) != m.n_actions ||
            static_cast<int>(m.reward[s].size()) != m.n_actions) {
            add("state " + std::to_string(s) + ": action dimension mismatch");
            continue;
        }
        for (int a = 0; a < m.n_actions; ++a) {
            const auto& row = m.transition[s][a];
            if (static_cast<int>(row.size()) != m.n_states) {
                add("T[" + std::to_string(s) + "][" + std::to_string(a) +
                    "]: next-state dimension mismatch");
            } else if (!is_prob_vector(row, kRowSumTol)) {
                add("T[" + std::to_string(s) + "][" + std::to_string(a) +
                    "] is not a probability vector");
            }
            if (static_cast<int>(m.reward[s][a].size()) != m.n_objectives) {
                add("r[" + std::to_string(s) + "][" + std::to_string(a) +
                    "]: objective dimension mismatch");
            } else {
                for (int i = 0; i < m.n_objectives; ++i) {
                    if (!std::isfinite(m.reward[s][a][i]))
                        add("r[" + std::to_string(s) + "][" + std::to_string(a) + "][" +
                            std::to_string(i) + "] is not finite");
                }
            }
        }
    }
    if (!is_prob_vector(m.p0, kRowSumTol))
        add("p0 is not a probability vector");
    return report;
}

MOMDP augment_absorbing(const MOMDP& m, const std::vector<int>& terminal_states) {
    for (int t : terminal_states)
        if (t < 0 || t >= m.n_states)
            throw std::invalid_argument("terminal state index out of range: " +
                                        std::to_string(t));

    const int sink = m.n_states;
    MOMDP out = MOMDP::zeros(m.n_states + 1, m.n_actions, m.n_objectives, m.gamma);

    std::vector<bool> terminal(m.n_states, false);
    for (int t : terminal_states)
        terminal[t] = true;

    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            if (terminal[s]) {
                out.transition[s][a][sink] = 1.0;
            } else {
                for (int sp = 0; sp < m.n_states; ++sp)
                    out.transition[s][a][sp] = m.transition[s][a][sp];
                out.reward[s][a] = m.reward[s][a];
            }
        }
        out.p0[s] = m.p0[s];
    }
    for (int a = 0; a < m.n_actions; ++a)
        out.transition[sink][a][sink] = 1.0;
    return out;
}

Occupancy policy_occupancy(const MOMDP& m, const TabularPolicy& pi) {
    const int S = m.n_states;
    const int A = m.n_actions;
    if (pi.n_states() != S || pi.n_actions() != A)
        throw std::invalid_argument("policy shape does not match MOMDP");

    // State marginals solve (I - gamma P_pi^T) rho = (1-gamma) p0 with
    // P_pi(s'|s) = sum_a pi(a|s) T(s'|s,a).
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(S, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double pa = pi.probs[s][a];
            if (pa == 0.0)
                continue;
            for (int sp = 0; sp < S; ++sp)
                system(sp, s) -= m.gamma * pa * m.transition[s][a][sp];
        }

    Eigen::VectorXd rhs(S);
    for (int s = 0; s < S; ++s)
        rhs(s) = (1.0 - m.gamma) * m.p0[s];

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    const Eigen::VectorXd rho = lu.solve(rhs);
    if (!rho.allFinite() || (system * rho - rhs).cwiseAbs().maxCoeff() > 1e-8)
        throw std::runtime_error("Bellman flow system is singular; MOMDP is malformed");

    Occupancy d = Occupancy::zeros(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            d.d[s][a] = pi.probs[s][a] * std::max(0.0, rho(s));
    return d;
}

std::vector<double> occupancy_returns(const MOMDP& m, const Occupancy& d) {
    if (d.n_states() != m.n_states || d.n_actions() != m.n_actions)
        throw std::invalid_argument("occupancy shape does not match MOMDP");
    std::vector<double> returns(m.n_objectives, 0.0);
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a) {
            const double mass = d.d[s][a];
            if (mass == 0.0)
                continue;
            for (int i = 0; i < m.n_objectives; ++i)
                returns[i] += mass * m.reward[s][a][i];
        }
    return returns;
}

std::vector<double> bellman_flow_residual(const MOMDP& m, const Occupancy& d) {
    if (d.n_states() != m.n_states || d.n_actions() != m.n_actions)
        throw std::invalid_argument("occupancy shape does not match MOMDP");
    std::vector<double> residual(m.n_states);
    for (int s = 0; s < m.n_states; ++s)
        residual[s] = (1.0 - m.gamma) * m.p0[s];
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a) {
            const double mass = d.d[s][a];
            residual[s] -= mass;
            if (mass == 0.0)
                continue;
            for (int sp = 0; sp < m.n_states; ++sp)
                residual[sp] += m.gamma * m.transition[s][a][sp] * mass;
        }
    return residual;
}

TabularPolicy policy_from_occupancy(const Occupancy& d, const TabularPolicy& fallback,
                                    double mass_eps) {
    const int S = d.n_states();
    const int A = d.n_actions();
    if (fallback.n_states() != S || fallback.n_actions() != A)
        throw std::invalid_argument("fallback policy shape does not match occupancy");

    TabularPolicy pi;
    pi.probs.assign(S, std::vector<double>(A, 0.0));
    for (int s = 0; s < S; ++s) {
        double mass = 0.0;
        for (int a = 0; a < A; ++a)
            mass += std::max(0.0, d.d[s][a]);
        if (mass > mass_eps) {
            for (int a = 0; a < A; ++a)
                pi.probs[s][a] = std::max(0.0, d.d[s][a]) / mass;
        } else {
            pi.probs[s] = fallback.probs[s];
        }
    }
    return pi;
}

std::string momdp_to_json(const MOMDP& m) {
    nlohmann::json j;
    j["n_states"] = m.n_states;
    j["n_actions"] = m.n_actions;
    j["n_objectives"] = m.n_objectives;
    j["gamma"] = m.gamma;
    j["p0"] = m.p0;
    j["transition"] = m.transition;
    j["reward"] = m.reward;
    return j.dump();
}

MOMDP momdp_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    MOMDP m;
    m.n_states = j.at("n_states").get<int>();
    m.n_actions = j.at("n_actions").get<int>();
    m.n_objectives = j.at("n_objectives").get<int>();
    m.gamma = j.at("gamma").get<double>();
    m.p0 = j.at("p0").get<std::vector<double>>();
    m.transition = j.at("transition").get<std::vector<std::vector<std::vector<double>>>>();
    m.reward = j.at("reward").get<std::vector<std::vector<std::vector<double>>>>();
    return m;
}

void save_momdp(const MOMDP& m, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << momdp_to_json(m) << "\n";
}

MOMDP load_momdp(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return momdp_from_json(buf.str());
}

std::string momdp_fingerprint(const MOMDP& m) {
    const std::string text = momdp_to_json(m);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace fairdice
