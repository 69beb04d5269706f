#include "fairdice/environments.hpp"

#include "fairdice/rng.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace fairdice {

namespace {

const std::vector<std::string> kFourRoomGrid = {
    ".....#.....", //
    ".....#.....", //
    "...........", //
    ".....#.....", //
    ".....#.....", //
    "#.####.....", //
    ".....###.##", //
    ".....#.....", //
    ".....#.....", //
    "...........", //
    ".....#.....", //
};

// Three goals chosen nearly equidistant from the start, one per remaining
// room: lower-left, upper-right, lower-right.
const std::vector<GridCell> kGoals3 = {{10, 2}, {0, 10}, {7, 8}};

// Eight goals spread along the map edges.
const std::vector<GridCell> kGoals8 = {{0, 0},  {0, 10},  {10, 0}, {10, 10},
                                       {4, 0},  {0, 4},   {5, 10}, {10, 6}};

// Action order: left, right, up, down.
constexpr std::array<int, 4> kDRow = {0, 0, -1, 1};
constexpr std::array<int, 4> kDCol = {-1, 1, 0, 0};

} // namespace

FourRoomConfig FourRoomConfig::standard(int n_objectives) {
    FourRoomConfig cfg;
    cfg.grid = kFourRoomGrid;
    cfg.n_objectives = n_objectives;
    if (n_objectives == 3)
        cfg.goal_cells = kGoals3;
    else if (n_objectives == 8)
        cfg.goal_cells = kGoals8;
    else
        throw std::invalid_argument("standard four-room layout ships 3 or 8 goals");
    return cfg;
}

BuiltEnv build_four_room(const FourRoomConfig& cfg) {
    const int rows = static_cast<int>(cfg.grid.size());
    if (rows == 0)
        throw std::invalid_argument("empty grid");
    const int cols = static_cast<int>(cfg.grid[0].size());
    for (const auto& line : cfg.grid)
        if (static_cast<int>(line.size()) != cols)
            throw std::invalid_argument("ragged grid rows");
    if (cfg.slip_prob < 0.0 || cfg.slip_prob > 1.0)
        throw std::invalid_argument("slip_prob must lie in [0, 1]");
    if (static_cast<int>(cfg.goal_cells.size()) != cfg.n_objectives)
        throw std::invalid_argument("goal_cells must have one entry per objective");

    auto is_free = [&](int r, int c) {
        return r >= 0 && r < rows && c >= 0 && c < cols && cfg.grid[r][c] != '#';
    };
    auto require_free = [&](GridCell cell, const char* what) {
        if (!is_free(cell.first, cell.second))
            throw std::invalid_argument(std::string(what) + " is a wall or out of bounds");
    };
    require_free(cfg.start_cell, "start cell");
    for (auto g : cfg.goal_cells)
        require_free(g, "goal cell");
    for (std::size_t i = 0; i < cfg.goal_cells.size(); ++i)
        for (std::size_t k = i + 1; k < cfg.goal_cells.size(); ++k)
            if (cfg.goal_cells[i] == cfg.goal_cells[k])
                throw std::invalid_argument("goal cells must be distinct");

    // Enumerate free cells row-major.
    std::vector<std::vector<int>> cell_state(rows, std::vector<int>(cols, -1));
    std::vector<GridCell> cells;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (is_free(r, c)) {
                cell_state[r][c] = static_cast<int>(cells.size());
                cells.push_back({r, c});
            }
    const int S = static_cast<int>(cells.size());
    const int A = 4;

    MOMDP base = MOMDP::zeros(S, A, cfg.n_objectives, cfg.gamma);
    std::vector<int> goal_states;
    for (auto g : cfg.goal_cells)
        goal_states.push_back(cell_state[g.first][g.second]);
    std::vector<int> goal_of_state(S, -1);
    for (int i = 0; i < cfg.n_objectives; ++i)
        goal_of_state[goal_states[i]] = i;

    for (int s = 0; s < S; ++s) {
        const auto [r, c] = cells[s];
        for (int a = 0; a < A; ++a) {
            for (int dir = 0; dir < 4; ++dir) {
                const double p = (dir == a) ? 1.0 - cfg.slip_prob : cfg.slip_prob / 3.0;
                const int nr = r + kDRow[dir];
                const int nc = c + kDCol[dir];
                const int target = is_free(nr, nc) ? cell_state[nr][nc] : s;
                base.transition[s][a][target] += p;
            }
            for (int sp = 0; sp < S; ++sp) {
                const int i = goal_of_state[sp];
                if (i >= 0)
                    base.reward[s][a][i] += base.transition[s][a][sp];
            }
        }
    }
    base.p0[cell_state[cfg.start_cell.first][cfg.start_cell.second]] = 1.0;

    BuiltEnv env;
    env.momdp = augment_absorbing(base, goal_states);
    env.start_state = cell_state[cfg.start_cell.first][cfg.start_cell.second];
    env.goal_states = goal_states;

    // Reachability check on the deterministic step graph (report only).
    std::vector<bool> reached(S, false);
    std::queue<int> frontier;
    frontier.push(env.start_state);
    reached[env.start_state] = true;
    while (!frontier.empty()) {
        const int s = frontier.front();
        frontier.pop();
        if (goal_of_state[s] >= 0)
            continue; // goals absorb
        const auto [r, c] = cells[s];
        for (int dir = 0; dir < 4; ++dir) {
            const int nr = r + kDRow[dir];
            const int nc = c + kDCol[dir];
            if (is_free(nr, nc) && !reached[cell_state[nr][nc]]) {
                reached[cell_state[nr][nc]] = true;
                frontier.push(cell_state[nr][nc]);
            }
        }
    }
    for (int i = 0; i < cfg.n_objectives; ++i)
        if (!reached[goal_states[i]])
            env.warnings.push_back("goal " + std::to_string(i) +
                                   " is unreachable from the start cell");
    return env;
}

BuiltEnv build_random_momdp(const RandomMOMDPConfig& cfg) {
    if (cfg.n_branch > cfg.n_states - 1)
        throw std::invalid_argument("n_branch must be <= n_states - 1");
    if (cfg.n_objectives > cfg.n_states - 1)
        throw std::invalid_argument("n_objectives must be <= n_states - 1");

    Rng rng(cfg.seed);
    MOMDP base = MOMDP::zeros(cfg.n_states, cfg.n_actions, cfg.n_objectives, cfg.gamma);

    for (int s = 0; s < cfg.n_states; ++s)
        for (int a = 0; a < cfg.n_actions; ++a) {
            const auto support = rng.sample_distinct(cfg.n_states, cfg.n_branch);
            const auto probs = rng.dirichlet_unit(cfg.n_branch);
            for (int k = 0; k < cfg.n_branch; ++k)
                base.transition[s][a][support[k]] += probs[k];
        }

    // Goal states among 1..n_states-1, excluding the fixed initial state.
    const auto picks = rng.sample_distinct(cfg.n_states - 1, cfg.n_objectives);
    std::vector<int> goal_states;
    for (auto p : picks)
        goal_states.push_back(static_cast<int>(p) + 1);

    for (int s = 0; s < cfg.n_states; ++s)
        for (int a = 0; a < cfg.n_actions; ++a)
            for (int i = 0; i < cfg.n_objectives; ++i)
                base.reward[s][a][i] = base.transition[s][a][goal_states[i]];

    base.p0[0] = 1.0;

    BuiltEnv env;
    env.momdp = augment_absorbing(base, goal_states);
    env.start_state = 0;
    env.goal_states = goal_states;
    return env;
}

} // namespace fairdice
