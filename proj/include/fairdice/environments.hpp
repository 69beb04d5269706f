#pragma once

#include "fairdice/momdp.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fairdice {

using GridCell = std::pair<int, int>; // (row, col)

/// Four-room gridworld configuration. The wall mask, start and goal
/// coordinates are plain data so the layout can be edited; the defaults
/// ship the classic 11x11 map with two interior walls and four doorways.
struct FourRoomConfig {
    std::vector<std::string> grid; // '#' = wall, '.' = free
    GridCell start_cell{4, 4};
    std::vector<GridCell> goal_cells; // objective i rewards entry into goal_cells[i]
    double slip_prob = 0.1;
    int n_objectives = 3;
    double gamma = 0.8;

    /// Default layout with 3 or 8 goals.
    static FourRoomConfig standard(int n_objectives = 3);
};

struct RandomMOMDPConfig {
    int n_states = 50;
    int n_actions = 4;
    int n_branch = 4;      // support size of each next-state distribution
    int n_objectives = 3;
    double gamma = 0.95;
    std::uint64_t seed = 0;
};

/// A constructed benchmark: the absorbing-augmented MOMDP plus the
/// bookkeeping needed by experiments (start state, goal states indexed by
/// objective, and any construction warnings).
struct BuiltEnv {
    MOMDP momdp;
    int start_state = 0;
    std::vector<int> goal_states;
    std::vector<std::string> warnings;
};

/// Builds the four-room MOMDP. Four actions {left, right, up, down}; the
/// intended move succeeds with probability 1 - slip_prob and each other
/// direction occurs with slip_prob / 3; moves into walls or out of bounds
/// keep the agent in place. Objective i's reward on (s,a) is the
/// probability that the transition enters goal cell i. Goal cells are
/// absorbing via an explicit sink state.
BuiltEnv build_four_room(const FourRoomConfig& cfg);

/// Builds a random MOMDP: each (s,a) transitions over n_branch distinct
/// next states with Dirichlet(1,...,1) probabilities; n_objectives goal
/// states are drawn among states 1..n_states-1, each rewarding entry with
/// a distinct one-hot vector; goals are absorbing-augmented. Deterministic
/// given the seed.
BuiltEnv build_random_momdp(const RandomMOMDPConfig& cfg);

} // namespace fairdice
