#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmcount/agent.hpp"
#include "mmcount/compensation.hpp"
#include "mmcount/types.hpp"

namespace mmcount::mcts {

using compensation::CompensationStateSummary;
using compensation::CompensationStrategy;
using compensation::ScoreBreakdown;
using compensation::ScoreWeights;

struct SearchConfig {
    int budget = 32;           // max rollouts (= simulations)
    int max_depth = 3;
    double exploration_c = 1.4142135623730951;
    int children_per_node = 3;  // k strategies requested per expansion
    int patience = 8;           // consecutive stale rollouts before early stop
    double epsilon_stop = 1e-3; // minimum best-score improvement to count as progress
    int stability_splits = 4;
    ScoreWeights weights;
};

/// Tree node. `strategy` is the full transform composed along the path from
/// the root; the root carries none (identity).
struct SearchNode {
    int id = 0;
    int parent = -1;
    int depth = 0;
    std::optional<CompensationStrategy> strategy;
    int visits = 0;          // n(s_i)
    double total_score = 0;  // accumulated W(s_i)
    std::vector<int> children;
    CompensationStateSummary state;
    ScoreBreakdown last_score;
    bool simulated = false;
    bool expansion_exhausted = false;  // agent offered only duplicates

    double mean_score() const {
        return visits > 0 ? total_score / static_cast<double>(visits) : 0.0;
    }
};

/// Search state. The window under compensation is owned by the tree (the
/// root incorporates the raw data), so select/expand/simulate only need ids.
struct SearchTree {
    std::vector<SearchNode> nodes;
    CloudWindow window;
    SensorSetup setup;
    ScenarioDescriptor scenario;
    SearchConfig config;

    int total_visits() const { return nodes.front().visits; }  // N
    const SearchNode& root() const { return nodes.front(); }
};

struct RolloutRecord {
    int rollout = 0;             // 1-based
    std::vector<int> path;       // selected path from root
    int simulated_node = 0;
    std::optional<CompensationStrategy> strategy;
    ScoreBreakdown score;
};

struct SearchTrace {
    std::vector<RolloutRecord> rollouts;
    std::string termination;  // budget | early_stop | saturated
};

struct SearchResult {
    std::optional<CompensationStrategy> strategy;  // none: keep the window as-is
    ScoreBreakdown score;
    SearchTrace trace;
};

/// Tree with a single unvisited node summarizing the uncompensated window.
SearchTree init_root(const CloudWindow& window, const SensorSetup& setup,
                     const ScenarioDescriptor& scenario, const SearchConfig& config = {});

/// UCB(s) = mean + c*sqrt(ln N / n); unvisited nodes get +infinity.
double ucb(const SearchNode& node, int total_visits, double exploration_c);

/// Walk from the root by maximal UCB (ties to the lowest id) until reaching
/// a node with unexpanded capacity or a leaf.
int select(const SearchTree& tree);

/// Compose a proposal onto a path strategy. The first level adopts the
/// proposal as-is; deeper levels treat (alpha - 2) as a refinement delta in
/// [-0.5, 0.5], multiply sector gains, and keep the tighter clip.
CompensationStrategy compose(const std::optional<CompensationStrategy>& path,
                             const CompensationStrategy& proposal);

/// Append up to k children holding distinct agent proposals composed with
/// the node's path strategy. Duplicates (within 1e-6 per parameter) are
/// rejected. Throws DepthExceeded at max depth.
std::vector<int> expand(SearchTree& tree, int node_id, agent::Agent& agent, int k);

/// Apply the node's composed strategy to the tree's window and score it:
/// E against the root (raw) state, A on the compensated profile, S across
/// time slices. Deterministic; caches the state and score on the node.
ScoreBreakdown simulate(SearchTree& tree, int node_id);

/// n += 1 and total += w on every node from node_id up to the root.
void backpropagate(SearchTree& tree, int node_id, double w);

/// Full loop: select -> expand -> simulate -> backpropagate until the budget
/// is exhausted, improvement stalls for `patience` rollouts, or the tree is
/// saturated. Returns the strategy of the highest-mean node with n >= 2
/// (fallback: highest single-simulation score).
SearchResult run_search(const CloudWindow& window, agent::Agent& agent,
                        const SensorSetup& setup, const ScenarioDescriptor& scenario,
                        const SearchConfig& config = {});

}  // namespace mmcount::mcts
