#include "mmcount/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmcount::mcts {

namespace {

constexpr double kDuplicateTol = 1e-6;

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

bool has_capacity(const SearchTree& tree, const SearchNode& node) {
    return node.depth < tree.config.max_depth && !node.expansion_exhausted &&
           static_cast<int>(node.children.size()) < tree.config.children_per_node;
}

bool saturated(const SearchTree& tree) {
    for (const auto& node : tree.nodes) {
        if (has_capacity(tree, node)) return false;
    }
    return true;
}

}  // namespace

SearchTree init_root(const CloudWindow& window, const SensorSetup& setup,
                     const ScenarioDescriptor& scenario, const SearchConfig& config) {
    SearchTree tree;
    tree.window = window;
    tree.setup = setup;
    tree.scenario = scenario;
    tree.config = config;
    SearchNode root;
    root.id = 0;
    root.state = compensation::summarize(window, setup, scenario);
    tree.nodes.push_back(std::move(root));
    return tree;
}

double ucb(const SearchNode& node, int total_visits, double exploration_c) {
    if (node.visits == 0) return std::numeric_limits<double>::infinity();
    return node.mean_score() +
           exploration_c * std::sqrt(std::log(static_cast<double>(total_visits)) /
                                     static_cast<double>(node.visits));
}

int select(const SearchTree& tree) {
    int id = 0;
    for (;;) {
        const SearchNode& node = tree.nodes[static_cast<std::size_t>(id)];
        if (node.children.empty() || has_capacity(tree, node)) return id;
        int best_child = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int child : node.children) {
            const double score =
                ucb(tree.nodes[static_cast<std::size_t>(child)], tree.total_visits(),
                    tree.config.exploration_c);
            if (score > best_score) {  // ties keep the lowest id
                best_score = score;
                best_child = child;
            }
        }
        id = best_child;
    }
}

CompensationStrategy compose(const std::optional<CompensationStrategy>& path,
                             const CompensationStrategy& proposal) {
    if (!path) return proposal.clamped();
    CompensationStrategy out;
    const double delta = clampd(proposal.alpha - 2.0, -0.5, 0.5);
    out.alpha = clampd(path->alpha + delta, compensation::kAlphaMin, compensation::kAlphaMax);
    for (std::size_t i = 0; i < out.sector_gains.size(); ++i) {
        out.sector_gains[i] = clampd(path->sector_gains[i] * proposal.sector_gains[i],
                                     compensation::kGainMin, compensation::kGainMax);
    }
    out.clip_db = clampd(std::min(path->clip_db, proposal.clip_db), compensation::kClipDbMin,
                         compensation::kClipDbMax);
    return out;
}

std::vector<int> expand(SearchTree& tree, int node_id, agent::Agent& agent, int k) {
    // Copies up front: growing tree.nodes below invalidates references.
    const int depth = tree.nodes[static_cast<std::size_t>(node_id)].depth;
    const auto path_strategy = tree.nodes[static_cast<std::size_t>(node_id)].strategy;
    if (depth >= tree.config.max_depth) {
        throw DepthExceeded("expand: node " + std::to_string(node_id) + " is at max depth " +
                            std::to_string(tree.config.max_depth));
    }
    const auto proposals =
        agent.propose_strategies(tree.nodes[static_cast<std::size_t>(node_id)].state, k);
    std::vector<int> added;
    for (const auto& proposal : proposals) {
        const CompensationStrategy composed = compose(path_strategy, proposal);
        bool duplicate = false;
        for (int sibling : tree.nodes[static_cast<std::size_t>(node_id)].children) {
            const auto& existing = tree.nodes[static_cast<std::size_t>(sibling)].strategy;
            if (existing && existing->nearly_equal(composed, kDuplicateTol)) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        SearchNode child;
        child.id = static_cast<int>(tree.nodes.size());
        child.parent = node_id;
        child.depth = depth + 1;
        child.strategy = composed;
        tree.nodes[static_cast<std::size_t>(node_id)].children.push_back(child.id);
        added.push_back(child.id);
        tree.nodes.push_back(std::move(child));
    }
    if (added.empty()) tree.nodes[static_cast<std::size_t>(node_id)].expansion_exhausted = true;
    return added;
}

ScoreBreakdown simulate(SearchTree& tree, int node_id) {
    SearchNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    const CompensationStateSummary& raw_state = tree.nodes.front().state;

    CompensationStateSummary after;
    double stability;
    if (node.strategy) {
        const CloudWindow compensated =
            compensation::apply_strategy(tree.window, *node.strategy, tree.setup);
        after = compensation::summarize(compensated, tree.setup, tree.scenario);
        stability = compensation::stability_of(compensated, tree.setup, tree.scenario,
                                               tree.config.stability_splits);
    } else {
        after = raw_state;
        stability = compensation::stability_of(tree.window, tree.setup, tree.scenario,
                                               tree.config.stability_splits);
    }

    const double effectiveness = compensation::score_effectiveness(raw_state, after);
    const double accuracy = compensation::score_accuracy(after);
    const auto breakdown = compensation::compensation_score(effectiveness, accuracy, stability,
                                                            tree.config.weights);
    node.state = after;
    node.last_score = breakdown;
    node.simulated = true;
    return breakdown;
}

void backpropagate(SearchTree& tree, int node_id, double w) {
    for (int id = node_id; id != -1; id = tree.nodes[static_cast<std::size_t>(id)].parent) {
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.visits += 1;
        node.total_score += w;
    }
}

SearchResult run_search(const CloudWindow& window, agent::Agent& agent,
                        const SensorSetup& setup, const ScenarioDescriptor& scenario,
                        const SearchConfig& config) {
    SearchTree tree = init_root(window, setup, scenario, config);
    SearchTrace trace;
    trace.termination = "budget";

    double best_w = -std::numeric_limits<double>::infinity();
    int stale = 0;
    for (int rollout = 1; rollout <= config.budget; ++rollout) {
        const int selected = select(tree);
        int target = selected;
        const bool can_expand = [&] {
            const SearchNode& picked = tree.nodes[static_cast<std::size_t>(selected)];
            return (picked.visits > 0 || selected == 0) && has_capacity(tree, picked);
        }();
        if (can_expand) {
            const auto added = expand(tree, selected, agent, config.children_per_node);
            if (!added.empty()) target = added.front();
        }
        const auto breakdown = simulate(tree, target);
        backpropagate(tree, target, breakdown.total);

        RolloutRecord record;
        record.rollout = rollout;
        for (int id = target; id != -1; id = tree.nodes[static_cast<std::size_t>(id)].parent) {
            record.path.push_back(id);
        }
        std::reverse(record.path.begin(), record.path.end());
        record.simulated_node = target;
        record.strategy = tree.nodes[static_cast<std::size_t>(target)].strategy;
        record.score = breakdown;
        trace.rollouts.push_back(std::move(record));

        const double improved = std::max(best_w, breakdown.total) - best_w;
        best_w = std::max(best_w, breakdown.total);
        if (improved < config.epsilon_stop) {
            if (++stale >= config.patience) {
                trace.termination = "early_stop";
                break;
            }
        } else {
            stale = 0;
        }
        if (saturated(tree)) {
            trace.termination = "saturated";
            break;
        }
    }

    // Highest-mean node with n >= 2; fallback to the best single simulation.
    int best_id = -1;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (const auto& node : tree.nodes) {
        if (node.visits >= 2 && node.mean_score() > best_mean) {
            best_mean = node.mean_score();
            best_id = node.id;
        }
    }
    if (best_id == -1) {
        double best_single = -std::numeric_limits<double>::infinity();
        for (const auto& node : tree.nodes) {
            if (node.simulated && node.last_score.total > best_single) {
                best_single = node.last_score.total;
                best_id = node.id;
            }
        }
    }
    SearchResult result;
    if (best_id != -1) {
        auto& node = tree.nodes[static_cast<std::size_t>(best_id)];
        if (!node.simulated) simulate(tree, best_id);
        result.strategy = node.strategy;
        result.score = node.last_score;
    }
    result.trace = std::move(trace);
    return result;
}

}  // namespace mmcount::mcts
