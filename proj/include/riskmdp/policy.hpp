#pragma once

#include "riskmdp/belief.hpp"
#include "riskmdp/model.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

namespace riskmdp {

/**
 * A decision for every state history h_t = (x1, x2, ..., x_t), t = 1..T, that starts at the
 * model's initial state. Histories of length t are indexed by (x2, ..., x_t) read as a
 * base-|X| number with x2 most significant.
 */
class HistoryPolicy {
  public:
    HistoryPolicy() = default;
    HistoryPolicy(int horizon, int num_states, int initial_state);

    int horizon() const { return static_cast<int>(decisions_.size()); }
    int num_states() const { return num_states_; }
    int initial_state() const { return initial_state_; }

    /// Number of histories of length t.
    std::size_t histories_at(int t) const { return decisions_[t - 1].size(); }
    std::size_t history_index(std::span<const int> history) const;
    /// Inverse of history_index.
    std::vector<int> history_at(int t, std::size_t index) const;

    int action(std::span<const int> history) const { return decisions_[history.size() - 1][history_index(history)]; }
    int action_at(int t, std::size_t index) const { return decisions_[t - 1][index]; }
    void set_action(std::span<const int> history, int u) { decisions_[history.size() - 1][history_index(history)] = u; }
    void set_action_at(int t, std::size_t index, int u) { decisions_[t - 1][index] = u; }

    /// u_1..u_{t-1} generated by this policy along a history of length t.
    std::vector<int> actions_along(std::span<const int> history) const;

    bool operator==(const HistoryPolicy &) const = default;

  private:
    int num_states_ = 0;
    int initial_state_ = 0;
    std::vector<std::vector<int>> decisions_;
};

/// Throws DomainError when some decision is unset or not admissible at (t, x_t).
void check_history_policy(const ModelSpec &m, const HistoryPolicy &pol);

/// phi_t(x, belief) as a table over the nodes of a belief graph.
struct QuasiMarkovPolicy {
    std::shared_ptr<const BeliefGraph> graph;
    std::vector<int> table; // node id -> action index

    int action(int node_id) const { return table[node_id]; }
};

/**
 * Expands a quasi-Markov policy to every history by tracking the belief through the graph:
 * pi_t(h_t) = phi_t(x_t, tracked belief). Histories that leave the graph (zero-probability
 * branches) take the first admissible action at every later step.
 */
HistoryPolicy to_history_policy(const QuasiMarkovPolicy &qmp, const ModelSpec &m);

nlohmann::json history_policy_to_json(const ModelSpec &m, const HistoryPolicy &pol);
nlohmann::json quasi_markov_to_json(const ModelSpec &m, const QuasiMarkovPolicy &qmp);

/// Reads either policy document. A quasi-Markov table is resolved against the belief graph
/// rebuilt from `m` with the document's belief_tilt (default 0) and expanded to histories.
HistoryPolicy parse_policy(const nlohmann::json &doc, const ModelSpec &m, std::size_t node_cap = kDefaultNodeCap);

} // namespace riskmdp
