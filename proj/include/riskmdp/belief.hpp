#pragma once

#include "riskmdp/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace riskmdp {

/// Bayes operator: xi'(p) = xi(p) K_p(x_next | x, u) / sum_q xi(q) K_q(x_next | x, u).
/// Throws ZeroProbabilityObservation when the denominator is zero.
Belief bayes_update(const ModelSpec &m, const Belief &xi, int x, int u, int x_next);

/**
 * Bayes step whose likelihood is additionally weighted by exp(tilt * c_t(x, u, p)).
 *
 * With tilt == 0 this is exactly bayes_update. With tilt == kappa it propagates the
 * risk-adjusted belief under which the entropic recursion reproduces
 * (1/kappa) ln E[exp(kappa * total cost)] even when costs depend on the parameter.
 */
Belief tilted_bayes_update(const ModelSpec &m, const Belief &xi, int t, int x, int u, int x_next, double tilt);

/// prod_s K_p(h_{s+1} | h_s, u_s); 1 for a history of length one.
double path_likelihood(const ModelSpec &m, int p, std::span<const int> history, std::span<const int> actions);

/// Posterior over parameters given a state history and the actions taken along it.
Belief posterior_from_history(const ModelSpec &m, std::span<const int> history, std::span<const int> actions);

/// P(x') = sum_p xi(p) K_p(x' | x, u).
std::vector<double> predictive_next_state(const ModelSpec &m, const Belief &xi, int x, int u);

inline constexpr std::size_t kDefaultNodeCap = 1'000'000;

struct BeliefNode {
    int id = 0;
    int time = 1;
    int state = 0;
    Belief belief;
};

/**
 * Reachable (t, x, belief) triples from (1, x1, prior), leveled by time.
 *
 * Node ids are assigned in breadth-first discovery order, so ids ascend within and
 * across levels and the root has id 0. successor(n, u, x') is -1 when u is not
 * admissible at the node or x' has zero predictive probability.
 */
class BeliefGraph {
  public:
    const BeliefNode &root() const { return nodes_.front(); }
    const BeliefNode &node(int id) const { return nodes_[id]; }
    std::span<const BeliefNode> nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    std::span<const int> level(int t) const { return levels_[t - 1]; }

    int horizon() const { return static_cast<int>(levels_.size()); }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    double belief_tilt() const { return belief_tilt_; }

    int successor(int id, int u, int x_next) const {
        return successors_[(static_cast<std::size_t>(id) * num_actions_ + u) * num_states_ + x_next];
    }
    std::size_t edge_count() const;

  private:
    friend BeliefGraph build_reachable_belief_graph(const ModelSpec &, std::size_t, double);

    std::vector<BeliefNode> nodes_;
    std::vector<std::vector<int>> levels_;
    std::vector<int> successors_;
    int num_states_ = 0;
    int num_actions_ = 0;
    double belief_tilt_ = 0.0;
};

/**
 * Forward closure of the Bayes step from the root. Beliefs are merged when their
 * coordinates agree after rounding to 10 decimal digits; zero-probability branches get
 * no edge. Throws CapExceeded when the node count would exceed `node_cap`.
 *
 * `belief_tilt` selects the belief dynamics (see tilted_bayes_update); 0 gives the
 * plain posterior graph.
 */
BeliefGraph build_reachable_belief_graph(const ModelSpec &m, std::size_t node_cap = kDefaultNodeCap,
                                         double belief_tilt = 0.0);

/// {"belief_tilt", "nodes": [{"id","t","state","belief"}], "edges": [{"source","action","next_state","target"}]}
nlohmann::json belief_graph_to_json(const ModelSpec &m, const BeliefGraph &g);

} // namespace riskmdp
