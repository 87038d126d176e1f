#include "riskmdp/belief.hpp"

#include "riskmdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

namespace riskmdp {

namespace {

void check_transition(const ModelSpec &m, const Belief &xi, int x, int u, int x_next) {
    if (x < 0 || x >= m.num_states() || x_next < 0 || x_next >= m.num_states())
        throw DomainError("state index out of range");
    if (u < 0 || u >= m.num_actions())
        throw DomainError("action index out of range");
    if (xi.size() != static_cast<std::size_t>(m.num_parameters()))
        throw DomainError("belief size does not match the parameter set");
}

std::string zero_observation(const ModelSpec &m, int x, int u, int x_next) {
    return "observation (" + m.states[x] + "," + m.actions[u] + "," + m.states[x_next] +
           ") has zero predictive probability";
}

} // namespace

Belief bayes_update(const ModelSpec &m, const Belief &xi, int x, int u, int x_next) {
    check_transition(m, xi, x, u, x_next);
    const int P = m.num_parameters();
    Belief out{std::vector<double>(P)};
    double denom = 0.0;
    for (int p = 0; p < P; ++p) {
        out.weights[p] = xi[p] * m.K(p, x, u, x_next);
        denom += out.weights[p];
    }
    if (!(denom > 0.0))
        throw ZeroProbabilityObservation(zero_observation(m, x, u, x_next));
    for (double &w : out.weights)
        w /= denom;
    return out;
}

Belief tilted_bayes_update(const ModelSpec &m, const Belief &xi, int t, int x, int u, int x_next, double tilt) {
    if (tilt == 0.0)
        return bayes_update(m, xi, x, u, x_next);
    check_transition(m, xi, x, u, x_next);
    if (t < 1 || t > m.horizon)
        throw DomainError("time out of range");
    const int P = m.num_parameters();

    // exp(tilt * c) is shifted by its maximum over the support; the shift cancels.
    double shift = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < P; ++p)
        if (xi[p] > 0.0)
            shift = std::max(shift, tilt * m.c(t, x, u, p));

    Belief out{std::vector<double>(P, 0.0)};
    double denom = 0.0;
    for (int p = 0; p < P; ++p) {
        if (xi[p] > 0.0)
            out.weights[p] = xi[p] * std::exp(tilt * m.c(t, x, u, p) - shift) * m.K(p, x, u, x_next);
        denom += out.weights[p];
    }
    if (!(denom > 0.0))
        throw ZeroProbabilityObservation(zero_observation(m, x, u, x_next));
    for (double &w : out.weights)
        w /= denom;
    return out;
}

double path_likelihood(const ModelSpec &m, int p, std::span<const int> history, std::span<const int> actions) {
    if (history.empty() || actions.size() + 1 != history.size())
        throw DomainError("path_likelihood: need len(actions) == len(history) - 1 and a nonempty history");
    if (p < 0 || p >= m.num_parameters())
        throw DomainError("parameter index out of range");
    if (history.size() > static_cast<std::size_t>(m.horizon))
        throw DomainError("history longer than the horizon");
    for (int x : history)
        if (x < 0 || x >= m.num_states())
            throw DomainError("state index out of range");
    double prob = 1.0;
    for (std::size_t s = 0; s < actions.size(); ++s) {
        const int t = static_cast<int>(s) + 1;
        if (actions[s] < 0 || actions[s] >= m.num_actions() || !m.is_admissible(t, history[s], actions[s]))
            throw DomainError("action at t=" + std::to_string(t) + " is not admissible");
        prob *= m.K(p, history[s], actions[s], history[s + 1]);
    }
    return prob;
}

Belief posterior_from_history(const ModelSpec &m, std::span<const int> history, std::span<const int> actions) {
    const int P = m.num_parameters();
    Belief out{std::vector<double>(P)};
    double denom = 0.0;
    for (int p = 0; p < P; ++p) {
        out.weights[p] = m.prior[p] * path_likelihood(m, p, history, actions);
        denom += out.weights[p];
    }
    if (!(denom > 0.0))
        throw ZeroProbabilityObservation("history has zero probability under the prior");
    for (double &w : out.weights)
        w /= denom;
    return out;
}

std::vector<double> predictive_next_state(const ModelSpec &m, const Belief &xi, int x, int u) {
    check_transition(m, xi, x, u, 0);
    std::vector<double> pred(m.num_states(), 0.0);
    for (int p = 0; p < m.num_parameters(); ++p) {
        if (xi[p] == 0.0)
            continue;
        auto row = m.kernel_row(p, x, u);
        for (int xn = 0; xn < m.num_states(); ++xn)
            pred[xn] += xi[p] * row[xn];
    }
    return pred;
}

std::size_t BeliefGraph::edge_count() const {
    return static_cast<std::size_t>(std::count_if(successors_.begin(), successors_.end(), [](int s) { return s >= 0; }));
}

BeliefGraph build_reachable_belief_graph(const ModelSpec &m, std::size_t node_cap, double belief_tilt) {
    if (node_cap < 1)
        throw DomainError("node_cap must be >= 1");
    const int S = m.num_states(), A = m.num_actions();

    BeliefGraph g;
    g.num_states_ = S;
    g.num_actions_ = A;
    g.belief_tilt_ = belief_tilt;
    g.levels_.resize(m.horizon);
    g.nodes_.push_back({0, 1, m.initial_state, m.prior});
    g.levels_[0].push_back(0);

    using Key = std::tuple<int, std::vector<long long>>;
    auto key_of = [](int x, const Belief &b) {
        std::vector<long long> q(b.size());
        for (std::size_t i = 0; i < b.size(); ++i)
            q[i] = std::llround(b[i] * 1e10);
        return Key{x, std::move(q)};
    };

    for (int t = 1; t < m.horizon; ++t) {
        std::map<Key, int> seen;
        for (int id : std::vector<int>(g.levels_[t - 1])) {
            g.successors_.resize(g.nodes_.size() * A * S, -1);
            const BeliefNode src = g.nodes_[id];
            for (int u : m.admissible_actions(t, src.state)) {
                auto pred = predictive_next_state(m, src.belief, src.state, u);
                for (int xn = 0; xn < S; ++xn) {
                    if (!(pred[xn] > 0.0))
                        continue;
                    Belief next = tilted_bayes_update(m, src.belief, t, src.state, u, xn, belief_tilt);
                    auto [it, inserted] = seen.try_emplace(key_of(xn, next), static_cast<int>(g.nodes_.size()));
                    if (inserted) {
                        if (g.nodes_.size() >= node_cap)
                            throw CapExceeded("belief graph exceeds node cap of " + std::to_string(node_cap));
                        g.nodes_.push_back({it->second, t + 1, xn, std::move(next)});
                        g.levels_[t].push_back(it->second);
                    }
                    g.successors_[(static_cast<std::size_t>(id) * A + u) * S + xn] = it->second;
                }
            }
        }
    }
    g.successors_.resize(g.nodes_.size() * A * S, -1);
    return g;
}

nlohmann::json belief_graph_to_json(const ModelSpec &m, const BeliefGraph &g) {
    using nlohmann::json;
    json nodes = json::array();
    json edges = json::array();
    for (const auto &n : g.nodes()) {
        nodes.push_back({{"id", n.id}, {"t", n.time}, {"state", m.states[n.state]}, {"belief", belief_to_json(m, n.belief)}});
        for (int u = 0; u < g.num_actions(); ++u)
            for (int xn = 0; xn < g.num_states(); ++xn)
                if (int target = g.successor(n.id, u, xn); target >= 0)
                    edges.push_back(
                        {{"source", n.id}, {"action", m.actions[u]}, {"next_state", m.states[xn]}, {"target", target}});
    }
    return {{"belief_tilt", g.belief_tilt()}, {"root", g.root().id}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

} // namespace riskmdp
