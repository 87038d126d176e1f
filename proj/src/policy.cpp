#include "riskmdp/policy.hpp"

#include "riskmdp/errors.hpp"

#include <string>

namespace riskmdp {

using nlohmann::json;

namespace {
constexpr std::size_t kMaxHistorySlots = 10'000'000;
}

HistoryPolicy::HistoryPolicy(int horizon, int num_states, int initial_state)
    : num_states_(num_states), initial_state_(initial_state) {
    if (horizon < 1 || num_states < 1)
        throw DomainError("HistoryPolicy needs horizon >= 1 and at least one state");
    std::size_t width = 1, total = 0;
    for (int t = 1; t <= horizon; ++t) {
        total += width;
        if (total > kMaxHistorySlots)
            throw CapExceeded("history policy would need more than " + std::to_string(kMaxHistorySlots) + " decisions");
        decisions_.emplace_back(width, -1);
        if (t < horizon)
            width *= static_cast<std::size_t>(num_states);
    }
}

std::size_t HistoryPolicy::history_index(std::span<const int> history) const {
    if (history.empty() || history.size() > decisions_.size())
        throw DomainError("history length outside 1..horizon");
    if (history.front() != initial_state_)
        throw DomainError("history must start at the initial state");
    std::size_t idx = 0;
    for (std::size_t i = 1; i < history.size(); ++i) {
        if (history[i] < 0 || history[i] >= num_states_)
            throw DomainError("state index out of range in history");
        idx = idx * num_states_ + history[i];
    }
    return idx;
}

std::vector<int> HistoryPolicy::history_at(int t, std::size_t index) const {
    std::vector<int> h(t);
    h[0] = initial_state_;
    for (int i = t - 1; i >= 1; --i) {
        h[i] = static_cast<int>(index % num_states_);
        index /= num_states_;
    }
    return h;
}

std::vector<int> HistoryPolicy::actions_along(std::span<const int> history) const {
    std::vector<int> acts;
    for (std::size_t s = 1; s < history.size(); ++s)
        acts.push_back(action(history.first(s)));
    return acts;
}

void check_history_policy(const ModelSpec &m, const HistoryPolicy &pol) {
    if (pol.horizon() != m.horizon || pol.num_states() != m.num_states() || pol.initial_state() != m.initial_state)
        throw DomainError("policy shape does not match the model");
    for (int t = 1; t <= m.horizon; ++t)
        for (std::size_t i = 0; i < pol.histories_at(t); ++i) {
            const int u = pol.action_at(t, i);
            const int x = pol.history_at(t, i).back();
            if (u < 0 || u >= m.num_actions() || !m.is_admissible(t, x, u))
                throw DomainError("policy decision at t=" + std::to_string(t) + " is missing or not admissible");
        }
}

HistoryPolicy to_history_policy(const QuasiMarkovPolicy &qmp, const ModelSpec &m) {
    if (!qmp.graph || qmp.table.size() != qmp.graph->size())
        throw DomainError("quasi-Markov policy is not complete on its graph");
    const BeliefGraph &g = *qmp.graph;
    HistoryPolicy pol(m.horizon, m.num_states(), m.initial_state);

    // node < 0 marks a history that fell off the graph.
    auto walk = [&](auto &&self, std::vector<int> &h, int node) -> void {
        const int t = static_cast<int>(h.size());
        const int x = h.back();
        const int u = node >= 0 ? qmp.action(node) : m.admissible_actions(t, x).front();
        pol.set_action(h, u);
        if (t == m.horizon)
            return;
        for (int xn = 0; xn < m.num_states(); ++xn) {
            h.push_back(xn);
            self(self, h, node >= 0 ? g.successor(node, u, xn) : -1);
            h.pop_back();
        }
    };
    std::vector<int> h{m.initial_state};
    walk(walk, h, g.root().id);
    return pol;
}

json history_policy_to_json(const ModelSpec &m, const HistoryPolicy &pol) {
    json decisions = json::array();
    for (int t = 1; t <= pol.horizon(); ++t)
        for (std::size_t i = 0; i < pol.histories_at(t); ++i) {
            json hist = json::array();
            for (int x : pol.history_at(t, i))
                hist.push_back(m.states[x]);
            const int u = pol.action_at(t, i);
            decisions.push_back({{"t", t}, {"history", std::move(hist)}, {"action", u >= 0 ? json(m.actions[u]) : json()}});
        }
    return {{"type", "history"}, {"decisions", std::move(decisions)}};
}

json quasi_markov_to_json(const ModelSpec &m, const QuasiMarkovPolicy &qmp) {
    json table = json::object();
    for (std::size_t id = 0; id < qmp.table.size(); ++id)
        table[std::to_string(id)] = m.actions[qmp.table[id]];
    return {{"type", "quasi_markov"}, {"belief_tilt", qmp.graph ? qmp.graph->belief_tilt() : 0.0}, {"table", std::move(table)}};
}

namespace {

int label_or_throw(const std::vector<std::string> &labels, const json &j, const char *what) {
    if (!j.is_string())
        throw SchemaError(std::string(what) + " must be a label");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == j.get<std::string>())
            return static_cast<int>(i);
    throw SchemaError(std::string("unknown ") + what + " label '" + j.get<std::string>() + "'");
}

} // namespace

HistoryPolicy parse_policy(const json &doc, const ModelSpec &m, std::size_t node_cap) {
    if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string())
        throw SchemaError("policy must be an object with a string 'type'");
    const auto type = doc["type"].get<std::string>();

    if (type == "history") {
        if (!doc.contains("decisions") || !doc["decisions"].is_array())
            throw SchemaError("history policy needs a 'decisions' array");
        HistoryPolicy pol(m.horizon, m.num_states(), m.initial_state);
        for (const auto &d : doc["decisions"]) {
            if (!d.is_object() || !d.contains("history") || !d["history"].is_array() || !d.contains("action"))
                throw SchemaError("each decision needs 'history' and 'action'");
            std::vector<int> h;
            for (const auto &x : d["history"])
                h.push_back(label_or_throw(m.states, x, "state"));
            if (d.contains("t") && (!d["t"].is_number_integer() || d["t"].get<std::size_t>() != h.size()))
                throw SchemaError("decision 't' does not match the history length");
            try {
                pol.set_action(h, label_or_throw(m.actions, d["action"], "action"));
            } catch (const DomainError &e) {
                throw SchemaError(std::string("bad decision history: ") + e.what());
            }
        }
        try {
            check_history_policy(m, pol);
        } catch (const DomainError &e) {
            throw SchemaError(e.what());
        }
        return pol;
    }

    if (type == "quasi_markov") {
        if (!doc.contains("table") || !doc["table"].is_object())
            throw SchemaError("quasi-Markov policy needs a 'table' object");
        double tilt = 0.0;
        if (doc.contains("belief_tilt")) {
            if (!doc["belief_tilt"].is_number())
                throw SchemaError("'belief_tilt' must be a number");
            tilt = doc["belief_tilt"].get<double>();
        }
        auto graph = std::make_shared<const BeliefGraph>(build_reachable_belief_graph(m, node_cap, tilt));
        QuasiMarkovPolicy qmp{graph, std::vector<int>(graph->size(), -1)};
        for (const auto &[key, action] : doc["table"].items()) {
            std::size_t id = 0;
            try {
                id = std::stoul(key);
            } catch (const std::exception &) {
                throw SchemaError("table key '" + key + "' is not a node id");
            }
            if (id >= graph->size())
                throw SchemaError("table key '" + key + "' is not a node of the belief graph");
            qmp.table[id] = label_or_throw(m.actions, action, "action");
        }
        for (const auto &n : graph->nodes())
            if (qmp.table[n.id] < 0 || !m.is_admissible(n.time, n.state, qmp.table[n.id]))
                throw SchemaError("table entry for node " + std::to_string(n.id) + " is missing or not admissible");
        return to_history_policy(qmp, m);
    }
    throw SchemaError("unknown policy type '" + type + "'");
}

} // namespace riskmdp
