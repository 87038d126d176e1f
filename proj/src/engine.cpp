#include "riskmdp/engine.hpp"

#include "riskmdp/errors.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include <omp.h>

namespace riskmdp {

namespace {

void check_query(const ModelSpec &m, const HistoryPolicy &pol, std::span<const int> history) {
    if (pol.horizon() != m.horizon || pol.num_states() != m.num_states() || pol.initial_state() != m.initial_state)
        throw DomainError("policy shape does not match the model");
    if (history.empty() || history.size() > static_cast<std::size_t>(m.horizon))
        throw DomainError("history length outside 1..horizon");
}

struct RecursiveEval {
    const ModelSpec &m;
    const CriterionSpec &crit;
    const HistoryPolicy &pol;
    std::vector<int> h;

    double value(const Belief &b) {
        const int t = static_cast<int>(h.size());
        const int x = h.back();
        const int u = pol.action(h);
        if (u < 0 || !m.is_admissible(t, x, u))
            throw DomainError("policy decision at t=" + std::to_string(t) + " is missing or not admissible");
        const int S = m.num_states(), P = m.num_parameters();
        auto cost = m.cost_by_parameter(t, x, u);
        std::vector<double> f(cost.begin(), cost.end());
        if (t < m.horizon) {
            const auto pred = predictive_next_state(m, b, x, u);
            std::vector<double> next(S, 0.0);
            for (int xn = 0; xn < S; ++xn) {
                if (!(pred[xn] > 0.0))
                    continue;
                const Belief bn = tilted_bayes_update(m, b, t, x, u, xn, crit.belief_tilt);
                h.push_back(xn);
                next[xn] = value(bn);
                h.pop_back();
            }
            for (int p = 0; p < P; ++p)
                f[p] += crit.transition(next, m.kernel_row(p, x, u));
        }
        return crit.marginal(f, b.weights);
    }
};

} // namespace

double eval_policy_recursive(const ModelSpec &m, const CriterionSpec &crit, const HistoryPolicy &pol,
                             std::span<const int> history) {
    check_query(m, pol, history);
    const auto actions = pol.actions_along(history);
    const Belief root = posterior_from_history(m, history, actions);
    RecursiveEval ev{m, crit, pol, {history.begin(), history.end()}};
    return crit.report(ev.value(root));
}

double eval_policy_paths(const ModelSpec &m, const CriterionSpec &crit, const HistoryPolicy &pol,
                         std::span<const int> history) {
    if (!crit.is_builtin())
        throw DomainError("path enumeration supports only the built-in criteria");
    check_query(m, pol, history);
    const int S = m.num_states(), P = m.num_parameters(), T = m.horizon;
    const int t0 = static_cast<int>(history.size());
    const auto actions = pol.actions_along(history);
    const Belief xi = posterior_from_history(m, history, actions);

    std::size_t support = 0;
    for (int p = 0; p < P; ++p)
        support += xi[p] > 0.0;
    std::size_t pairs = support;
    for (int s = t0; s < T; ++s) {
        if (pairs > kPathCap / static_cast<std::size_t>(S))
            throw CapExceeded("path enumeration exceeds " + std::to_string(kPathCap) + " (parameter, path) pairs");
        pairs *= S;
    }
    if (pairs > kPathCap)
        throw CapExceeded("path enumeration exceeds " + std::to_string(kPathCap) + " (parameter, path) pairs");

    const bool entropic = crit.kind == CriterionKind::entropic;
    const double kappa = crit.kappa;
    // Entropic sums are kept as acc * exp(shift) to avoid overflow.
    double acc = 0.0, shift = -std::numeric_limits<double>::infinity();
    auto add = [&](double weight, double total) {
        if (!(weight > 0.0))
            return;
        if (!entropic) {
            acc += weight * total;
            return;
        }
        const double e = kappa * total;
        if (e > shift) {
            acc = acc * std::exp(shift - e) + weight;
            shift = e;
        } else {
            acc += weight * std::exp(e - shift);
        }
    };

    std::vector<int> h(history.begin(), history.end());
    for (int p = 0; p < P; ++p) {
        if (!(xi[p] > 0.0))
            continue;
        auto walk = [&](auto &&self, double prob, double total) -> void {
            const int t = static_cast<int>(h.size());
            const int x = h.back();
            const int u = pol.action(h);
            if (u < 0 || !m.is_admissible(t, x, u))
                throw DomainError("policy decision at t=" + std::to_string(t) + " is missing or not admissible");
            total += m.c(t, x, u, p);
            if (t == T) {
                add(xi[p] * prob, total);
                return;
            }
            for (int xn = 0; xn < S; ++xn) {
                const double k = m.K(p, x, u, xn);
                if (k == 0.0)
                    continue;
                h.push_back(xn);
                self(self, prob * k, total);
                h.pop_back();
            }
        };
        walk(walk, 1.0, 0.0);
    }
    if (!entropic)
        return acc;
    return (shift + std::log(acc)) / kappa;
}

namespace {

void check_graph(const ModelSpec &m, const CriterionSpec &crit, const std::shared_ptr<const BeliefGraph> &graph) {
    if (!graph)
        throw DomainError("solve_dp needs a belief graph");
    if (graph->horizon() != m.horizon || graph->num_states() != m.num_states() ||
        graph->num_actions() != m.num_actions())
        throw DomainError("belief graph was not built from this model");
    if (graph->belief_tilt() != crit.belief_tilt)
        throw DomainError("belief graph tilt " + std::to_string(graph->belief_tilt()) +
                          " does not match the criterion's " + std::to_string(crit.belief_tilt));
}

// Bellman step at one node; writes value and argmin.
void solve_node(const ModelSpec &m, const CriterionSpec &crit, const BeliefGraph &g, int id,
                std::vector<double> &values, std::vector<int> &argmin) {
    const BeliefNode &n = g.node(id);
    const int S = m.num_states(), P = m.num_parameters();
    std::vector<double> f(P), next(S);
    double best = std::numeric_limits<double>::infinity();
    int best_u = -1;
    for (int u : m.admissible_actions(n.time, n.state)) {
        auto cost = m.cost_by_parameter(n.time, n.state, u);
        f.assign(cost.begin(), cost.end());
        if (n.time < m.horizon) {
            for (int xn = 0; xn < S; ++xn) {
                const int target = g.successor(id, u, xn);
                next[xn] = target >= 0 ? values[target] : 0.0;
            }
            for (int p = 0; p < P; ++p)
                f[p] += crit.transition(next, m.kernel_row(p, n.state, u));
        }
        const double q = crit.marginal(f, n.belief.weights);
        if (best_u < 0 || q < best) {
            best = q;
            best_u = u;
        }
    }
    values[id] = best;
    argmin[id] = best_u;
}

DpResult finish(const CriterionSpec &crit, std::shared_ptr<const BeliefGraph> graph, std::vector<double> values,
                std::vector<int> argmin) {
    DpResult r;
    r.values.root_value = crit.report(values[graph->root().id]);
    r.values.values = std::move(values);
    r.values.criterion = crit;
    r.policy.graph = std::move(graph);
    r.policy.table = std::move(argmin);
    return r;
}

} // namespace

DpResult solve_dp(const ModelSpec &m, const CriterionSpec &crit, std::shared_ptr<const BeliefGraph> graph,
                  int threads) {
    check_graph(m, crit, graph);
    if (threads < 1)
        throw DomainError("threads must be >= 1");
    const BeliefGraph &g = *graph;
    std::vector<double> values(g.size(), 0.0);
    std::vector<int> argmin(g.size(), -1);

    for (int t = m.horizon; t >= 1; --t) {
        const auto level = g.level(t);
        const auto n = static_cast<std::ptrdiff_t>(level.size());
        std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                solve_node(m, crit, g, level[i], values, argmin);
            } catch (...) {
#pragma omp critical(riskmdp_dp_failure)
                if (!failure)
                    failure = std::current_exception();
            }
        }
        if (failure)
            std::rethrow_exception(failure);
    }
    return finish(crit, std::move(graph), std::move(values), std::move(argmin));
}

DpResult solve_dp_serial(const ModelSpec &m, const CriterionSpec &crit, std::shared_ptr<const BeliefGraph> graph) {
    check_graph(m, crit, graph);
    const BeliefGraph &g = *graph;
    std::vector<double> values(g.size(), 0.0);
    std::vector<int> argmin(g.size(), -1);
    for (int t = m.horizon; t >= 1; --t)
        for (int id : g.level(t))
            solve_node(m, crit, g, id, values, argmin);
    return finish(crit, std::move(graph), std::move(values), std::move(argmin));
}

DpResult solve_dp(const ModelSpec &m, const CriterionSpec &crit, std::size_t node_cap, int threads) {
    auto graph = std::make_shared<const BeliefGraph>(build_reachable_belief_graph(m, node_cap, crit.belief_tilt));
    return solve_dp(m, crit, std::move(graph), threads);
}

nlohmann::json value_table_to_json(const ModelSpec &m, const DpResult &r) {
    using nlohmann::json;
    json nodes = json::array();
    for (const auto &n : r.policy.graph->nodes())
        nodes.push_back({{"id", n.id},
                         {"t", n.time},
                         {"state", m.states[n.state]},
                         {"belief", belief_to_json(m, n.belief)},
                         {"value", r.values.values[n.id]},
                         {"argmin_action", m.actions[r.policy.table[n.id]]}});
    return {{"root_value", r.values.root_value},
            {"criterion", criterion_to_json(r.values.criterion)},
            {"nodes", std::move(nodes)}};
}

namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > kSaturated / a)
        return kSaturated;
    return a * b;
}

std::size_t saturating_pow(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    while (exp > 0) {
        if (exp & 1)
            r = saturating_mul(r, base);
        exp >>= 1;
        if (exp > 0)
            base = saturating_mul(base, base);
    }
    return r;
}

} // namespace

std::size_t policy_count(const ModelSpec &m) {
    // A history of length t >= 2 ending in x: S^(t-2) of them, each contributing |U_t(x)|.
    const std::size_t S = m.num_states();
    std::size_t count = m.admissible_actions(1, m.initial_state).size();
    std::size_t histories = 1;
    for (int t = 2; t <= m.horizon; ++t) {
        for (int x = 0; x < m.num_states(); ++x)
            count = saturating_mul(count, saturating_pow(m.admissible_actions(t, x).size(), histories));
        histories = saturating_mul(histories, S);
    }
    return count;
}

PolicyEnumerator::PolicyEnumerator(const ModelSpec &m, std::size_t cap) {
    count_ = policy_count(m);
    if (count_ > cap)
        throw CapExceeded("policy enumeration exceeds " + std::to_string(cap) + " policies");
    policy_ = HistoryPolicy(m.horizon, m.num_states(), m.initial_state);
    for (int t = 1; t <= m.horizon; ++t)
        for (std::size_t i = 0; i < policy_.histories_at(t); ++i) {
            const int x = policy_.history_at(t, i).back();
            const auto choices = m.admissible_actions(t, x);
            if (choices.empty())
                throw DomainError("empty admissible set at t=" + std::to_string(t));
            policy_.set_action_at(t, i, choices.front());
            if (choices.size() > 1)
                slots_.push_back({t, i, choices});
        }
    digits_.assign(slots_.size(), 0);
}

bool PolicyEnumerator::next() {
    for (std::size_t k = slots_.size(); k-- > 0;) {
        const Slot &s = slots_[k];
        if (++digits_[k] < s.choices.size()) {
            policy_.set_action_at(s.t, s.index, s.choices[digits_[k]]);
            return true;
        }
        digits_[k] = 0;
        policy_.set_action_at(s.t, s.index, s.choices.front());
    }
    return false;
}

PolicyEnumerator enumerate_policies(const ModelSpec &m, std::size_t cap) { return PolicyEnumerator(m, cap); }

BruteForceResult brute_force_optimum(const ModelSpec &m, const CriterionSpec &crit, std::size_t cap) {
    if (!crit.is_builtin())
        throw DomainError("brute force supports only the built-in criteria");
    PolicyEnumerator en(m, cap);
    const std::vector<int> h1{m.initial_state};
    BruteForceResult best;
    do {
        const double v = eval_policy_paths(m, crit, en.current(), h1);
        if (best.policies_evaluated == 0 || v < best.value) {
            best.value = v;
            best.policy = en.current();
        }
        ++best.policies_evaluated;
    } while (en.next());
    return best;
}

} // namespace riskmdp
