#pragma once

#include "riskmdp/engine.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/policy.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace riskmdp::testing {

inline std::string data_path(const std::string &name) { return std::string(RISKMDP_DATA_DIR) + "/" + name; }

inline std::string read_text(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ModelSpec sample_model() { return parse_model(read_text(data_path("sample_model.json"))); }

struct Shape {
    int horizon = 2;
    int states = 2;
    int actions = 2;
    int parameters = 2;
    double kernel_floor = 0.05;
    double max_cost = 3.0;
    bool restrict_actions = false; // random nonempty admissible subsets
    bool zero_prior_atom = false;  // last parameter gets prior mass 0
};

inline double uniform01(std::mt19937_64 &gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

inline std::vector<double> random_distribution(std::mt19937_64 &gen, int n, double floor) {
    std::vector<double> w(n);
    double total = 0.0;
    for (double &x : w) {
        x = uniform01(gen) + 1e-3;
        total += x;
    }
    const double free_mass = 1.0 - floor * n;
    for (double &x : w)
        x = floor + free_mass * x / total;
    return w;
}

/// Random instance with kernel entries >= kernel_floor and parameter-dependent costs.
inline ModelSpec random_instance(std::mt19937_64 &gen, const Shape &s) {
    ModelSpec m = blank_model(s.horizon, s.states, s.actions, s.parameters);
    for (int p = 0; p < s.parameters; ++p)
        for (int x = 0; x < s.states; ++x)
            for (int u = 0; u < s.actions; ++u) {
                const auto row = random_distribution(gen, s.states, s.kernel_floor);
                std::copy(row.begin(), row.end(), m.kernel_row(p, x, u).begin());
            }
    for (double &c : m.cost)
        c = s.max_cost * uniform01(gen);
    if (s.zero_prior_atom && s.parameters > 1) {
        auto head = random_distribution(gen, s.parameters - 1, 0.05);
        head.push_back(0.0);
        m.prior.weights = head;
    } else {
        m.prior.weights = random_distribution(gen, s.parameters, 0.05);
    }
    if (s.restrict_actions)
        for (auto &level : m.admissible)
            for (auto &acts : level) {
                std::vector<int> keep;
                for (int u : acts)
                    if (gen() % 2 == 0)
                        keep.push_back(u);
                if (keep.empty())
                    keep.push_back(acts[gen() % acts.size()]);
                acts = keep;
            }
    return m;
}

inline HistoryPolicy random_policy(std::mt19937_64 &gen, const ModelSpec &m) {
    HistoryPolicy pol(m.horizon, m.num_states(), m.initial_state);
    for (int t = 1; t <= m.horizon; ++t)
        for (std::size_t i = 0; i < pol.histories_at(t); ++i) {
            const auto acts = m.admissible_actions(t, pol.history_at(t, i).back());
            pol.set_action_at(t, i, acts[gen() % acts.size()]);
        }
    return pol;
}

/// Classical finite-horizon DP for a single-parameter model: V[t-1][x].
inline std::vector<std::vector<double>> classical_dp(const ModelSpec &m, int p, const CriterionSpec &crit) {
    const int S = m.num_states();
    std::vector<std::vector<double>> V(m.horizon + 1, std::vector<double>(S, 0.0));
    for (int t = m.horizon; t >= 1; --t)
        for (int x = 0; x < S; ++x) {
            double best = INFINITY;
            for (int u : m.admissible_actions(t, x)) {
                double future = 0.0;
                if (t < m.horizon) {
                    if (crit.kind == CriterionKind::entropic) {
                        double z = 0.0;
                        for (int xn = 0; xn < S; ++xn)
                            z += m.K(p, x, u, xn) * std::exp(crit.kappa * V[t][xn]);
                        future = std::log(z) / crit.kappa;
                    } else {
                        for (int xn = 0; xn < S; ++xn)
                            future += m.K(p, x, u, xn) * V[t][xn];
                    }
                }
                best = std::min(best, m.c(t, x, u, p) + future);
            }
            V[t - 1][x] = best;
        }
    V.pop_back();
    return V;
}

inline bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace riskmdp::testing
