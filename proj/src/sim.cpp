#include "riskmdp/sim.hpp"

#include "riskmdp/belief.hpp"
#include "riskmdp/errors.hpp"
#include "riskmdp/rng.hpp"

#include <cmath>
#include <cstdio>
#include <exception>

#include <omp.h>

namespace riskmdp {

namespace {

void check_args(const ModelSpec &m, const HistoryPolicy &pol, int theta_star, int runs) {
    if (theta_star < 0 || theta_star >= m.num_parameters())
        throw DomainError("theta_star is not a parameter of the model");
    if (runs < 1)
        throw DomainError("runs must be >= 1");
    if (pol.horizon() != m.horizon || pol.num_states() != m.num_states() || pol.initial_state() != m.initial_state)
        throw DomainError("policy shape does not match the model");
}

// Inverse CDF over the declared state order.
int draw_state(std::span<const double> row, double uniform) {
    double cum = 0.0;
    int last = -1;
    for (std::size_t x = 0; x < row.size(); ++x) {
        if (row[x] <= 0.0)
            continue;
        cum += row[x];
        last = static_cast<int>(x);
        if (uniform < cum)
            return last;
    }
    return last; // rounding left uniform above the final partial sum
}

} // namespace

Trajectory simulate_run(const ModelSpec &m, const HistoryPolicy &pol, int theta_star, std::uint64_t seed,
                        std::uint64_t run) {
    RunStream rng(seed, run);
    Trajectory tr;
    tr.states.push_back(m.initial_state);
    Belief b = m.prior;
    for (int t = 1; t <= m.horizon; ++t) {
        const int x = tr.states.back();
        const int u = pol.action(tr.states);
        if (u < 0 || !m.is_admissible(t, x, u))
            throw DomainError("policy decision at t=" + std::to_string(t) + " is missing or not admissible");
        tr.actions.push_back(u);
        tr.beliefs.push_back(b);
        tr.true_costs.push_back(m.c(t, x, u, theta_star));
        tr.total_true_cost += tr.true_costs.back();
        if (t == m.horizon)
            break;
        const int xn = draw_state(m.kernel_row(theta_star, x, u), rng.uniform());
        b = bayes_update(m, b, x, u, xn);
        tr.states.push_back(xn);
    }
    return tr;
}

std::vector<Trajectory> simulate_runs(const ModelSpec &m, const HistoryPolicy &pol, int theta_star, int runs,
                                      std::uint64_t seed, int threads) {
    check_args(m, pol, theta_star, runs);
    if (threads < 1)
        throw DomainError("threads must be >= 1");
    std::vector<Trajectory> out(runs);
    std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int r = 0; r < runs; ++r) {
        try {
            out[r] = simulate_run(m, pol, theta_star, seed, static_cast<std::uint64_t>(r));
        } catch (...) {
#pragma omp critical(riskmdp_sim_failure)
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

std::vector<Trajectory> simulate_runs_serial(const ModelSpec &m, const HistoryPolicy &pol, int theta_star, int runs,
                                             std::uint64_t seed) {
    check_args(m, pol, theta_star, runs);
    std::vector<Trajectory> out;
    out.reserve(runs);
    for (int r = 0; r < runs; ++r)
        out.push_back(simulate_run(m, pol, theta_star, seed, static_cast<std::uint64_t>(r)));
    return out;
}

SimSummary summarize(const std::vector<Trajectory> &trajs, int theta_star) {
    if (trajs.empty())
        throw DomainError("summarize needs at least one trajectory");
    const std::size_t T = trajs.front().states.size();
    const double n = static_cast<double>(trajs.size());
    SimSummary s;
    s.theta_star = theta_star;
    s.runs = trajs.size();
    s.mean_true_cost.assign(T, 0.0);
    s.mean_belief_star.assign(T, 0.0);
    s.stddev_belief_star.assign(T, 0.0);
    for (const auto &tr : trajs) {
        for (std::size_t t = 0; t < T; ++t) {
            s.mean_true_cost[t] += tr.true_costs[t];
            s.mean_belief_star[t] += tr.beliefs[t][theta_star];
        }
        s.mean_total += tr.total_true_cost;
    }
    for (std::size_t t = 0; t < T; ++t) {
        s.mean_true_cost[t] /= n;
        s.mean_belief_star[t] /= n;
    }
    s.mean_total /= n;
    if (trajs.size() > 1) {
        double ss_total = 0.0;
        std::vector<double> ss_belief(T, 0.0);
        for (const auto &tr : trajs) {
            ss_total += (tr.total_true_cost - s.mean_total) * (tr.total_true_cost - s.mean_total);
            for (std::size_t t = 0; t < T; ++t) {
                const double d = tr.beliefs[t][theta_star] - s.mean_belief_star[t];
                ss_belief[t] += d * d;
            }
        }
        s.stddev_total = std::sqrt(ss_total / (n - 1.0));
        for (std::size_t t = 0; t < T; ++t)
            s.stddev_belief_star[t] = std::sqrt(ss_belief[t] / (n - 1.0));
    }
    return s;
}

nlohmann::json summary_to_json(const ModelSpec &m, const SimSummary &s) {
    return {{"theta_star", m.parameters[s.theta_star]},
            {"runs", s.runs},
            {"mean_true_cost", s.mean_true_cost},
            {"mean_belief_theta_star", s.mean_belief_star},
            {"stddev_belief_theta_star", s.stddev_belief_star},
            {"mean_total_true_cost", s.mean_total},
            {"stddev_total_true_cost", s.stddev_total}};
}

void write_trajectories_csv(std::ostream &out, const ModelSpec &m, const std::vector<Trajectory> &trajs) {
    out << "run,t,state,action,true_cost";
    for (const auto &p : m.parameters)
        out << ",belief_" << p;
    out << '\n';
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    };
    for (std::size_t r = 0; r < trajs.size(); ++r) {
        const auto &tr = trajs[r];
        for (std::size_t t = 0; t < tr.states.size(); ++t) {
            out << r << ',' << t + 1 << ',' << m.states[tr.states[t]] << ',' << m.actions[tr.actions[t]] << ','
                << num(tr.true_costs[t]);
            for (double w : tr.beliefs[t].weights)
                out << ',' << num(w);
            out << '\n';
        }
    }
}

} // namespace riskmdp
