#pragma once

#include "riskmdp/model.hpp"
#include "riskmdp/policy.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

#include <json.hpp>

namespace riskmdp {

struct Trajectory {
    std::vector<int> states;         // x_1..x_T
    std::vector<int> actions;        // u_1..u_T
    std::vector<Belief> beliefs;     // posterior at each t
    std::vector<double> true_costs;  // c_t(x_t, u_t, theta*)
    double total_true_cost = 0.0;
};

/// One rollout under parameter index `theta_star`, drawing from RunStream(seed, run).
Trajectory simulate_run(const ModelSpec &m, const HistoryPolicy &pol, int theta_star, std::uint64_t seed,
                        std::uint64_t run);

/**
 * `runs` independent rollouts; run r uses substream (seed, r), so the output does not
 * depend on `threads`. Throws DomainError on a bad theta_star or runs < 1.
 */
std::vector<Trajectory> simulate_runs(const ModelSpec &m, const HistoryPolicy &pol, int theta_star, int runs,
                                      std::uint64_t seed, int threads = 1);

/// Single-threaded reference for simulate_runs.
std::vector<Trajectory> simulate_runs_serial(const ModelSpec &m, const HistoryPolicy &pol, int theta_star, int runs,
                                             std::uint64_t seed);

struct SimSummary {
    int theta_star = 0;
    std::size_t runs = 0;
    std::vector<double> mean_true_cost;    // per t
    std::vector<double> mean_belief_star;  // per t, mean of xi_t(theta*)
    std::vector<double> stddev_belief_star;
    double mean_total = 0.0;
    double stddev_total = 0.0; // sample standard deviation; 0 for a single run
};

/// Throws DomainError on an empty list.
SimSummary summarize(const std::vector<Trajectory> &trajs, int theta_star);

nlohmann::json summary_to_json(const ModelSpec &m, const SimSummary &s);

/// Header run,t,state,action,true_cost,belief_<parameter>...; one row per (run, t).
void write_trajectories_csv(std::ostream &out, const ModelSpec &m, const std::vector<Trajectory> &trajs);

} // namespace riskmdp
