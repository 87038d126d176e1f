#pragma once

#include "riskmdp/belief.hpp"
#include "riskmdp/criterion.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/policy.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

namespace riskmdp {

inline constexpr std::size_t kPathCap = 10'000'000;
inline constexpr std::size_t kPolicyCap = 1'000'000;

/**
 * v_t(h_t) for a history policy, by backward recursion over continuation histories.
 *
 * The belief at h_t is the posterior given h_t and the policy's action prefix. Below the
 * query node beliefs move by tilted_bayes_update with the criterion's belief_tilt. The
 * report transform is applied to the returned value.
 */
double eval_policy_recursive(const ModelSpec &m, const CriterionSpec &crit, const HistoryPolicy &pol,
                             std::span<const int> history);

/**
 * Closed-form value by enumerating every (parameter, continuation path) pair:
 * E[sum of costs] for expectation, (1/kappa) ln E[exp(kappa sum of costs)] for entropic.
 * Built-in criteria only (DomainError otherwise). CapExceeded beyond kPathCap pairs.
 */
double eval_policy_paths(const ModelSpec &m, const CriterionSpec &crit, const HistoryPolicy &pol,
                         std::span<const int> history);

struct ValueTable {
    std::vector<double> values; // node id -> V_t(x, belief)
    CriterionSpec criterion;
    double root_value = 0.0; // report(values[root])
};

struct DpResult {
    ValueTable values;
    QuasiMarkovPolicy policy;
};

/**
 * Backward recursion over the graph, t = T..1:
 *   V_t(x, b) = min_u rho_hat({c_t(x,u,p) + sigma(V_{t+1}(., b'); K_p(.|x,u))}_p; b),  V_{T+1} = 0.
 * Ties go to the first action in declared order. Nodes within a level are solved on up to
 * `threads` OpenMP threads; the result is bit-identical for every thread count.
 * The graph must have been built with crit.belief_tilt (DomainError otherwise).
 */
DpResult solve_dp(const ModelSpec &m, const CriterionSpec &crit, std::shared_ptr<const BeliefGraph> graph,
                  int threads = 1);

/// Single-threaded reference for solve_dp.
DpResult solve_dp_serial(const ModelSpec &m, const CriterionSpec &crit, std::shared_ptr<const BeliefGraph> graph);

/// Builds the belief graph for `crit` and solves it.
DpResult solve_dp(const ModelSpec &m, const CriterionSpec &crit, std::size_t node_cap = kDefaultNodeCap,
                  int threads = 1);

/// {"root_value","criterion","nodes":[{"id","t","state","belief","value","argmin_action"}]}
nlohmann::json value_table_to_json(const ModelSpec &m, const DpResult &r);

/// Number of admissible history policies; saturates at SIZE_MAX.
std::size_t policy_count(const ModelSpec &m);

/**
 * Every admissible history policy once, in lexicographic order of the decision vector
 * (t ascending, then history index), later decisions varying fastest. The first policy
 * takes the first admissible action everywhere.
 */
class PolicyEnumerator {
  public:
    /// Throws CapExceeded when there are more than `cap` policies.
    explicit PolicyEnumerator(const ModelSpec &m, std::size_t cap = kPolicyCap);

    std::size_t count() const { return count_; }
    const HistoryPolicy &current() const { return policy_; }
    /// Advances to the next policy; false once the last one has been passed.
    bool next();

  private:
    struct Slot {
        int t;
        std::size_t index;
        std::span<const int> choices;
    };
    HistoryPolicy policy_;
    std::vector<Slot> slots_;
    std::vector<std::size_t> digits_;
    std::size_t count_ = 0;
};

PolicyEnumerator enumerate_policies(const ModelSpec &m, std::size_t cap = kPolicyCap);

struct BruteForceResult {
    double value = 0.0;
    HistoryPolicy policy;
    std::size_t policies_evaluated = 0;
};

/// min over all history policies of eval_policy_paths at (x1); first minimizer wins.
BruteForceResult brute_force_optimum(const ModelSpec &m, const CriterionSpec &crit, std::size_t cap = kPolicyCap);

} // namespace riskmdp
