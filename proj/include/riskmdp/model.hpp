#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace riskmdp {

/// Tolerance for "sums to one" checks on kernel rows, priors and beliefs.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Probability vector over the model's parameters, indexed in declared parameter order.
struct Belief {
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    double operator[](std::size_t i) const { return weights[i]; }

    static Belief uniform(std::size_t n);
    static Belief point_mass(std::size_t n, std::size_t k);

    bool operator==(const Belief &) const = default;
};

/// Throws DomainError unless `b` has `n` finite nonnegative weights summing to one.
void check_belief(const Belief &b, std::size_t n);

/**
 * A finite-horizon MDP whose kernels and costs depend on an unknown parameter.
 *
 * Labels are kept in declared order and every table is indexed by label position.
 * Times are 1-based: t = 1..horizon.
 *
 *   kernel: [((p * S + x) * A + u) * S + x']  = K_p(x' | x, u)
 *   cost:   [(((t-1) * S + x) * A + u) * P + p] = c_t(x, u, p)
 *   admissible[t-1][x]: ascending action indices of U_t(x)
 */
struct ModelSpec {
    int horizon = 0;
    std::vector<std::string> states;
    std::vector<std::string> actions;
    std::vector<std::string> parameters;
    std::vector<std::vector<std::vector<int>>> admissible;
    Belief prior;
    std::vector<double> kernel;
    std::vector<double> cost;
    int initial_state = 0;

    int num_states() const { return static_cast<int>(states.size()); }
    int num_actions() const { return static_cast<int>(actions.size()); }
    int num_parameters() const { return static_cast<int>(parameters.size()); }

    std::size_t kernel_offset(int p, int x, int u) const {
        return ((static_cast<std::size_t>(p) * states.size() + x) * actions.size() + u) * states.size();
    }
    std::size_t cost_offset(int t, int x, int u) const {
        return ((static_cast<std::size_t>(t - 1) * states.size() + x) * actions.size() + u) * parameters.size();
    }

    double K(int p, int x, int u, int x_next) const { return kernel[kernel_offset(p, x, u) + x_next]; }
    std::span<const double> kernel_row(int p, int x, int u) const {
        return {kernel.data() + kernel_offset(p, x, u), states.size()};
    }
    std::span<double> kernel_row(int p, int x, int u) {
        return {kernel.data() + kernel_offset(p, x, u), states.size()};
    }

    double c(int t, int x, int u, int p) const { return cost[cost_offset(t, x, u) + p]; }
    double &c(int t, int x, int u, int p) { return cost[cost_offset(t, x, u) + p]; }
    /// c_t(x, u, .) as a function of the parameter.
    std::span<const double> cost_by_parameter(int t, int x, int u) const {
        return {cost.data() + cost_offset(t, x, u), parameters.size()};
    }

    std::span<const int> admissible_actions(int t, int x) const { return admissible[t - 1][x]; }
    bool is_admissible(int t, int x, int u) const;

    int state_index(std::string_view label) const;
    int action_index(std::string_view label) const;
    int parameter_index(std::string_view label) const;

    bool operator==(const ModelSpec &) const = default;
};

/// Model with default labels s0.., a0.., th0.., every action admissible, uniform prior,
/// uniform kernel rows and zero costs. Starting point for programmatic construction.
ModelSpec blank_model(int horizon, int num_states, int num_actions, int num_parameters);

enum class Severity { error, warning };

struct Issue {
    Severity severity;
    std::string message;
};

/// Every invariant violation of `m` (errors), plus a warning for each transition
/// (x, u, x') whose prior predictive probability is zero. Never throws.
std::vector<Issue> validate_model(const ModelSpec &m);

bool has_errors(const std::vector<Issue> &issues);

/// Parses and validates a JSON model document. Kernel rows and the prior are renormalized
/// once when their sum is within tolerance of one but not already normalized.
ModelSpec parse_model(std::string_view text);
ModelSpec model_from_json(const nlohmann::json &doc);
nlohmann::json model_to_json(const ModelSpec &m);
std::string serialize_model(const ModelSpec &m);

/// Belief as {"label": weight, ...}.
nlohmann::json belief_to_json(const ModelSpec &m, const Belief &b);

/// Logistic dose-toxicity curve 1 / (1 + exp(-(u - theta))).
double logistic_toxicity(double theta, double dose);

/**
 * Dose-finding model: states {"0" nontoxic, "1" toxic}, actions are doses, parameters are
 * candidate optimal doses, K_theta(1 | x, u) = toxicity(theta, u) independent of x, and
 * time-invariant cost |u - theta|. The initial state is "0".
 *
 * `prior` maps grid values to weights; grid values absent from the map get weight zero.
 * `toxicity`, when given, is indexed [theta][dose] and replaces the logistic curve.
 */
ModelSpec gen_clinical_trials_model(const std::vector<double> &doses, const std::vector<double> &theta_grid,
                                    int horizon, const std::map<double, double> &prior,
                                    const std::optional<std::vector<std::vector<double>>> &toxicity = std::nullopt);

/// Uniform prior over the grid.
ModelSpec gen_clinical_trials_model(const std::vector<double> &doses, const std::vector<double> &theta_grid,
                                    int horizon);

} // namespace riskmdp
