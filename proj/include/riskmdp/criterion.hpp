#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace riskmdp {

/// rho_hat(f; xi): aggregates parameter-indexed values against a belief.
using MarginalRiskMap = std::function<double(std::span<const double> values, std::span<const double> belief)>;
/// sigma(v; P): aggregates next-state values against a one-step transition distribution.
using TransitionRiskMap = std::function<double(std::span<const double> values, std::span<const double> probs)>;
using ReportTransform = std::function<double(double)>;

enum class CriterionKind { expectation, entropic, custom };

/**
 * A recursive risk criterion in (rho_hat, sigma) form.
 *
 * `belief_tilt` selects the belief dynamics carried by the recursion: 0 is the plain
 * Bayes posterior, kappa > 0 the exponentially cost-tilted posterior used by the entropic
 * criterion. The maps and `report` must be pure; the engine calls them concurrently.
 */
struct CriterionSpec {
    CriterionKind kind = CriterionKind::expectation;
    std::string name;
    double kappa = 0.0;
    MarginalRiskMap marginal;
    TransitionRiskMap transition;
    ReportTransform report;
    double belief_tilt = 0.0;

    bool is_builtin() const { return kind != CriterionKind::custom; }
};

double expectation_of(std::span<const double> values, std::span<const double> probs);

/// (1/kappa) ln sum_i probs_i exp(kappa values_i), max-shifted, zero-mass atoms excluded.
double entropic_of(std::span<const double> values, std::span<const double> probs, double kappa);

CriterionSpec make_expectation();

/// Throws DomainError unless kappa > 0 (and finite).
CriterionSpec make_entropic(double kappa);

inline constexpr int kDefaultAxiomSamples = 1000;
inline constexpr std::uint64_t kDefaultAxiomSeed = 20240601;

/// Custom criterion; throws DomainError when check_axioms finds any violation
/// with the default sample budget.
CriterionSpec make_custom(std::string name, MarginalRiskMap marginal, TransitionRiskMap transition,
                          ReportTransform report = nullptr);

struct AxiomViolation {
    std::string map;   // "marginal" or "transition"
    std::string axiom; // normalization, monotonicity, translation, support
    int sample = 0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct AxiomReport {
    int samples = 0;
    std::vector<AxiomViolation> violations;
    bool passed() const { return violations.empty(); }
    std::size_t count(const std::string &axiom) const;
};

/// Randomized check of normalization, monotonicity, translation invariance and the support
/// property for both maps, tolerance 1e-9 (relative to max(1, |value|)). Deterministic in `seed`.
AxiomReport check_axioms(const CriterionSpec &c, int samples, std::uint64_t seed);

nlohmann::json axiom_report_to_json(const AxiomReport &r);

/// {"type":"expectation"} or {"type":"entropic","kappa":k}. Throws SchemaError on malformed
/// documents and DomainError on kappa <= 0.
CriterionSpec parse_criterion(const nlohmann::json &doc);
nlohmann::json criterion_to_json(const CriterionSpec &c);

/// Name-keyed plug-in table for custom criteria. Built-ins are preloaded as
/// "expectation" and "entropic" (kappa = 1).
class CriterionRegistry {
  public:
    CriterionRegistry();
    /// Throws DomainError on a duplicate name.
    void add(CriterionSpec c);
    const CriterionSpec &get(const std::string &name) const;
    bool contains(const std::string &name) const { return table_.count(name) != 0; }

  private:
    std::map<std::string, CriterionSpec> table_;
};

} // namespace riskmdp
