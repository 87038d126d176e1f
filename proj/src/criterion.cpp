#include "riskmdp/criterion.hpp"

#include "riskmdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace riskmdp {

double expectation_of(std::span<const double> values, std::span<const double> probs) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (probs[i] != 0.0)
            acc += probs[i] * values[i];
    return acc;
}

double entropic_of(std::span<const double> values, std::span<const double> probs, double kappa) {
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i)
        if (probs[i] > 0.0)
            shift = std::max(shift, kappa * values[i]);
    if (!std::isfinite(shift))
        return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (probs[i] > 0.0)
            acc += probs[i] * std::exp(kappa * values[i] - shift);
    return (shift + std::log(acc)) / kappa;
}

CriterionSpec make_expectation() {
    CriterionSpec c;
    c.kind = CriterionKind::expectation;
    c.name = "expectation";
    c.marginal = expectation_of;
    c.transition = expectation_of;
    c.report = [](double v) { return v; };
    return c;
}

CriterionSpec make_entropic(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw DomainError("entropic criterion requires kappa > 0");
    CriterionSpec c;
    c.kind = CriterionKind::entropic;
    c.name = "entropic";
    c.kappa = kappa;
    auto map = [kappa](std::span<const double> v, std::span<const double> p) { return entropic_of(v, p, kappa); };
    c.marginal = map;
    c.transition = map;
    c.report = [](double v) { return v; };
    c.belief_tilt = kappa;
    return c;
}

CriterionSpec make_custom(std::string name, MarginalRiskMap marginal, TransitionRiskMap transition,
                          ReportTransform report) {
    if (!marginal || !transition)
        throw DomainError("custom criterion needs both a marginal and a transition map");
    CriterionSpec c;
    c.kind = CriterionKind::custom;
    c.name = std::move(name);
    c.marginal = std::move(marginal);
    c.transition = std::move(transition);
    c.report = report ? std::move(report) : [](double v) { return v; };
    auto r = check_axioms(c, kDefaultAxiomSamples, kDefaultAxiomSeed);
    if (!r.passed())
        throw DomainError("custom criterion '" + c.name + "' violates the " + r.violations.front().axiom +
                          " axiom (" + r.violations.front().map + " map, " + std::to_string(r.violations.size()) +
                          " violations)");
    return c;
}

std::size_t AxiomReport::count(const std::string &axiom) const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [&](const AxiomViolation &v) { return v.axiom == axiom; }));
}

namespace {

class Sampler {
  public:
    explicit Sampler(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int below(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

  private:
    std::mt19937_64 gen_;
};

// Probability vector with some atoms forced to zero mass; at least one atom stays positive.
std::vector<double> draw_distribution(Sampler &s, int n, bool force_zero) {
    std::vector<double> w(n);
    for (double &x : w)
        x = s.uniform(0.05, 1.0);
    for (int i = 0; i < n; ++i)
        if (s.uniform() < 0.3)
            w[i] = 0.0;
    if (force_zero && n > 1)
        w[s.below(n)] = 0.0;
    if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; }))
        w[s.below(n)] = 1.0;
    double total = 0.0;
    for (double x : w)
        total += x;
    for (double &x : w)
        x /= total;
    return w;
}

void check_map(const std::function<double(std::span<const double>, std::span<const double>)> &map,
               const std::string &which, int sample, Sampler &s, std::vector<AxiomViolation> &out) {
    constexpr double tol = 1e-9;
    const int n = 1 + s.below(5);
    const auto probs = draw_distribution(s, n, sample % 2 == 0);

    std::vector<double> f(n), g(n), shifted(n), zeros(n, 0.0), moved(n);
    for (int i = 0; i < n; ++i) {
        f[i] = s.uniform(-10.0, 10.0);
        g[i] = f[i] + (s.uniform() < 0.5 ? 0.0 : s.uniform(0.0, 5.0));
    }
    const double a = s.uniform(-10.0, 10.0);
    for (int i = 0; i < n; ++i) {
        shifted[i] = f[i] + a;
        moved[i] = probs[i] == 0.0 ? f[i] + s.uniform(10.0, 50.0) : f[i];
    }

    auto report = [&](const char *axiom, double lhs, double rhs) {
        out.push_back({which, axiom, sample, lhs, rhs});
    };
    auto close = [&](double x, double y) { return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)}); };

    const double at_zero = map(zeros, probs);
    if (!close(at_zero, 0.0))
        report("normalization", at_zero, 0.0);

    const double rf = map(f, probs), rg = map(g, probs);
    if (rf > rg + tol * std::max({1.0, std::abs(rf), std::abs(rg)}))
        report("monotonicity", rf, rg);

    const double rshift = map(shifted, probs);
    if (!close(rshift, rf + a))
        report("translation", rshift, rf + a);

    if (moved != f) {
        const double rmoved = map(moved, probs);
        if (!close(rmoved, rf))
            report("support", rmoved, rf);
    }
}

} // namespace

AxiomReport check_axioms(const CriterionSpec &c, int samples, std::uint64_t seed) {
    if (samples < 1)
        throw DomainError("check_axioms needs samples >= 1");
    AxiomReport r;
    r.samples = samples;
    Sampler s(seed);
    for (int i = 0; i < samples; ++i) {
        check_map(c.marginal, "marginal", i, s, r.violations);
        check_map(c.transition, "transition", i, s, r.violations);
    }
    return r;
}

nlohmann::json axiom_report_to_json(const AxiomReport &r) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto &x : r.violations)
        v.push_back({{"map", x.map}, {"axiom", x.axiom}, {"sample", x.sample}, {"lhs", x.lhs}, {"rhs", x.rhs}});
    return {{"samples", r.samples}, {"passed", r.passed()}, {"violations", std::move(v)}};
}

CriterionSpec parse_criterion(const nlohmann::json &doc) {
    if (!doc.is_object())
        throw SchemaError("criterion must be a JSON object");
    auto type = doc.find("type");
    if (type == doc.end() || !type->is_string())
        throw SchemaError("criterion needs a string 'type'");
    const auto name = type->get<std::string>();
    if (name == "expectation") {
        if (doc.size() != 1)
            throw SchemaError("expectation criterion takes no parameters");
        return make_expectation();
    }
    if (name == "entropic") {
        auto k = doc.find("kappa");
        if (k == doc.end() || !k->is_number())
            throw SchemaError("entropic criterion needs a numeric 'kappa'");
        if (doc.size() != 2)
            throw SchemaError("entropic criterion takes only 'kappa'");
        return make_entropic(k->get<double>());
    }
    throw SchemaError("unknown criterion type '" + name + "' (built-ins: expectation, entropic)");
}

nlohmann::json criterion_to_json(const CriterionSpec &c) {
    switch (c.kind) {
    case CriterionKind::expectation:
        return {{"type", "expectation"}};
    case CriterionKind::entropic:
        return {{"type", "entropic"}, {"kappa", c.kappa}};
    case CriterionKind::custom:
        break;
    }
    return {{"type", "custom"}, {"name", c.name}};
}

CriterionRegistry::CriterionRegistry() {
    table_.emplace("expectation", make_expectation());
    table_.emplace("entropic", make_entropic(1.0));
}

void CriterionRegistry::add(CriterionSpec c) {
    const std::string key = c.name;
    if (!table_.emplace(key, std::move(c)).second)
        throw DomainError("criterion '" + key + "' is already registered");
}

const CriterionSpec &CriterionRegistry::get(const std::string &name) const {
    auto it = table_.find(name);
    if (it == table_.end())
        throw DomainError("no criterion registered under '" + name + "'");
    return it->second;
}

} // namespace riskmdp
