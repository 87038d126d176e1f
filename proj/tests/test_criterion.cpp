#include "support.hpp"

#include "riskmdp/criterion.hpp"
#include "riskmdp/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace riskmdp;
using namespace riskmdp::testing;

namespace {

using V = std::vector<double>;

double max_ignoring_support(std::span<const double> v, std::span<const double>) {
    return *std::max_element(v.begin(), v.end());
}

double max_on_support(std::span<const double> v, std::span<const double> p) {
    double best = -INFINITY;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (p[i] > 0.0)
            best = std::max(best, v[i]);
    return best;
}

} // namespace

TEST_CASE("expectation") {
    const auto c = make_expectation();
    CHECK(c.marginal(V{0, 0, 0}, V{0.2, 0.3, 0.5}) == 0.0);
    CHECK(c.marginal(V{4, 7}, V{0, 1}) == 7.0);
    CHECK(c.marginal(V{1, 3}, V{0.25, 0.75}) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(c.report(1.25) == 1.25);
    CHECK(c.belief_tilt == 0.0);
}

TEST_CASE("entropic") {
    const auto c = make_entropic(1.0);
    SUBCASE("constant input") {
        for (double k : {0.1, 1.0, 7.0}) {
            const auto e = make_entropic(k);
            CHECK(e.marginal(V{2.5, 2.5, 2.5}, V{0.1, 0.6, 0.3}) == doctest::Approx(2.5).epsilon(1e-14));
        }
    }
    SUBCASE("ln(0.5 + 1.5)") {
        CHECK(c.marginal(V{0, std::log(3.0)}, V{0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    }
    SUBCASE("small kappa approaches the expectation") {
        const auto e = make_entropic(1e-6);
        CHECK(std::abs(e.marginal(V{1, 3}, V{0.25, 0.75}) - 2.5) <= 1e-4);
    }
    SUBCASE("no overflow for large arguments") {
        const double v = c.transition(V{800, 1000}, V{0.5, 0.5});
        CHECK(v == doctest::Approx(1000 + std::log(0.5)).epsilon(1e-14));
    }
    SUBCASE("zero-mass atoms are excluded") {
        CHECK(c.transition(V{1, 1e6}, V{1, 0}) == 1.0);
    }
    SUBCASE("kappa must be positive") {
        CHECK_THROWS_AS(make_entropic(0.0), DomainError);
        CHECK_THROWS_AS(make_entropic(-1.0), DomainError);
        CHECK_THROWS_AS(make_entropic(NAN), DomainError);
    }
    CHECK(c.belief_tilt == 1.0);
}

TEST_CASE("axiom checker") {
    CHECK(check_axioms(make_expectation(), 1000, 1).passed());
    CHECK(check_axioms(make_entropic(2.0), 1000, 1).passed());
    for (double k : {0.5, 1.0, 5.0})
        CHECK(check_axioms(make_entropic(k), 1000, kDefaultAxiomSeed).passed());

    CriterionSpec broken;
    broken.kind = CriterionKind::custom;
    broken.name = "max";
    broken.marginal = max_ignoring_support;
    broken.transition = max_ignoring_support;
    broken.report = [](double v) { return v; };
    const auto r = check_axioms(broken, 1000, 5);
    CHECK(r.count("support") >= 1);
    CHECK(r.count("normalization") == 0);
    CHECK(r.count("translation") == 0);
    CHECK(r.count("monotonicity") == 0);

    const auto a = check_axioms(broken, 200, 9), b = check_axioms(broken, 200, 9);
    REQUIRE(a.violations.size() == b.violations.size());
    for (std::size_t i = 0; i < a.violations.size(); ++i)
        CHECK(a.violations[i].lhs == b.violations[i].lhs);

    CHECK_THROWS_AS(check_axioms(make_expectation(), 0, 1), DomainError);

    const auto j = axiom_report_to_json(r);
    CHECK(j["passed"] == false);
    CHECK(j["violations"][0].contains("axiom"));
}

TEST_CASE("custom criteria are admitted only when the axioms hold") {
    CHECK_THROWS_AS(make_custom("max", max_ignoring_support, max_ignoring_support), DomainError);
    const auto worst = make_custom("worst-case", max_on_support, max_on_support);
    CHECK(worst.kind == CriterionKind::custom);
    CHECK(worst.belief_tilt == 0.0);
    CHECK(worst.marginal(V{1, 9, 4}, V{0.5, 0, 0.5}) == 4.0);

    auto nonlinear = [](std::span<const double> v, std::span<const double> p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            acc += p[i] * v[i] * v[i];
        return acc;
    };
    CHECK_THROWS_AS(make_custom("square", nonlinear, expectation_of), DomainError);

    CriterionRegistry reg;
    CHECK(reg.contains("expectation"));
    CHECK(reg.get("entropic").kappa == 1.0);
    reg.add(worst);
    CHECK(reg.get("worst-case").name == "worst-case");
    CHECK_THROWS_AS(reg.add(worst), DomainError);
    CHECK_THROWS_AS(reg.get("nope"), DomainError);
}

TEST_CASE("entropic approaches expectation as kappa shrinks") {
    std::mt19937_64 gen(21);
    for (int i = 0; i < 50; ++i) {
        const int n = 1 + static_cast<int>(gen() % 5);
        V f(n);
        for (double &x : f)
            x = 10.0 * uniform01(gen) - 5.0;
        const auto xi = random_distribution(gen, n, 0.0);
        const double range = *std::max_element(f.begin(), f.end()) - *std::min_element(f.begin(), f.end());
        const double e = expectation_of(f, xi);
        double prev = INFINITY;
        for (double k : {1e-2, 1e-3, 1e-4}) {
            const double gap = std::abs(entropic_of(f, xi, k) - e);
            CHECK(gap <= k * range * range / 2 + 1e-15);
            if (range > 0.0) {
                CHECK(gap < prev);
            }
            prev = gap;
        }
    }
}

TEST_CASE("built-ins are label independent and bounded by the support") {
    std::mt19937_64 gen(22);
    const CriterionSpec crits[] = {make_expectation(), make_entropic(0.7), make_entropic(4.0)};
    for (int i = 0; i < 200; ++i) {
        const int n = 1 + static_cast<int>(gen() % 6);
        V v(n), p = random_distribution(gen, n, 0.0);
        for (double &x : v)
            x = 20.0 * uniform01(gen) - 10.0;
        if (n > 1)
            p[gen() % n] = 0.0;
        double total = 0.0;
        for (double x : p)
            total += x;
        for (double &x : p)
            x /= total;

        std::vector<int> perm(n);
        for (int k = 0; k < n; ++k)
            perm[k] = k;
        std::shuffle(perm.begin(), perm.end(), gen);
        V vp(n), pp(n);
        for (int k = 0; k < n; ++k) {
            vp[k] = v[perm[k]];
            pp[k] = p[perm[k]];
        }
        double lo = INFINITY, hi = -INFINITY;
        for (int k = 0; k < n; ++k)
            if (p[k] > 0.0) {
                lo = std::min(lo, v[k]);
                hi = std::max(hi, v[k]);
            }
        for (const auto &c : crits) {
            const double a = c.transition(v, p), b = c.transition(vp, pp);
            CHECK(rel_close(a, b, 1e-13));
            CHECK(c.marginal(v, p) == a);
            CHECK(a >= lo - 1e-12);
            CHECK(a <= hi + 1e-12);
        }
    }
}

TEST_CASE("criterion json") {
    CHECK(parse_criterion(nlohmann::json::parse(R"({"type":"expectation"})")).kind == CriterionKind::expectation);
    const auto e = parse_criterion(nlohmann::json::parse(R"({"type":"entropic","kappa":2.5})"));
    CHECK(e.kappa == 2.5);
    CHECK(criterion_to_json(e) == nlohmann::json::parse(R"({"type":"entropic","kappa":2.5})"));
    CHECK_THROWS_AS(parse_criterion(nlohmann::json::parse(R"({"type":"entropic","kappa":-1})")), DomainError);
    CHECK_THROWS_AS(parse_criterion(nlohmann::json::parse(R"({"type":"entropic"})")), SchemaError);
    CHECK_THROWS_AS(parse_criterion(nlohmann::json::parse(R"({"type":"cvar","alpha":0.1})")), SchemaError);
    CHECK_THROWS_AS(parse_criterion(nlohmann::json::parse(R"([1,2])")), SchemaError);
}
