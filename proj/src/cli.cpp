#include "riskmdp/cli.hpp"

#include "riskmdp/belief.hpp"
#include "riskmdp/criterion.hpp"
#include "riskmdp/engine.hpp"
#include "riskmdp/errors.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/policy.hpp"
#include "riskmdp/sim.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace riskmdp {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string model_path;
    std::string criterion;
    std::string policy_path;
    std::string theta_star;
    std::string out_path;
    std::string summary_path;
    int runs = 1000;
    std::uint64_t seed = 0;
    std::size_t node_cap = kDefaultNodeCap;
    int samples = kDefaultAxiomSamples;
    int threads = 1;
};

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string &text, const std::string &what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw SchemaError(what + " is not valid JSON: " + e.what());
    }
}

class Output {
  public:
    Output(const std::string &path, std::ostream &fallback) : stream_(&fallback) {
        if (path.empty())
            return;
        file_.open(path, std::ios::binary);
        if (!file_)
            throw UsageError("cannot write '" + path + "'");
        stream_ = &file_;
    }
    std::ostream &get() { return *stream_; }

  private:
    std::ofstream file_;
    std::ostream *stream_;
};

void write_json(const std::string &path, std::ostream &fallback, const json &doc) {
    Output o(path, fallback);
    o.get() << doc.dump(2) << '\n';
}

ModelSpec load_model(const Config &cfg) {
    if (cfg.model_path.empty())
        throw UsageError("--model is required");
    return parse_model(read_file(cfg.model_path));
}

// Inline JSON when the argument opens an object, otherwise a path.
CriterionSpec load_criterion(const Config &cfg) {
    if (cfg.criterion.empty())
        throw UsageError("--criterion is required");
    const auto first = cfg.criterion.find_first_not_of(" \t\r\n");
    const bool inline_json = first != std::string::npos && cfg.criterion[first] == '{';
    const std::string text = inline_json ? cfg.criterion : read_file(cfg.criterion);
    return parse_criterion(parse_json(text, "criterion"));
}

HistoryPolicy load_policy(const Config &cfg, const ModelSpec &m) {
    return parse_policy(parse_json(read_file(cfg.policy_path), "policy"), m, cfg.node_cap);
}

int cmd_validate(const Config &cfg, std::ostream &out, std::ostream &err) {
    const ModelSpec m = load_model(cfg);
    for (const auto &issue : validate_model(m))
        err << (issue.severity == Severity::error ? "error: " : "warning: ") << issue.message << '\n';
    out << "valid\n";
    return kExitOk;
}

int cmd_solve(const Config &cfg, std::ostream &out, std::ostream &err) {
    const ModelSpec m = load_model(cfg);
    const CriterionSpec crit = load_criterion(cfg);
    auto graph = std::make_shared<const BeliefGraph>(build_reachable_belief_graph(m, cfg.node_cap, crit.belief_tilt));
    err << "belief graph: " << graph->size() << " nodes, " << graph->edge_count() << " edges\n";
    const DpResult r = solve_dp(m, crit, graph, cfg.threads);
    write_json(cfg.out_path, out, value_table_to_json(m, r));
    if (!cfg.policy_path.empty())
        write_json(cfg.policy_path, out, quasi_markov_to_json(m, r.policy));
    return kExitOk;
}

int cmd_evaluate(const Config &cfg, std::ostream &out, std::ostream &) {
    const ModelSpec m = load_model(cfg);
    const CriterionSpec crit = load_criterion(cfg);
    if (cfg.policy_path.empty())
        throw UsageError("--policy is required");
    const HistoryPolicy pol = load_policy(cfg, m);
    const std::vector<int> h1{m.initial_state};
    json doc{{"criterion", criterion_to_json(crit)}, {"value", eval_policy_recursive(m, crit, pol, h1)}};
    try {
        doc["closed_form_value"] = eval_policy_paths(m, crit, pol, h1);
    } catch (const CapExceeded &) {
        doc["closed_form_value"] = nullptr;
    }
    write_json(cfg.out_path, out, doc);
    return kExitOk;
}

int cmd_oracle(const Config &cfg, std::ostream &out, std::ostream &err) {
    const ModelSpec m = load_model(cfg);
    const CriterionSpec crit = load_criterion(cfg);
    err << "enumerating " << policy_count(m) << " policies\n";
    const BruteForceResult r = brute_force_optimum(m, crit);
    write_json(cfg.out_path, out,
               {{"criterion", criterion_to_json(crit)},
                {"value", r.value},
                {"policies_evaluated", r.policies_evaluated},
                {"policy", history_policy_to_json(m, r.policy)}});
    return kExitOk;
}

int cmd_simulate(const Config &cfg, std::ostream &out, std::ostream &err) {
    const ModelSpec m = load_model(cfg);
    if (cfg.theta_star.empty())
        throw UsageError("--theta-star is required");
    const int theta = m.parameter_index(cfg.theta_star);
    HistoryPolicy pol;
    if (!cfg.policy_path.empty()) {
        pol = load_policy(cfg, m);
    } else if (!cfg.criterion.empty()) {
        const CriterionSpec crit = load_criterion(cfg);
        pol = to_history_policy(solve_dp(m, crit, cfg.node_cap, cfg.threads).policy, m);
        err << "simulating the optimal policy for " << crit.name << '\n';
    } else {
        throw UsageError("simulate needs --policy or --criterion");
    }
    const auto trajs = simulate_runs(m, pol, theta, cfg.runs, cfg.seed, cfg.threads);
    {
        Output o(cfg.out_path, out);
        write_trajectories_csv(o.get(), m, trajs);
    }
    if (!cfg.summary_path.empty())
        write_json(cfg.summary_path, out, summary_to_json(m, summarize(trajs, theta)));
    return kExitOk;
}

int cmd_check_axioms(const Config &cfg, std::ostream &out, std::ostream &err) {
    const CriterionSpec crit = load_criterion(cfg);
    const AxiomReport r = check_axioms(crit, cfg.samples, cfg.seed == 0 ? kDefaultAxiomSeed : cfg.seed);
    write_json(cfg.out_path, out, axiom_report_to_json(r));
    if (!r.passed()) {
        err << r.violations.size() << " axiom violations\n";
        return kExitInvalid;
    }
    return kExitOk;
}

int cmd_beliefs(const Config &cfg, std::ostream &out, std::ostream &) {
    const ModelSpec m = load_model(cfg);
    const double tilt = cfg.criterion.empty() ? 0.0 : load_criterion(cfg).belief_tilt;
    write_json(cfg.out_path, out, belief_graph_to_json(m, build_reachable_belief_graph(m, cfg.node_cap, tilt)));
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    Config cfg;
    CLI::App app{"Risk-averse dynamic programming for Bayesian MDPs", "riskmdp"};
    app.require_subcommand(1);

    auto add_model = [&](CLI::App *s) { s->add_option("--model", cfg.model_path, "Model JSON")->required(); };
    auto add_common = [&](CLI::App *s) {
        s->add_option("--node-cap", cfg.node_cap, "Belief graph node cap")->check(CLI::PositiveNumber);
        s->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
        s->add_option("--out", cfg.out_path, "Output path (default stdout)");
    };

    auto *validate = app.add_subcommand("validate", "Check a model document");
    add_model(validate);

    auto *solve = app.add_subcommand("solve", "Backward DP over the belief graph");
    add_model(solve);
    solve->add_option("--criterion", cfg.criterion, "Criterion JSON or path")->required();
    solve->add_option("--policy", cfg.policy_path, "Write the quasi-Markov policy here");
    add_common(solve);

    auto *evaluate = app.add_subcommand("evaluate", "Value of a given policy");
    add_model(evaluate);
    evaluate->add_option("--criterion", cfg.criterion, "Criterion JSON or path")->required();
    evaluate->add_option("--policy", cfg.policy_path, "Policy JSON")->required();
    add_common(evaluate);

    auto *oracle = app.add_subcommand("oracle", "Brute-force optimum over all history policies");
    add_model(oracle);
    oracle->add_option("--criterion", cfg.criterion, "Criterion JSON or path")->required();
    add_common(oracle);

    auto *simulate = app.add_subcommand("simulate", "Monte-Carlo rollouts under a true parameter");
    add_model(simulate);
    simulate->add_option("--policy", cfg.policy_path, "Policy JSON");
    simulate->add_option("--criterion", cfg.criterion, "Simulate the DP-optimal policy for this criterion");
    simulate->add_option("--theta-star", cfg.theta_star, "True parameter label")->required();
    simulate->add_option("--runs", cfg.runs, "Number of runs")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", cfg.seed, "Seed");
    simulate->add_option("--summary", cfg.summary_path, "Write a JSON summary here");
    add_common(simulate);

    auto *axioms = app.add_subcommand("check-axioms", "Randomized axiom check of a criterion");
    axioms->add_option("--criterion", cfg.criterion, "Criterion JSON or path")->required();
    axioms->add_option("--samples", cfg.samples, "Samples")->check(CLI::PositiveNumber);
    axioms->add_option("--seed", cfg.seed, "Seed");
    axioms->add_option("--out", cfg.out_path, "Output path (default stdout)");

    auto *beliefs = app.add_subcommand("beliefs", "Export the reachable belief graph");
    add_model(beliefs);
    beliefs->add_option("--criterion", cfg.criterion, "Use this criterion's belief dynamics");
    add_common(beliefs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "usage error: " << e.what() << '\n' << "run 'riskmdp --help' for the grammar\n";
        return kExitUsage;
    }

    try {
        if (*validate)
            return cmd_validate(cfg, out, err);
        if (*solve)
            return cmd_solve(cfg, out, err);
        if (*evaluate)
            return cmd_evaluate(cfg, out, err);
        if (*oracle)
            return cmd_oracle(cfg, out, err);
        if (*simulate)
            return cmd_simulate(cfg, out, err);
        if (*axioms)
            return cmd_check_axioms(cfg, out, err);
        if (*beliefs)
            return cmd_beliefs(cfg, out, err);
    } catch (const CapExceeded &e) {
        err << "cap exceeded: " << e.what() << '\n';
        return kExitCap;
    } catch (const SchemaError &e) {
        err << "schema error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ValidationError &e) {
        err << "invalid model: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ZeroProbabilityObservation &e) {
        err << "zero-probability observation: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const DomainError &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception &e) {
        err << "schema error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitUsage;
}

} // namespace riskmdp
