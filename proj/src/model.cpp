#include "riskmdp/model.hpp"

#include "riskmdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace riskmdp {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

int find_label(const std::vector<std::string> &labels, std::string_view label, const char *what) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
        throw DomainError(std::string("unknown ") + what + " label '" + std::string(label) + "'");
    return static_cast<int>(it - labels.begin());
}

double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Divides by the sum unless the vector is already normalized to rounding accuracy,
// so that renormalizing a renormalized vector is a no-op.
void renormalize(std::span<double> v) {
    const double s = sum_of(v);
    const double slack = 4.0 * static_cast<double>(v.size()) * std::numeric_limits<double>::epsilon();
    if (std::abs(s - 1.0) <= slack || s <= 0.0)
        return;
    for (double &w : v)
        w /= s;
}

// ---- JSON schema helpers -------------------------------------------------------

const json &require(const json &obj, const char *key, const std::string &where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw SchemaError("missing key '" + std::string(key) + "' in " + where);
    return *it;
}

void require_object(const json &j, const std::string &where) {
    if (!j.is_object())
        throw SchemaError(where + " must be a JSON object");
}

double require_number(const json &j, const std::string &where) {
    if (!j.is_number())
        throw SchemaError(where + " must be a number");
    return j.get<double>();
}

std::vector<std::string> label_list(const json &doc, const char *key) {
    const json &arr = require(doc, key, "model");
    if (!arr.is_array())
        throw SchemaError(std::string("'") + key + "' must be an array of strings");
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto &e : arr) {
        if (!e.is_string())
            throw SchemaError(std::string("'") + key + "' must be an array of strings");
        auto s = e.get<std::string>();
        if (!seen.insert(s).second)
            throw SchemaError(std::string("duplicate label '") + s + "' in '" + key + "'");
        out.push_back(std::move(s));
    }
    if (out.empty())
        throw ValidationError(std::string("'") + key + "' must be nonempty");
    return out;
}

int label_in(const std::vector<std::string> &labels, const std::string &label, const char *what) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
        throw SchemaError(std::string("unknown ") + what + " label '" + label + "'");
    return static_cast<int>(it - labels.begin());
}

int time_key(const std::string &key, int horizon) {
    std::size_t pos = 0;
    int t = 0;
    try {
        t = std::stoi(key, &pos);
    } catch (const std::exception &) {
        throw SchemaError("time key '" + key + "' is not an integer");
    }
    if (pos != key.size() || t < 1 || t > horizon)
        throw SchemaError("time key '" + key + "' outside 1.." + std::to_string(horizon));
    return t;
}

} // namespace

// ---- Belief ----------------------------------------------------------------------

Belief Belief::uniform(std::size_t n) { return Belief{std::vector<double>(n, 1.0 / static_cast<double>(n))}; }

Belief Belief::point_mass(std::size_t n, std::size_t k) {
    Belief b{std::vector<double>(n, 0.0)};
    b.weights.at(k) = 1.0;
    return b;
}

void check_belief(const Belief &b, std::size_t n) {
    if (b.size() != n)
        throw DomainError("belief has " + std::to_string(b.size()) + " weights, expected " + std::to_string(n));
    for (double w : b.weights)
        if (!std::isfinite(w) || w < 0.0)
            throw DomainError("belief weights must be finite and nonnegative");
    if (std::abs(sum_of(b.weights) - 1.0) > kProbabilityTolerance)
        throw DomainError("belief weights must sum to 1");
}

// ---- ModelSpec -------------------------------------------------------------------

bool ModelSpec::is_admissible(int t, int x, int u) const {
    auto acts = admissible_actions(t, x);
    return std::binary_search(acts.begin(), acts.end(), u);
}

int ModelSpec::state_index(std::string_view label) const { return find_label(states, label, "state"); }
int ModelSpec::action_index(std::string_view label) const { return find_label(actions, label, "action"); }
int ModelSpec::parameter_index(std::string_view label) const { return find_label(parameters, label, "parameter"); }

ModelSpec blank_model(int horizon, int num_states, int num_actions, int num_parameters) {
    if (horizon < 1 || num_states < 1 || num_actions < 1 || num_parameters < 1)
        throw DomainError("blank_model: all dimensions must be >= 1");
    ModelSpec m;
    m.horizon = horizon;
    for (int i = 0; i < num_states; ++i)
        m.states.push_back("s" + std::to_string(i));
    for (int i = 0; i < num_actions; ++i)
        m.actions.push_back("a" + std::to_string(i));
    for (int i = 0; i < num_parameters; ++i)
        m.parameters.push_back("th" + std::to_string(i));
    std::vector<int> all(num_actions);
    std::iota(all.begin(), all.end(), 0);
    m.admissible.assign(horizon, std::vector<std::vector<int>>(num_states, all));
    m.prior = Belief::uniform(num_parameters);
    m.kernel.assign(static_cast<std::size_t>(num_parameters) * num_states * num_actions * num_states,
                    1.0 / num_states);
    m.cost.assign(static_cast<std::size_t>(horizon) * num_states * num_actions * num_parameters, 0.0);
    return m;
}

std::vector<Issue> validate_model(const ModelSpec &m) {
    std::vector<Issue> issues;
    auto error = [&](std::string msg) { issues.push_back({Severity::error, std::move(msg)}); };

    if (m.horizon < 1)
        error("horizon must be >= 1");
    if (m.states.empty())
        error("state set is empty");
    if (m.actions.empty())
        error("action set is empty");
    if (m.parameters.empty())
        error("parameter set is empty");
    if (!issues.empty())
        return issues;

    const std::size_t S = m.states.size(), A = m.actions.size(), P = m.parameters.size();
    bool shape_ok = true;
    if (m.kernel.size() != P * S * A * S) {
        error("kernel table has wrong size");
        shape_ok = false;
    }
    if (m.cost.size() != static_cast<std::size_t>(m.horizon) * S * A * P) {
        error("cost table has wrong size");
        shape_ok = false;
    }
    if (m.prior.size() != P) {
        error("prior has wrong size");
        shape_ok = false;
    }
    if (m.admissible.size() != static_cast<std::size_t>(m.horizon) ||
        std::any_of(m.admissible.begin(), m.admissible.end(), [&](const auto &row) { return row.size() != S; })) {
        error("admissible table has wrong shape");
        shape_ok = false;
    }
    if (m.initial_state < 0 || static_cast<std::size_t>(m.initial_state) >= S)
        error("initial_state out of range");
    if (!shape_ok)
        return issues;

    for (int t = 1; t <= m.horizon; ++t)
        for (int x = 0; x < m.num_states(); ++x) {
            const auto &acts = m.admissible[t - 1][x];
            if (acts.empty())
                error("empty admissible set at t=" + std::to_string(t) + " state=" + m.states[x]);
            for (int u : acts)
                if (u < 0 || u >= m.num_actions())
                    error("admissible action index out of range at t=" + std::to_string(t) + " state=" + m.states[x]);
            if (!std::is_sorted(acts.begin(), acts.end()) ||
                std::adjacent_find(acts.begin(), acts.end()) != acts.end())
                error("admissible set not strictly ascending at t=" + std::to_string(t) + " state=" + m.states[x]);
        }

    for (int p = 0; p < m.num_parameters(); ++p)
        for (int x = 0; x < m.num_states(); ++x)
            for (int u = 0; u < m.num_actions(); ++u) {
                auto row = m.kernel_row(p, x, u);
                const std::string where = "theta=" + m.parameters[p] + " state=" + m.states[x] + " action=" + m.actions[u];
                if (std::any_of(row.begin(), row.end(), [](double v) { return !std::isfinite(v) || v < 0.0; }))
                    error("kernel row has negative or non-finite entry: " + where);
                else if (std::abs(sum_of(row) - 1.0) > kProbabilityTolerance)
                    error("kernel row not stochastic: " + where + " (sum=" + fmt_double(sum_of(row)) + ")");
            }

    for (int t = 1; t <= m.horizon; ++t)
        for (int x = 0; x < m.num_states(); ++x)
            for (int u = 0; u < m.num_actions(); ++u)
                for (int p = 0; p < m.num_parameters(); ++p) {
                    const double v = m.c(t, x, u, p);
                    if (!std::isfinite(v))
                        error("non-finite cost at t=" + std::to_string(t) + " state=" + m.states[x] +
                              " action=" + m.actions[u] + " theta=" + m.parameters[p]);
                    else if (v < 0.0)
                        error("negative cost at t=" + std::to_string(t) + " state=" + m.states[x] +
                              " action=" + m.actions[u] + " theta=" + m.parameters[p]);
                }

    try {
        check_belief(m.prior, P);
    } catch (const DomainError &e) {
        error(std::string("prior is not a probability vector: ") + e.what());
    }
    if (has_errors(issues))
        return issues;

    for (int x = 0; x < m.num_states(); ++x)
        for (int u = 0; u < m.num_actions(); ++u) {
            bool used = false;
            for (int t = 1; t <= m.horizon && !used; ++t)
                used = m.is_admissible(t, x, u);
            if (!used)
                continue;
            for (int xn = 0; xn < m.num_states(); ++xn) {
                double pred = 0.0;
                for (int p = 0; p < m.num_parameters(); ++p)
                    pred += m.prior[p] * m.K(p, x, u, xn);
                if (pred == 0.0)
                    issues.push_back({Severity::warning, "zero prior predictive probability for transition (" +
                                                             m.states[x] + "," + m.actions[u] + "," + m.states[xn] +
                                                             "); histories through it have probability zero"});
            }
        }
    return issues;
}

bool has_errors(const std::vector<Issue> &issues) {
    return std::any_of(issues.begin(), issues.end(), [](const Issue &i) { return i.severity == Severity::error; });
}

// ---- JSON ------------------------------------------------------------------------

ModelSpec model_from_json(const json &doc) {
    require_object(doc, "model");
    static const std::set<std::string> known = {"horizon", "states",  "actions", "admissible",   "parameters",
                                                "prior",   "kernel",  "cost",    "initial_state"};
    for (const auto &[key, _] : doc.items())
        if (!known.count(key))
            throw SchemaError("unknown key '" + key + "' in model");

    ModelSpec m;
    const json &h = require(doc, "horizon", "model");
    if (!h.is_number_integer())
        throw SchemaError("'horizon' must be an integer");
    m.horizon = h.get<int>();
    if (m.horizon < 1)
        throw ValidationError("horizon must be >= 1");

    m.states = label_list(doc, "states");
    m.actions = label_list(doc, "actions");
    m.parameters = label_list(doc, "parameters");
    const int S = m.num_states(), A = m.num_actions(), P = m.num_parameters();

    std::vector<int> all(A);
    std::iota(all.begin(), all.end(), 0);
    m.admissible.assign(m.horizon, std::vector<std::vector<int>>(S, all));
    if (auto it = doc.find("admissible"); it != doc.end()) {
        require_object(*it, "'admissible'");
        for (const auto &[tkey, by_state] : it->items()) {
            const int t = time_key(tkey, m.horizon);
            require_object(by_state, "admissible[" + tkey + "]");
            for (const auto &[xlabel, acts] : by_state.items()) {
                const int x = label_in(m.states, xlabel, "state");
                if (!acts.is_array())
                    throw SchemaError("admissible[" + tkey + "][" + xlabel + "] must be an array");
                std::set<int> chosen;
                for (const auto &a : acts) {
                    if (!a.is_string())
                        throw SchemaError("admissible actions must be labels");
                    chosen.insert(label_in(m.actions, a.get<std::string>(), "action"));
                }
                m.admissible[t - 1][x].assign(chosen.begin(), chosen.end());
            }
        }
    }

    const json &prior = require(doc, "prior", "model");
    require_object(prior, "'prior'");
    m.prior.weights.assign(P, 0.0);
    for (const auto &[plabel, w] : prior.items())
        m.prior.weights[label_in(m.parameters, plabel, "parameter")] = require_number(w, "prior[" + plabel + "]");

    const json &kernel = require(doc, "kernel", "model");
    require_object(kernel, "'kernel'");
    m.kernel.assign(static_cast<std::size_t>(P) * S * A * S, 0.0);
    for (int p = 0; p < P; ++p) {
        const json &by_state = require(kernel, m.parameters[p].c_str(), "'kernel'");
        require_object(by_state, "kernel[" + m.parameters[p] + "]");
        for (const auto &[k, _] : by_state.items())
            label_in(m.states, k, "state");
        for (int x = 0; x < S; ++x) {
            const std::string where = "kernel[" + m.parameters[p] + "][" + m.states[x] + "]";
            const json &by_action = require(by_state, m.states[x].c_str(), where);
            require_object(by_action, where);
            for (const auto &[k, _] : by_action.items())
                label_in(m.actions, k, "action");
            for (int u = 0; u < A; ++u) {
                const std::string rwhere = where + "[" + m.actions[u] + "]";
                const json &row = require(by_action, m.actions[u].c_str(), rwhere);
                require_object(row, rwhere);
                auto dst = m.kernel_row(p, x, u);
                for (const auto &[xn, v] : row.items())
                    dst[label_in(m.states, xn, "state")] = require_number(v, rwhere + "[" + xn + "]");
            }
        }
    }

    const json &cost = require(doc, "cost", "model");
    require_object(cost, "'cost'");
    m.cost.assign(static_cast<std::size_t>(m.horizon) * S * A * P, 0.0);
    for (const auto &[k, _] : cost.items())
        time_key(k, m.horizon);
    for (int t = 1; t <= m.horizon; ++t) {
        const std::string tk = std::to_string(t);
        const json &by_state = require(cost, tk.c_str(), "'cost'");
        require_object(by_state, "cost[" + tk + "]");
        for (const auto &[k, _] : by_state.items())
            label_in(m.states, k, "state");
        for (int x = 0; x < S; ++x) {
            const std::string where = "cost[" + tk + "][" + m.states[x] + "]";
            const json &by_action = require(by_state, m.states[x].c_str(), where);
            require_object(by_action, where);
            for (const auto &[k, _] : by_action.items())
                label_in(m.actions, k, "action");
            for (int u = 0; u < A; ++u) {
                const std::string awhere = where + "[" + m.actions[u] + "]";
                const json &by_param = require(by_action, m.actions[u].c_str(), awhere);
                require_object(by_param, awhere);
                for (const auto &[k, _] : by_param.items())
                    label_in(m.parameters, k, "parameter");
                for (int p = 0; p < P; ++p)
                    m.c(t, x, u, p) = require_number(require(by_param, m.parameters[p].c_str(), awhere),
                                                     awhere + "[" + m.parameters[p] + "]");
            }
        }
    }

    const json &init = require(doc, "initial_state", "model");
    if (!init.is_string())
        throw SchemaError("'initial_state' must be a state label");
    m.initial_state = label_in(m.states, init.get<std::string>(), "state");

    auto issues = validate_model(m);
    if (has_errors(issues)) {
        std::string msg;
        for (const auto &i : issues)
            if (i.severity == Severity::error)
                msg += (msg.empty() ? "" : "; ") + i.message;
        throw ValidationError(msg);
    }

    for (int p = 0; p < P; ++p)
        for (int x = 0; x < S; ++x)
            for (int u = 0; u < A; ++u)
                renormalize(m.kernel_row(p, x, u));
    renormalize(m.prior.weights);
    return m;
}

ModelSpec parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw SchemaError(std::string("model is not valid JSON: ") + e.what());
    }
    return model_from_json(doc);
}

json belief_to_json(const ModelSpec &m, const Belief &b) {
    json out = json::object();
    for (int p = 0; p < m.num_parameters(); ++p)
        out[m.parameters[p]] = b[p];
    return out;
}

json model_to_json(const ModelSpec &m) {
    json doc;
    doc["horizon"] = m.horizon;
    doc["states"] = m.states;
    doc["actions"] = m.actions;
    doc["parameters"] = m.parameters;

    json adm = json::object();
    for (int t = 1; t <= m.horizon; ++t) {
        json by_state = json::object();
        for (int x = 0; x < m.num_states(); ++x) {
            json acts = json::array();
            for (int u : m.admissible_actions(t, x))
                acts.push_back(m.actions[u]);
            by_state[m.states[x]] = std::move(acts);
        }
        adm[std::to_string(t)] = std::move(by_state);
    }
    doc["admissible"] = std::move(adm);
    doc["prior"] = belief_to_json(m, m.prior);

    json kernel = json::object();
    for (int p = 0; p < m.num_parameters(); ++p) {
        json by_state = json::object();
        for (int x = 0; x < m.num_states(); ++x) {
            json by_action = json::object();
            for (int u = 0; u < m.num_actions(); ++u) {
                json row = json::object();
                for (int xn = 0; xn < m.num_states(); ++xn)
                    row[m.states[xn]] = m.K(p, x, u, xn);
                by_action[m.actions[u]] = std::move(row);
            }
            by_state[m.states[x]] = std::move(by_action);
        }
        kernel[m.parameters[p]] = std::move(by_state);
    }
    doc["kernel"] = std::move(kernel);

    json cost = json::object();
    for (int t = 1; t <= m.horizon; ++t) {
        json by_state = json::object();
        for (int x = 0; x < m.num_states(); ++x) {
            json by_action = json::object();
            for (int u = 0; u < m.num_actions(); ++u) {
                json by_param = json::object();
                for (int p = 0; p < m.num_parameters(); ++p)
                    by_param[m.parameters[p]] = m.c(t, x, u, p);
                by_action[m.actions[u]] = std::move(by_param);
            }
            by_state[m.states[x]] = std::move(by_action);
        }
        cost[std::to_string(t)] = std::move(by_state);
    }
    doc["cost"] = std::move(cost);
    doc["initial_state"] = m.states[m.initial_state];
    return doc;
}

std::string serialize_model(const ModelSpec &m) { return model_to_json(m).dump(2); }

// ---- clinical trials -------------------------------------------------------------

double logistic_toxicity(double theta, double dose) { return 1.0 / (1.0 + std::exp(-(dose - theta))); }

ModelSpec gen_clinical_trials_model(const std::vector<double> &doses, const std::vector<double> &theta_grid,
                                    int horizon, const std::map<double, double> &prior,
                                    const std::optional<std::vector<std::vector<double>>> &toxicity) {
    if (doses.empty() || theta_grid.empty())
        throw DomainError("doses and theta_grid must be nonempty");
    if (horizon < 1)
        throw DomainError("horizon must be >= 1");
    if (std::set<double>(doses.begin(), doses.end()).size() != doses.size() ||
        std::set<double>(theta_grid.begin(), theta_grid.end()).size() != theta_grid.size())
        throw DomainError("doses and theta_grid must not contain duplicates");

    const int U = static_cast<int>(doses.size()), P = static_cast<int>(theta_grid.size());
    ModelSpec m = blank_model(horizon, 2, U, P);
    m.states = {"0", "1"};
    for (int u = 0; u < U; ++u)
        m.actions[u] = fmt_double(doses[u]);
    for (int p = 0; p < P; ++p)
        m.parameters[p] = fmt_double(theta_grid[p]);

    m.prior.weights.assign(P, 0.0);
    for (const auto &[theta, w] : prior) {
        auto it = std::find(theta_grid.begin(), theta_grid.end(), theta);
        if (it == theta_grid.end())
            throw DomainError("prior support point " + fmt_double(theta) + " is not in theta_grid");
        m.prior.weights[it - theta_grid.begin()] = w;
    }
    check_belief(m.prior, P);

    if (toxicity) {
        if (toxicity->size() != theta_grid.size() ||
            std::any_of(toxicity->begin(), toxicity->end(), [&](const auto &row) { return row.size() != doses.size(); }))
            throw DomainError("toxicity table must be indexed [theta][dose]");
    }
    for (int p = 0; p < P; ++p)
        for (int u = 0; u < U; ++u) {
            const double psi = toxicity ? (*toxicity)[p][u] : logistic_toxicity(theta_grid[p], doses[u]);
            if (!(psi >= 0.0 && psi <= 1.0))
                throw DomainError("toxicity probability outside [0, 1]");
            for (int x = 0; x < 2; ++x) {
                auto row = m.kernel_row(p, x, u);
                row[0] = 1.0 - psi;
                row[1] = psi;
            }
        }
    for (int t = 1; t <= horizon; ++t)
        for (int x = 0; x < 2; ++x)
            for (int u = 0; u < U; ++u)
                for (int p = 0; p < P; ++p)
                    m.c(t, x, u, p) = std::abs(doses[u] - theta_grid[p]);
    return m;
}

ModelSpec gen_clinical_trials_model(const std::vector<double> &doses, const std::vector<double> &theta_grid,
                                    int horizon) {
    std::map<double, double> prior;
    for (double th : theta_grid)
        prior[th] = 1.0 / static_cast<double>(theta_grid.size());
    return gen_clinical_trials_model(doses, theta_grid, horizon, prior);
}

} // namespace riskmdp
