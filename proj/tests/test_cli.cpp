#include "support.hpp"

#include "riskmdp/cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace riskmdp;
using namespace riskmdp::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "riskmdp");
    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("riskmdp_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string &name) const { return (path / name).string(); }
};

void write(const std::string &path, const std::string &text) { std::ofstream(path) << text; }

const std::string kEntropic = R"({"type":"entropic","kappa":1.0})";

} // namespace

TEST_CASE("validate") {
    const auto r = cli({"validate", "--model", data_path("sample_model.json")});
    CHECK(r.code == 0);
    CHECK(r.out == "valid\n");

    TempDir dir;
    auto doc = nlohmann::json::parse(read_text(data_path("sample_model.json")));
    doc["kernel"]["th1"]["s0"]["a0"]["s0"] = 0.05;
    write(dir.file("bad.json"), doc.dump());
    const auto bad = cli({"validate", "--model", dir.file("bad.json")});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("kernel row not stochastic") != std::string::npos);

    write(dir.file("broken.json"), "{");
    CHECK(cli({"validate", "--model", dir.file("broken.json")}).code == 1);
    CHECK(cli({"validate", "--model", dir.file("missing.json")}).code == 2);
}

TEST_CASE("solve agrees with oracle") {
    TempDir dir;
    const auto s = cli({"solve", "--model", data_path("sample_model.json"), "--criterion", kEntropic, "--out",
                        dir.file("v.json"), "--policy", dir.file("p.json")});
    REQUIRE(s.code == 0);
    const auto values = nlohmann::json::parse(read_text(dir.file("v.json")));
    const auto o = cli({"oracle", "--model", data_path("sample_model.json"), "--criterion", kEntropic});
    REQUIRE(o.code == 0);
    const auto oracle = nlohmann::json::parse(o.out);
    CHECK(std::abs(values["root_value"].get<double>() - oracle["value"].get<double>()) <= 1e-9);

    const auto e = cli({"evaluate", "--model", data_path("sample_model.json"), "--criterion", kEntropic, "--policy",
                        dir.file("p.json")});
    REQUIRE(e.code == 0);
    const auto ev = nlohmann::json::parse(e.out);
    CHECK(std::abs(ev["value"].get<double>() - values["root_value"].get<double>()) <= 1e-9);
    CHECK(std::abs(ev["closed_form_value"].get<double>() - values["root_value"].get<double>()) <= 1e-9);

    write(dir.file("crit.json"), R"({"type":"expectation"})");
    const auto from_file = cli({"solve", "--model", data_path("sample_model.json"), "--criterion", dir.file("crit.json")});
    CHECK(from_file.code == 0);
    CHECK(nlohmann::json::parse(from_file.out)["criterion"]["type"] == "expectation");
}

TEST_CASE("usage errors") {
    const auto neg = cli({"solve", "--model", data_path("sample_model.json"), "--criterion",
                          R"({"type":"entropic","kappa":-1})"});
    CHECK(neg.code == 2);
    CHECK(neg.err.find("kappa > 0") != std::string::npos);
    CHECK(cli({}).code == 2);
    CHECK(cli({"solve", "--model", data_path("sample_model.json")}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"simulate", "--model", data_path("sample_model.json"), "--theta-star", "th1"}).code == 2);
    CHECK(cli({"simulate", "--model", data_path("sample_model.json"), "--theta-star", "th9", "--criterion",
               kEntropic})
              .code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("oracle cap") {
    TempDir dir;
    write(dir.file("big.json"), serialize_model(blank_model(6, 2, 2, 2)));
    const auto r = cli({"oracle", "--model", dir.file("big.json"), "--criterion", R"({"type":"expectation"})"});
    CHECK(r.code == 3);
    CHECK(cli({"solve", "--model", dir.file("big.json"), "--criterion", R"({"type":"expectation"})", "--node-cap",
               "3"})
              .code == 3);
}

TEST_CASE("simulate is deterministic for any thread count") {
    TempDir dir;
    const auto model = data_path("clinical_trials.json");
    auto run = [&](const std::string &threads, const std::string &name) {
        return cli({"simulate", "--model", model, "--criterion", kEntropic, "--theta-star", "2", "--runs", "300",
                    "--seed", "11", "--threads", threads, "--out", dir.file(name), "--summary",
                    dir.file(name + ".summary.json")});
    };
    REQUIRE(run("1", "a.csv").code == 0);
    REQUIRE(run("3", "b.csv").code == 0);
    const auto a = read_text(dir.file("a.csv"));
    CHECK(a == read_text(dir.file("b.csv")));
    CHECK(a.rfind("run,t,state,action,true_cost,belief_1,belief_2,belief_3\n", 0) == 0);
    const auto summary = nlohmann::json::parse(read_text(dir.file("a.csv.summary.json")));
    CHECK(summary["runs"] == 300);
    CHECK(summary["theta_star"] == "2");
}

TEST_CASE("check-axioms and beliefs") {
    const auto a = cli({"check-axioms", "--criterion", R"({"type":"entropic","kappa":5})", "--samples", "200"});
    CHECK(a.code == 0);
    CHECK(nlohmann::json::parse(a.out)["passed"] == true);

    const auto b = cli({"beliefs", "--model", data_path("sample_model.json")});
    CHECK(b.code == 0);
    const auto g = nlohmann::json::parse(b.out);
    CHECK(g["nodes"].size() == 5);
    CHECK(g["belief_tilt"] == 0.0);
    const auto bt = cli({"beliefs", "--model", data_path("sample_model.json"), "--criterion", kEntropic});
    CHECK(nlohmann::json::parse(bt.out)["belief_tilt"] == 1.0);
}
