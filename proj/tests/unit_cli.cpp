#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nakasim/cli.hpp"
#include "nakasim/config.hpp"

using namespace nakasim;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr)
{
    args.insert(args.begin(), "nakasim");
    std::vector<const char*> argv;
    for (auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    int rc = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text)
        *out_text = out.str();
    if (err_text)
        *err_text = err.str();
    return rc;
}

fs::path scratch_dir(const std::string& name)
{
    fs::path d = fs::temp_directory_path() / ("nakasim_unit_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

const char* kTiny = R"({
  "params": {"n_nodes": 6, "beta": 0.2, "rho": 0.02, "tau": 1.0, "capacity": 1.0, "nu": 4,
             "horizon_slots": 3000, "seed": 5},
  "attack": {"strategy": "Teaser"},
  "k_cp": 3
})";

}  // namespace

TEST_CASE("grid specs")
{
    auto g = parse_grid("0:0.1:0.3");
    REQUIRE(g.size() == 4);
    CHECK(g[3] == doctest::Approx(0.3));
    CHECK(parse_grid("1,2.5,4") == std::vector<double>{1, 2.5, 4});
    CHECK(parse_grid("2") == std::vector<double>{2});
    CHECK_THROWS(parse_grid("1:0:2"));
    CHECK_THROWS(parse_grid("a,b"));
}

TEST_CASE("scenario errors name the field")
{
    auto field_of = [](const std::string& text) {
        try {
            parse_scenario(text);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("none");
    };
    CHECK(field_of(R"({"params": {"rho": -1}})") == "params.rho");
    CHECK(field_of(R"({"params": {"rhoo": 1}})") == "params.rhoo");
    CHECK(field_of(R"({"attack": {"strategy": "Selfish"}})") == "attack.strategy");
    CHECK(field_of(R"({"params": {"n_nodes": "ten"}})") == "params.n_nodes");
    CHECK(field_of(R"({"protocol": "PoW", "attack": {"strategy": "PosTeaser"}})") == "attack.strategy");
    CHECK(field_of(R"({"protocol": "SaPoS"})") == "policy");
    CHECK(field_of("{not json") == "<root>");
    CHECK(field_of(kTiny) == "none");
}

TEST_CASE("rates are converted to rho and beta")
{
    ScenarioFile f = parse_scenario(R"({"params": {"tau": 0.5}, "rates": {"lambda_hon": 0.3, "lambda_adv": 0.1}})");
    CHECK(f.cfg.params.rho == doctest::Approx(0.2));
    CHECK(f.cfg.params.beta == doctest::Approx(0.25));
}

TEST_CASE("scenario JSON round trip")
{
    ScenarioConfig c = parse_scenario(kTiny).cfg;
    ScenarioConfig d = parse_scenario(scenario_to_json(c)).cfg;
    CHECK(d.params.nu == c.params.nu);
    CHECK(d.params.c_tilde == doctest::Approx(c.params.c_tilde));
    CHECK(d.attack.strategy == AttackKind::Teaser);
    CHECK(d.k_cp == 3);
}

TEST_CASE("exit codes")
{
    std::string out, err;
    CHECK(run({"--help"}, &out) == 0);
    CHECK(out.find("simulate") != std::string::npos);
    CHECK(run({}, nullptr, &err) == 1);
    CHECK(run({"simulate"}, nullptr, &err) == 1);
    CHECK(run({"simulate", "--config", "/nonexistent/x.json"}, nullptr, &err) == 1);
    CHECK(err.find("--config") != std::string::npos);

    fs::path d = scratch_dir("badcfg");
    std::ofstream(d / "bad.json") << R"({"params": {"capacity": 0}})";
    CHECK(run({"simulate", "--config", (d / "bad.json").string(), "--out", d.string()}, nullptr, &err) == 1);
    CHECK(err.find("params.capacity") != std::string::npos);
    CHECK(run({"region", "--beta-grid", "0,1.5"}, nullptr, &err) == 1);
}

TEST_CASE("simulate then analyze a tiny scenario")
{
    fs::path d = scratch_dir("tiny");
    std::ofstream(d / "s.json") << kTiny;
    std::string out;
    CHECK(run({"simulate", "--config", (d / "s.json").string(), "--out", d.string()}, &out) == 0);
    CHECK(fs::exists(d / "metrics.csv"));
    CHECK(fs::exists(d / "utilization.csv"));
    REQUIRE(fs::exists(d / "trace_seed5.jsonl"));

    int rc = run({"analyze", "--trace", (d / "trace_seed5.jsonl").string(), "--kcp", "3", "--out",
                  (d / "report").string()},
                 &out);
    CHECK(rc == 0);
    CHECK(fs::exists(d / "report" / "report.json"));
    CHECK(fs::exists(d / "report" / "indices.csv"));

    // seed override picks the file name
    CHECK(run({"simulate", "--config", (d / "s.json").string(), "--out", d.string(), "--seed", "9"}) == 0);
    CHECK(fs::exists(d / "trace_seed9.jsonl"));
}

TEST_CASE("region prints one row per beta")
{
    std::string out;
    CHECK(run({"region", "--capacity", "1", "--beta-grid", "0,0.2,0.5"}, &out) == 0);
    std::istringstream is(out);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(is, line))
        lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[1].find(",secure,") != std::string::npos);
    CHECK(lines[3].find("insecure") != std::string::npos);
}
