#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "nonlocal/experiments.hpp"

using namespace nonlocal;
namespace fs = std::filesystem;

namespace {

nlohmann::json cz_config() {
    return nlohmann::json{{"kind", "cz"},
                          {"grid", {{"d", 1}, {"L", 0.5}, {"n", 8}, {"boundary", "zero_extension"}}},
                          {"cz", {{"set", {0, 1}}, {"delta", 0.5}, {"max_level", 3}}}};
}

std::string temp_dir(const std::string& leaf) {
    fs::path p = fs::temp_directory_path() / leaf;
    fs::create_directories(p);
    return p.string();
}

}  // namespace

TEST_CASE("config parses, validates and hashes canonically") {
    ExperimentConfig cfg = ExperimentConfig::from_json(cz_config());
    CHECK(cfg.kind() == "cz");
    // cosmetic key order does not change the hash
    nlohmann::json reordered;
    reordered["cz"] = {{"max_level", 3}, {"delta", 0.5}, {"set", {0, 1}}};
    reordered["grid"] = {{"boundary", "zero_extension"}, {"n", 8}, {"L", 0.5}, {"d", 1}};
    reordered["kind"] = "cz";
    ExperimentConfig cfg2 = ExperimentConfig::from_json(reordered);
    CHECK(cfg.hash() == cfg2.hash());
    // output paths are not semantic
    nlohmann::json with_out = cz_config();
    with_out["output"] = {{"dir", "elsewhere"}};
    CHECK(ExperimentConfig::from_json(with_out).hash() == cfg.hash());
    // a semantic change moves the hash
    nlohmann::json changed = cz_config();
    changed["cz"]["delta"] = 0.25;
    CHECK(ExperimentConfig::from_json(changed).hash() != cfg.hash());
}

TEST_CASE("config rejects malformed input with field context") {
    nlohmann::json bad = cz_config();
    bad["kind"] = "florble";
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);

    nlohmann::json empty_lattice = {
        {"kind", "resolvent-sweep"},
        {"kernel", {{"form", "fractional"}, {"d", 1}, {"alpha", 0.5}}},
        {"grid", {{"L", 3.14159}, {"n", 32}, {"boundary", "periodic"}}},
        {"sweep", {{"lambda", {{"decades", {0, 1}}, {"args", nlohmann::json::array()}}}}}};
    CHECK_THROWS_AS(ExperimentConfig::from_json(empty_lattice), std::invalid_argument);

    CHECK_THROWS_AS(ExperimentConfig::load_file("/nonexistent/config.json"),
                    std::invalid_argument);
}

TEST_CASE("lambda lattice construction") {
    nlohmann::json j = {
        {"kind", "resolvent-sweep"},
        {"kernel", {{"form", "fractional"}, {"d", 1}, {"alpha", 0.5}}},
        {"grid", {{"L", 3.14159}, {"n", 32}, {"boundary", "periodic"}}},
        {"sweep", {{"lambda", {{"decades", {-1, 1}}, {"args", {0.0, "theta", "-theta"}}}}}}};
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    const double theta = 1.2;
    std::vector<cplx> lattice = cfg.lambda_lattice(theta);
    CHECK(lattice.size() == 9);  // 3 magnitudes x 3 arguments
    CHECK(std::abs(lattice[0]) == doctest::Approx(0.1));
    CHECK(std::arg(lattice[1]) == doctest::Approx(theta));
    CHECK(std::arg(lattice[2]) == doctest::Approx(-theta));
}

TEST_CASE("cz experiment runs and reports the selected cube") {
    ExperimentConfig cfg = ExperimentConfig::from_json(cz_config());
    const std::string out = temp_dir("nl_cli_cz");
    RunOutcome res = run_and_persist(cfg, out, std::nullopt);
    CHECK(res.exit_code == 0);
    CHECK(res.report.hard_pass);
    CHECK(res.report.summary["selected"].get<int>() == 1);
    CHECK(res.report.summary["residual_cells"].get<int>() == 0);
    const auto& cube = res.report.summary["cubes"][0];
    CHECK(cube["origin_cells"][0].get<int>() == 0);
    CHECK(cube["side_cells"].get<int>() == 2);
    CHECK(cube["x_lo"].get<double>() == doctest::Approx(-0.5));
    CHECK(cube["x_hi"].get<double>() == doctest::Approx(-0.25));
    CHECK(fs::exists(out + "/report.json"));
    CHECK(fs::exists(out + "/cases.csv"));
    CHECK(fs::exists(out + "/timings.csv"));
}

TEST_CASE("assemble experiment reproduces the two-cell worked value") {
    nlohmann::json j = {
        {"kind", "assemble"},
        {"kernel", {{"form", "power"}, {"d", 1}, {"alpha", 0.25}, {"lambda", 0.9}}},
        {"grid", {{"L", 1.0}, {"n", 2}, {"boundary", "periodic"}}}};
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    VerificationReport rep = run_experiment(cfg);
    REQUIRE(!rep.cases.empty());
    CHECK(rep.cases[0].id == "form_first_cell_indicator");
    CHECK(rep.cases[0].lhs == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(rep.hard_pass);
}

TEST_CASE("determinism: identical config and seed give identical payloads") {
    ExperimentConfig cfg = ExperimentConfig::from_json(cz_config());
    VerificationReport a = run_experiment(cfg);
    VerificationReport b = run_experiment(cfg);
    CHECK(a.payload_checksum() == b.payload_checksum());
    CHECK(a.to_json(false).dump() == b.to_json(false).dump());
}

TEST_CASE("baseline freeze, comparison and tampering") {
    ExperimentConfig cfg = ExperimentConfig::from_json(cz_config());
    const std::string out = temp_dir("nl_cli_base");
    const std::string bpath = out + "/baseline.json";
    fs::remove(bpath);

    freeze_baseline(cfg, out, bpath);
    CHECK(fs::exists(bpath));

    // identical rerun passes the comparison
    RunOutcome res = run_and_persist(cfg, out, bpath);
    CHECK(res.exit_code == 0);
    CHECK(res.report.soft_pass);

    // a different config hash skips the comparison rather than failing
    nlohmann::json changed = cz_config();
    changed["cz"]["delta"] = 0.4;
    RunOutcome res2 = run_and_persist(ExperimentConfig::from_json(changed), out, bpath);
    CHECK(res2.report.summary.contains("baseline_skipped"));
    // and freezing over it is refused
    CHECK_THROWS_AS(freeze_baseline(ExperimentConfig::from_json(changed), out, bpath),
                    std::runtime_error);

    // tampering with the stored summary breaks the checksum
    {
        std::ifstream is(bpath);
        nlohmann::json j = nlohmann::json::parse(is);
        is.close();
        j["summary"]["selected"] = 99;
        std::ofstream os(bpath);
        os << j.dump(2);
    }
    CHECK_THROWS_AS(read_baseline(bpath), std::runtime_error);
}

TEST_CASE("good-lambda experiment end to end") {
    nlohmann::json j = {
        {"kind", "good-lambda"},
        {"kernel", {{"form", "fractional"}, {"d", 1}, {"alpha", 0.5}}},
        {"grid", {{"L", 3.141592653589793}, {"n", 64}, {"boundary", "zero_extension"}}},
        {"good_lambda", {{"q", 3.0}, {"gamma", 1.0}}},
        {"seed", 1}};
    VerificationReport rep = run_experiment(ExperimentConfig::from_json(j));
    CHECK(rep.summary["all_pass"].get<bool>());
    CHECK(rep.hard_pass);
    CHECK(rep.summary["A"].get<double>() > 5.0);
}

TEST_CASE("wrh experiment picks the admissible midpoint exponent") {
    nlohmann::json j = {
        {"kind", "wrh"},
        {"kernel", {{"form", "fractional"}, {"d", 1}, {"alpha", 0.3}}},
        {"grid", {{"L", 4.0}, {"n", 128}, {"boundary", "zero_extension"}}},
        {"sweep", {{"radii", {0.5}}, {"seeds", {1, 2}}}}};
    VerificationReport rep = run_experiment(ExperimentConfig::from_json(j));
    // admissible window for alpha = 0.3 is (1.25, 5); intersected with (2, 6]
    // the midpoint is 3.5
    CHECK(rep.params["p"].get<double>() == doctest::Approx(3.5));
    CHECK(rep.cases.size() == 2);
    CHECK(rep.summary.contains("gehring_probe"));
}
