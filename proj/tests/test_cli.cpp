#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "dilution/cli/experiments.hpp"
#include "dilution/sim_engines.hpp"

using namespace dl;
using namespace dl::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("dl_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

bool has_error(const ValidationError& e, const std::string& needle) {
    for (auto& s : e.errors)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("empty config takes the standard setup defaults") {
    auto m = validate_manifest(json{{"experiment", "quench"}});
    auto& c = m["config"];
    CHECK(c["dt"] == 0.1);
    CHECK(c["h"] == 1.0);
    CHECK(c["noise"]["preset"] == "depolarizing_1q");
    CHECK(c["noise"]["epsilon"] == 0.001);
    CHECK(c["delta_t"] == 20);
    CHECK(c["steps"] == 100);
    CHECK(c["lattice"] == json{{"rows", 3}, {"cols", 4}, {"periodic", true}});
    CHECK(c["observable"] == json{{"kind", "sxk"}, {"k", 1}});
    CHECK(m["output"] == "out/quench");
    auto b = build_config(c);
    CHECK(b.num_qubits() == 12);
    CHECK(b.circuit.graph.edges.size() == 24);
}

TEST_CASE("invalid values and unknown keys are reported together") {
    json raw = {{"experiment", "sigma"},
                {"config", {{"noise", {{"epsilon", -0.1}}}, {"dtt", 0.1}, {"lattice", {{"rows", 3}, {"colz", 4}}}}},
                {"params", {{"with_d3", true}}}};
    try {
        validate_manifest(raw);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(has_error(e, "config.noise.epsilon: must be >= 0"));
        CHECK(has_error(e, "config.dtt: unknown key"));
        CHECK(has_error(e, "config.lattice.colz: unknown key"));
    }
    // params are checked once the config is valid
    try {
        validate_manifest(json{{"experiment", "sigma"}, {"params", {{"with_d3", true}}}});
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(has_error(e, "params.with_d3: unknown key"));
    }
    CHECK_THROWS_AS(validate_manifest(json{{"experiment", "plot"}}), ValidationError);
    CHECK_THROWS_AS(validate_manifest(json{{"config", json::object()}}), ValidationError);
    CHECK_THROWS_AS(validate_manifest(json{{"experiment", "quench"}, {"config", {{"h", 1.0}, {"h_schedule", {{"period", 10}}}}}}),
                    ValidationError);
    CHECK_THROWS_AS(validate_manifest(json{{"experiment", "quench"}, {"config", {{"observable", {{"k", 13}}}}}}),
                    ValidationError);
    CHECK_THROWS_AS(validate_manifest(json{{"experiment", "quench"}, {"config", {{"noise", {{"preset", "h1_1_two_qubit"}, {"epsilon", 0.1}}}}}}),
                    ValidationError);
    CHECK_THROWS_AS(validate_manifest(json{{"experiment", "quench"}}, Overrides{{}, {}, "lin"}), ValidationError);
}

TEST_CASE("cosine schedule normalizes to h(t) = A cos(4 pi t / period)") {
    auto m = validate_manifest(json{{"experiment", "quench"}, {"config", {{"h_schedule", {{"kind", "cosine"}, {"period", 100}}}}}});
    CHECK_FALSE(m["config"].contains("h"));
    CHECK(m["config"]["h_schedule"] == json{{"kind", "cosine"}, {"amplitude", 1.0}, {"period", 100.0}});
    auto b = build_config(m["config"]);
    for (int t : {1, 7, 25, 50, 99}) CHECK(b.circuit.h(t) == doctest::Approx(std::cos(4 * std::numbers::pi * t / 100)));
}

TEST_CASE("manifest hash ignores the output directory and tracks everything else") {
    json raw = {{"experiment", "toy-model"}, {"seed", 3}};
    auto a = validate_manifest(raw);
    auto b = validate_manifest(raw, Overrides{"elsewhere", {}, {}});
    CHECK(manifest_hash(a) == manifest_hash(b));
    CHECK(manifest_hash(a).size() == 16);
    auto c = validate_manifest(raw, Overrides{{}, 4, {}});
    CHECK(manifest_hash(a) != manifest_hash(c));
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("noiseless quench on a 2x2 lattice reproduces the statevector") {
    auto dir = scratch("quench");
    json raw = {{"experiment", "quench"},
                {"output", dir.string()},
                {"config", {{"lattice", {{"rows", 2}, {"cols", 2}}}, {"steps", 4}, {"noise", {{"epsilon", 0.0}}}}}};
    auto m = validate_manifest(raw);
    auto a = run_manifest(m);
    TrotterCircuit c{build_square_lattice(2, 2, true), 0.1, FieldSchedule::constant(1.0), 4};
    ObservableSet obs(4, {ObservableSpec::sxk(1)});
    auto ref = run_statevector(c, InitialState::Plus, 4, obs);

    std::istringstream in(slurp(dir / "metrics.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "# config_hash=" + a.hash);
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line.rfind("step,observable,noiseless,noisy", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream f(line);
        std::string step, name, clean, noisy;
        std::getline(f, step, ',');
        std::getline(f, name, ',');
        std::getline(f, clean, ',');
        std::getline(f, noisy, ',');
        const int s = std::stoi(step);
        CHECK(std::stod(clean) == doctest::Approx(ref.value[0][s]).epsilon(1e-14));
        CHECK(std::stod(noisy) == doctest::Approx(ref.value[0][s]).epsilon(1e-12));
        ++rows;
    }
    CHECK(rows == 5);
    auto summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["config_hash"] == a.hash);
    fs::remove_all(dir);
}

TEST_CASE("reruns are byte-identical, also across thread counts") {
    auto d1 = scratch("rerun1"), d2 = scratch("rerun2");
    json raw = {{"experiment", "quench"},
                {"seed", 11},
                {"config", {{"lattice", {{"rows", 2}, {"cols", 2}}}, {"steps", 6}, {"noise", {{"epsilon", 0.05}}}}},
                {"params", {{"engine", "trajectories"}, {"trajectories", 40}}}};
    auto a = run_manifest(validate_manifest(raw, Overrides{d1.string(), {}, {}}));
    const int before = kernels::max_threads();
    kernels::set_threads(2);
    auto b = run_manifest(validate_manifest(raw, Overrides{d2.string(), {}, {}}));
    kernels::set_threads(before);
    REQUIRE(a.files == b.files);
    for (auto& f : a.files) CHECK_MESSAGE(slurp(d1 / f) == slurp(d2 / f), f);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("budget errors name the engine limits") {
    auto m = validate_manifest(json{{"experiment", "sigma"}, {"output", scratch("budget").string()},
                                    {"config", {{"lattice", {{"rows", 4}, {"cols", 4}}}, {"steps", 2}}}});
    try {
        run_manifest(m);
        FAIL("expected a budget error");
    } catch (const BudgetError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("N <= 12") != std::string::npos);
        CHECK(msg.find("N <= 26") != std::string::npos);
    }
    fs::remove_all(scratch("budget"));
}

TEST_CASE("sigma and free-fermion experiments produce their panels") {
    auto dir = scratch("sigma");
    auto a = run_manifest(validate_manifest(
        json{{"experiment", "sigma"},
             {"config", {{"lattice", {{"rows", 2}, {"cols", 2}}}, {"steps", 5}}},
             {"params", {{"with_d2", true}}}},
        Overrides{dir.string(), {}, "exp"}));
    auto s = slurp(dir / "sigma.csv");
    CHECK(s.find(",exp\n") != std::string::npos);
    CHECK(s.find(",lin") == std::string::npos);
    CHECK(a.summary["results"]["final"]["Sx1"].contains("Sigma2"));

    auto ffdir = scratch("ff");
    auto f = run_manifest(validate_manifest(
        json{{"experiment", "free-fermion"},
             {"output", ffdir.string()},
             {"params", {{"sizes", {8}}, {"fields", {0.5}}, {"tau", 2.0}, {"trajectories", 0}, {"mitigation", true}}}}));
    CHECK(fs::exists(ffdir / "ff_N8_h0.5_eta0.1.csv"));
    CHECK(fs::exists(ffdir / "ff_mitigation_N8_h0.5_eta0.1.csv"));
    CHECK(f.summary["results"]["runs"][0]["lambda_theory"].get<double>() > 0.0);
    fs::remove_all(dir);
    fs::remove_all(ffdir);
}
