#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tailspectra/runner.hpp"

using namespace tailspectra;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("tailspectra_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ext) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("analyze command emits a full report", "[cli]") {
    auto dir = temp_dir("analyze");
    RunConfig config;
    config.command = "analyze";
    config.dist = "md1_sojourn";
    config.dist_params = {{"rho", 0.5}};
    config.out_dir = dir.string();
    std::ostringstream err;
    CHECK(run(config, err, err) == 0);

    auto jsons = files_with_extension(dir, ".json");
    REQUIRE(jsons.size() == 1);
    auto j = nlohmann::json::parse(slurp(jsons[0]));
    CHECK(j.at("schema_version") == 1);
    CHECK(j.contains("tool_version"));
    CHECK(j.at("config").at("dist") == "md1_sojourn");
    auto res = j.at("result");
    CHECK(res.at("decay_rate").get<double>() == Catch::Approx(-1.2564312086).margin(1e-6));
    CHECK(res.at("order") == 1);
    CHECK(res.at("certified") == true);
    // human-readable rendering alongside
    CHECK(files_with_extension(dir, ".txt").size() == 1);
}

TEST_CASE("analyze command: exponential", "[cli]") {
    auto dir = temp_dir("analyze_exp");
    RunConfig config;
    config.command = "analyze";
    config.dist = "exponential";
    config.dist_params = {{"mu", 1.0}};
    config.out_dir = dir.string();
    std::ostringstream err;
    CHECK(run(config, err, err) == 0);
    auto j = nlohmann::json::parse(slurp(files_with_extension(dir, ".json").at(0)));
    CHECK(j.at("result").at("decay_rate").get<double>() == -1.0);
    CHECK(j.at("result").at("order") == 1);
}

TEST_CASE("analyze with CSV emission", "[cli]") {
    auto dir = temp_dir("analyze_csv");
    RunConfig config;
    config.command = "analyze";
    config.dist = "erlang";
    config.dist_params = {{"k", 2.0}, {"mu", 1.0}};
    config.out_dir = dir.string();
    config.emit_csv = true;
    std::ostringstream err;
    CHECK(run(config, err, err) == 0);
    auto csvs = files_with_extension(dir, ".csv");
    REQUIRE(csvs.size() == 2);  // extremal curve + closed-form tail
    std::string extremal;
    for (const auto& p : csvs)
        if (p.string().find("extremal") != std::string::npos) extremal = slurp(p);
    REQUIRE(!extremal.empty());
    CHECK(extremal.rfind("t,majorant,minorant,target\n", 0) == 0);
}

TEST_CASE("hypothesis failures exit 2 with a diagnostic payload", "[cli]") {
    auto dir = temp_dir("fail2");
    RunConfig config;
    config.command = "analyze";
    config.dist = "deterministic";  // PGF with no finite-radius pole
    config.out_dir = dir.string();
    std::ostringstream err;
    CHECK(run(config, err, err) == 2);
    auto jsons = files_with_extension(dir, ".json");
    REQUIRE(jsons.size() == 1);
    auto j = nlohmann::json::parse(slurp(jsons[0]));
    CHECK(j.at("result").at("hypothesis_failure") == "NotAPole");
    CHECK(j.at("result").contains("message"));
}

TEST_CASE("usage errors exit 1", "[cli]") {
    RunConfig config;
    config.command = "analyze";  // no dist, no spec file
    std::ostringstream err;
    CHECK(run(config, err, err) == 1);
    CHECK(err.str().find("usage error") != std::string::npos);

    RunConfig bad;
    bad.command = "frobnicate";
    CHECK(run(bad, err, err) == 1);

    // malformed spec file: error, not a crash
    auto dir = temp_dir("badspec");
    std::ofstream(dir / "broken.json") << "{ not json";
    RunConfig broken;
    broken.command = "analyze";
    broken.spec_file = (dir / "broken.json").string();
    broken.out_dir = dir.string();
    CHECK(run(broken, err, err) == 1);
}

TEST_CASE("audit command", "[cli]") {
    auto dir = temp_dir("audit");
    RunConfig config;
    config.command = "audit";
    config.t = 0.5;
    config.K = 3;
    config.N = 1000000;
    config.out_dir = dir.string();
    std::ostringstream err;
    CHECK(run(config, err, err) == 0);
    auto j = nlohmann::json::parse(slurp(files_with_extension(dir, ".json").at(0)));
    CHECK(j.at("result").at("ratio").get<double>() == Catch::Approx(1.0 / 3.0).margin(1e-4));
}

TEST_CASE("verify command writes one report per omega", "[cli]") {
    auto dir = temp_dir("verify");
    RunConfig config;
    config.command = "verify";
    config.K = 3;
    config.omega_list = {5.0, 10.0, 20.0};
    config.out_dir = dir.string();
    std::ostringstream err;
    CHECK(run(config, err, err) == 0);
    auto jsons = files_with_extension(dir, ".json");
    CHECK(jsons.size() == 3);
}

TEST_CASE("simulate and counterexample and polemap artifacts", "[cli]") {
    std::ostringstream err;
    {
        auto dir = temp_dir("simulate");
        RunConfig config;
        config.command = "simulate";
        config.dist_params = {{"rho", 0.5}};
        config.n_samples = 20000;
        config.seed = 42;
        config.out_dir = dir.string();
        CHECK(run(config, err, err) == 0);
        CHECK(files_with_extension(dir, ".json").size() == 1);
        CHECK(files_with_extension(dir, ".csv").size() == 1);
    }
    {
        auto dir = temp_dir("counter");
        RunConfig config;
        config.command = "counterexample";
        config.h = 2;
        config.sigma0 = -1.0;
        config.n_max = 4;
        config.out_dir = dir.string();
        CHECK(run(config, err, err) == 0);
        auto j = nlohmann::json::parse(slurp(files_with_extension(dir, ".json").at(0)));
        auto c = j.at("result").at("c").get<std::vector<std::uint64_t>>();
        CHECK(c == std::vector<std::uint64_t>{0, 1, 3, 11, 2059});
    }
    {
        auto dir = temp_dir("polemap");
        RunConfig config;
        config.command = "polemap";
        config.dist = "exponential";
        config.dist_params = {{"mu", 1.0}};
        config.re_min = -2.0;
        config.re_max = 0.0;
        config.im_min = -1.0;
        config.im_max = 1.0;
        config.out_dir = dir.string();
        CHECK(run(config, err, err) == 0);
        std::string csv = slurp(files_with_extension(dir, ".csv").at(0));
        CHECK(csv.rfind("re,im,order\n", 0) == 0);
        CHECK(csv.find("-1") != std::string::npos);
    }
}

TEST_CASE("reports are byte-identical across reruns", "[cli][determinism]") {
    auto run_once = [&](const std::string& tag) {
        auto dir = temp_dir(tag);
        RunConfig config;
        config.command = "simulate";
        config.dist_params = {{"rho", 0.5}};
        config.n_samples = 50000;
        config.seed = 42;
        config.out_dir = dir.string();
        std::ostringstream err;
        REQUIRE(run(config, err, err) == 0);
        std::string all;
        for (const auto& p : files_with_extension(dir, ".json")) all += slurp(p);
        for (const auto& p : files_with_extension(dir, ".csv")) all += slurp(p);
        return all;
    };
    CHECK(run_once("det_a") == run_once("det_b"));
}

TEST_CASE("config file round trip drives the same analysis", "[cli]") {
    auto dir = temp_dir("config");
    nlohmann::json cfg;
    cfg["command"] = "audit";
    cfg["t"] = 0.25;
    cfg["K"] = 1;
    cfg["N"] = 100000;
    cfg["out"] = dir.string();
    RunConfig config;
    config.apply_json(cfg);
    CHECK(config.command == "audit");
    CHECK(config.t == 0.25);
    CHECK(config.K == 1);
    std::ostringstream err;
    CHECK(run(config, err, err) == 0);
    auto j = nlohmann::json::parse(slurp(files_with_extension(dir, ".json").at(0)));
    CHECK(j.at("result").at("ratio").get<double>() == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("spec file input", "[cli]") {
    auto dir = temp_dir("specfile");
    // custom transform 1/(s+1) via expression trees
    nlohmann::json spec = {
        {"id", "custom"},
        {"numerator", {{"op", "const"}, {"value", 1.0}}},
        {"denominator",
         {{"op", "add"},
          {"args",
           {nlohmann::json{{"op", "var"}}, nlohmann::json{{"op", "const"}, {"value", 1.0}}}}}},
        {"search_bracket", {-2.0, -0.5}},
    };
    fs::path spec_path = dir / "spec.json";
    std::ofstream(spec_path) << spec.dump(2);

    RunConfig config;
    config.command = "analyze";
    config.spec_file = spec_path.string();
    config.out_dir = dir.string();
    std::ostringstream err;
    CHECK(run(config, err, err) == 0);
    auto jsons = files_with_extension(dir, ".json");
    REQUIRE(jsons.size() >= 1);
    bool found = false;
    for (const auto& p : jsons) {
        if (p.filename().string().rfind("analyze-", 0) != 0) continue;
        auto j = nlohmann::json::parse(slurp(p));
        CHECK(j.at("result").at("decay_rate").get<double>() == Catch::Approx(-1.0).margin(1e-9));
        found = true;
    }
    CHECK(found);
}
