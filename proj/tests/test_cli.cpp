#include "softmps_cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("softmps_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Outcome run(std::vector<std::string> args, bool with_out = true) {
        if (with_out) {
            args.push_back("--out");
            args.push_back(dir_.string());
        }
        args.insert(args.begin(), "softmps");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = softmps::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return {code, out.str(), err.str()};
    }

    std::string slurp(const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::string first_line(const fs::path& p) {
        std::ifstream in(p);
        std::string line;
        std::getline(in, line);
        return line;
    }

    json manifest() { return json::parse(slurp(dir_ / "manifest.json")); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, PolaronPrintsFourDecimals) {
    const auto r = run({"polaron", "--s", "0.3", "--delta", "0.1", "--omega-c", "1"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "0.0316\n");
    EXPECT_EQ(slurp(dir_ / "polaron.txt"), "0.0316\n");
    EXPECT_EQ(manifest()["status"], "ok");
}

TEST_F(Cli, PolaronRejectsBadExponent) {
    EXPECT_EQ(run({"polaron", "--s", "1.5"}).code, 2);
    EXPECT_EQ(manifest()["status"], "config_error");
}

TEST_F(Cli, GroundAtZeroCoupling) {
    const auto r = run({"ground", "--s", "0.2", "--alpha", "0", "--n", "5", "--chi", "2", "--seed", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["energy"]["total"].get<double>(), -0.05, 1e-6);
    EXPECT_LT(j["magnetization"].get<double>(), 1e-4);
    EXPECT_TRUE(fs::exists(dir_ / "ground.json"));
    EXPECT_TRUE(fs::exists(dir_ / "result.json"));
    const auto m = manifest();
    EXPECT_EQ(m["seed"], 1);
    EXPECT_EQ(m["command"], "ground");
    EXPECT_EQ(m["config"]["values"]["alpha"], "0");
    EXPECT_EQ(m["config"]["values"]["chi"], "2");
    EXPECT_TRUE(m.contains("finished"));
}

TEST_F(Cli, GroundWithObservablesAndWarmStart) {
    const auto first = run({"ground", "--s", "0.3", "--alpha", "0.02", "--n", "3", "--seed", "2", "--observables"});
    ASSERT_EQ(first.code, 0) << first.err;
    const json j = json::parse(first.out);
    EXPECT_EQ(j["occupations"].size(), 3u);
    EXPECT_EQ(j["entropy_log"], "natural");
    fs::copy_file(dir_ / "ground.json", dir_ / "warm.json");
    const auto second = run({"ground", "--s", "0.3", "--alpha", "0.021", "--n", "3", "--seed", "3", "--restarts", "1",
                             "--warm", (dir_ / "warm.json").string()});
    EXPECT_EQ(second.code, 0) << second.err;
}

TEST_F(Cli, RandomSeedIsPrinted) {
    const auto r = run({"ground", "--s", "0.3", "--alpha", "0", "--n", "2", "--chi", "1", "--restarts", "1"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.err.rfind("seed: ", 0), 0u);
    EXPECT_TRUE(manifest()["seed"].is_number_unsigned());
}

TEST_F(Cli, CriticalWithoutBracketIsConfigError) {
    const auto r = run({"critical", "--s", "0.2", "--n", "4", "--seed", "1"});
    EXPECT_EQ(r.code, 2);
    const auto m = manifest();
    EXPECT_EQ(m["status"], "config_error");
    EXPECT_EQ(m["error"]["code"], "config_error");
}

TEST_F(Cli, SweepRejectsUnsortedGrid) {
    EXPECT_EQ(run({"sweep", "--s", "0.2", "--n", "3", "--grid", "0.02,0.01", "--seed", "1"}).code, 2);
}

TEST_F(Cli, UnknownFlagIsUsageError) { EXPECT_EQ(run({"polaron", "--bogus", "1"}).code, 2); }

TEST_F(Cli, SweepGoldenHeaders) {
    const auto r = run({"sweep", "--s", "0.3", "--n", "3", "--grid", "0,0.01", "--seed", "4", "--restarts", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(first_line(dir_ / "sweep.csv"),
              "alpha,M,sx,spin_entropy,energy,sz,occupation_1,e_loc,e_int,e_chain,converged,iterations,error");
    EXPECT_EQ(first_line(dir_ / "sweep_sites.csv"), "alpha,site,occupation,entropy,cutoff");
    std::ifstream in(dir_ / "sweep_sites.csv");
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    EXPECT_EQ(lines, 1 + 2 * 3);
}

TEST_F(Cli, ChainCsv) {
    const auto r = run({"chain", "--s", "0.2", "--alpha", "0.0175", "--n", "3"});
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string meta, header, row1, row2, row3;
    std::getline(in, meta);
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    std::getline(in, row3);
    EXPECT_EQ(meta.rfind("# c0=0.08539", 0), 0u);
    EXPECT_NE(meta.find("scheme=linear"), std::string::npos);
    EXPECT_EQ(header, "site,omega,t");
    EXPECT_EQ(row1.rfind("1,0.54545", 0), 0u);
    EXPECT_EQ(row3.back(), ',');
    EXPECT_EQ(slurp(dir_ / "chain.csv"), r.out);
}

TEST_F(Cli, ConfigFileWithOverrides) {
    std::ofstream(dir_ / "run.toml") << "[polaron]\ns = 0.5\ndelta = 0.1\n";
    auto r = run({"polaron", "--config", (dir_ / "run.toml").string()});
    EXPECT_EQ(r.out, "0.0784\n");
    r = run({"polaron", "--config", (dir_ / "run.toml").string(), "--s", "0.1"});
    EXPECT_EQ(r.out, "0.0065\n");
}

TEST_F(Cli, ConfigFileUnknownKey) {
    std::ofstream(dir_ / "bad.toml") << "[polaron]\ns = 0.5\nbogus = 1\n";
    EXPECT_EQ(run({"polaron", "--config", (dir_ / "bad.toml").string()}).code, 2);
}

TEST_F(Cli, ExtrapolateFromCsv) {
    std::ofstream f(dir_ / "points.csv");
    f << std::setprecision(17) << "N,alpha_c\n";
    for (int n : {5, 10, 20, 40}) f << n << ',' << 0.02 * std::exp(0.5 / n) << '\n';
    f.close();
    const auto r = run({"extrapolate", "--input", (dir_ / "points.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(dir_ / "extrapolate.json"));
    EXPECT_NEAR(j["parameters"]["a"]["value"].get<double>(), 0.02, 1e-12);
    EXPECT_NEAR(j["parameters"]["b"]["value"].get<double>(), 0.5, 1e-10);
}

TEST_F(Cli, ExponentFromSweepCsv) {
    std::ofstream f(dir_ / "sweep_in.csv");
    f << std::setprecision(17) << "alpha,M,converged\n";
    for (double r = 0.01; r <= 0.3; r *= 1.4) f << 0.02 * (1 + r) << ',' << 0.8 * std::sqrt(r) << ",1\n";
    f << 0.02 * 1.1 << ",0.9,0\n";
    f.close();
    const auto r = run({"exponent", "--input", (dir_ / "sweep_in.csv").string(), "--alpha-c", "0.02"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(dir_ / "exponent.json"));
    EXPECT_NEAR(j["parameters"]["exponent"]["value"].get<double>(), 0.5, 1e-6);
}

TEST_F(Cli, ExponentNeedsPoints) {
    std::ofstream(dir_ / "few.csv") << "alpha,M\n0.0201,0.1\n";
    EXPECT_EQ(run({"exponent", "--input", (dir_ / "few.csv").string(), "--alpha-c", "0.02"}).code, 2);
}

TEST_F(Cli, OracleCheck) {
    const auto r = run({"oracle-check", "--instances", "20", "--seed", "5"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("energy"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir_ / "oracle_check.json"));
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
    ::setenv("SOFTMPS_OUT", (dir_ / "env").string().c_str(), 1);
    const auto r = run({"polaron", "--s", "0.2"}, false);
    ::unsetenv("SOFTMPS_OUT");
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(fs::exists(dir_ / "env" / "manifest.json"));
}

TEST_F(Cli, ManifestIsReproducible) {
    run({"ground", "--s", "0.3", "--alpha", "0.03", "--n", "3", "--seed", "9", "--restarts", "2"});
    const std::string first = slurp(dir_ / "result.json");
    const auto m = manifest();
    std::vector<std::string> args{"ground"};
    for (const auto& [k, v] : m["config"]["values"].items()) {
        const std::string val = v.get<std::string>();
        if (k == "out" || val.empty()) continue;
        if (val == "true" || val == "false") {
            if (val == "true") args.push_back("--" + k);
            continue;
        }
        args.push_back("--" + k);
        args.push_back(val);
    }
    args.push_back("--seed");
    args.push_back(std::to_string(m["seed"].get<std::uint64_t>()));
    run(args);
    EXPECT_EQ(slurp(dir_ / "result.json"), first);
}
