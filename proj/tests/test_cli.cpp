#include "lifeplan/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lifeplan/earmarked.hpp"
#include "lifeplan/model.hpp"
#include "lifeplan/rootfind.hpp"
#include "oracle/reference_values.hpp"
#include "test_util.hpp"

namespace {

using namespace lifeplan;
namespace fs = std::filesystem;
namespace ref = lifeplan::oracle;

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::vector<std::string> full = {"lifeplan"};
    for (auto& a : args) full.push_back(std::move(a));
    std::vector<char*> argv;
    argv.reserve(full.size());
    for (auto& s : full) argv.push_back(s.data());
    CliResult res;
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    res.code = run_cli(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    res.out = out.str();
    res.err = err.str();
    return res;
}

// Value of a "key = value" report line; empty when the key is absent.
std::string kv_text(const std::string& out, const std::string& key) {
    const std::string tag = key + " = ";
    std::istringstream in(out);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(tag, 0) == 0) return line.substr(tag.size());
    }
    return {};
}

double kv_num(const std::string& out, const std::string& key) {
    const std::string text = kv_text(out, key);
    EXPECT_FALSE(text.empty()) << "missing report line '" << key << "'";
    return text.empty() ? std::nan("") : std::stod(text);
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    EXPECT_TRUE(in.good()) << "cannot open " << p;
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / "lifeplan_cli_test";
        fs::create_directories(dir_);
    }

    std::string write_cfg(const std::string& name, const std::string& body) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << body;
        return p.string();
    }

    std::string path(const std::string& name) {
        return (dir_ / name).string();
    }

    fs::path dir_;
};

TEST_F(Cli, SolveReportsTheClosedFormBaseline) {
    const CliResult res = run({"solve", "--case", "predetermined"});
    ASSERT_EQ(res.code, 0) << res.err;
    EXPECT_EQ(kv_text(res.out, "case"), "predetermined");
    EXPECT_EQ(kv_text(res.out, "immediate_purchase"), "false");
    EXPECT_REL(kv_num(res.out, "b"), ref::kBoundaryB, 1e-7);
    EXPECT_REL(kv_num(res.out, "C1"), ref::kCoeffC1, 1e-7);
    EXPECT_REL(kv_num(res.out, "b_hat(y0)"), ref::kBHatY1, 1e-7);
    EXPECT_REL(kv_num(res.out, "V(x0,y0)"), ref::kV11, 1e-7);
    EXPECT_REL(kv_num(res.out, "consumption(x0,y0)"), ref::kC11, 1e-7);
    EXPECT_REL(kv_num(res.out, "investment(x0,y0)"), ref::kPi11, 1e-7);
    EXPECT_EQ(kv_text(res.out, "region(x0,y0)"), "waiting");
}

TEST_F(Cli, SolveCoversEveryClosedFormCase) {
    const CliResult ctl = run({"solve", "--case", "controlled"});
    ASSERT_EQ(ctl.code, 0) << ctl.err;
    EXPECT_REL(kv_num(ctl.out, "D"), ref::kDConst, 1e-7);
    EXPECT_REL(kv_num(ctl.out, "B0_star(x0,y0)"), ref::kCtlB0Star, 1e-7);
    EXPECT_REL(kv_num(ctl.out, "V(x0,y0)"), ref::kCtlV11, 1e-7);
    EXPECT_REL(kv_num(ctl.out, "consumption(x0,y0)"), ref::kCtlC11, 1e-7);
    EXPECT_REL(kv_num(ctl.out, "investment(x0,y0)"), ref::kCtlPi11, 1e-7);

    const std::string cfg =
        write_cfg("g18.cfg", "gamma = 1.8\nearmark_q = 1\n");
    const CliResult pre =
        run({"solve", "--case", "earmarked-pre", "--config", cfg});
    ASSERT_EQ(pre.code, 0) << pre.err;
    EXPECT_REL(kv_num(pre.out, "b_bar"), ref::kBBarG18Q1, 1e-7);
    EXPECT_REL(kv_num(pre.out, "C1_bar"), ref::kC1BarG18Q1, 1e-7);
    {
        ModelParams p{};
        p.gamma = 1.8;
        p.earmark_q = 1.0;
        const DerivedConstants dc = derive_constants(p);
        const EarmarkedPredeterminedSolution es =
            earmarked_boundary(p, dc, p.earmark_q, p.bequest_B);
        const double flow_ins =
            p.m * crra_u(p.l * (p.bequest_B + p.earmark_q), p.gamma) /
            (p.rho + p.m);
        const double analytic = log_grid_min_value(
            [&](double z) {
                return crra_dual_u(z, p.gamma) / dc.K + z / dc.kappa +
                       flow_ins - dc.h * z / p.r +
                       earmarked_w(z, es, p, dc, p.earmark_q, p.bequest_B) +
                       z;
            },
            1e-8, 1e8);
        EXPECT_REL(kv_num(pre.out, "V(x0,y0)"), analytic, 1e-6);
    }

    const CliResult tld =
        run({"solve", "--case", "earmarked-ctl", "--config", cfg});
    ASSERT_EQ(tld.code, 0) << tld.err;
    EXPECT_REL(kv_num(tld.out, "b_tilde"), ref::kBTildeG18, 1e-7);
    EXPECT_REL(kv_num(tld.out, "A1"), ref::kA1G18, 1e-7);
    EXPECT_REL(kv_num(tld.out, "A2"), ref::kA2G18, 1e-7);
    EXPECT_REL(kv_num(tld.out, "B1"), ref::kB1G18, 1e-7);
    EXPECT_REL(kv_num(tld.out, "L_bar"), ref::kLBarG18, 1e-7);
    EXPECT_REL(kv_num(tld.out, "Delta"), ref::kDeltaG18, 1e-7);
    EXPECT_REL(kv_num(tld.out, "C"), ref::kCConstG18, 1e-7);
    EXPECT_EQ(kv_text(tld.out, "conditions_ok"), "true");

    // gamma > 1 and nothing reserved: the threshold degenerates and the
    // report shows an immediate purchase instead of a boundary.
    const std::string hot = write_cfg("g18bare.cfg", "gamma = 1.8\n");
    const CliResult imm =
        run({"solve", "--case", "predetermined", "--config", hot});
    ASSERT_EQ(imm.code, 0) << imm.err;
    EXPECT_EQ(kv_text(imm.out, "immediate_purchase"), "true");
    EXPECT_TRUE(kv_text(imm.out, "b").empty());
    EXPECT_EQ(kv_text(imm.out, "region(x0,y0)"), "insured");
}

TEST_F(Cli, ValidateFlagsBrokenAssumptions) {
    const CliResult good = run({"validate"});
    EXPECT_EQ(good.code, 0);
    EXPECT_NE(good.out.find("model assumptions satisfied"),
              std::string::npos);

    const std::string cfg = write_cfg("badkappa.cfg", "mu_y = 0.2\n");
    const CliResult bad = run({"validate", "--config", cfg});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.out.find("violated:"), std::string::npos) << bad.out;
}

TEST_F(Cli, SimulateReportsAgreementWithTheClosedForm) {
    const std::string cfg = write_cfg(
        "sim2000.cfg", "n_paths = 2000\nantithetic = true\nseed = 3\n");
    const CliResult res =
        run({"simulate", "--case", "predetermined", "--config", cfg});
    ASSERT_EQ(res.code, 0) << res.err;
    EXPECT_EQ(kv_text(res.out, "paths"), "2000");
    EXPECT_EQ(kv_text(res.out, "seed"), "3");
    EXPECT_REL(kv_num(res.out, "analytic"), ref::kV11, 1e-6);
    EXPECT_LT(std::abs(kv_num(res.out, "z_score")), 3.5);
    EXPECT_GE(kv_num(res.out, "horizon_T"), 100.0);
    const double budget = kv_num(res.out, "budget_mean");
    const double budget_se = kv_num(res.out, "budget_stderr");
    EXPECT_NEAR(budget, 1.0, 3.5 * budget_se);
}

TEST_F(Cli, SimulateChecksTheMortalityCurveOutOfSample) {
    const std::string cfg = write_cfg(
        "gom2.cfg",
        "gamma = 1.8\nearmark_q = 1\ngompertz_a = 0\nm_grid_lo = 0.01\n"
        "m_grid_hi = 0.05\nm_grid_n = 2\nn_paths = 16384\n"
        "antithetic = true\nseed = 7\n");
    const CliResult res =
        run({"simulate", "--case", "gompertz", "--config", cfg});
    ASSERT_EQ(res.code, 0) << res.err;
    EXPECT_EQ(kv_text(res.out, "seed"), "7");
    EXPECT_EQ(kv_text(res.out, "residual_seed"), "1000010");

    int checked = 0;
    std::istringstream in(res.out);
    std::string line;
    while (std::getline(in, line)) {
        double m, mean, se, horizon;
        if (std::sscanf(line.c_str(),
                        "residual(m=%lf) = %lf (stderr %lf, horizon %lf)",
                        &m, &mean, &se, &horizon) == 4) {
            EXPECT_NEAR(mean, 0.0, 3.5 * se) << line;
            EXPECT_GT(horizon, 100.0) << line;
            ++checked;
        }
    }
    EXPECT_EQ(checked, 2) << res.out;
}

TEST_F(Cli, SolveWritesTheMortalityCurveArtifacts) {
    const std::string cfg = write_cfg(
        "gom2.cfg",
        "gamma = 1.8\nearmark_q = 1\ngompertz_a = 0\nm_grid_lo = 0.01\n"
        "m_grid_hi = 0.05\nm_grid_n = 2\nn_paths = 16384\n"
        "antithetic = true\nseed = 7\n");
    const std::string out_csv = path("gcurve.csv");
    const CliResult res = run({"solve", "--case", "gompertz", "--config",
                               cfg, "--out", out_csv});
    ASSERT_EQ(res.code, 0) << res.err;

    // With a constant force the curve must match the closed-form threshold
    // (up to Monte Carlo noise in the fixed point).
    const double b_lo = kv_num(res.out, "b(0.01)");
    const double b_hi = kv_num(res.out, "b(0.05)");
    EXPECT_LT(std::abs(std::log(b_lo / ref::kBBarNodeM010)), 0.05);
    EXPECT_LT(std::abs(std::log(b_hi / ref::kBBarNodeM050)), 0.05);

    const auto curve = read_lines(out_csv);
    ASSERT_EQ(curve.size(), 3u);
    EXPECT_EQ(curve[0], "m,b");
    EXPECT_REL(std::stod(split(curve[1])[1]), b_lo, 1e-7);
    EXPECT_REL(std::stod(split(curve[2])[1]), b_hi, 1e-7);

    const int sweeps = static_cast<int>(kv_num(res.out, "sweeps"));
    const auto trace = read_lines(path("gcurve_trace.csv"));
    ASSERT_EQ(trace.size(), 1u + 2u * sweeps);
    EXPECT_EQ(trace[0], "sweep,m,b");
    // The last trace rows equal the converged curve.
    EXPECT_REL(std::stod(split(trace.back())[2]), b_hi, 1e-7);
}

TEST_F(Cli, SweepSkipsInadmissibleRows) {
    const std::string cfg = write_cfg(
        "sweepg.cfg",
        "sweep_variable = gamma\nsweep_lo = 0.5\nsweep_hi = 2\nsweep_n = 4\n");
    const std::string out_csv = path("sweep_gamma.csv");
    const CliResult res = run({"sweep", "--case", "predetermined",
                               "--config", cfg, "--out", out_csv});
    ASSERT_EQ(res.code, 0) << res.err;

    const auto lines = read_lines(out_csv);
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0], "gamma,b,C1,b_hat,value,consumption,investment");

    const auto low = split(lines[1]);  // gamma = 0.5: full waiting row
    EXPECT_EQ(low[0], "0.5");
    for (int c = 1; c <= 6; ++c) EXPECT_FALSE(std::isnan(std::stod(low[c])));
    EXPECT_REL(std::stod(low[1]), ref::kBoundaryG05, 1e-7);

    const auto knife = split(lines[2]);  // gamma = 1: outside the model
    EXPECT_EQ(knife[0], "1");
    for (int c = 1; c <= 6; ++c) EXPECT_TRUE(std::isnan(std::stod(knife[c])));

    const auto high = split(lines[3]);  // gamma = 1.5: immediate purchase
    EXPECT_EQ(high[0], "1.5");
    EXPECT_TRUE(std::isnan(std::stod(high[1])));   // no free boundary
    EXPECT_FALSE(std::isnan(std::stod(high[4])));  // but a finite value

    const CliResult missing =
        run({"sweep", "--case", "predetermined", "--out", out_csv});
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("sweep requires"), std::string::npos);

    const CliResult curve = run({"sweep", "--case", "gompertz", "--config",
                                 cfg, "--out", out_csv});
    EXPECT_EQ(curve.code, 2);
    EXPECT_NE(curve.err.find("does not support"), std::string::npos);
}

TEST_F(Cli, ReproduceGeneratesThePublishedArtifacts) {
    const std::string out_dir = path("repro");
    const CliResult res = run({"reproduce-paper", "--out", out_dir});
    ASSERT_EQ(res.code, 0) << res.err;

    const char* names[] = {
        "table3.csv",           "boundary_vs_income.csv",
        "boundary_vs_bequest.csv", "boundary_vs_gamma.csv",
        "boundary_vs_weight.csv",  "policy_vs_wealth.csv",
        "bequest_vs_weight.csv",   "bequest_vs_gamma.csv",
        "delay_value_vs_z.csv"};
    for (const char* name : names) {
        EXPECT_TRUE(fs::exists(fs::path(out_dir) / name)) << name;
        EXPECT_NE(res.out.find(std::string("wrote ") + out_dir + "/" + name),
                  std::string::npos)
            << name;
    }

    const auto table = read_lines(fs::path(out_dir) / "table3.csv");
    ASSERT_EQ(table.size(), 4u);
    EXPECT_EQ(table[0], "case,bequest,pi_over_x,c_over_x,y_over_kappa");

    const auto big = split(table[1]);
    EXPECT_EQ(big[0], "predetermined_large_B");
    EXPECT_EQ(big[1], "5");
    EXPECT_NEAR(std::stod(big[2]), 33.482, 5e-3);
    EXPECT_NEAR(std::stod(big[3]), 1.477, 5e-3);
    EXPECT_REL(std::stod(big[4]), 55.0, 1e-9);

    const auto small = split(table[2]);
    EXPECT_EQ(small[0], "predetermined_small_B");
    EXPECT_EQ(small[1], "0.351");
    EXPECT_NEAR(std::stod(small[2]), 32.216, 5e-3);
    EXPECT_NEAR(std::stod(small[3]), 1.479, 5e-3);

    const auto chosen = split(table[3]);
    EXPECT_EQ(chosen[0], "controlled");
    EXPECT_REL(std::stod(chosen[1]), ref::kCtlB0Star, 1e-6);
    EXPECT_NEAR(std::stod(chosen[2]), 32.216, 5e-3);
    EXPECT_NEAR(std::stod(chosen[3]), 1.479, 5e-3);
    EXPECT_REL(std::stod(chosen[4]), 55.0, 1e-9);
}

TEST_F(Cli, VerifyRunsTheBatteryAndSignalsFailure) {
    const std::string cfg = write_cfg(
        "sim2000.cfg", "n_paths = 2000\nantithetic = true\nseed = 3\n");
    const CliResult pass = run({"verify", "--config", cfg});
    EXPECT_EQ(pass.code, 0) << pass.out;
    EXPECT_NE(pass.out.find("RESULT: PASS (6/6"), std::string::npos)
        << pass.out;

    const CliResult fail =
        run({"verify", "--config", cfg, "--corrupt-boundary", "1.2"});
    EXPECT_EQ(fail.code, 3);
    EXPECT_NE(fail.out.find("RESULT: FAIL"), std::string::npos) << fail.out;

    const std::string g18 = write_cfg(
        "g18sim.cfg",
        "gamma = 1.8\nearmark_q = 1\nn_paths = 2000\nantithetic = true\n"
        "seed = 3\n");
    const CliResult reserved = run({"verify", "--config", g18});
    EXPECT_EQ(reserved.code, 0) << reserved.out;
    EXPECT_NE(reserved.out.find("RESULT: PASS (8/8"), std::string::npos)
        << reserved.out;
}

TEST_F(Cli, UsageAndConfigErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_NE(run({}).err.find("usage error"), std::string::npos);

    EXPECT_EQ(run({"solve", "--case", "nonsense"}).code, 2);

    const std::string bad = write_cfg("bad.cfg", "bogus = 1\n");
    const CliResult unknown = run({"solve", "--config", bad});
    EXPECT_EQ(unknown.code, 2);
    EXPECT_NE(unknown.err.find("unknown key 'bogus'"), std::string::npos);
    EXPECT_NE(unknown.err.find(":1:"), std::string::npos);

    const CliResult absent =
        run({"solve", "--config", path("does_not_exist.cfg")});
    EXPECT_EQ(absent.code, 2);

    // Domain failures (admissible grammar, inadmissible model) exit 1.
    const CliResult domain = run({"solve", "--case", "earmarked-pre"});
    EXPECT_EQ(domain.code, 1);
    EXPECT_NE(domain.err.find("error:"), std::string::npos);

    const CliResult help = run({"--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("reproduce-paper"), std::string::npos);
}

TEST_F(Cli, SeedOverrideMakesRunsReproducible) {
    const std::string cfg = write_cfg("sim1000.cfg", "n_paths = 1000\n");
    const CliResult a = run({"simulate", "--case", "controlled", "--config",
                             cfg, "--seed", "123"});
    const CliResult b = run({"simulate", "--case", "controlled", "--config",
                             cfg, "--seed", "123"});
    const CliResult c = run({"simulate", "--case", "controlled", "--config",
                             cfg, "--seed", "124"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
    EXPECT_EQ(kv_text(a.out, "seed"), "123");
}

}  // namespace
