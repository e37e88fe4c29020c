#include "lifeplan/cli.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lifeplan/config.hpp"
#include "lifeplan/controlled.hpp"
#include "lifeplan/csvio.hpp"
#include "lifeplan/earmarked.hpp"
#include "lifeplan/errors.hpp"
#include "lifeplan/gompertz.hpp"
#include "lifeplan/mc.hpp"
#include "lifeplan/model.hpp"
#include "lifeplan/predetermined.hpp"
#include "lifeplan/rootfind.hpp"
#include "lifeplan/verify.hpp"

namespace lifeplan {

namespace {

const std::map<std::string, double ModelParams::*>& model_fields() {
    static const std::map<std::string, double ModelParams::*> fields = {
        {"mu", &ModelParams::mu},
        {"sigma", &ModelParams::sigma},
        {"r", &ModelParams::r},
        {"rho", &ModelParams::rho},
        {"gamma", &ModelParams::gamma},
        {"mu_y", &ModelParams::mu_y},
        {"sigma_y", &ModelParams::sigma_y},
        {"l", &ModelParams::l},
        {"m", &ModelParams::m},
        {"bequest_B", &ModelParams::bequest_B},
        {"earmark_q", &ModelParams::earmark_q},
        {"gompertz_a", &ModelParams::gompertz_a},
        {"x0", &ModelParams::x0},
        {"y0", &ModelParams::y0},
    };
    return fields;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = lo + (hi - lo) * i / (n - 1);
    }
    v.back() = hi;
    return v;
}

std::string trace_path(const std::string& out) {
    const auto slash = out.find_last_of('/');
    const auto dot = out.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return out + "_trace";
    }
    return out.substr(0, dot) + "_trace" + out.substr(dot);
}

// Lifetime utility of the reserved fixed-payout plan, from its dual: the
// waiting branch adds the delay value on top of the insured-now closed form.
double earmarked_value(double x, double y,
                       const EarmarkedPredeterminedSolution& es,
                       const ModelParams& p, const DerivedConstants& dc) {
    const double q = p.earmark_q;
    const double B = p.bequest_B;
    const double flow_ins =
        p.m * crra_u(p.l * (B + q), p.gamma) / (p.rho + p.m);
    const double hc = human_capital(y, dc);
    auto objective = [&](double z) {
        return crra_dual_u(z, p.gamma) / dc.K + z * hc + flow_ins -
               dc.h * z / p.r + earmarked_w(z, es, p, dc, q, B) + z * x;
    };
    return log_grid_min_value(objective, 1e-8, 1e8);
}

void kv(std::ostream& os, const std::string& key, const std::string& value) {
    os << key << " = " << value << "\n";
}

int cmd_validate(const RunConfig& cfg, std::ostream& os) {
    const auto violations = validate_assumptions(cfg.params);
    if (violations.empty()) {
        os << "model assumptions satisfied\n";
        return 0;
    }
    for (const auto code : violations) {
        os << "violated: " << to_string(code) << "\n";
    }
    return 2;
}

int cmd_solve(const RunConfig& cfg, const std::string& case_name,
              const std::string& out, std::ostream& os) {
    const ModelParams& p = cfg.params;
    const DerivedConstants dc = derive_constants(p);
    kv(os, "case", case_name);
    if (case_name == "predetermined") {
        const PredeterminedSolution sol = solve(p, dc);
        kv(os, "immediate_purchase", sol.immediate_purchase ? "true" : "false");
        if (!sol.immediate_purchase) {
            kv(os, "b", fmt9(sol.b));
            kv(os, "C1", fmt9(sol.C1));
            kv(os, "b_hat(y0)", fmt9(primal_boundary(p.y0, sol, p, dc)));
        }
        const PolicyDecision pol = policy(p.x0, p.y0, sol, p, dc);
        kv(os, "V(x0,y0)", fmt9(value(p.x0, p.y0, sol, p, dc)));
        kv(os, "consumption(x0,y0)", fmt9(pol.consumption));
        kv(os, "investment(x0,y0)", fmt9(pol.investment));
        kv(os, "region(x0,y0)",
           pol.region == Region::Continue ? "waiting" : "insured");
    } else if (case_name == "controlled") {
        const ControlledSolution sol = solve_controlled(p, dc);
        const PolicyDecision pol = policy_B(p.x0, p.y0, p, dc);
        kv(os, "D", fmt9(sol.D));
        kv(os, "B0_star(x0,y0)", fmt9(pol.bequest));
        kv(os, "V(x0,y0)", fmt9(value_B(p.x0, p.y0, p, dc)));
        kv(os, "consumption(x0,y0)", fmt9(pol.consumption));
        kv(os, "investment(x0,y0)", fmt9(pol.investment));
    } else if (case_name == "earmarked-pre") {
        const EarmarkedPredeterminedSolution es =
            earmarked_boundary(p, dc, p.earmark_q, p.bequest_B);
        kv(os, "b_bar", fmt9(es.b_bar));
        kv(os, "C1_bar", fmt9(es.C1_bar));
        kv(os, "V(x0,y0)", fmt9(earmarked_value(p.x0, p.y0, es, p, dc)));
    } else if (case_name == "earmarked-ctl") {
        const EarmarkedControlledSolution es =
            smooth_fit_solve(p, dc, p.earmark_q);
        kv(os, "b_tilde", fmt9(es.b_tilde));
        kv(os, "A1", fmt9(es.A1));
        kv(os, "A2", fmt9(es.A2));
        kv(os, "B1", fmt9(es.B1));
        kv(os, "L_bar", fmt9(es.L_bar));
        kv(os, "Delta", fmt9(es.Delta));
        kv(os, "C", fmt9(es.C));
        kv(os, "conditions_ok", es.conditions_ok ? "true" : "false");
    } else {  // gompertz
        const std::vector<double> grid =
            cfg.m_grid_n >= 2
                ? log_spaced_grid(cfg.m_grid_lo, cfg.m_grid_hi, cfg.m_grid_n)
                : std::vector<double>{cfg.m_grid_lo};
        std::vector<MortalityBoundary> trace;
        const MortalityBoundary mb =
            solve_boundary(p, dc, grid, 40, 1e-3, cfg.sim, &trace);
        kv(os, "sweeps", std::to_string(trace.size()));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            kv(os, "b(" + fmt9(grid[i]) + ")", fmt9(mb.b_values[i]));
        }
        if (!out.empty()) {
            CsvWriter w(out, {"m", "b"});
            for (std::size_t i = 0; i < grid.size(); ++i) {
                w.row({fmt9(grid[i]), fmt9(mb.b_values[i])});
            }
            const std::string tp = trace_path(out);
            CsvWriter tw(tp, {"sweep", "m", "b"});
            for (std::size_t s = 0; s < trace.size(); ++s) {
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    tw.row({std::to_string(s + 1), fmt9(grid[i]),
                            fmt9(trace[s].b_values[i])});
                }
            }
            os << "wrote " << out << "\n";
            os << "wrote " << tp << "\n";
        }
    }
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& case_name,
              const std::string& out, std::ostream& os) {
    if (cfg.sweep_variable.empty()) {
        throw Error(ErrorCode::ConfigError,
                    "sweep requires sweep_variable/sweep_lo/sweep_hi/sweep_n "
                    "in the config");
    }
    if (case_name == "gompertz") {
        throw Error(ErrorCode::ConfigError,
                    "sweep does not support case 'gompertz'; use "
                    "solve --case gompertz --out instead");
    }
    const auto field = model_fields().at(cfg.sweep_variable);
    std::vector<std::string> header;
    if (case_name == "predetermined") {
        header = {cfg.sweep_variable, "b",     "C1",
                  "b_hat",            "value", "consumption",
                  "investment"};
    } else if (case_name == "controlled") {
        header = {cfg.sweep_variable, "D", "B0_star", "value", "consumption",
                  "investment"};
    } else if (case_name == "earmarked-pre") {
        header = {cfg.sweep_variable, "b_bar", "C1_bar", "value"};
    } else {
        header = {cfg.sweep_variable, "b_tilde", "A1",
                  "A2",               "B1",      "L_bar",
                  "conditions_ok"};
    }
    CsvWriter w(out, header);
    const auto values = linspace(cfg.sweep_lo, cfg.sweep_hi, cfg.sweep_n);
    const std::string nan = fmt9(std::nan(""));
    for (const double v : values) {
        ModelParams pv = cfg.params;
        pv.*field = v;
        std::vector<std::string> row(header.size(), nan);
        row[0] = fmt9(v);
        try {
            const DerivedConstants dcv = derive_constants(pv);
            if (case_name == "predetermined") {
                const PredeterminedSolution sol = solve(pv, dcv);
                if (!sol.immediate_purchase) {
                    row[1] = fmt9(sol.b);
                    row[2] = fmt9(sol.C1);
                    row[3] = fmt9(primal_boundary(pv.y0, sol, pv, dcv));
                }
                const PolicyDecision pol = policy(pv.x0, pv.y0, sol, pv, dcv);
                row[4] = fmt9(value(pv.x0, pv.y0, sol, pv, dcv));
                row[5] = fmt9(pol.consumption);
                row[6] = fmt9(pol.investment);
            } else if (case_name == "controlled") {
                const ControlledSolution sol = solve_controlled(pv, dcv);
                const PolicyDecision pol = policy_B(pv.x0, pv.y0, pv, dcv);
                row[1] = fmt9(sol.D);
                row[2] = fmt9(pol.bequest);
                row[3] = fmt9(value_B(pv.x0, pv.y0, pv, dcv));
                row[4] = fmt9(pol.consumption);
                row[5] = fmt9(pol.investment);
            } else if (case_name == "earmarked-pre") {
                const EarmarkedPredeterminedSolution es =
                    earmarked_boundary(pv, dcv, pv.earmark_q, pv.bequest_B);
                row[1] = fmt9(es.b_bar);
                row[2] = fmt9(es.C1_bar);
                row[3] = fmt9(earmarked_value(pv.x0, pv.y0, es, pv, dcv));
            } else {
                const EarmarkedControlledSolution es =
                    smooth_fit_solve(pv, dcv, pv.earmark_q);
                row[1] = fmt9(es.b_tilde);
                row[2] = fmt9(es.A1);
                row[3] = fmt9(es.A2);
                row[4] = fmt9(es.B1);
                row[5] = fmt9(es.L_bar);
                row[6] = es.conditions_ok ? "1" : "0";
            }
        } catch (const Error&) {
            // Row stays NaN: the parameter point is outside this case's
            // admissible regime (e.g. gamma > 1 in the unreserved sweep).
        }
        w.row(row);
    }
    os << "wrote " << out << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& cfg, const std::string& case_name,
                 std::ostream& os) {
    const ModelParams& p = cfg.params;
    const DerivedConstants dc = derive_constants(p);
    kv(os, "case", case_name);
    kv(os, "paths", std::to_string(cfg.sim.n_paths));
    kv(os, "seed", std::to_string(cfg.sim.seed));

    if (case_name == "gompertz") {
        const std::vector<double> grid =
            cfg.m_grid_n >= 2
                ? log_spaced_grid(cfg.m_grid_lo, cfg.m_grid_hi, cfg.m_grid_n)
                : std::vector<double>{cfg.m_grid_lo};
        const MortalityBoundary mb =
            solve_boundary(p, dc, grid, 40, 1e-3, cfg.sim);
        // Residuals are evaluated out of sample: with the solver's own seed
        // they would vanish by construction of the fixed point.
        SimConfig res_sim = cfg.sim;
        res_sim.seed = cfg.sim.seed + 1000003;
        kv(os, "residual_seed", std::to_string(res_sim.seed));
        for (const double m : grid) {
            const McEstimate res = boundary_residual(mb, m, p, dc, res_sim);
            os << "residual(m=" << fmt9(m) << ") = " << fmt9(res.mean)
               << " (stderr " << fmt9(res.std_error) << ", horizon "
               << fmt9(res.horizon_T) << ")\n";
        }
        return 0;
    }

    PolicyPlan plan;
    double analytic = 0.0;
    if (case_name == "predetermined") {
        plan.kind = PlanKind::PredeterminedThreshold;
        const PredeterminedSolution sol = solve(p, dc);
        analytic = value(p.x0, p.y0, sol, p, dc);
    } else if (case_name == "controlled") {
        plan.kind = PlanKind::ControlledImmediate;
        analytic = value_B(p.x0, p.y0, p, dc);
    } else if (case_name == "earmarked-pre") {
        plan.kind = PlanKind::EarmarkedThreshold;
        const EarmarkedPredeterminedSolution es =
            earmarked_boundary(p, dc, p.earmark_q, p.bequest_B);
        analytic = earmarked_value(p.x0, p.y0, es, p, dc);
    } else {
        throw Error(ErrorCode::ConfigError,
                    "simulate supports cases predetermined, controlled, "
                    "earmarked-pre, gompertz");
    }
    const McEstimate est = mc_value(plan, p.x0, p.y0, p, dc, cfg.sim);
    kv(os, "mc_value", fmt9(est.mean));
    kv(os, "mc_stderr", fmt9(est.std_error));
    kv(os, "analytic", fmt9(analytic));
    kv(os, "z_score", fmt9((est.mean - analytic) / est.std_error));
    kv(os, "horizon_T", fmt9(est.horizon_T));
    const McEstimate budget = budget_identity(p.x0, p.y0, p, dc, cfg.sim);
    kv(os, "budget_mean", fmt9(budget.mean));
    kv(os, "budget_stderr", fmt9(budget.std_error));
    kv(os, "budget_target", fmt9(p.x0));
    return 0;
}

int cmd_reproduce(const std::string& out_dir, std::ostream& os) {
    namespace fs = std::filesystem;
    const std::string dir = out_dir.empty() ? "." : out_dir;
    fs::create_directories(dir);
    const ModelParams p{};  // baseline parameter set
    const DerivedConstants dc = derive_constants(p);
    const PredeterminedSolution sol = solve(p, dc);
    auto wrote = [&](const std::string& name) {
        os << "wrote " << dir << "/" << name << "\n";
    };

    {
        CsvWriter w(dir + "/table3.csv",
                    {"case", "bequest", "pi_over_x", "c_over_x",
                     "y_over_kappa"});
        const double hc = human_capital(p.y0, dc);
        const PolicyDecision big = policy(p.x0, p.y0, sol, p, dc);
        w.row({"predetermined_large_B", fmt9(p.bequest_B),
               fmt9(big.investment / p.x0), fmt9(big.consumption / p.x0),
               fmt9(hc)});
        ModelParams ps = p;
        ps.bequest_B = 0.351;
        const DerivedConstants dcs = derive_constants(ps);
        const PredeterminedSolution sols = solve(ps, dcs);
        const PolicyDecision small = policy(ps.x0, ps.y0, sols, ps, dcs);
        w.row({"predetermined_small_B", fmt9(ps.bequest_B),
               fmt9(small.investment / ps.x0), fmt9(small.consumption / ps.x0),
               fmt9(hc)});
        const PolicyDecision chosen = policy_B(p.x0, p.y0, p, dc);
        w.row({"controlled", fmt9(chosen.bequest),
               fmt9(chosen.investment / p.x0), fmt9(chosen.consumption / p.x0),
               fmt9(hc)});
        wrote("table3.csv");
    }
    {
        CsvWriter w(dir + "/boundary_vs_income.csv", {"y", "b_hat"});
        for (const double y : linspace(0.0, 4.0, 81)) {
            w.row({fmt9(y), fmt9(primal_boundary(y, sol, p, dc))});
        }
        wrote("boundary_vs_income.csv");
    }
    {
        CsvWriter w(dir + "/boundary_vs_bequest.csv", {"B", "b", "b_hat"});
        for (const double B : log_spaced_grid(0.05, 10.0, 61)) {
            ModelParams pb = p;
            pb.bequest_B = B;
            const DerivedConstants dcb = derive_constants(pb);
            const PredeterminedSolution sb = solve(pb, dcb);
            w.row({fmt9(B), fmt9(sb.b),
                   fmt9(primal_boundary(p.y0, sb, pb, dcb))});
        }
        wrote("boundary_vs_bequest.csv");
    }
    {
        CsvWriter w(dir + "/boundary_vs_gamma.csv", {"gamma", "b", "b_hat"});
        for (const double g : linspace(0.5, 0.99, 50)) {
            ModelParams pg = p;
            pg.gamma = g;
            const DerivedConstants dcg = derive_constants(pg);
            const PredeterminedSolution sg = solve(pg, dcg);
            w.row({fmt9(g), fmt9(sg.b),
                   fmt9(primal_boundary(p.y0, sg, pg, dcg))});
        }
        wrote("boundary_vs_gamma.csv");
    }
    {
        CsvWriter w(dir + "/boundary_vs_weight.csv", {"l", "b", "b_hat"});
        for (const double l : linspace(0.05, 1.0, 60)) {
            ModelParams pl = p;
            pl.l = l;
            const DerivedConstants dcl = derive_constants(pl);
            const PredeterminedSolution sl = solve(pl, dcl);
            w.row({fmt9(l), fmt9(sl.b),
                   fmt9(primal_boundary(p.y0, sl, pl, dcl))});
        }
        wrote("boundary_vs_weight.csv");
    }
    {
        CsvWriter w(dir + "/policy_vs_wealth.csv",
                    {"x", "consumption", "investment", "region"});
        for (const double x : linspace(0.0, 200.0, 201)) {
            const PolicyDecision pol = policy(x, p.y0, sol, p, dc);
            w.row({fmt9(x), fmt9(pol.consumption), fmt9(pol.investment),
                   pol.region == Region::Continue ? "waiting" : "insured"});
        }
        wrote("policy_vs_wealth.csv");
    }
    {
        CsvWriter w(dir + "/bequest_vs_weight.csv", {"l", "B0_star"});
        for (const double l : linspace(0.05, 1.0, 60)) {
            ModelParams pl = p;
            pl.l = l;
            const DerivedConstants dcl = derive_constants(pl);
            w.row({fmt9(l), fmt9(policy_B(p.x0, p.y0, pl, dcl).bequest)});
        }
        wrote("bequest_vs_weight.csv");
    }
    {
        CsvWriter w(dir + "/bequest_vs_gamma.csv", {"gamma", "B0_star"});
        std::vector<double> gs = linspace(0.5, 0.95, 10);
        for (const double g : linspace(1.05, 3.0, 40)) gs.push_back(g);
        for (const double g : gs) {
            ModelParams pg = p;
            pg.gamma = g;
            const DerivedConstants dcg = derive_constants(pg);
            w.row({fmt9(g), fmt9(policy_B(p.x0, p.y0, pg, dcg).bequest)});
        }
        wrote("bequest_vs_gamma.csv");
    }
    {
        CsvWriter w(dir + "/delay_value_vs_z.csv", {"z", "w_hat"});
        for (const double z : log_spaced_grid(sol.b / 5.0, 20.0 * sol.b, 200)) {
            w.row({fmt9(z), fmt9(dual_w_hat(z, sol, p, dc))});
        }
        wrote("delay_value_vs_z.csv");
    }
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{
        "lifeplan: consumption, investment, and life-insurance timing under "
        "mortality risk"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string case_name = "predetermined";
    std::uint64_t seed = 0;
    double corrupt = 1.0;
    const std::vector<std::string> cases = {
        "predetermined", "controlled", "earmarked-pre", "earmarked-ctl",
        "gompertz"};

    CLI::App* s_validate =
        app.add_subcommand("validate", "check the model assumptions");
    CLI::App* s_solve =
        app.add_subcommand("solve", "closed-form solution quantities");
    CLI::App* s_sweep =
        app.add_subcommand("sweep", "solution quantities along a parameter "
                                    "sweep, written as CSV");
    CLI::App* s_sim = app.add_subcommand(
        "simulate", "Monte Carlo value of the optimal plan vs analytic");
    CLI::App* s_verify = app.add_subcommand(
        "verify", "run the self-consistency battery (exit 3 on failure)");
    CLI::App* s_repro = app.add_subcommand(
        "reproduce-paper",
        "write the published tables/figures as CSV artifacts");

    for (CLI::App* sub : {s_validate, s_solve, s_sweep, s_sim, s_verify}) {
        sub->add_option("--config", config_path,
                        "parameter file (key = value lines)");
    }
    for (CLI::App* sub : {s_solve, s_sweep, s_sim}) {
        sub->add_option("--case", case_name, "problem variant")
            ->check(CLI::IsMember(cases));
    }
    for (CLI::App* sub : {s_solve, s_sim, s_verify}) {
        sub->add_option("--seed", seed, "override the simulation seed");
    }
    s_solve->add_option("--out", out_path, "CSV output (gompertz boundary)");
    s_sweep->add_option("--out", out_path, "CSV output path")->required();
    s_repro->add_option("--out", out_path,
                        "output directory (default: current)");
    s_verify
        ->add_option("--corrupt-boundary", corrupt,
                     "multiply free boundaries by this factor (negative "
                     "control; battery must fail when != 1)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        const auto* seed_opt = sub->get_option_no_throw("--seed");
        if (seed_opt != nullptr && seed_opt->count() > 0) {
            cfg.sim.seed = seed;
        }
        const std::string name = sub->get_name();
        if (name == "validate") return cmd_validate(cfg, std::cout);
        if (name == "solve") {
            return cmd_solve(cfg, case_name, out_path, std::cout);
        }
        if (name == "sweep") {
            return cmd_sweep(cfg, case_name, out_path, std::cout);
        }
        if (name == "simulate") return cmd_simulate(cfg, case_name, std::cout);
        if (name == "verify") {
            const DerivedConstants dc = derive_constants(cfg.params);
            return run_verification(cfg.params, dc, cfg.sim, std::cout,
                                    corrupt)
                       ? 0
                       : 3;
        }
        return cmd_reproduce(out_path, std::cout);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::ConfigError ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace lifeplan
