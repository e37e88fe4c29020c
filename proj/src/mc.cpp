#include "lifeplan/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lifeplan/controlled.hpp"
#include "lifeplan/earmarked.hpp"
#include "lifeplan/errors.hpp"
#include "lifeplan/predetermined.hpp"
#include "lifeplan/rng.hpp"

namespace lifeplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Valuation grid: monthly resolution while the discount and the purchase
// activity are concentrated, then geometric stretching. The horizon can stay
// moderate because both post-horizon contributions are added in closed form
// conditional on the endpoint (see below), so lengthening it only trades
// simulation work against tail-formula weight.
std::vector<double> build_value_grid() {
    std::vector<double> t{0.0};
    const double fine_dt = 1.0 / 12.0;
    while (t.back() < 50.0 - 1e-9) t.push_back(t.back() + fine_dt);
    while (t.back() < 120.0) t.push_back(std::min(t.back() * 1.06, 120.0));
    return t;
}

double legacy_flow(double amount, const ModelParams& p) {
    return p.m * crra_u(amount, p.gamma) / (p.rho + p.m);
}

// Per-request constants. The simulated factor F_t = Z_t/Z_0 is shared by
// all requests; each one contributes
//   cons_coeff * integral e^{-(rho+m)t} F_t^{(g-1)/g} dt   (consumption)
//   + add_const                                            (fixed flows)
//   + cross_const * e^{-(rho+m) eta},  eta = first t: log F_t <= log_thr.
struct RequestCtx {
    double cons_coeff = 0.0;
    double add_const = 0.0;
    double cross_const = 0.0;
    double log_thr = -kInf;  // log(threshold/z0); -inf when nothing to track
};

// Start point and effective threshold for a fixed-payout plan whose
// threshold is scaled away from the optimum. The start z0 must price the
// plan's actual cashflows — consumption z^{-1/gamma} forever plus the
// premium annuity from the first crossing of b' — so the plan stays exactly
// affordable at x. That budget is the dual slope condition with the delay
// coefficient set to the smooth-fit expression evaluated at b'. (Solving
// instead at the stationary point of a value-matched dual would finance the
// plan with the wrong wealth and let a shifted rule spuriously beat the
// optimum.)
struct ThresholdStart {
    double z0 = 0.0;
    double threshold = 0.0;
};

ThresholdStart scaled_threshold_start(double x, double y, double scale,
                                      const PredeterminedSolution& sol,
                                      const ModelParams& p,
                                      const DerivedConstants& dc) {
    if (scale == 1.0) return {z_star(x, y, sol, p, dc), sol.b};
    if (!(scale > 0.0)) {
        throw Error(ErrorCode::DomainError,
                    "threshold_scale must be positive");
    }
    const double bp = scale * sol.b;

    // Rich enough that the budget lands at or below b': buy at time 0.
    const double net = x - dc.h / p.r + y / dc.kappa;
    if (net > 0.0) {
        const double z_stop = std::pow(net * dc.K, -p.gamma);
        if (z_stop <= bp) return {z_stop, bp};
    }
    PredeterminedSolution eff;
    eff.b = bp;
    eff.C1 = -(dc.h / (p.r * dc.alpha1)) * std::pow(bp, 1.0 - dc.alpha1);
    return {z_star(x, y, eff, p, dc), bp};
}

RequestCtx make_context(const PlanValueRequest& req, const ModelParams& p,
                        const DerivedConstants& dc) {
    const double g = p.gamma;
    RequestCtx ctx;
    double z0 = 0.0;
    double threshold = -1.0;  // <= 0: no threshold tracking

    switch (req.plan.kind) {
        case PlanKind::PredeterminedThreshold: {
            const PredeterminedSolution sol = solve(p, dc);
            const double flow = legacy_flow(p.l * p.bequest_B, p);
            if (sol.immediate_purchase) {
                z0 = z_star(req.x, req.y, sol, p, dc);
                ctx.add_const = flow;
            } else {
                const ThresholdStart st = scaled_threshold_start(
                    req.x, req.y, req.plan.threshold_scale, sol, p, dc);
                z0 = st.z0;
                if (z0 <= st.threshold * (1.0 + 1e-12)) {
                    ctx.add_const = flow;  // bought at time 0
                } else {
                    ctx.cross_const = flow;
                    threshold = st.threshold;
                }
            }
            break;
        }
        case PlanKind::NeverPurchase: {
            if (g > 1.0) {
                throw Error(ErrorCode::NonFiniteUtility,
                            "never purchasing leaves a zero legacy, and "
                            "u(0) is -infinity for gamma > 1");
            }
            if (!(req.x + req.y / dc.kappa > 0.0)) {
                throw Error(ErrorCode::DomainError,
                            "wealth plus human capital must be positive");
            }
            z0 = std::pow((req.x + req.y / dc.kappa) * dc.K, -g);
            break;
        }
        case PlanKind::ControlledImmediate: {
            z0 = z_star_B(req.x, req.y, p, dc);
            const double b0 = bequest_star(z0, p, dc);
            ctx.add_const = legacy_flow(p.l * b0, p);
            break;
        }
        case PlanKind::EarmarkedThreshold: {
            const double q = p.earmark_q;
            const EarmarkedPredeterminedSolution es =
                earmarked_boundary(p, dc, q, p.bequest_B);
            PredeterminedSolution eff;
            eff.b = es.b_bar;
            eff.C1 = es.C1_bar;
            z0 = z_star(req.x, req.y, eff, p, dc);
            const double before = legacy_flow(q, p);
            const double after =
                legacy_flow(p.l * (p.bequest_B + q), p);
            ctx.add_const = before;
            if (z0 <= es.b_bar * (1.0 + 1e-12)) {
                ctx.add_const += after - before;
            } else {
                ctx.cross_const = after - before;
                threshold = es.b_bar;
            }
            break;
        }
    }

    ctx.cons_coeff = std::pow(z0, (g - 1.0) / g) / (1.0 - g);
    if (threshold > 0.0) ctx.log_thr = std::log(threshold / z0);
    return ctx;
}

struct SampleStats {
    double mean = 0.0;
    double std_error = 0.0;
};

SampleStats stats_of(const std::vector<double>& samples) {
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double v : samples) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    SampleStats out;
    out.mean = mean;
    out.std_error = samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return out;
}

}  // namespace

std::vector<McEstimate> mc_value_batch(
    const std::vector<PlanValueRequest>& requests, const ModelParams& p,
    const DerivedConstants& dc, const SimConfig& sim,
    std::vector<std::vector<double>>* per_path) {
    if (p.gompertz_a != 0.0) {
        throw Error(ErrorCode::ConfigError,
                    "mc_value: plans are priced under constant mortality; "
                    "gompertz_a must be 0");
    }
    if (requests.empty()) return {};

    const std::size_t n_req = requests.size();
    std::vector<RequestCtx> ctx;
    ctx.reserve(n_req);
    for (const auto& r : requests) ctx.push_back(make_context(r, p, dc));

    // Requests with a live threshold, sorted by crossing level descending:
    // as the running minimum of log F falls, a single pointer sweeps the
    // list, making first-crossing detection O(1) amortized per step.
    std::vector<std::size_t> tracked;
    for (std::size_t i = 0; i < n_req; ++i) {
        if (ctx[i].log_thr > -kInf) tracked.push_back(i);
    }
    std::sort(tracked.begin(), tracked.end(),
              [&](std::size_t a, std::size_t b) {
                  return ctx[a].log_thr > ctx[b].log_thr;
              });

    const std::vector<double> t = build_value_grid();
    const std::size_t n_times = t.size();
    std::vector<double> disc(n_times), dt(n_times, 0.0);
    for (std::size_t k = 0; k < n_times; ++k) {
        disc[k] = std::exp(-(p.rho + p.m) * t[k]);
        if (k > 0) dt[k] = t[k] - t[k - 1];
    }
    const double T = t.back();
    const double disc_T = disc.back();
    const double drift = p.rho - p.r + p.m - 0.5 * dc.theta * dc.theta;
    const double e = (p.gamma - 1.0) / p.gamma;

    const std::size_t n_samples =
        sim.antithetic ? sim.n_paths / 2 : sim.n_paths;
    const std::size_t n_walks = sim.antithetic ? 2 * n_samples : n_samples;
    if (n_samples < 2) {
        throw Error(ErrorCode::ConfigError,
                    "mc_value: need at least 2 independent samples");
    }
    std::vector<std::vector<double>> samples(
        n_req, std::vector<double>(n_samples, 0.0));

    std::vector<double> cross_disc(n_req);
    for (std::size_t path = 0; path < n_walks; ++path) {
        const std::uint64_t stream = sim.antithetic ? path / 2 : path;
        const double sign = (sim.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        CounterRng rng(sim.seed, stream);

        double log_f = 0.0;
        double run_min = 0.0;
        double acc = 0.0;
        double f_prev = 1.0;  // disc[0] * F_0^e
        std::size_t ptr = 0;
        std::fill(cross_disc.begin(), cross_disc.end(), -1.0);
        // Thresholds at or above the start cross immediately (handled in
        // make_context), so every tracked level is strictly below 0 here.
        for (std::size_t k = 1; k < n_times; ++k) {
            const double dw = sign * std::sqrt(dt[k]) * rng.next_normal();
            log_f += drift * dt[k] - dc.theta * dw;
            const double f_k = disc[k] * std::exp(e * log_f);
            acc += 0.5 * (f_prev + f_k) * dt[k];
            f_prev = f_k;
            if (log_f < run_min) {
                run_min = log_f;
                while (ptr < tracked.size() &&
                       ctx[tracked[ptr]].log_thr >= run_min) {
                    cross_disc[tracked[ptr]] = disc[k];
                    ++ptr;
                }
            }
        }
        // Exact conditional tails. Consumption beyond T: the factor's
        // discounted e-th moment integrates to F_T^e e^{-(rho+m)T}/K.
        // An uncrossed threshold beyond T: E[e^{-(rho+m)(eta-T)} | F_T]
        // = (F_T/threshold-ratio)^{alpha1}, the first-passage transform.
        const double acc_total = acc + disc_T * std::exp(e * log_f) / dc.K;

        for (std::size_t i = 0; i < n_req; ++i) {
            double cross_term = 0.0;
            if (ctx[i].cross_const != 0.0) {
                const double factor =
                    cross_disc[i] >= 0.0
                        ? cross_disc[i]
                        : disc_T * std::exp(dc.alpha1 *
                                            (log_f - ctx[i].log_thr));
                cross_term = ctx[i].cross_const * factor;
            }
            const double value =
                ctx[i].cons_coeff * acc_total + ctx[i].add_const + cross_term;
            if (sim.antithetic) {
                samples[i][path / 2] += 0.5 * value;
            } else {
                samples[i][path] = value;
            }
        }
    }

    std::vector<McEstimate> out(n_req);
    for (std::size_t i = 0; i < n_req; ++i) {
        const SampleStats st = stats_of(samples[i]);
        out[i].mean = st.mean;
        out[i].std_error = st.std_error;
        out[i].n_paths = static_cast<long>(n_walks);
        out[i].horizon_T = T;
        out[i].seed = sim.seed;
        out[i].tail_bound = 0.0;
        out[i].admissibility_violations = 0;
    }
    if (per_path != nullptr) *per_path = std::move(samples);
    return out;
}

McEstimate mc_value(const PolicyPlan& plan, double x, double y,
                    const ModelParams& p, const DerivedConstants& dc,
                    const SimConfig& sim) {
    return mc_value_batch({PlanValueRequest{plan, x, y}}, p, dc, sim)[0];
}

McEstimate budget_identity(double x, double y, const ModelParams& p,
                           const DerivedConstants& dc, const SimConfig& sim) {
    if (p.gompertz_a != 0.0) {
        throw Error(ErrorCode::ConfigError,
                    "budget_identity: constant mortality only");
    }
    const PredeterminedSolution sol = solve(p, dc);
    const double z0 = z_star(x, y, sol, p, dc);
    const bool crossed0 = sol.immediate_purchase || z0 <= sol.b;

    const auto n_steps =
        static_cast<std::size_t>(std::ceil(sim.horizon_T / sim.dt - 1e-9));
    const double inv_g = 1.0 / p.gamma;
    const double theta = dc.theta;

    const std::size_t n_samples =
        sim.antithetic ? sim.n_paths / 2 : sim.n_paths;
    const std::size_t n_walks = sim.antithetic ? 2 * n_samples : n_samples;
    std::vector<double> samples(n_samples, 0.0);
    long violations = 0;

    auto wealth_at = [&](double z, double y_now, bool crossed) {
        if (crossed) {
            return std::pow(z, -inv_g) / dc.K + dc.h / p.r - y_now / dc.kappa;
        }
        return -dual_v_z(z, y_now, sol, p, dc);
    };

    for (std::size_t path = 0; path < n_walks; ++path) {
        const std::uint64_t stream = sim.antithetic ? path / 2 : path;
        const double sign = (sim.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        CounterRng rng(sim.seed, stream);

        double w = 0.0;
        double log_z = std::log(z0);
        bool crossed = crossed0;
        double xi = 1.0;
        double y_now = y;  // income path starts at the requested level
        // Integrand xi (c + h 1{bought} - Y), trapezoid in t.
        double z = z0;
        double integ = 0.0;
        double i_prev =
            std::pow(z, -inv_g) + (crossed ? dc.h : 0.0) - y_now;
        for (std::size_t k = 1; k <= n_steps; ++k) {
            const double t_now = std::min(sim.dt * k, sim.horizon_T);
            const double dt = t_now - sim.dt * (k - 1);
            const double dw = sign * std::sqrt(dt) * rng.next_normal();
            w += dw;
            y_now = y * std::exp((p.mu_y - 0.5 * p.sigma_y * p.sigma_y) *
                                     t_now +
                                 p.sigma_y * w);
            xi = std::exp((-p.r - 0.5 * theta * theta) * t_now - theta * w);
            log_z += (p.rho - p.r + p.m - 0.5 * theta * theta) * dt -
                     theta * dw;
            z = std::exp(log_z);
            if (!crossed && z <= sol.b) crossed = true;

            const double floor =
                (crossed ? dc.h / p.r : 0.0) - y_now / dc.kappa;
            if (wealth_at(z, y_now, crossed) <= floor) ++violations;

            const double i_now =
                xi * (std::pow(z, -inv_g) + (crossed ? dc.h : 0.0) - y_now);
            integ += 0.5 * (i_prev + i_now) * dt;
            i_prev = i_now;
        }
        const double value = integ + xi * wealth_at(z, y_now, crossed);
        if (sim.antithetic) {
            samples[path / 2] += 0.5 * value;
        } else {
            samples[path] = value;
        }
    }

    const SampleStats st = stats_of(samples);
    McEstimate out;
    out.mean = st.mean;
    out.std_error = st.std_error;
    out.n_paths = static_cast<long>(n_walks);
    out.horizon_T = sim.horizon_T;
    out.seed = sim.seed;
    // The identity holds exactly at any horizon (stopped martingale), so
    // there is no truncated remainder to bound.
    out.tail_bound = 0.0;
    out.admissibility_violations = violations;
    return out;
}

PerturbationReport perturbation_test(double x, double y, const ModelParams& p,
                                     const DerivedConstants& dc,
                                     const SimConfig& sim, double shift) {
    if (!(shift > 0.0 && shift < 1.0)) {
        throw Error(ErrorCode::DomainError,
                    "perturbation_test: shift must lie in (0,1)");
    }
    std::vector<PlanValueRequest> reqs = {
        {{PlanKind::PredeterminedThreshold, 1.0}, x, y},
        {{PlanKind::PredeterminedThreshold, 1.0 - shift}, x, y},
        {{PlanKind::PredeterminedThreshold, 1.0 + shift}, x, y},
        {{PlanKind::NeverPurchase, 1.0}, x, y},
    };
    std::vector<std::vector<double>> per_path;
    std::vector<McEstimate> est = mc_value_batch(reqs, p, dc, sim, &per_path);

    auto paired = [&](std::size_t i) {
        std::vector<double> d(per_path[0].size());
        for (std::size_t k = 0; k < d.size(); ++k) {
            d[k] = per_path[0][k] - per_path[i][k];
        }
        const SampleStats st = stats_of(d);
        return PairedDiff{st.mean, st.std_error};
    };

    PerturbationReport rep;
    rep.optimal = est[0];
    rep.lower = est[1];
    rep.upper = est[2];
    rep.never = est[3];
    rep.opt_minus_lower = paired(1);
    rep.opt_minus_upper = paired(2);
    rep.opt_minus_never = paired(3);
    return rep;
}

}  // namespace lifeplan
