#include "lifeplan/dp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lifeplan/controlled.hpp"
#include "lifeplan/errors.hpp"

namespace lifeplan {

DpGrid dp_dual_oracle(const ModelParams& p, const DerivedConstants& dc,
                      const DpConfig& cfg,
                      const std::function<double(double)>& gain) {
    if (!(cfg.z_anchor > 0.0) || !(cfg.span > 1.0) || cfg.n_nodes < 8 ||
        !(cfg.dt > 0.0)) {
        throw Error(ErrorCode::ConfigError,
                    "dp_dual_oracle: need z_anchor > 0, span > 1, "
                    "n_nodes >= 8, dt > 0");
    }
    const int n = cfg.n_nodes;
    const double log_lo = std::log(cfg.z_anchor / cfg.span);
    const double dlog = 2.0 * std::log(cfg.span) / (n - 1);

    DpGrid out;
    out.dt = cfg.dt;
    out.z_grid.resize(n);
    for (int i = 0; i < n; ++i) out.z_grid[i] = std::exp(log_lo + dlog * i);

    // One-step transition: log Z' = log z + drift*dt - theta*sqrt(dt)*N.
    // Replace the lognormal step by a three-point lattice move on integer
    // multiples of the log spacing, matching the displacement's mean and
    // second moment exactly. Landing on nodes avoids interpolation, whose
    // one-signed chord error the fixed point would amplify by ~1/((rho+m)dt).
    const double drift = (p.rho - p.r + p.m - 0.5 * dc.theta * dc.theta);
    const double mean = drift * cfg.dt;
    const double var = dc.theta * dc.theta * cfg.dt;
    const int off0 = static_cast<int>(std::llround(mean / dlog));
    const double mean_res = mean - off0 * dlog;  // residual after base shift
    const double m2_res = var + mean_res * mean_res;
    const int jump =
        std::max(1, static_cast<int>(std::ceil(std::sqrt(m2_res) / dlog)));
    const double arm = jump * dlog;
    const double p_sum = m2_res / (arm * arm);   // p_up + p_dn
    const double p_dif = mean_res / arm;         // p_up - p_dn
    constexpr int kBranches = 3;
    const double prob[kBranches] = {0.5 * (p_sum - p_dif), 1.0 - p_sum,
                                    0.5 * (p_sum + p_dif)};
    const int off[kBranches] = {off0 - jump, off0, off0 + jump};
    double growth[kBranches];  // exp(displacement), for top extrapolation
    for (int j = 0; j < kBranches; ++j) growth[j] = std::exp(off[j] * dlog);
    if (!(prob[0] >= 0.0) || !(prob[1] >= 0.0) || !(prob[2] >= 0.0)) {
        throw Error(ErrorCode::ConfigError,
                    "dp_dual_oracle: drift too strong for the grid spacing; "
                    "refine n_nodes or shrink dt");
    }

    const double beta = std::exp(-(p.rho + p.m) * cfg.dt);
    const double w_dt = (1.0 - beta) / (p.rho + p.m);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = gain(out.z_grid[i]) * w_dt;

    std::vector<double> v(n, 0.0), v_next(n, 0.0);
    const double z_top = out.z_grid[n - 1];
    const double z_sub = out.z_grid[n - 2];
    bool converged = false;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const double slope_top = (v[n - 1] - v[n - 2]) / (z_top - z_sub);
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            double ev = 0.0;
            for (int j = 0; j < kBranches; ++j) {
                const int k = i + off[j];
                double c;
                if (k < 0) {
                    c = 0.0;  // below the grid: deep stop region
                } else if (k >= n) {
                    // Beyond the top node: extend linearly in z.
                    const double z_new = out.z_grid[i] * growth[j];
                    c = v[n - 1] + slope_top * (z_new - z_top);
                } else {
                    c = v[k];
                }
                ev += prob[j] * c;
            }
            const double cand = g[i] + beta * ev;
            v_next[i] = cand > 0.0 ? cand : 0.0;
            diff = std::max(diff, std::abs(v_next[i] - v[i]));
        }
        v.swap(v_next);
        if (diff < cfg.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw Error(ErrorCode::NoConvergence,
                    "dp_dual_oracle: value iteration did not reach tol " +
                        std::to_string(cfg.tol) + " within " +
                        std::to_string(cfg.max_iters) + " sweeps");
    }

    out.value = std::move(v);
    out.boundary = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        if (out.value[i] == 0.0) {
            out.boundary = out.z_grid[i];
            break;
        }
    }
    return out;
}

std::function<double(double)> gain_fixed_payout(const ModelParams& p,
                                                const DerivedConstants& dc) {
    const double flow = p.m * crra_u(p.l * p.bequest_B, p.gamma);
    const double h = dc.h;
    return [h, flow](double z) { return h * z - flow; };
}

std::function<double(double)> gain_fixed_payout_reserved(
    const ModelParams& p, const DerivedConstants& dc, double q) {
    const double flow = p.m * (crra_u(p.l * (p.bequest_B + q), p.gamma) -
                               crra_u(q, p.gamma));
    const double h = dc.h;
    return [h, flow](double z) { return h * z - flow; };
}

std::function<double(double)> gain_chosen_payout(const ModelParams& p,
                                                 const DerivedConstants& dc) {
    const double K = dc.K;
    ModelParams pc = p;
    DerivedConstants dcc = dc;
    return [K, pc, dcc](double z) { return -K * bar_u(z, pc, dcc); };
}

}  // namespace lifeplan
