#include "lifeplan/gompertz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lifeplan/earmarked.hpp"
#include "lifeplan/errors.hpp"
#include "lifeplan/predetermined.hpp"
#include "lifeplan/rng.hpp"

namespace lifeplan {

namespace {

constexpr double kWeightCut = 1e-6;  // deterministic-discount truncation
constexpr double kInf = std::numeric_limits<double>::infinity();

double int_mortality(double m, double a, double t) {
    return a > 0.0 ? m / a * (std::exp(a * t) - 1.0) : m * t;
}

// Deterministic discount weight e^{-rho t - int_0^t M}.
double weight_at(const ModelParams& p, double m, double t) {
    return std::exp(-p.rho * t - int_mortality(m, p.gompertz_a, t));
}

// Shared time grid: fine steps while purchases and discounting are active,
// geometric stretching afterwards. The stretch is capped by the local decay
// scale of the surviving integrand, max over the nodes whose weight is still
// above the truncation threshold: when the mortality force grows past the
// interest rate the integral's mass concentrates just before each node's
// weight cut, and an unresolved tail there distorts every node value.
std::vector<double> build_time_grid(const ModelParams& p,
                                    const std::vector<double>& m_grid) {
    std::vector<double> t{0.0};
    const double fine_dt = 1.0 / 16.0;
    double dt = fine_dt;
    while (t.back() < 5000.0) {
        const double now = t.back();
        double force_alive = -1.0;
        for (double m : m_grid) {
            if (weight_at(p, m, now) >= kWeightCut) {
                force_alive = std::max(
                    force_alive, m * std::exp(p.gompertz_a * now));
            }
        }
        if (force_alive < 0.0) break;  // every node fully discounted
        const double cap = 0.125 / (p.rho + force_alive);
        const double grow = now < 40.0 ? fine_dt : dt * 1.08;
        dt = std::min(grow, cap);
        t.push_back(now + dt);
    }
    return t;
}

// Stored Brownian kernel u = e^{-theta W_t} per (path, time), float
// precision: evaluating the residual at a new start value or indicator
// curve then needs no fresh randomness, which keeps the whole fixed-point
// iteration a deterministic map on common random numbers.
struct BrownianKernel {
    std::vector<double> t;
    std::vector<float> u;  // n_paths x t.size()
    std::size_t n_paths = 0;

    std::size_t stride() const { return t.size(); }
};

BrownianKernel build_kernel(const ModelParams& p, const DerivedConstants& dc,
                            const SimConfig& sim,
                            const std::vector<double>& m_grid) {
    BrownianKernel k;
    k.t = build_time_grid(p, m_grid);
    const std::size_t n_samples =
        sim.antithetic ? sim.n_paths / 2 : sim.n_paths;
    k.n_paths = sim.antithetic ? 2 * n_samples : n_samples;
    if (k.n_paths < 2) {
        throw Error(ErrorCode::ConfigError,
                    "boundary solver: need at least 2 paths");
    }
    const std::size_t n_times = k.t.size();
    k.u.resize(k.n_paths * n_times);
    for (std::size_t path = 0; path < k.n_paths; ++path) {
        const std::uint64_t stream = sim.antithetic ? path / 2 : path;
        const double sign = (sim.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        CounterRng rng(sim.seed, stream);
        double w = 0.0;
        float* row = k.u.data() + path * n_times;
        row[0] = 1.0f;
        for (std::size_t j = 1; j < n_times; ++j) {
            const double dt = k.t[j] - k.t[j - 1];
            w += sign * std::sqrt(dt) * rng.next_normal();
            row[j] = static_cast<float>(std::exp(-dc.theta * w));
        }
    }
    return k;
}

// Per-mortality-node deterministic arrays on a prefix of the shared grid.
// Z_t = z0 * eg_t * u_t with eg deterministic, so one stored kernel serves
// every start value and candidate curve.
//
// The grid is cut where the survival weight is exhausted, but the premium
// leg of the integrand only decays at the interest rate: E[Z_t] M B weight
// = z0 M B e^{-r t}, so for a constant force the cut would drop an
// e^{-r T} / r share of that leg — orders of magnitude above the Monte
// Carlo error when the force is large. With a constant force the remainder
// has a closed form conditional on Z_T (the threshold is then a constant
// and Z drifts up, so the indicator is asymptotically certain):
//     E[ int_T^inf e^{-(rho+m)t} (m du + Z_t m B) dt | Z_T ]
//         = e^{-(rho+m)T} (m du / (rho+m) + Z_T m B / r),
// which tail_const and tail_lin append per path, keeping the whole residual
// linear in the start value. Misclassified tail paths (Z below the constant
// threshold) are worth at most weight_T m (|du| + beta B) / (rho+m) — far
// below one Monte Carlo standard error. A growing force keeps the
// truncated definition (tail_* = 0): past the cut the premium leg grows
// like e^{(a-r)t} and no finite completion exists once a >= r.
struct NodeKernel {
    std::size_t len = 0;
    std::vector<double> mk;       // force level M_t
    std::vector<double> eg;       // exp((rho - r - theta^2/2) t + int M)
    std::vector<double> c_const;  // trapezoid * weight * M * (u(q)-u(l(q+B)))
    std::vector<double> c_lin;    // trapezoid * weight * M * B
    double tail_const = 0.0;      // closed-form tail, flow part
    double tail_lin = 0.0;        // closed-form tail, coefficient of Z_T
};

NodeKernel build_node(const ModelParams& p, const DerivedConstants& dc,
                      const std::vector<double>& t, double m_node) {
    NodeKernel n;
    std::size_t len = t.size();
    for (std::size_t j = 1; j < t.size(); ++j) {
        if (weight_at(p, m_node, t[j]) < kWeightCut) {
            len = j + 1;  // keep the first sub-threshold point as endpoint
            break;
        }
    }
    n.len = len;
    n.mk.resize(len);
    n.eg.resize(len);
    n.c_const.resize(len);
    n.c_lin.resize(len);
    const double du = crra_u(p.earmark_q, p.gamma) -
                      crra_u(p.l * (p.earmark_q + p.bequest_B), p.gamma);
    const double half_var = 0.5 * dc.theta * dc.theta;
    for (std::size_t j = 0; j < len; ++j) {
        const double im = int_mortality(m_node, p.gompertz_a, t[j]);
        n.mk[j] = m_node * std::exp(p.gompertz_a * t[j]);
        n.eg[j] = std::exp((p.rho - p.r - half_var) * t[j] + im);
        const double w =
            0.5 * ((j + 1 < len ? t[j + 1] : t[j]) - (j > 0 ? t[j - 1] : t[j]));
        const double dw = w * std::exp(-p.rho * t[j] - im) * n.mk[j];
        n.c_const[j] = dw * du;
        n.c_lin[j] = dw * p.bequest_B;
    }
    if (p.gompertz_a == 0.0) {
        const double wt = weight_at(p, m_node, t[len - 1]);
        n.tail_const = wt * m_node * du / (p.rho + m_node);
        n.tail_lin = wt * m_node * p.bequest_B / p.r;
    }
    return n;
}

// Residual of the integral equation with start value b and the indicator
// held at the tabulated curve beta (beta[j] = candidate at M_{t_j}).
// Returns the path mean; per-path sums go to `per_path` when requested.
double residual_mean(const BrownianKernel& kernel, const NodeKernel& node,
                     const std::vector<double>& beta, double b,
                     std::vector<double>* per_path) {
    const std::size_t len = node.len;
    std::vector<double> thr(len), lin(len);
    for (std::size_t j = 0; j < len; ++j) {
        const double scale = b * node.eg[j];
        thr[j] = beta[j] / scale;
        lin[j] = node.c_lin[j] * scale;
    }
    const double tail_lin = node.tail_lin * b * node.eg[len - 1];
    if (per_path != nullptr) per_path->assign(kernel.n_paths, 0.0);
    double total = 0.0;
    for (std::size_t path = 0; path < kernel.n_paths; ++path) {
        const float* row = kernel.u.data() + path * kernel.stride();
        double acc = node.tail_const + tail_lin * row[len - 1];
        for (std::size_t j = 0; j < len; ++j) {
            const double u = row[j];
            if (u >= thr[j]) acc += node.c_const[j] + lin[j] * u;
        }
        total += acc;
        if (per_path != nullptr) (*per_path)[path] = acc;
    }
    return total / static_cast<double>(kernel.n_paths);
}

// One node update. The integral equation is invariant under jointly scaling
// the start value and the whole threshold curve, so the update freezes the
// indicator set at the previous curve's *shape* — thresholds
// beta(M_t) / (beta(m_node) * eg_t) do not move with the candidate — and the
// residual in the remaining scale b is exactly linear:
//     R(b) = S_c + b * S_l,  S_l > 0.
// Its root -S_c/S_l is the node's new value. Freezing the indicators removes
// the crossing-margin terms that make a direct root search on the empirical
// residual ill-conditioned, and when the force of mortality is constant the
// frozen thresholds 1/eg_t are already exact, so a single sweep lands on the
// constant-force answer from any start.
double scale_root(const BrownianKernel& kernel, const NodeKernel& node,
                  const std::vector<double>& beta, double b_node) {
    const std::size_t len = node.len;
    std::vector<double> thr(len);
    for (std::size_t j = 0; j < len; ++j) {
        thr[j] = beta[j] / (b_node * node.eg[j]);
    }
    double s_const = 0.0;
    double s_lin = 0.0;
    const double tail_lin = node.tail_lin * node.eg[len - 1];
    for (std::size_t path = 0; path < kernel.n_paths; ++path) {
        const float* row = kernel.u.data() + path * kernel.stride();
        s_const += node.tail_const;
        s_lin += tail_lin * row[len - 1];
        for (std::size_t j = 0; j < len; ++j) {
            const double u = row[j];
            if (u >= thr[j]) {
                s_const += node.c_const[j];
                s_lin += node.c_lin[j] * node.eg[j] * u;
            }
        }
    }
    if (!(s_lin > 0.0)) {
        throw Error(ErrorCode::DegenerateBoundary,
                    "boundary solver: no simulated path reaches the "
                    "purchase region");
    }
    return -s_const / s_lin;
}

void validate_gompertz_inputs(const ModelParams& p) {
    if (p.gompertz_a < 0.0) {
        throw Error(ErrorCode::DomainError,
                    "mortality growth rate must be >= 0");
    }
    if (p.gamma > 1.0 && !(p.earmark_q > 0.0)) {
        throw Error(ErrorCode::DegenerateBoundary,
                    "gamma > 1 with no reserved amount leaves u(0) = -inf: "
                    "purchase is immediate and no boundary curve exists");
    }
    if (!(p.bequest_B > 0.0)) {
        throw Error(ErrorCode::DomainError, "payout B must be positive");
    }
    if (!(crra_u(p.l * (p.earmark_q + p.bequest_B), p.gamma) >
          crra_u(p.earmark_q, p.gamma))) {
        throw Error(ErrorCode::DegenerateBoundary,
                    "insuring does not improve the legacy");
    }
}

// Constant-mortality threshold at force level m, used to seed the solver.
double analytic_constant_m(const ModelParams& p, double m) {
    ModelParams pm = p;
    pm.m = m;
    pm.gompertz_a = 0.0;
    const DerivedConstants dcm = derive_constants(pm);
    if (p.earmark_q > 0.0) {
        return earmarked_boundary(pm, dcm, p.earmark_q, p.bequest_B).b_bar;
    }
    return solve(pm, dcm).b;
}

}  // namespace

double MortalityBoundary::at(double m) const {
    if (m_grid.empty() || m_grid.size() != b_values.size()) {
        throw Error(ErrorCode::DomainError,
                    "boundary curve has no grid values");
    }
    if (!(m > 0.0)) {
        throw Error(ErrorCode::DomainError, "force level must be positive");
    }
    const std::size_t n = m_grid.size();
    if (n == 1) return b_values[0];
    const double lm = std::log(m);
    // Outside the grid: extend the outer segment as a power law, which
    // keeps the extrapolated threshold positive however far the simulated
    // force runs past the last node.
    if (m <= m_grid.front() || m >= m_grid.back()) {
        const std::size_t i = m <= m_grid.front() ? 0 : n - 2;
        const double l0 = std::log(m_grid[i]);
        const double l1 = std::log(m_grid[i + 1]);
        const double s = (lm - l0) / (l1 - l0);
        return std::exp(std::log(b_values[i]) +
                        s * (std::log(b_values[i + 1]) -
                             std::log(b_values[i])));
    }
    const auto it =
        std::upper_bound(m_grid.begin(), m_grid.end(), m) - 1;
    const std::size_t i = static_cast<std::size_t>(it - m_grid.begin());
    const double l0 = std::log(m_grid[i]);
    const double l1 = std::log(m_grid[i + 1]);
    const double s = (lm - l0) / (l1 - l0);
    return b_values[i] + s * (b_values[i + 1] - b_values[i]);
}

std::vector<double> log_spaced_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) {
        throw Error(ErrorCode::ConfigError,
                    "log_spaced_grid: need 0 < lo < hi and n >= 2");
    }
    std::vector<double> g(n);
    const double llo = std::log(lo);
    const double step = (std::log(hi) - llo) / (n - 1);
    for (int i = 0; i < n; ++i) g[i] = std::exp(llo + step * i);
    g.back() = hi;
    return g;
}

PathBundle simulate_ZM(const ModelParams& p, const DerivedConstants& dc,
                       double z0, const SimConfig& sim) {
    if (p.gompertz_a < 0.0) {
        throw Error(ErrorCode::DomainError,
                    "mortality growth rate must be >= 0");
    }
    return simulate_paths(p, dc, sim, z0);
}

McEstimate boundary_residual(const MortalityBoundary& candidate, double m,
                             const ModelParams& p, const DerivedConstants& dc,
                             const SimConfig& sim, double z_start) {
    validate_gompertz_inputs(p);
    if (!(m > 0.0)) {
        throw Error(ErrorCode::DomainError, "force level must be positive");
    }
    const BrownianKernel kernel = build_kernel(p, dc, sim, {m});
    const NodeKernel node = build_node(p, dc, kernel.t, m);
    std::vector<double> beta(node.len);
    for (std::size_t j = 0; j < node.len; ++j) {
        beta[j] = candidate.at(node.mk[j]);
    }
    const double z0 = z_start > 0.0 ? z_start : candidate.at(m);
    if (!(z0 >= 0.0)) {
        throw Error(ErrorCode::DomainError, "start value must be >= 0");
    }

    std::vector<double> per_path;
    const double mean = residual_mean(kernel, node, beta, z0, &per_path);
    double ss = 0.0;
    for (double v : per_path) ss += (v - mean) * (v - mean);
    const auto n = static_cast<double>(per_path.size());

    McEstimate out;
    out.mean = mean;
    out.std_error = std::sqrt(ss / (n - 1.0) / n);
    out.n_paths = static_cast<long>(kernel.n_paths);
    out.horizon_T = kernel.t[node.len - 1];
    out.seed = sim.seed;
    // Expected-value bound on the truncation error. With a constant force
    // the tail past the cut is appended in closed form and only the
    // misclassified part remains: paths sitting below the (constant)
    // threshold there, worth at most the threshold itself. With a growing
    // force the whole tail is dropped; the legacy-flow part decays with the
    // weight and the Z-linear part like M_t e^{-r t}, integrable only while
    // the mortality growth stays below the interest rate — beyond that the
    // truncated evaluation *defines* the estimator and the bound is
    // reported as infinite.
    const double T = out.horizon_T;
    const double du_abs =
        std::abs(crra_u(p.earmark_q, p.gamma) -
                 crra_u(p.l * (p.earmark_q + p.bequest_B), p.gamma));
    double tail;
    if (p.gompertz_a == 0.0) {
        tail = weight_at(p, m, T) * m *
               (du_abs + candidate.at(m) * p.bequest_B) / (p.rho + m);
    } else if (p.gompertz_a < p.r) {
        tail = du_abs * weight_at(p, m, T) +
               z0 * p.bequest_B * m * std::exp((p.gompertz_a - p.r) * T) /
                   (p.r - p.gompertz_a);
    } else {
        tail = kInf;
    }
    out.tail_bound = tail;
    return out;
}

MortalityBoundary solve_boundary(const ModelParams& p,
                                 const DerivedConstants& dc,
                                 const std::vector<double>& m_grid,
                                 int max_iters, double tol,
                                 const SimConfig& sim,
                                 std::vector<MortalityBoundary>* trace) {
    validate_gompertz_inputs(p);
    if (m_grid.size() < 1 ||
        !std::is_sorted(m_grid.begin(), m_grid.end()) ||
        !(m_grid.front() > 0.0)) {
        throw Error(ErrorCode::ConfigError,
                    "solve_boundary: mortality grid must be positive and "
                    "increasing");
    }
    if (max_iters < 1 || !(tol > 0.0)) {
        throw Error(ErrorCode::ConfigError,
                    "solve_boundary: need max_iters >= 1 and tol > 0");
    }

    const BrownianKernel kernel = build_kernel(p, dc, sim, m_grid);
    std::vector<NodeKernel> nodes;
    nodes.reserve(m_grid.size());
    for (double m : m_grid) nodes.push_back(build_node(p, dc, kernel.t, m));

    MortalityBoundary cur;
    cur.m_grid = m_grid;
    cur.b_values.resize(m_grid.size());
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        // The constant-force threshold at the node's current level is the
        // natural start: the curve's shape barely changes across sweeps.
        cur.b_values[i] = analytic_constant_m(p, m_grid[i]);
    }

    double movement = kInf;
    for (int iter = 0; iter < max_iters; ++iter) {
        // All nodes update against the same previous curve.
        std::vector<double> next(cur.b_values.size());
        for (std::size_t i = 0; i < m_grid.size(); ++i) {
            const NodeKernel& node = nodes[i];
            std::vector<double> beta(node.len);
            for (std::size_t j = 0; j < node.len; ++j) {
                beta[j] = cur.at(node.mk[j]);
            }
            next[i] = scale_root(kernel, node, beta, cur.b_values[i]);
        }
        movement = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) {
            movement = std::max(
                movement, std::abs(std::log(next[i] / cur.b_values[i])));
        }
        cur.b_values = next;
        if (trace != nullptr) trace->push_back(cur);
        if (movement < tol) return cur;
    }
    throw Error(ErrorCode::NoConvergence,
                "solve_boundary: " + std::to_string(max_iters) +
                    " sweeps ended with node movement " +
                    std::to_string(movement) + " above tol " +
                    std::to_string(tol));
}

}  // namespace lifeplan
