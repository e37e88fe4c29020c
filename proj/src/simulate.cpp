#include "lifeplan/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lifeplan/csvio.hpp"
#include "lifeplan/rng.hpp"

namespace lifeplan {

PathBundle simulate_paths(const ModelParams& p, const DerivedConstants& dc,
                          const SimConfig& sim, double z0) {
    if (sim.n_paths < 1 || sim.dt <= 0.0 || sim.horizon_T <= 0.0) {
        throw Error(ErrorCode::DomainError, "invalid simulation request");
    }
    const auto n_steps =
        static_cast<std::size_t>(std::ceil(sim.horizon_T / sim.dt - 1e-9));
    const std::size_t n_times = n_steps + 1;

    PathBundle out;
    out.z0 = z0;
    out.n_paths = sim.n_paths;
    out.t.resize(n_times);
    for (std::size_t k = 0; k < n_times; ++k) {
        out.t[k] = std::min(static_cast<double>(k) * sim.dt, sim.horizon_T);
    }
    const std::size_t total = sim.n_paths * n_times;
    out.W.resize(total);
    out.Y.resize(total);
    out.xi.resize(total);
    out.Z.resize(total);
    const bool aged = p.gompertz_a > 0.0;
    if (aged) out.M.resize(total);

    const double theta = dc.theta;
    for (std::size_t path = 0; path < sim.n_paths; ++path) {
        const std::uint64_t stream = sim.antithetic ? path / 2 : path;
        const double sign = (sim.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        CounterRng rng(sim.seed, stream);

        double w = 0.0;
        const std::size_t base = path * n_times;
        out.W[base] = 0.0;
        out.Y[base] = p.y0;
        out.xi[base] = 1.0;
        out.Z[base] = z0;
        if (aged) out.M[base] = p.m;

        for (std::size_t k = 1; k < n_times; ++k) {
            const double t_prev = out.t[k - 1];
            const double t_now = out.t[k];
            const double dt = t_now - t_prev;
            const double dw = sign * std::sqrt(dt) * rng.next_normal();
            w += dw;
            // Exact integral of the mortality force over the step.
            const double int_m =
                aged ? p.m / p.gompertz_a *
                           (std::exp(p.gompertz_a * t_now) -
                            std::exp(p.gompertz_a * t_prev))
                     : p.m * dt;
            out.W[base + k] = w;
            out.Y[base + k] =
                p.y0 * std::exp((p.mu_y - 0.5 * p.sigma_y * p.sigma_y) * t_now +
                                p.sigma_y * w);
            out.xi[base + k] =
                std::exp((-p.r - 0.5 * theta * theta) * t_now - theta * w);
            const double log_z_prev = std::log(out.Z[base + k - 1]);
            out.Z[base + k] =
                std::exp(log_z_prev + (p.rho - p.r - 0.5 * theta * theta) * dt +
                         int_m - theta * dw);
            if (aged) out.M[base + k] = p.m * std::exp(p.gompertz_a * t_now);
        }
    }
    return out;
}

void write_paths_csv(const PathBundle& bundle, const std::string& path) {
    const bool aged = !bundle.M.empty();
    CsvWriter csv(path, aged ? std::vector<std::string>{"t", "path_id", "W",
                                                        "Y", "xi", "Z", "M"}
                             : std::vector<std::string>{"t", "path_id", "W",
                                                        "Y", "xi", "Z"});
    for (std::size_t p = 0; p < bundle.n_paths; ++p) {
        for (std::size_t k = 0; k < bundle.n_times(); ++k) {
            const std::size_t i = bundle.at(p, k);
            std::vector<std::string> row{
                fmt9(bundle.t[k]), std::to_string(p), fmt9(bundle.W[i]),
                fmt9(bundle.Y[i]), fmt9(bundle.xi[i]), fmt9(bundle.Z[i])};
            if (aged) row.push_back(fmt9(bundle.M[i]));
            csv.row(row);
        }
    }
}

}  // namespace lifeplan
