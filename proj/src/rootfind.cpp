#include "lifeplan/rootfind.hpp"

#include <cmath>
#include <string>

#include "lifeplan/errors.hpp"

namespace lifeplan {

namespace {

bool opposite_signs(double a, double b) {
    return (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0);
}

}  // namespace

double bracketed_newton(const std::function<ValueSlope(double)>& f, double lo,
                        double hi, double rel_tol, double abs_tol,
                        int max_iter) {
    if (lo > hi) std::swap(lo, hi);
    double flo = f(lo).value;
    double fhi = f(hi).value;
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (!opposite_signs(flo, fhi)) {
        throw Error(ErrorCode::NoRoot, "interval does not bracket a root");
    }

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const ValueSlope vs = f(x);
        if (vs.value == 0.0) return x;
        // Shrink the bracket around the sign change.
        if (opposite_signs(flo, vs.value)) {
            hi = x;
            fhi = vs.value;
        } else {
            lo = x;
            flo = vs.value;
        }
        const double tol = rel_tol * std::abs(x) + abs_tol;
        if (hi - lo <= tol) return 0.5 * (lo + hi);

        double next = x - vs.value / vs.slope;
        // Reject Newton steps that leave the bracket or stall; bisect instead.
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= tol) return next;
        x = next;
    }
    throw Error(ErrorCode::NoConvergence,
                "bracketed Newton iteration exhausted its budget");
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double rel_tol, double abs_tol, int max_iter) {
    if (lo > hi) std::swap(lo, hi);
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (!opposite_signs(flo, fhi)) {
        throw Error(ErrorCode::NoRoot, "interval does not bracket a root");
    }
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (opposite_signs(flo, fm)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
        if (hi - lo <= rel_tol * std::abs(mid) + abs_tol) {
            return 0.5 * (lo + hi);
        }
    }
    throw Error(ErrorCode::NoConvergence, "bisection exhausted its budget");
}

std::pair<double, double> grow_bracket_up(
    const std::function<double(double)>& f, double guess, double factor,
    int max_steps) {
    double lo = guess;
    double flo = f(lo);
    if (flo == 0.0) return {lo, lo};
    double hi = lo;
    for (int it = 0; it < max_steps; ++it) {
        hi *= factor;
        const double fhi = f(hi);
        if (fhi == 0.0 || opposite_signs(flo, fhi)) return {lo, hi};
        lo = hi;
        flo = fhi;
    }
    throw Error(ErrorCode::NoRoot,
                "no sign change found while expanding the bracket upward");
}

double golden_min(const std::function<double(double)>& f, double lo,
                  double hi, double rel_tol, int max_iter) {
    constexpr double kInvPhi = 0.6180339887498949;  // 1/phi
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < max_iter; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
        if (b - a <= rel_tol * (std::abs(a) + std::abs(b)) + 1e-300) break;
    }
    return 0.5 * (a + b);
}

double log_grid_min_value(const std::function<double(double)>& f,
                          double z_lo, double z_hi, int n_scan) {
    if (!(z_lo > 0.0) || !(z_hi > z_lo) || n_scan < 3) {
        throw Error(ErrorCode::DomainError,
                    "log_grid_min_value: need 0 < z_lo < z_hi, n_scan >= 3");
    }
    const double llo = std::log(z_lo);
    const double lhi = std::log(z_hi);
    auto g = [&](double lz) { return f(std::exp(lz)); };
    int best = 0;
    double best_val = g(llo);
    for (int i = 1; i < n_scan; ++i) {
        const double v = g(llo + (lhi - llo) * i / (n_scan - 1));
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double step = (lhi - llo) / (n_scan - 1);
    const double a = llo + step * std::max(0, best - 1);
    const double b = llo + step * std::min(n_scan - 1, best + 1);
    return g(golden_min(g, a, b, 1e-12));
}

}  // namespace lifeplan
