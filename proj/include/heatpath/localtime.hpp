#pragma once

// Local-time estimation and the level-set geometry built on it: occupation
// histograms (exact occupation identity by construction), Fourier inversion
// of the occupation measure, the Berman integral classifier, Hölder and
// moment-scaling regressions, and box-counting dimension of level sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "heatpath/besov.hpp"
#include "heatpath/errors.hpp"
#include "heatpath/kernels.hpp"
#include "heatpath/quadrature.hpp"
#include "heatpath/rng.hpp"

namespace heatpath::localtime {

// ---------------------------------------------------------------------------
// Occupation histogram
// ---------------------------------------------------------------------------

struct LocalTimeField {
    std::vector<double> xi_centers;          // bin centers, spacing dxi
    double dxi = 0.0;                        // bin width (a power of two)
    std::vector<int> stops;                  // prefix stops as grid indices
    double dt = 0.0;                         // grid step
    std::vector<std::vector<double>> values; // values[bin][stop] = L(xi_b, t_stop)

    /// Row of the field at the bin containing xi, as a series over stops.
    const std::vector<double>& row_at(double xi) const {
        const double lo = xi_centers.front() - 0.5 * dxi;
        auto idx = static_cast<std::int64_t>(std::floor((xi - lo) / dxi));
        if (idx < 0 || idx >= static_cast<std::int64_t>(values.size()))
            throw std::invalid_argument("LocalTimeField: level outside binned range");
        return values[static_cast<std::size_t>(idx)];
    }
};

/// Default bin count for a 2^J + 1 path: ceil((2^J)^{1/3}), floored at 8.
inline int default_bin_count(std::size_t n_points) {
    const double cells = static_cast<double>(n_points - 1);
    return std::max(8, static_cast<int>(std::ceil(std::cbrt(cells))));
}

/// Occupation histogram with left-endpoint step values as bin keys:
///   L(xi_b, t_i) = #{steps < i landing in bin b} * dt / dxi.
/// The bin width is rounded up to a power of two so that
/// sum_b L(xi_b, t) * dxi == t holds exactly in floating point.
inline LocalTimeField occupation_histogram(std::span<const double> path, int n_bins,
                                           std::span<const int> prefix_stops) {
    if (path.size() < 2) throw std::invalid_argument("occupation_histogram: empty path");
    if (n_bins < 8) throw std::invalid_argument("occupation_histogram: need n_bins >= 8");
    const std::size_t n_steps = path.size() - 1;
    double lo = path[0], hi = path[0];
    for (std::size_t i = 0; i < n_steps; ++i) {
        lo = std::min(lo, path[i]);
        hi = std::max(hi, path[i]);
    }
    const double span = std::max(hi - lo, 1e-12);
    const double dxi = std::exp2(std::ceil(std::log2(span / n_bins)));
    const double base = dxi * std::floor(lo / dxi);

    LocalTimeField field;
    field.dxi = dxi;
    field.dt = 1.0 / static_cast<double>(n_steps);
    field.stops.assign(prefix_stops.begin(), prefix_stops.end());
    const int used_bins =
        static_cast<int>(std::floor((hi - base) / dxi)) + 1;
    field.xi_centers.resize(static_cast<std::size_t>(used_bins));
    for (int b = 0; b < used_bins; ++b) field.xi_centers[b] = base + (b + 0.5) * dxi;
    field.values.assign(static_cast<std::size_t>(used_bins),
                        std::vector<double>(field.stops.size(), 0.0));

    std::vector<std::int64_t> counts(static_cast<std::size_t>(used_bins), 0);
    std::size_t step = 0;
    int prev_stop = 0;
    for (std::size_t s = 0; s < field.stops.size(); ++s) {
        const int stop = field.stops[s];
        if (stop < 0 || static_cast<std::size_t>(stop) >= path.size())
            throw std::invalid_argument("occupation_histogram: stop outside grid");
        if (stop < prev_stop)
            throw std::invalid_argument("occupation_histogram: stops must be non-decreasing");
        prev_stop = stop;
        for (; step < static_cast<std::size_t>(stop); ++step) {
            auto b = static_cast<std::size_t>(std::floor((path[step] - base) / dxi));
            if (b >= counts.size()) b = counts.size() - 1;
            ++counts[b];
        }
        const double unit = field.dt / dxi;
        for (int b = 0; b < used_bins; ++b)
            field.values[static_cast<std::size_t>(b)][s] =
                static_cast<double>(counts[static_cast<std::size_t>(b)]) * unit;
    }
    return field;
}

// ---------------------------------------------------------------------------
// Fourier inversion
// ---------------------------------------------------------------------------

struct FourierLocalTime {
    double raw = 0.0;      // plain truncated trapezoid value
    double tapered = 0.0;  // Fejér-tapered value (damps ringing)
};

/// Truncated inversion L(xi, B) = (1/pi) int_0^{umax} sum_s cos(u (f(s)-xi)) ds du
/// with both integrals discretized by the trapezoid rule. Diverges like
/// umax/pi when the path sits exactly at xi on a set of positive measure.
inline FourierLocalTime fourier_local_time(std::span<const double> path, double xi, double b0,
                                           double b1, double u_max = 256.0,
                                           double du = 0.25) {
    if (!(u_max > 0.0) || !(du > 0.0))
        throw std::invalid_argument("fourier_local_time: needs u_max > 0 and du > 0");
    if (path.size() < 2) throw std::invalid_argument("fourier_local_time: empty path");
    const std::size_t n = path.size();
    const double dt = 1.0 / static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::ceil(b0 / dt - 1e-9));
    const auto hi = static_cast<std::size_t>(std::floor(b1 / dt + 1e-9));
    if (hi <= lo || hi >= n) throw std::invalid_argument("fourier_local_time: bad interval");

    const int m_steps = static_cast<int>(std::ceil(u_max / du));
    FourierLocalTime out;
    for (int m = 0; m <= m_steps; ++m) {
        const double u = std::min(m * du, u_max);
        double a = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) {
            const double w = (i == lo || i == hi) ? 0.5 : 1.0;
            a += w * std::cos(u * (path[i] - xi));
        }
        a *= dt;
        const double wu = (m == 0 || m == m_steps) ? 0.5 : 1.0;
        out.raw += wu * a * du;
        out.tapered += wu * a * (1.0 - u / u_max) * du;
    }
    out.raw /= kernels::k_pi;
    out.tapered /= kernels::k_pi;
    return out;
}

// ---------------------------------------------------------------------------
// Berman integral classifier
// ---------------------------------------------------------------------------

struct BermanResult {
    bool diverges = false;
    double exponent = 0.0;  // diagonal singularity exponent of the integrand
    double value = 0.0;     // finite case only
};

/// Integral of [E(X_t - X_s)^2]^{-(p+1)/2} over the section's square. The
/// diagonal exponent is (p+1)/4 along time sections and (p+1)/2 along space
/// sections; the integral is declared divergent when it reaches 1. In the
/// finite case the diagonal singularity is subtracted analytically: with
/// v(u) = c u^g (1 + rho(u)) near the diagonal (g = 1/2 in time with
/// c = sqrt(2/pi), g = 1 in space with c = 1),
///   int_0^U v^{-(p+1)/2} du
///     = c^{-(p+1)/2} [ U^{1-q}/(1-q) + int_0^U u^{-q} (H(u) - 1) du ],
/// where q = g (p+1)/2 and H = (v / (c u^g))^{-(p+1)/2} is smooth with
/// H(0) = 1, so both quadratures see bounded integrands.
inline BermanResult berman_integral(const kernels::SectionKind& section, double p) {
    if (!(p >= 0.0)) throw std::invalid_argument("berman_integral: p must be >= 0");
    kernels::validate(section);
    BermanResult result;

    const bool is_time = std::holds_alternative<kernels::TimeSection>(section);
    if (std::holds_alternative<kernels::SpaceTimeSection>(section))
        throw std::invalid_argument("berman_integral: classify time or space sections");

    result.exponent = is_time ? 0.25 * (p + 1.0) : 0.5 * (p + 1.0);
    if (result.exponent >= 1.0) {
        result.diverges = true;
        return result;
    }

    double lo = 0.0, hi = 1.0, t_fixed = 0.0;
    if (!is_time) {
        const auto& sp = std::get<kernels::SpaceSection>(section);
        lo = sp.a;
        hi = sp.b;
        t_fixed = sp.t;
    }
    const double power = 0.5 * (p + 1.0);
    const double q = result.exponent;
    const double lead = is_time ? std::sqrt(2.0 / kernels::k_pi) : 1.0;
    const double gamma = is_time ? 0.5 : 1.0;

    // The correction integral runs in log coordinates, psi(x) = (H - 1) u^{1-q}
    // at u = e^x: the Jacobian tames both the u -> 0 falloff and the
    // covariance-cancellation roundoff in H (relative noise ~ 5e-16 / v). The
    // lower truncation point keeps the dropped true mass and the noise below
    // a tolerance slice; H - 1 vanishes like u^{3/2} (time) / u (space).
    // psi also has a sqrt cusp at its right endpoint where the conditioning
    // time s = t - u reaches the horizon edge (Var u(s) ~ sqrt s); the
    // tolerance is set so the bisection chain resolving it stays inside the
    // depth cap.
    const double inner_tol = 1e-7;
    const double smooth_exp = (is_time ? 1.5 : 1.0) + 1.0 - q;
    double u_min = std::pow(0.1 * inner_tol, 1.0 / smooth_exp);
    const double noise_exp = 1.0 - gamma - q;
    if (noise_exp < 0.0) {
        const double budget = 0.1 * inner_tol * lead / (power * 5e-16);
        u_min = std::max(u_min, std::pow(budget, 1.0 / noise_exp));
    }

    auto outer = [&](double t) {
        const double span = t - lo;
        if (span <= 0.0) return 0.0;
        // below the cancellation resolution of the increment variance the
        // correction is void; the analytic term alone is accurate there
        if (span <= 1e-8)
            return std::pow(lead, -power) * std::pow(span, 1.0 - q) / (1.0 - q);
        // truncation kept continuous in span, or the outer integrand jumps
        const double u_lo = std::min(u_min, 0.5 * span);
        auto psi = [&](double x) {
            const double u = std::exp(x);
            const double v = is_time ? kernels::increment_var_time(t, t - u)
                                     : kernels::increment_var_space(u, t_fixed);
            const double h = std::pow(v / (lead * std::pow(u, gamma)), -power);
            return (h - 1.0) * std::pow(u, 1.0 - q);
        };
        const double corr =
            quadrature::adaptive_simpson(psi, std::log(u_lo), std::log(span), inner_tol, 60);
        return std::pow(lead, -power) * (std::pow(span, 1.0 - q) / (1.0 - q) + corr);
    };
    // the outer integrand carries its own span^{1-q} endpoint cusp; integrate
    // in w = span^{1-q}, which makes it polynomially smooth at w = 0
    const double wq = 1.0 - q;
    auto outer_w = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double span = std::pow(w, 1.0 / wq);
        return outer(lo + span) * std::pow(w, q / wq) / wq;
    };
    result.value =
        2.0 * quadrature::adaptive_simpson(outer_w, 0.0, std::pow(hi - lo, wq), 1e-6, 60);
    return result;
}

// ---------------------------------------------------------------------------
// Scaling regressions
// ---------------------------------------------------------------------------

struct HolderEstimate {
    double alpha = 0.0;
    double stderr_ = 0.0;
    std::vector<int> lags_used;
};

/// Hölder exponent from the dyadic-increment medians: at lag 2^{-j} take the
/// median of nonzero |f(t + 2^{-j}) - f(t)| over all grid shifts, then regress
/// log2(median) on the level. Zero increments are excluded so locally flat
/// series (occupation profiles between visits) do not collapse the median;
/// a level needs at least 8 nonzero increments to enter the fit.
inline HolderEstimate holder_exponent(std::span<const double> series,
                                      std::span<const int> lag_levels = {}) {
    const std::size_t n = series.size();
    int levels = 0;
    while ((std::size_t{1} << levels) < n - 1) ++levels;
    if (((std::size_t{1} << levels) != n - 1) || levels < 6)
        throw std::invalid_argument("holder_exponent: needs a dyadic grid with >= 6 levels");

    std::vector<int> lags(lag_levels.begin(), lag_levels.end());
    if (lags.empty())
        for (int j = 1; j <= levels - 2; ++j) lags.push_back(j);

    std::vector<double> xs, ys;
    std::vector<int> used;
    std::vector<double> incs;
    for (int j : lags) {
        if (j < 1 || j > levels) throw std::invalid_argument("holder_exponent: bad lag level");
        const std::size_t stride = std::size_t{1} << (levels - j);
        incs.clear();
        for (std::size_t i = 0; i + stride < n; ++i) {
            const double d = std::fabs(series[i + stride] - series[i]);
            if (d > 0.0) incs.push_back(d);
        }
        if (incs.size() < 8) continue;
        auto mid = incs.begin() + static_cast<std::ptrdiff_t>(incs.size() / 2);
        std::nth_element(incs.begin(), mid, incs.end());
        xs.push_back(static_cast<double>(j));
        ys.push_back(std::log2(*mid));
        used.push_back(j);
    }
    if (xs.size() < 4)
        throw std::invalid_argument("holder_exponent: series degenerate (too few nonzero increments)");
    const auto fit = besov::detail::fit_slope(xs, ys);
    return {-fit.slope, fit.stderr_, used};
}

struct MomentScalingOptions {
    double eps = 0.0;        // level-window half-width; 0 = scale to path spread
    int anchors = 8;         // interval starts per path, level anchored at the path value there
    int min_replicates = 100;
    int bootstrap = 100;
    std::uint64_t bootstrap_seed = 2024;
};

struct MomentScaling {
    double slope = 0.0;
    double stderr_ = 0.0;              // bootstrap over replicates
    std::vector<double> lags;          // lag widths h
    std::vector<double> moments;       // E[(L(xi, start+h) - L(xi, start))^n]
};

/// Scaling of local-time increment moments: for each path and anchor start
/// s0, the window occupation (2 eps)^{-1} Leb{ s in [s0, s0+h] : |f(s) - f(s0)| <= eps }
/// estimates L(f(s0), [s0, s0+h]); the fitted slope of log E[.^n] against
/// log h targets 3n/4 along time sections and n/2 along space sections.
inline MomentScaling moment_scaling(std::span<const std::vector<double>> paths, int order,
                                    std::span<const int> lag_levels,
                                    const MomentScalingOptions& opts = {}) {
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument("moment_scaling: order must be a positive even integer");
    if (static_cast<int>(paths.size()) < opts.min_replicates)
        throw std::invalid_argument("moment_scaling: fewer replicates than configured minimum");
    if (lag_levels.size() < 4) throw std::invalid_argument("moment_scaling: needs >= 4 lags");
    const std::size_t n = paths[0].size();
    int levels = 0;
    while ((std::size_t{1} << levels) < n - 1) ++levels;

    double eps = opts.eps;
    if (eps <= 0.0) {
        double lo = paths[0][0], hi = lo;
        for (double v : paths[0]) { lo = std::min(lo, v); hi = std::max(hi, v); }
        eps = hi > lo ? 0.05 * (hi - lo) : 0.5;
    }

    std::vector<std::size_t> strides;
    std::vector<double> lags;
    std::size_t max_stride = 0;
    for (int j : lag_levels) {
        if (j < 1 || j > levels) throw std::invalid_argument("moment_scaling: bad lag level");
        strides.push_back(std::size_t{1} << (levels - j));
        lags.push_back(std::exp2(-j));
        max_stride = std::max(max_stride, strides.back());
    }
    const double dt = 1.0 / static_cast<double>(n - 1);

    // per-replicate, per-lag moment contributions (anchor-averaged)
    std::vector<std::vector<double>> per_rep(paths.size(),
                                             std::vector<double>(lags.size(), 0.0));
    const int anchors = std::max(1, opts.anchors);
    for (std::size_t r = 0; r < paths.size(); ++r) {
        const auto& path = paths[r];
        if (path.size() != n) throw std::invalid_argument("moment_scaling: ragged replicate set");
        for (int a = 0; a < anchors; ++a) {
            const std::size_t start =
                anchors == 1 ? 0
                             : (static_cast<std::size_t>(a) * (n - 1 - max_stride)) /
                                   static_cast<std::size_t>(anchors);
            const double level = path[start];
            for (std::size_t l = 0; l < strides.size(); ++l) {
                std::size_t hits = 0;
                for (std::size_t i = start; i < start + strides[l]; ++i)
                    if (std::fabs(path[i] - level) <= eps) ++hits;
                const double incr = static_cast<double>(hits) * dt / (2.0 * eps);
                per_rep[r][l] += std::pow(incr, order) / anchors;
            }
        }
    }

    auto fit_for = [&](std::span<const std::size_t> pick) {
        std::vector<double> xs, ys;
        for (std::size_t l = 0; l < lags.size(); ++l) {
            double m = 0.0;
            for (std::size_t r : pick) m += per_rep[r][l];
            m /= static_cast<double>(pick.size());
            xs.push_back(std::log(lags[l]));
            ys.push_back(std::log(std::max(m, 1e-300)));
        }
        return besov::detail::fit_slope(xs, ys).slope;
    };

    std::vector<std::size_t> all(paths.size());
    for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
    MomentScaling out;
    out.lags = lags;
    out.moments.resize(lags.size());
    for (std::size_t l = 0; l < lags.size(); ++l) {
        double m = 0.0;
        for (std::size_t r = 0; r < paths.size(); ++r) m += per_rep[r][l];
        out.moments[l] = m / static_cast<double>(paths.size());
    }
    out.slope = fit_for(all);

    rng::Philox gen({opts.bootstrap_seed, 0});
    std::vector<double> boot;
    std::vector<std::size_t> pick(paths.size());
    for (int b = 0; b < opts.bootstrap; ++b) {
        for (auto& idx : pick) idx = gen.next_u64() % paths.size();
        boot.push_back(fit_for(pick));
    }
    double mean = 0.0, var = 0.0;
    for (double v : boot) mean += v;
    mean /= static_cast<double>(boot.size());
    for (double v : boot) var += (v - mean) * (v - mean);
    out.stderr_ = std::sqrt(var / std::max<std::size_t>(1, boot.size() - 1));
    return out;
}

// ---------------------------------------------------------------------------
// Level sets and box dimension
// ---------------------------------------------------------------------------

struct LevelSet {
    double level = 0.0;
    std::vector<int> cells;  // grid cells where path - level changes sign or hits 0
};

/// Cells are half-open [t_i, t_{i+1}): a crossing is a strict sign change
/// across the cell or an exact hit at the cell's left endpoint, so a
/// grid-exact hit belongs to exactly one cell.
inline LevelSet level_set(std::span<const double> path, double xi) {
    LevelSet ls;
    ls.level = xi;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const double a = path[i] - xi;
        const double b = path[i + 1] - xi;
        if (a == 0.0 || (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0))
            ls.cells.push_back(static_cast<int>(i));
    }
    return ls;
}

struct DimensionEstimate {
    double dim = 0.0;
    double stderr_ = 0.0;
    std::vector<int> scales;     // dyadic coarsening exponents used
    std::vector<long> counts;    // N(eps) per scale
};

/// Box-counting dimension over dyadic coarsenings of the sampling grid; the
/// set is never re-gridded, so N(eps) is exact for the discretized set.
/// scale_offset skips the finest coarsenings: grid sampling hides crossings
/// that enter and leave a cell between grid points, which thins the set at
/// cell scale and depresses fine-scale counts; boxes several cells wide are
/// insensitive to that thinning.
inline DimensionEstimate box_dimension(const LevelSet& ls, int n_scales = 6,
                                       std::size_t min_cells = 16, int scale_offset = 0) {
    if (ls.cells.size() < min_cells)
        throw NumericalError("box_dimension: low-occupancy level set (< 16 cells); "
                             "raise the resolution or pick the level from a visited value");
    if (n_scales < 4) throw std::invalid_argument("box_dimension: needs >= 4 scales");
    DimensionEstimate est;
    std::vector<double> xs, ys;
    for (int l = scale_offset; l < scale_offset + n_scales; ++l) {
        std::set<int> boxes;
        for (int c : ls.cells) boxes.insert(c >> l);
        est.scales.push_back(l);
        est.counts.push_back(static_cast<long>(boxes.size()));
        xs.push_back(-static_cast<double>(l) * std::log(2.0)); // log(1/eps) up to a constant
        ys.push_back(std::log(static_cast<double>(boxes.size())));
    }
    // slope of log N against log(1/eps); sign flip because xs decreases with l
    const auto fit = besov::detail::fit_slope(xs, ys);
    est.dim = fit.slope;
    est.stderr_ = fit.stderr_;
    return est;
}

} // namespace heatpath::localtime
