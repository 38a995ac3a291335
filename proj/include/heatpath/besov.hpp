#pragma once

// Dyadic Schauder-coefficient pyramid of a sampled path on [0,1] and the
// sequence-space Besov / Besov-Orlicz statistics built from it:
//
//   f_jk = 2*2^{j/2} { f((2k-1)/2^{j+1}) - f(2k/2^{j+1})/2 - f((2k-2)/2^{j+1})/2 }
//   s_j  = 2^{-j(1/2+1/p)} / w(2^{-j}) * (sum_k |f_jk|^p)^{1/p}
//
// The big space has sup_j s_j finite; membership in the separable little
// space forces s_j -> 0, which the diagnostic below tests for.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatpath/kernels.hpp"

namespace heatpath::besov {

struct DyadicCoefficients {
    double f0 = 0.0;                          // f(0)
    double f1 = 0.0;                          // f(1) - f(0)
    std::vector<std::vector<double>> levels;  // level j holds 2^j entries, j = 0..J-1
};

namespace detail {

inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

/// (sum |v|^p)^{1/p}, normalized by the max entry so p up to 256 cannot
/// overflow; ascending-k pairwise reduction keeps the result order-fixed.
inline double lp_norm(std::span<const double> v, double p) {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, std::fabs(x));
    if (mx == 0.0) return 0.0;
    std::vector<double> powed(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        powed[i] = std::pow(std::fabs(v[i]) / mx, p);
    return mx * std::pow(pairwise_sum(powed), 1.0 / p);
}

inline int dyadic_levels(std::size_t n_points) {
    const std::size_t n = n_points - 1;
    if (n_points < 3 || (n & (n - 1)) != 0)
        throw std::invalid_argument("schauder_coefficients: path length must be 2^J + 1 with J >= 1");
    int j = 0;
    while ((std::size_t{1} << j) < n) ++j;
    return j;
}

struct SlopeFit {
    double slope = 0.0;
    double stderr_ = 0.0;
};

/// Least squares y ~ a + b x; stderr from residual variance.
inline SlopeFit fit_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - my - fit.slope * (x[i] - mx);
            rss += r * r;
        }
        fit.stderr_ = std::sqrt(rss / (static_cast<double>(n) - 2.0) / sxx);
    }
    return fit;
}

} // namespace detail

/// Extract the Schauder pyramid of a dyadic path with 2^J + 1 points;
/// linear in the path, exact on affine functions (all levels vanish).
inline DyadicCoefficients schauder_coefficients(std::span<const double> path) {
    const int levels = detail::dyadic_levels(path.size());
    DyadicCoefficients out;
    out.f0 = path.front();
    out.f1 = path.back() - path.front();
    out.levels.resize(static_cast<std::size_t>(levels));
    for (int j = 0; j < levels; ++j) {
        const std::size_t stride = std::size_t{1} << (levels - j - 1);
        const double scale = 2.0 * std::exp2(0.5 * j);
        auto& row = out.levels[static_cast<std::size_t>(j)];
        row.resize(std::size_t{1} << j);
        for (std::size_t k = 1; k <= row.size(); ++k) {
            const double mid = path[(2 * k - 1) * stride];
            const double right = path[(2 * k) * stride];
            const double left = path[(2 * k - 2) * stride];
            row[k - 1] = scale * (mid - 0.5 * right - 0.5 * left);
        }
    }
    return out;
}

struct SequenceNorm {
    double norm = 0.0;
    std::vector<double> s;  // per-level statistic s_j
};

/// Sequence-space Besov norm max(|f0|, |f1|, sup_j s_j) for modulus
/// w = t^alpha (log 1/t)^lambda. Requires alpha * p > 1.
inline SequenceNorm besov_sequence_norm(const DyadicCoefficients& coeffs,
                                        const kernels::Modulus& m, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("besov_sequence_norm: p must be > 1");
    if (!(m.alpha > 0.0 && m.alpha < 1.0) || !(m.lambda >= 0.0))
        throw std::invalid_argument("besov_sequence_norm: modulus outside (0,1) x [0,inf)");
    if (!(m.alpha * p > 1.0))
        throw std::invalid_argument("besov_sequence_norm: requires alpha * p > 1");
    SequenceNorm out;
    out.s.reserve(coeffs.levels.size());
    double sup = 0.0;
    for (std::size_t j = 0; j < coeffs.levels.size(); ++j) {
        const double weight = std::exp2(-static_cast<double>(j) * (0.5 + 1.0 / p)) /
                              kernels::modulus_level_weight(m, static_cast<int>(j));
        const double sj = weight * detail::lp_norm(coeffs.levels[j], p);
        out.s.push_back(sj);
        sup = std::max(sup, sj);
    }
    out.norm = std::max({std::fabs(coeffs.f0), std::fabs(coeffs.f1), sup});
    return out;
}

/// Fixed p-grid for the Orlicz sup; dyadic so runs stay comparable.
inline constexpr std::array<double, 9> k_orlicz_p_grid = {1, 2, 4, 8, 16, 32, 64, 128, 256};

struct OrliczNorm {
    double norm = 0.0;
    double argmax_p = 1.0;
    int argmax_j = 0;
    std::vector<double> o;  // per-level sup over the p grid
};

/// Besov-Orlicz sequence statistic
///   sup_{p,j} (1/sqrt p) 2^{-j(1/2 - alpha + 1/p)} (sum_k |f_jk|^p)^{1/p}
/// with the sup over p restricted to k_orlicz_p_grid.
inline OrliczNorm orlicz_sequence_norm(const DyadicCoefficients& coeffs, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("orlicz_sequence_norm: alpha must lie in (0,1)");
    OrliczNorm out;
    out.o.assign(coeffs.levels.size(), 0.0);
    double sup = 0.0;
    for (std::size_t j = 0; j < coeffs.levels.size(); ++j) {
        for (double p : k_orlicz_p_grid) {
            const double term = std::exp2(-static_cast<double>(j) * (0.5 - alpha + 1.0 / p)) /
                                std::sqrt(p) * detail::lp_norm(coeffs.levels[j], p);
            out.o[j] = std::max(out.o[j], term);
            if (term > sup) {
                sup = term;
                out.argmax_p = p;
                out.argmax_j = static_cast<int>(j);
            }
        }
    }
    out.norm = std::max({std::fabs(coeffs.f0), std::fabs(coeffs.f1), sup});
    return out;
}

struct LittleSpaceDiagnostic {
    double top_half_min = 0.0;
    double median = 0.0;
    double slope = 0.0;        // least-squares slope of log2 s_j over the top half
    double floor = 0.0;        // violation threshold actually used
    bool violation = false;    // top-half min stays above the floor: s_j does not tend to 0
};

/// Little-space membership requires s_j -> 0; flags "violation" when the
/// top-half minimum exceeds floor_factor * median(s_j).
inline LittleSpaceDiagnostic little_space_diagnostic(std::span<const double> s,
                                                     double floor_factor = 0.25) {
    if (s.size() < 4)
        throw std::invalid_argument("little_space_diagnostic: needs at least 4 levels");
    LittleSpaceDiagnostic d;
    std::vector<double> sorted(s.begin(), s.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    d.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    const std::size_t start = s.size() / 2;
    d.top_half_min = s[start];
    std::vector<double> xs, ys;
    for (std::size_t j = start; j < s.size(); ++j) {
        d.top_half_min = std::min(d.top_half_min, s[j]);
        if (s[j] > 0.0) {
            xs.push_back(static_cast<double>(j));
            ys.push_back(std::log2(s[j]));
        }
    }
    if (xs.size() >= 2) d.slope = detail::fit_slope(xs, ys).slope;
    d.floor = floor_factor * d.median;
    d.violation = d.top_half_min > d.floor;
    return d;
}

/// Discretized modulus-of-continuity norm ||f||_{L^p} + sup_t Delta_p(t)/w(t)
/// with shifts restricted to grid multiples; cross-validates the sequence norm
/// up to the (unknown) equivalence constants.
inline double modulus_norm_direct(std::span<const double> path, double p,
                                  const kernels::Modulus& m) {
    const int levels = detail::dyadic_levels(path.size());
    const std::size_t n = path.size();
    const double dt = std::exp2(-levels);
    double lp = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) lp += std::pow(std::fabs(path[i]), p) * dt;
    lp = std::pow(lp, 1.0 / p);

    double best = 0.0;
    double running_sup = 0.0;  // sup over shifts <= current t
    for (std::size_t shift = 1; shift < n; ++shift) {
        // left-endpoint cells of I_s = {x : x + s in I}, measure 1 - s
        double acc = 0.0;
        for (std::size_t i = 0; i + shift + 1 < n; ++i) {
            const double diff = std::fabs(path[i + shift] - path[i]);
            acc += std::pow(diff, p) * dt;
        }
        running_sup = std::max(running_sup, std::pow(acc, 1.0 / p));
        const double t = static_cast<double>(shift) * dt;
        if (t >= 1.0) {
            if (m.lambda == 0.0) best = std::max(best, running_sup);
            continue;
        }
        best = std::max(best, running_sup / kernels::modulus_eval(m, t));
    }
    return lp + best;
}

struct CoefficientStatistic {
    double m_j = 0.0;     // 2^{-j} sum_k |v_jk|^p
    double target = 0.0;  // c_p
};

/// Empirical moment of normalized coefficients against its Gaussian limit c_p.
inline CoefficientStatistic coefficient_statistic(std::span<const double> normalized, double p) {
    std::vector<double> powed(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i)
        powed[i] = std::pow(std::fabs(normalized[i]), p);
    CoefficientStatistic out;
    out.m_j = detail::pairwise_sum(powed) / static_cast<double>(normalized.size());
    out.target = kernels::gaussian_abs_moment(p);
    return out;
}

/// Per-path regularity summary emitted by the CLI.
struct RegularityReport {
    kernels::Modulus modulus;
    double p = 0.0;
    double norm = 0.0;
    std::vector<double> s;
    LittleSpaceDiagnostic little;
    bool in_big_space = false;  // finite norm with a non-growing tail
};

inline RegularityReport regularity_report(const DyadicCoefficients& coeffs,
                                          const kernels::Modulus& m, double p,
                                          double floor_factor = 0.25,
                                          double plateau_slope_min = -0.5,
                                          double plateau_slope_max = 0.25) {
    RegularityReport rep;
    rep.modulus = m;
    rep.p = p;
    const auto seq = besov_sequence_norm(coeffs, m, p);
    rep.norm = seq.norm;
    rep.s = seq.s;
    rep.little = little_space_diagnostic(rep.s, floor_factor);
    rep.in_big_space = std::isfinite(rep.norm) && rep.little.slope >= plateau_slope_min &&
                       rep.little.slope <= plateau_slope_max;
    return rep;
}

} // namespace heatpath::besov
