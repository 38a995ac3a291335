#pragma once

// Exact Gaussian simulation of the solution field along sections, by Cholesky
// factorization of the closed-form covariance matrices. No time stepping, no
// truncation: the sampled vectors carry the exact finite-dimensional law, so
// downstream regularity statistics test the theory rather than a scheme.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heatpath/errors.hpp"
#include "heatpath/kernels.hpp"
#include "heatpath/parallel.hpp"
#include "heatpath/rng.hpp"

namespace heatpath::sampler {

/// Exact-backend cap: 2^J + 1 <= 8193 grid points.
inline constexpr int k_max_resolution_j = 13;
inline constexpr int k_max_coeff_level = 12;

struct GridSpec {
    kernels::SectionKind section;
    int resolution_j = 8;     // grid has 2^J + 1 equally spaced points
    std::string label;

    int n_points() const { return (1 << resolution_j) + 1; }
};

inline void validate(const GridSpec& grid) {
    if (grid.resolution_j < 1)
        throw ConfigError("GridSpec: resolution_j must be >= 1");
    if (grid.resolution_j > k_max_resolution_j)
        throw ConfigError("GridSpec: resolution_j " + std::to_string(grid.resolution_j) +
                          " exceeds the exact backend cap (2^J+1 <= 8193); use J <= " +
                          std::to_string(k_max_resolution_j));
    kernels::validate(grid.section);
}

/// Coordinate of grid point i along the section (time for time sections,
/// space for space sections, segment parameter in [0,1] otherwise).
inline double grid_coordinate(const GridSpec& grid, int i) {
    const double s = std::ldexp(static_cast<double>(i), -grid.resolution_j);
    if (std::holds_alternative<kernels::TimeSection>(grid.section)) return s;
    if (const auto* sp = std::get_if<kernels::SpaceSection>(&grid.section))
        return sp->a + (sp->b - sp->a) * s;
    return s;
}

struct SamplePath {
    GridSpec grid;
    std::vector<double> values;
    rng::SeedSpec seed;
};

// ---------------------------------------------------------------------------
// Covariance assembly
// ---------------------------------------------------------------------------

/// Dense covariance matrix of the field restricted to the grid. The upper
/// triangle is computed and mirrored, so the result is exactly symmetric.
inline Eigen::MatrixXd build_covariance(const GridSpec& grid) {
    validate(grid);
    const int n = grid.n_points();
    Eigen::MatrixXd cov(n, n);
    const int j = grid.resolution_j;
    if (std::holds_alternative<kernels::TimeSection>(grid.section)) {
        for (int r = 0; r < n; ++r) {
            const double t = std::ldexp(static_cast<double>(r), -j);
            for (int c = r; c < n; ++c) {
                const double s = std::ldexp(static_cast<double>(c), -j);
                cov(r, c) = kernels::cov_time_section(t, s);
            }
        }
    } else if (const auto* sp = std::get_if<kernels::SpaceSection>(&grid.section)) {
        const double step = (sp->b - sp->a) * std::ldexp(1.0, -j);
        for (int r = 0; r < n; ++r)
            for (int c = r; c < n; ++c)
                cov(r, c) = kernels::f_space(step * (c - r), sp->t);
    } else {
        const auto& st = std::get<kernels::SpaceTimeSection>(grid.section);
        std::vector<double> ts(n), xs(n);
        for (int i = 0; i < n; ++i) {
            const double s = std::ldexp(static_cast<double>(i), -j);
            ts[i] = st.t0 + (st.t1 - st.t0) * s;
            xs[i] = st.x0 + (st.x1 - st.x0) * s;
        }
        for (int r = 0; r < n; ++r)
            for (int c = r; c < n; ++c)
                cov(r, c) = kernels::cov_space_time(ts[r], xs[r], ts[c], xs[c]);
    }
    cov.triangularView<Eigen::StrictlyLower>() = cov.transpose();
    return cov;
}

// ---------------------------------------------------------------------------
// Jittered Cholesky
// ---------------------------------------------------------------------------

namespace detail {

/// Unblocked Cholesky used only to locate the failing pivot on the error path.
inline int failing_leading_minor(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (!(s > 0.0)) return static_cast<int>(i + 1);
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return 0;
}

} // namespace detail

/// Cholesky factor of a covariance matrix with the pin-and-jitter policy:
/// zero-variance coordinates are pinned to exact 0 and the remaining minor is
/// factorized, escalating a relative jitter eps * (tr/dim) * I from 1e-12 by
/// tens up to 1e-8 before giving up.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const Eigen::MatrixXd& cov) : dim_(static_cast<int>(cov.rows())) {
        if (cov.rows() != cov.cols())
            throw std::invalid_argument("CholeskyFactor: matrix must be square");
        const double max_diag = cov.diagonal().maxCoeff();
        const double pin_tol = max_diag * 1e-14;
        active_.reserve(dim_);
        for (int i = 0; i < dim_; ++i)
            if (cov(i, i) > pin_tol) active_.push_back(i);
        const int m = static_cast<int>(active_.size());
        if (m == 0) {
            l_.resize(0, 0);
            return;
        }
        Eigen::MatrixXd minor(m, m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) minor(r, c) = cov(active_[r], active_[c]);
        const double scale = minor.trace() / m;
        for (double eps : {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8}) {
            Eigen::MatrixXd shifted = minor;
            if (eps > 0.0) shifted.diagonal().array() += eps * scale;
            Eigen::LLT<Eigen::MatrixXd> llt(shifted);
            if (llt.info() == Eigen::Success) {
                l_ = llt.matrixL();
                jitter_ = eps * scale;
                return;
            }
        }
        Eigen::MatrixXd shifted = minor;
        shifted.diagonal().array() += 1e-8 * scale;
        throw NumericalError(
            "CholeskyFactor: matrix not positive definite after jitter escalation; "
            "leading minor of order " +
            std::to_string(detail::failing_leading_minor(shifted)) + " fails");
    }

    int dim() const { return dim_; }
    int active_dim() const { return static_cast<int>(active_.size()); }
    double jitter() const { return jitter_; }
    const Eigen::MatrixXd& matrix_l() const { return l_; }

    /// One zero-mean Gaussian vector with the factored covariance; pinned
    /// coordinates come out exactly 0.
    std::vector<double> sample(const rng::SeedSpec& seed) const {
        const int m = active_dim();
        Eigen::VectorXd z(m);
        rng::Philox gen(seed);
        for (int i = 0; i < m; ++i) z(i) = rng::standard_normal(gen);
        Eigen::VectorXd y = l_.triangularView<Eigen::Lower>() * z;
        std::vector<double> out(static_cast<std::size_t>(dim_), 0.0);
        for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(active_[i])] = y(i);
        return out;
    }

private:
    int dim_;
    std::vector<int> active_;
    Eigen::MatrixXd l_;
    double jitter_ = 0.0;
};

/// n independent replicates with covariance cov; replicate i runs on the
/// stream (seed.base_seed, seed.replicate_index + i), results ordered by i.
inline std::vector<std::vector<double>> cholesky_sample(const Eigen::MatrixXd& cov,
                                                        const rng::SeedSpec& seed, int n) {
    const CholeskyFactor factor(cov);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(n));
    parallel::parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        out[i] = factor.sample({seed.base_seed, seed.replicate_index + i});
    });
    return out;
}

/// Sample paths along the grid (thin wrapper keeping grid metadata attached).
inline std::vector<SamplePath> sample_paths(const GridSpec& grid, const rng::SeedSpec& seed,
                                            int n) {
    const Eigen::MatrixXd cov = build_covariance(grid);
    auto draws = cholesky_sample(cov, seed, n);
    std::vector<SamplePath> out;
    out.reserve(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i)
        out.push_back(SamplePath{grid, std::move(draws[i]),
                                 {seed.base_seed, seed.replicate_index + i}});
    return out;
}

// ---------------------------------------------------------------------------
// Direct coefficient sampling
// ---------------------------------------------------------------------------

struct CoefficientSample {
    std::vector<std::vector<double>> draws;  // n arrays of length 2^j
    std::vector<double> sigma;               // sqrt of the diagonal covariance
};

/// Covariance matrix of the level-j coefficient vector (u_jk)_k or (z_jk)_k.
inline Eigen::MatrixXd coefficient_covariance(int j, const kernels::SectionKind& section) {
    if (j < 1 || j > k_max_coeff_level)
        throw ConfigError("coefficient_covariance: level must satisfy 1 <= j <= " +
                          std::to_string(k_max_coeff_level));
    kernels::validate(section);
    const std::int64_t m = std::int64_t{1} << j;
    Eigen::MatrixXd cov(m, m);
    if (std::holds_alternative<kernels::TimeSection>(section)) {
        for (std::int64_t r = 0; r < m; ++r)
            for (std::int64_t c = r; c < m; ++c)
                cov(r, c) = kernels::coeff_cov_time(j, r + 1, c + 1);
        cov.triangularView<Eigen::StrictlyLower>() = cov.transpose();
    } else if (const auto* sp = std::get_if<kernels::SpaceSection>(&section)) {
        // stationary in k: Toeplitz fill from one row of offsets
        std::vector<double> row(static_cast<std::size_t>(m));
        for (std::int64_t d = 0; d < m; ++d)
            row[static_cast<std::size_t>(d)] = kernels::coeff_cov_space(j, 1 + d, 1, sp->t);
        for (std::int64_t r = 0; r < m; ++r)
            for (std::int64_t c = 0; c < m; ++c)
                cov(r, c) = row[static_cast<std::size_t>(std::llabs(r - c))];
    } else {
        throw ConfigError("coefficient_covariance: space-time sections are not a coefficient law");
    }
    return cov;
}

/// Draw the exact joint law of the level-j coefficients directly, bypassing
/// path construction so large j stays cheap. Also returns the sigma_jk
/// diagonal used to normalize v_jk = u_jk / sigma_jk.
inline CoefficientSample sample_coefficients(int j, const kernels::SectionKind& section,
                                             const rng::SeedSpec& seed, int n) {
    const Eigen::MatrixXd cov = coefficient_covariance(j, section);
    CoefficientSample result;
    result.sigma.resize(static_cast<std::size_t>(cov.rows()));
    for (Eigen::Index i = 0; i < cov.rows(); ++i)
        result.sigma[static_cast<std::size_t>(i)] = std::sqrt(cov(i, i));
    result.draws = cholesky_sample(cov, seed, n);
    return result;
}

// ---------------------------------------------------------------------------
// Conditional variance (Schur complement)
// ---------------------------------------------------------------------------

/// Var(a' X | X_C) = a' S a - (S_{.C}' a)' (S_CC)^{-1} (S_{.C}' a), clamped to
/// [0, a' S a]. Zero-variance conditioning coordinates carry no information
/// and are dropped before the solve.
inline double conditional_variance(const Eigen::MatrixXd& cov, const Eigen::VectorXd& target,
                                   const std::vector<int>& conditioning) {
    if (cov.rows() != cov.cols() || target.size() != cov.rows())
        throw std::invalid_argument("conditional_variance: dimension mismatch");
    const double base = target.dot(cov * target);
    if (conditioning.empty()) return base;

    const double max_diag = cov.diagonal().maxCoeff();
    std::vector<int> keep;
    keep.reserve(conditioning.size());
    for (int idx : conditioning) {
        if (idx < 0 || idx >= cov.rows())
            throw std::invalid_argument("conditional_variance: conditioning index out of range");
        if (cov(idx, idx) > max_diag * 1e-14) keep.push_back(idx);
    }
    if (keep.empty()) return base;

    const int m = static_cast<int>(keep.size());
    Eigen::MatrixXd scc(m, m);
    Eigen::VectorXd b(m);
    for (int r = 0; r < m; ++r) {
        b(r) = cov.col(keep[r]).dot(target);
        for (int c = 0; c < m; ++c) scc(r, c) = cov(keep[r], keep[c]);
    }
    const double scale = scc.trace() / m;
    for (double eps : {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8}) {
        Eigen::MatrixXd shifted = scc;
        if (eps > 0.0) shifted.diagonal().array() += eps * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() != Eigen::Success) continue;
        const double explained = b.dot(llt.solve(b));
        double v = base - explained;
        if (v < 0.0) v = 0.0;
        if (v > base) v = base;
        return v;
    }
    throw NumericalError("conditional_variance: conditioning block singular after jitter");
}

// ---------------------------------------------------------------------------
// Nondeterminism scans
// ---------------------------------------------------------------------------

struct LndScan {
    double min_ratio = 0.0;   // min over triples of Var(u_t - u_s | grid on [r,s]) / Var(u_t - u_s)
    int argmin_r = 0, argmin_s = 0, argmin_t = 0;
    long triples = 0;
};

/// Local nondeterminism in time: over all grid triples r < s < t with
/// t - r <= max_span, the conditional variance of u(t) - u(s) given the path
/// on the [r,s] grid stays comparable to the unconditional increment variance.
inline LndScan lnd_time_scan(int resolution_j = 8, double max_span = 0.125) {
    const GridSpec grid{kernels::TimeSection{}, resolution_j, "lnd"};
    const Eigen::MatrixXd cov = build_covariance(grid);
    const int n = grid.n_points();
    const int span_steps = static_cast<int>(std::ldexp(max_span, resolution_j));
    LndScan scan;
    scan.min_ratio = std::numeric_limits<double>::infinity();
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (int r = 0; r + 2 < n; ++r) {
        for (int s = r + 1; s < std::min(n - 1, r + span_steps - 1); ++s) {
            std::vector<int> cond;
            for (int i = r; i <= s; ++i) cond.push_back(i);
            for (int t = s + 1; t <= std::min(n - 1, r + span_steps); ++t) {
                a.setZero();
                a(t) = 1.0;
                a(s) = -1.0;
                const double denom = a.dot(cov * a);
                if (denom <= 0.0) continue;
                const double ratio = conditional_variance(cov, a, cond) / denom;
                ++scan.triples;
                if (ratio < scan.min_ratio) {
                    scan.min_ratio = ratio;
                    scan.argmin_r = r;
                    scan.argmin_s = s;
                    scan.argmin_t = t;
                }
            }
        }
    }
    return scan;
}

struct SlndPoint {
    double r = 0.0;
    double cond_var = 0.0;
};

struct SlndScan {
    std::vector<SlndPoint> points;
    double k_hat = 0.0;  // min over r of Var(u(t,y) | u(t,x): |x-y| >= r) / r
};

/// Strong local nondeterminism in space at fixed t: conditioning u(t,y) on
/// everything at distance >= r leaves variance bounded below by K r.
inline SlndScan slnd_space_scan(int resolution_j = 8, double t = 1.0, double a = 0.0,
                                double b = 1.0,
                                std::span<const int> r_exponents = std::array<int, 5>{
                                    -7, -6, -5, -4, -3}) {
    const GridSpec grid{kernels::SpaceSection{t, a, b}, resolution_j, "slnd"};
    const Eigen::MatrixXd cov = build_covariance(grid);
    const int n = grid.n_points();
    const int y_index = n / 2;
    const double y = grid_coordinate(grid, y_index);
    Eigen::VectorXd target = Eigen::VectorXd::Zero(n);
    target(y_index) = 1.0;
    SlndScan scan;
    scan.k_hat = std::numeric_limits<double>::infinity();
    for (int e : r_exponents) {
        const double r = std::exp2(e);
        std::vector<int> cond;
        for (int i = 0; i < n; ++i)
            if (std::fabs(grid_coordinate(grid, i) - y) >= r - 1e-15) cond.push_back(i);
        SlndPoint pt;
        pt.r = r;
        pt.cond_var = conditional_variance(cov, target, cond);
        scan.k_hat = std::min(scan.k_hat, pt.cond_var / r);
        scan.points.push_back(pt);
    }
    return scan;
}

} // namespace heatpath::sampler
