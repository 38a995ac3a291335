#include <catch_amalgamated.hpp>

#include <cmath>

#include "heatpath/kernels.hpp"
#include "heatpath/quadrature.hpp"
#include "heatpath/rng.hpp"

using namespace heatpath;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double k_inv_sqrt_pi = 0.5641895835477563;
}

TEST_CASE("green kernel") {
    CHECK(kernels::green(-1.0, 0.3) == 0.0);
    CHECK(kernels::green(0.0, 0.3) == 0.0);
    CHECK_THAT(kernels::green(1.0, 0.0), WithinRel(0.3989422804014327, 1e-14));
    // density normalization by quadrature at t = 1/2
    const double mass = quadrature::adaptive_simpson(
        [](double x) { return kernels::green(0.5, x); }, -12.0, 12.0, 1e-12);
    CHECK_THAT(mass, WithinAbs(1.0, 1e-10));
}

TEST_CASE("time-section covariance") {
    CHECK(kernels::cov_time_section(0.0, 0.7) == 0.0);
    CHECK(kernels::cov_time_section(0.4, 0.0) == 0.0);
    CHECK_THAT(kernels::cov_time_section(1.0, 1.0), WithinRel(k_inv_sqrt_pi, 1e-14));
    rng::Philox gen({11, 0});
    for (int i = 0; i < 64; ++i) {
        const double t = gen.next_uniform();
        const double s = gen.next_uniform();
        CHECK(kernels::cov_time_section(t, s) == kernels::cov_time_section(s, t));
    }
}

TEST_CASE("space kernel closed form") {
    CHECK_THAT(kernels::f_space(0.0, 1.0), WithinRel(k_inv_sqrt_pi, 1e-14));
    CHECK_THAT(kernels::f_space(0.0, 4.0), WithinRel(2.0 * k_inv_sqrt_pi, 1e-14));
    // frozen adaptive-quadrature value of the integral form at (1,1)
    CHECK_THAT(kernels::f_space(1.0, 1.0), WithinRel(0.19964122837424567, 1e-9));
    CHECK(kernels::f_space(0.7, 0.0) == 0.0);  // continuity convention at t = 0
    double prev = kernels::f_space(0.0, 0.7);
    for (int i = 1; i <= 20; ++i) {
        const double u = 0.2 * i;
        const double v = kernels::f_space(u, 0.7);
        CHECK(v > 0.0);
        CHECK(v < prev);  // strictly decreasing in |u|
        CHECK(kernels::f_space(-u, 0.7) == v);
        prev = v;
    }
}

TEST_CASE("space-time covariance reductions") {
    rng::Philox gen({13, 0});
    for (int i = 0; i < 48; ++i) {
        const double t = 0.05 + gen.next_uniform();
        const double s = 0.05 + gen.next_uniform();
        const double x = 2.0 * gen.next_uniform() - 1.0;
        const double y = 2.0 * gen.next_uniform() - 1.0;
        // x = y reduces to the time-section kernel
        CHECK_THAT(kernels::cov_space_time(t, x, s, x),
                   WithinRel(kernels::cov_time_section(t, s), 1e-13));
        // s = t reduces to the space kernel
        CHECK_THAT(kernels::cov_space_time(t, x, t, y),
                   WithinRel(kernels::f_space(x - y, t), 1e-13));
        // symmetry under swapping the two points
        CHECK(kernels::cov_space_time(t, x, s, y) == kernels::cov_space_time(s, y, t, x));
    }
    CHECK(kernels::cov_space_time(0.0, 0.3, 0.5, 0.1) == 0.0);
}

TEST_CASE("fourth difference") {
    CHECK(kernels::fourth_difference({0.0, 1.0, 8.0, 27.0, 64.0}) == 0.0);     // x^3
    CHECK(kernels::fourth_difference({0.0, 1.0, 16.0, 81.0, 256.0}) == 24.0);  // x^4
    const double phi11 =
        kernels::fourth_difference({2.0, std::sqrt(3.0), std::sqrt(2.0), 1.0, 0.0});
    CHECK_THAT(phi11, WithinRel(-0.44292185603693888, 1e-13));  // sqrt(4 - x)
    // annihilates random cubics exactly up to roundoff
    rng::Philox gen({14, 0});
    for (int trial = 0; trial < 32; ++trial) {
        double c[4];
        for (double& v : c) v = 2.0 * gen.next_uniform() - 1.0;
        std::array<double, 5> vals{};
        double scale = 0.0;
        for (int x = 0; x <= 4; ++x) {
            vals[x] = c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
            scale = std::max(scale, std::fabs(vals[x]));
        }
        CHECK(std::fabs(kernels::fourth_difference(vals)) <= 1e-13 * std::max(scale, 1.0));
    }
    CHECK_THROWS_AS(kernels::fourth_difference({0.0, 1.0, std::nan(""), 2.0, 3.0}),
                    std::invalid_argument);
}

TEST_CASE("coefficient covariance, time section") {
    // frozen: E[|u_01|^2] = (2/sqrt(pi)) (3/2 + sqrt2 - sqrt3)
    CHECK_THAT(kernels::coeff_cov_time(0, 1, 1), WithinRel(1.3339278246373199, 1e-13));
    CHECK_THROWS_AS(kernels::coeff_cov_time(3, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(kernels::coeff_cov_time(3, 1, 9), std::invalid_argument);

    SECTION("variance lower bound m 2^{j/2} over j <= 12") {
        double min_scaled = 1e9;
        for (int j = 1; j <= 12; ++j) {
            const std::int64_t m = std::int64_t{1} << j;
            for (std::int64_t k : {std::int64_t{1}, std::int64_t{2}, m / 2, m}) {
                min_scaled =
                    std::min(min_scaled, kernels::coeff_cov_time(j, k, k) / std::exp2(0.5 * j));
            }
        }
        CHECK(min_scaled >= 1.0);  // effective m; the k=1 value 1.3339 is the minimum
        CHECK(min_scaled <= 1.3340);
    }

    SECTION("off-diagonal decay (2|k-k'|-2+c)^{-7/2}") {
        const double lead = 15.0 / (8.0 * std::sqrt(kernels::k_pi));
        for (int j : {4, 8, 12}) {
            const std::int64_t m = std::int64_t{1} << j;
            for (std::int64_t k = 1; k <= m; k += std::max<std::int64_t>(1, m / 16)) {
                for (std::int64_t k2 = 1; k2 <= m; k2 += std::max<std::int64_t>(1, m / 16)) {
                    const std::int64_t d = std::llabs(k - k2);
                    if (d < 2) continue;
                    const double bound = lead * std::exp2(0.5 * j) * std::pow(2.0 * d - 2.0, -3.5);
                    CHECK(std::fabs(kernels::coeff_cov_time(j, k, k2)) <= bound);
                }
            }
        }
    }
}

TEST_CASE("coefficient covariance, space section") {
    CHECK_THROWS_AS(kernels::coeff_cov_space(3, 1, 1, 0.0), std::invalid_argument);

    SECTION("diagonal bounds m1 <= E|z_jk|^2 <= m2 at t = 1") {
        // m1 = (1/(2 sqrt pi)) int_0^4 s^{-1/2} (e^{-1/s} - 4 e^{-1/4s} + 3) ds,
        // via s = q^2 to remove the endpoint singularity
        const double m1 =
            quadrature::adaptive_simpson(
                [](double q) {
                    if (q <= 0.0) return 6.0;
                    const double s = q * q;
                    return 2.0 * (std::exp(-1.0 / s) - 4.0 * std::exp(-0.25 / s) + 3.0);
                },
                0.0, 2.0, 1e-12) /
            (2.0 * std::sqrt(kernels::k_pi));
        CHECK_THAT(m1, WithinRel(0.9917106601940982, 1e-9));
        const double m2 = 8.0 / std::sqrt(kernels::k_pi) +
                          (3.0 / 8.0) * (0.25 + 0.125 + 4.0 / (3.0 * 3.0 * 64.0));
        for (int j = 1; j <= 12; ++j) {
            const std::int64_t m = std::int64_t{1} << j;
            for (std::int64_t k : {std::int64_t{1}, m / 2, m}) {
                const double v = kernels::coeff_cov_space(j, k, k, 1.0);
                CHECK(v >= m1);
                CHECK(v <= m2);
            }
        }
    }

    SECTION("off-diagonal cubic decay, coefficient 3 theta/(16 sqrt pi) = 9") {
        for (int j : {4, 8, 12}) {
            const std::int64_t m = std::int64_t{1} << j;
            for (std::int64_t d = 2; d < m; d += std::max<std::int64_t>(1, m / 32)) {
                const double v = kernels::coeff_cov_space(j, 1 + d, 1, 1.0);
                CHECK(std::fabs(v) * std::pow(2.0 * d - 2.0, 3.0) <= 9.0);
            }
        }
    }
}

TEST_CASE("gaussian absolute moments") {
    CHECK_THAT(kernels::gaussian_abs_moment(2.0), WithinRel(1.0, 1e-13));
    CHECK_THAT(kernels::gaussian_abs_moment(4.0), WithinRel(3.0, 1e-13));
    CHECK_THAT(kernels::gaussian_abs_moment(1.0), WithinRel(0.7978845608028654, 1e-13));
    CHECK_THROWS_AS(kernels::gaussian_abs_moment(-0.5), std::invalid_argument);
}

TEST_CASE("modulus evaluation") {
    CHECK_THAT(kernels::modulus_eval({0.25, 0.0}, 1.0 / 16.0), WithinRel(0.5, 1e-14));
    CHECK_THAT(kernels::modulus_eval({0.5, 1.0}, std::exp(-1.0)),
               WithinRel(0.6065306597126334, 1e-13));
    const double expect = std::exp2(-6.0) * std::pow(8.0 * std::log(2.0), 2.0);
    CHECK_THAT(kernels::modulus_eval({0.75, 2.0}, std::exp2(-8.0)), WithinRel(expect, 1e-13));
    CHECK_THROWS_AS(kernels::modulus_eval({0.5, 0.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(kernels::modulus_eval({0.5, 0.0}, 1.0), std::invalid_argument);
    // lambda = 0 reduces to the pure power; w > 0 and w -> 0 at 0+
    rng::Philox gen({15, 0});
    for (int i = 0; i < 32; ++i) {
        const double t = gen.next_uniform();
        CHECK(kernels::modulus_eval({0.3, 0.0}, t) == std::pow(t, 0.3));
    }
    CHECK(kernels::modulus_eval({0.3, 2.0}, 1e-9) > 0.0);
    CHECK(kernels::modulus_eval({0.3, 2.0}, 1e-9) < kernels::modulus_eval({0.3, 2.0}, 1e-3));
}

TEST_CASE("bifractional identification at H = K = 1/2") {
    for (int i = 1; i <= 8; ++i)
        for (int j = 1; j <= 8; ++j) {
            const double t = i / 8.0, s = j / 8.0;
            const double bifbm = std::sqrt(t + s) - std::sqrt(std::fabs(t - s));
            CHECK_THAT(kernels::cov_time_section(t, s) * std::sqrt(2.0 * kernels::k_pi),
                       WithinRel(bifbm, 1e-13));
        }
}

TEST_CASE("increment variance bounds") {
    SECTION("time: lower bound sqrt|t-s|/sqrt(pi), cross-term piece bounded") {
        const double cross_coeff = (2.0 - std::sqrt(2.0)) / std::sqrt(2.0 * kernels::k_pi);
        for (int i = 0; i <= 16; ++i)
            for (int j = 0; j < i; ++j) {
                const double t = i / 16.0, s = j / 16.0;
                const double v = kernels::increment_var_time(t, s);
                const double floor = std::sqrt(t - s) / std::sqrt(kernels::k_pi);
                CHECK(v >= floor * (1.0 - 1e-12));
                // remaining piece = int_0^s (G(t-r) - G(s-r))^2 <= C sqrt(t-s)
                const double piece = v - floor;
                CHECK(piece >= -1e-14);
                CHECK(piece <= cross_coeff * std::sqrt(t - s) + 1e-14);
            }
    }
    SECTION("space: c_t |x-y| <= E <= |x-y| on the window") {
        const double t = 1.0;
        const double c_t = kernels::space_increment_lower_constant(t, 0.0, 1.0);
        CHECK(c_t > 0.0);
        for (int i = 1; i <= 32; ++i) {
            const double d = i / 32.0;
            const double v = kernels::increment_var_space(d, t);
            CHECK(v >= c_t * d);
            CHECK(v <= d * (1.0 + 1e-12));
        }
    }
}
