// Samples the solution along a time section and a space section, extracts the
// Schauder pyramid, and prints the per-level Besov statistic next to the
// Orlicz sup. The time statistic plateaus at alpha = 1/4 and the space one at
// alpha = 1/2; pushing alpha above those values makes s_j blow up with j.

#include <cstdio>

#include "heatpath/besov.hpp"
#include "heatpath/sampler.hpp"

using namespace heatpath;

static void survey(const kernels::SectionKind& section, const char* name, double alpha) {
    const sampler::GridSpec grid{section, 11, name};
    const auto paths = sampler::sample_paths(grid, {2718, 0}, 1);
    const auto coeffs = besov::schauder_coefficients(paths[0].values);
    const auto seq = besov::besov_sequence_norm(coeffs, {alpha, 0.0}, 6.0);
    const auto orl = besov::orlicz_sequence_norm(coeffs, alpha);
    std::printf("%s section, alpha = %.2f, p = 6\n", name, alpha);
    std::printf("  %-4s %-12s %-12s\n", "j", "s_j", "orlicz o_j");
    for (std::size_t j = 0; j < seq.s.size(); ++j)
        std::printf("  %-4zu %-12.5f %-12.5f\n", j, seq.s[j], orl.o[j]);
    std::printf("  norm = %.5f, orlicz norm = %.5f (argmax p = %g)\n\n", seq.norm, orl.norm,
                orl.argmax_p);
}

int main() {
    survey(kernels::TimeSection{}, "time", 0.25);
    survey(kernels::SpaceSection{1.0, 0.0, 1.0}, "space", 0.5);
    return 0;
}
