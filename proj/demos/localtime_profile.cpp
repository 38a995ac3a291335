// Builds the occupation histogram of one time-section path, prints the local
// time profile at the zero level together with the Fourier-inversion estimate,
// and reports the box dimension of a typical level set.

#include <cstdio>

#include "heatpath/localtime.hpp"
#include "heatpath/sampler.hpp"

using namespace heatpath;

int main() {
    const sampler::GridSpec grid{kernels::TimeSection{}, 12, "demo"};
    const auto paths = sampler::sample_paths(grid, {99, 0}, 1);
    const auto& path = paths[0].values;

    std::vector<int> stops;
    for (int i = 0; i <= (1 << 12); i += (1 << 9)) stops.push_back(i);
    const auto field = localtime::occupation_histogram(path, 32, stops);

    std::printf("occupation profile at the zero level (dxi = %g):\n", field.dxi);
    const auto& profile = field.row_at(0.0);
    for (std::size_t s = 0; s < field.stops.size(); ++s)
        std::printf("  t = %-8.4f L(0,t) = %.4f\n", field.stops[s] * field.dt, profile[s]);

    const auto four = localtime::fourier_local_time(path, 0.0, 0.0, 1.0);
    std::printf("Fourier inversion at xi=0 over [0,1]: raw %.4f tapered %.4f histogram %.4f\n",
                four.raw, four.tapered, profile.back());

    const double xi = path[path.size() / 3];
    const auto ls = localtime::level_set(path, xi);
    const auto dim = localtime::box_dimension(ls, 6, 16, 4);
    std::printf("level set at xi = u(1/3): %zu cells, box dimension %.3f +- %.3f\n",
                ls.cells.size(), dim.dim, dim.stderr_);
    return 0;
}
