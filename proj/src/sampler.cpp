#include "oulab/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "oulab/format.hpp"

namespace oulab {

void coupled_path_from_draws(const OuParams& params, const SamplingGrid& grid, double z0,
                             std::span<const double> xi, std::vector<double>& x_out,
                             std::vector<double>* z_out) {
    if (xi.size() != grid.n)
        throw std::invalid_argument("coupled_path_from_draws: need exactly n increments");
    const double r = std::exp(-params.theta * grid.delta);
    const double noise_sd = std::sqrt((1.0 - r * r) * params.stationary_variance());

    x_out.assign(grid.n + 1, 0.0);
    if (z_out) z_out->assign(grid.n + 1, 0.0);

    double z = z0;
    double e = 1.0;
    if (z_out) (*z_out)[0] = z0;
    for (std::size_t i = 1; i <= grid.n; ++i) {
        z = r * z + noise_sd * xi[i - 1];
        e *= r;
        x_out[i] = z - e * z0;
        if (z_out) (*z_out)[i] = z;
    }
}

PathSample sample_coupled_paths(const OuParams& params, const SamplingGrid& grid,
                                const RngStreamSpec& stream) {
    PathSample path{grid, {}, std::vector<double>{}, 0.0, stream};
    path.x.resize(grid.n + 1);
    path.z->resize(grid.n + 1);
    for_each_coupled_observation(params, grid, stream, [&](std::size_t i, double x, double z) {
        path.x[i] = x;
        (*path.z)[i] = z;
        if (i == 0) path.z0 = z;
    });
    return path;
}

PathSample sample_x_only(const OuParams& params, const SamplingGrid& grid,
                         const RngStreamSpec& stream) {
    PathSample path{grid, {}, std::nullopt, 0.0, stream};
    path.x.resize(grid.n + 1);
    for_each_coupled_observation(params, grid, stream, [&](std::size_t i, double x, double z) {
        path.x[i] = x;
        if (i == 0) path.z0 = z;
    });
    return path;
}

void write_path_csv(std::ostream& out, const PathSample& path) {
    out << "i,t,x,z\n";
    for (std::size_t i = 0; i <= path.grid.n; ++i) {
        out << i << ',' << format_double(path.grid.time(i)) << ',' << format_double(path.x[i])
            << ',';
        if (path.z) out << format_double((*path.z)[i]);
        out << '\n';
    }
}

}  // namespace oulab
