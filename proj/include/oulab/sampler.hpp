#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "oulab/process.hpp"
#include "oulab/rng.hpp"

// Exact-in-law simulation of the discretely observed OU pair (X, Z),
// coupled through a shared stationary initial value Z_0 and shared
// Gaussian increments. Z follows the AR(1) transition
//   Z_{t_{i+1}} = e^{-theta delta} Z_{t_i} + sqrt((1-e^{-2 theta delta})/(2 theta)) xi_{i+1}
// and X is recovered from the coupling X_{t_i} = Z_{t_i} - e^{-theta t_i} Z_0.
// There is no discretization bias: the observed law is exact.
namespace oulab {

struct PathSample {
    SamplingGrid grid;
    std::vector<double> x;            // n+1 values, x[0] == 0
    std::optional<std::vector<double>> z;
    double z0 = 0.0;                  // stationary initial value used
    RngStreamSpec stream;
};

// Deterministic kernel: given z0 and n standard-normal increments, produce
// the coupled path. Exposed so tests can drive it with hand-picked draws.
void coupled_path_from_draws(const OuParams& params, const SamplingGrid& grid, double z0,
                             std::span<const double> xi, std::vector<double>& x_out,
                             std::vector<double>* z_out);

// z0 is drawn first, then the n increments; this ordering is part of the
// reproducibility contract.
PathSample sample_coupled_paths(const OuParams& params, const SamplingGrid& grid,
                                const RngStreamSpec& stream);

PathSample sample_x_only(const OuParams& params, const SamplingGrid& grid,
                         const RngStreamSpec& stream);

// Streaming variant for Monte Carlo drivers: visit(i, x_i, z_i) is called
// for i = 0..n without materializing the path. Consumes the stream in the
// same order as sample_coupled_paths, so both yield identical values.
template <typename Visitor>
void for_each_coupled_observation(const OuParams& params, const SamplingGrid& grid,
                                  const RngStreamSpec& stream, Visitor&& visit) {
    ReplicationStream rng(stream);
    const double z0 = std::sqrt(params.stationary_variance()) * rng.next_normal();
    const double r = std::exp(-params.theta * grid.delta);
    const double noise_sd = std::sqrt((1.0 - r * r) * params.stationary_variance());

    double z = z0;
    double e = 1.0;  // e^{-theta t_i}
    visit(std::size_t{0}, 0.0, z0);
    for (std::size_t i = 1; i <= grid.n; ++i) {
        z = r * z + noise_sd * rng.next_normal();
        e *= r;
        visit(i, z - e * z0, z);
    }
}

// CSV dump with header `i,t,x,z`; the z column is left empty when absent.
void write_path_csv(std::ostream& out, const PathSample& path);

}  // namespace oulab
