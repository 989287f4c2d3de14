#include "oulab/process.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oulab {

OuParams::OuParams(double theta_) : theta(theta_) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("OuParams: theta must be finite and > 0");
}

SamplingGrid::SamplingGrid(std::size_t n_, double delta_) : n(n_), delta(delta_) {
    if (n < 1) throw std::invalid_argument("SamplingGrid: n must be >= 1");
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("SamplingGrid: delta must be finite and > 0");
}

double stationary_variance(const OuParams& params) {
    return params.stationary_variance();
}

namespace {

void check_cap(std::size_t count, std::size_t cap) {
    if (count < 1) throw std::invalid_argument("covariance: count must be >= 1");
    if (count > cap)
        throw std::invalid_argument("exact engine size exceeded: count " +
                                    std::to_string(count) + " > cap " + std::to_string(cap));
}

}  // namespace

CovarianceMatrix build_stationary_covariance(const OuParams& params, const SamplingGrid& grid,
                                             std::size_t count, std::size_t /*first_index*/,
                                             std::size_t cap) {
    check_cap(count, cap);
    const double c = params.stationary_variance();
    const double r = std::exp(-params.theta * grid.delta);

    // powers of r by recurrence; entries assigned symmetrically per diagonal
    std::vector<double> lag(count);
    lag[0] = c;
    for (std::size_t k = 1; k < count; ++k) lag[k] = lag[k - 1] * r;

    CovarianceMatrix cov;
    cov.entries.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j)
            cov.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                lag[i > j ? i - j : j - i];
    return cov;
}

CovarianceMatrix build_x_covariance(const OuParams& params, const SamplingGrid& grid,
                                    std::size_t count, std::size_t first_index,
                                    std::size_t cap) {
    check_cap(count, cap);
    const double theta = params.theta;
    const double two_theta = 2.0 * theta;

    CovarianceMatrix cov;
    cov.entries.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        const double ti = grid.time(first_index + i);
        for (std::size_t j = i; j < count; ++j) {
            const double tj = grid.time(first_index + j);
            // s = min time, so the same expression serves both triangles
            const double v = std::exp(-theta * (tj - ti)) * (1.0 - std::exp(-two_theta * ti)) / two_theta;
            cov.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            cov.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    return cov;
}

}  // namespace oulab
