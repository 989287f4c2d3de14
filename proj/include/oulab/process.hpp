#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

// Ornstein-Uhlenbeck model dX = -theta X dt + dW observed on an equidistant
// grid t_i = i*delta, plus the exact Gaussian covariance of the observed
// coordinates. The stationary companion Z (started from N(0, 1/(2 theta)))
// is coupled to X through X_t = Z_t - e^{-theta t} Z_0.
namespace oulab {

inline constexpr std::size_t kDefaultExactCap = 4096;

struct OuParams {
    double theta;  // drift rate, > 0

    explicit OuParams(double theta_);
    double stationary_variance() const { return 1.0 / (2.0 * theta); }
};

struct SamplingGrid {
    std::size_t n;  // number of steps; observations at t_0..t_n
    double delta;   // step size, > 0

    SamplingGrid(std::size_t n_, double delta_);
    double horizon() const { return static_cast<double>(n) * delta; }
    double time(std::size_t i) const { return static_cast<double>(i) * delta; }
};

struct CovarianceMatrix {
    Eigen::MatrixXd entries;  // symmetric by construction

    std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }
};

double stationary_variance(const OuParams& params);

// Covariance of (Z_{t_first}, ..., Z_{t_{first+count-1}}): Toeplitz with
// entry(i,j) = e^{-theta delta |i-j|} / (2 theta). The start index is
// irrelevant for Z (stationarity) but kept for symmetry with the X builder.
CovarianceMatrix build_stationary_covariance(const OuParams& params,
                                             const SamplingGrid& grid,
                                             std::size_t count,
                                             std::size_t first_index = 0,
                                             std::size_t cap = kDefaultExactCap);

// Covariance of (X_{t_first}, ..., X_{t_{first+count-1}}):
// E[X_s X_t] = e^{-theta(t-s)} (1 - e^{-2 theta s}) / (2 theta) for s <= t.
CovarianceMatrix build_x_covariance(const OuParams& params,
                                    const SamplingGrid& grid,
                                    std::size_t count,
                                    std::size_t first_index = 0,
                                    std::size_t cap = kDefaultExactCap);

}  // namespace oulab
