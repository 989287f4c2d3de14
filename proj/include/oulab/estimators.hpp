#pragma once

#include <optional>

#include "oulab/process.hpp"
#include "oulab/sampler.hpp"

// Discrete-observation statistics and drift estimators.
//
// The squared-sum statistic comes in two index conventions: f_n sums
// i = 0..n-1 while the AMCE contrast sums i = 1..n. Indexing selects which
// window fn_x (and fn_z) uses. The increment statistics S_n,
// quad_increment and Lambda_n are definitional and always use
// X_{t_{i-1}}, i = 1..n.
namespace oulab {

enum class Indexing { kFromZero, kFromOne };

struct StatisticSet {
    double fn_x = 0.0;                    // (1/n) sum of squares over the selected window
    std::optional<double> fn_z;
    double Fn_x = 0.0;                    // sqrt(T) (fn_x - 1/(2 theta))
    std::optional<double> Fn_z;
    double s_n = 0.0;                     // delta * sum_{i=1..n} X_{t_{i-1}}^2
    double lambda_n = 0.0;                // sum X_{t_{i-1}} (X_{t_i} - e^{-theta delta} X_{t_{i-1}})
    double quad_increment = 0.0;          // sum X_{t_{i-1}} (X_{t_i} - X_{t_{i-1}})
};

// Lambda_n as defined runs through zeta_t = e^{theta t} X_t, whose weights
// overflow once theta*T is large. The shipped form above is the symbolic
// simplification of the zeta sum; lambda_n_zeta_form keeps the literal
// formula for cross-checks at moderate theta*T.
double lambda_n_zeta_form(const PathSample& path, const OuParams& params);

StatisticSet compute_statistics(const PathSample& path, const OuParams& params,
                                Indexing indexing = Indexing::kFromZero);

// theta_tilde = 1 / ((2/n) sum_{i=1..n} X_{t_i}^2); empty on a zero denominator.
std::optional<double> amce(const PathSample& path);

// theta_hat = -sum X_{t_{i-1}}(X_{t_i}-X_{t_{i-1}}) / (delta sum X_{t_{i-1}}^2)
std::optional<double> amle_hat(const PathSample& path);

// Ito-identity form. The ratio is quoted with either sign in the
// literature; +1/2 (X_T^2 - T) in the numerator converges to -theta, so
// the consistent sign (numerator -1/2 (X_T^2 - T), matching -int X dX) is
// used here and exercised by the consistency tests.
std::optional<double> amle_bar(const PathSample& path);

// sqrt(T/(2 theta)) (theta - estimate)
double normalized_error(double estimate, const OuParams& params, const SamplingGrid& grid);

}  // namespace oulab
