#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "oulab/process.hpp"

// Exact moment engine for the bound components: cumulants of Gaussian
// quadratic forms via the trace identity
//   kappa_r(sum_i w_i x_i^2) = 2^{r-1} (r-1)! trace((W Sigma)^r),   r >= 2,
// an independent Isserlis (Wick pairing) oracle for small dimensions, and
// the closed forms for the mean gap, a_T and the Lambda/F cross term.
namespace oulab {

enum class ValueSource { kExact, kClosedForm, kMonteCarlo };

const char* to_string(ValueSource source);

struct CumulantSet {
    double mean = 0.0;
    double kappa2 = 0.0;
    double kappa3 = 0.0;
    double kappa4 = 0.0;
    ValueSource source = ValueSource::kExact;
    // standard errors, Monte Carlo source only
    std::optional<std::array<double, 4>> std_errors;
};

// Exact cumulants of sum_i w_i x_i^2 for centered Gaussian x ~ N(0, cov).
// order selects the highest cumulant filled in (2, 3 or 4).
CumulantSet quadratic_form_cumulants(const CovarianceMatrix& cov, std::span<const double> weights,
                                     int order = 4, std::size_t cap = kDefaultExactCap);

// Brute-force oracle: raw moments of the quadratic form expanded over all
// Wick pairings, then converted to cumulants. Feasible for dim <= 6 only;
// kept deliberately independent of the trace identity.
CumulantSet isserlis_oracle(const CovarianceMatrix& cov, std::span<const double> weights,
                            int order = 4);

// kappa_1..kappa_max of F_n(Z) = sqrt(T) (f_n(Z) - 1/(2 theta)), the
// uniform-weight quadratic form over the stationary covariance.
// max_order up to 8 (higher orders feed the k-statistic standard errors).
std::vector<double> fn_z_cumulants_upto(const OuParams& params, const SamplingGrid& grid,
                                        int max_order, std::size_t cap = kDefaultExactCap);

CumulantSet fn_z_cumulants(const OuParams& params, const SamplingGrid& grid,
                           std::size_t cap = kDefaultExactCap);

// |E F_n(Z)^2 - 1/(2 theta^3)|, exact.
double variance_gap_fn_z(const OuParams& params, const SamplingGrid& grid,
                         std::size_t cap = kDefaultExactCap);

// Same gap for F_n(X) = sqrt(T)(f_n(X) - E f_n(X)); uses the X covariance.
double variance_gap_fn_x(const OuParams& params, const SamplingGrid& grid,
                         std::size_t cap = kDefaultExactCap);

// E f_n(X) - E f_n(Z) = -(1/(2 theta n)) sum_{i=0}^{n-1} e^{-2 theta t_i}
// (geometric closed form, any n) and a_T = (T/sigma) * that gap.
struct MeanGapResult {
    double mean_gap;
    double a_t;
};
MeanGapResult mean_gap_and_a_t(const OuParams& params, const SamplingGrid& grid);

// E S_n = delta sum_{i=1}^n E X_{t_{i-1}}^2, closed form.
double expected_s_n(const OuParams& params, const SamplingGrid& grid);

// Cross term T/theta - 2 theta sqrt(T) E[Lambda_n F_n(X)] = a_{n,T} + b_{n,T}
// with a_{n,T} in telescoped closed form and b_{n,T} as its exact single sum.
struct LambdaCrossForms {
    double a_nt;
    double b_nt;
    double cross_term;
};
LambdaCrossForms lambda_cross_closed_forms(const OuParams& params, const SamplingGrid& grid);

// Unbiased sample cumulants (k-statistics) of an i.i.d. sample.
struct KStatistics {
    double k1, k2, k3, k4;
};
KStatistics sample_k_statistics(std::span<const double> values);

// Monte Carlo CumulantSet from a sample: k-statistics with batch-based
// standard errors per entry.
CumulantSet monte_carlo_cumulants(std::span<const double> values, std::size_t batches = 64);

// Sampling standard errors of k2..k4 given the true cumulants kappa_1..8
// (Kendall & Stuart formulas).
struct KStatStdErrors {
    double k2, k3, k4;
};
KStatStdErrors k_statistic_std_errors(std::span<const double> kappa_1_to_8, std::uint64_t m);

// Batch-based standard errors when true cumulants are unavailable
// (the exact-cap fallback path).
KStatStdErrors k_statistic_batch_std_errors(std::span<const double> values,
                                            std::size_t batches = 64);

enum class Application { kAmce, kAmleHat, kAmleBar };

const char* to_string(Application application);

struct McBudget {
    std::uint64_t replications = 10000;
    std::uint64_t master_seed = 0;
    int workers = 1;
};

struct TaggedValue {
    double value = 0.0;
    ValueSource source = ValueSource::kExact;
    double std_error = 0.0;  // nonzero only for Monte Carlo values
};

// Every deterministic or simulable ingredient of the main Kolmogorov bound
// for one application at one grid point. rho = 1/(2 theta) and
// sigma^2 = 1/(2 theta^3) for all three estimators.
struct BoundComponents {
    double rho = 0.0;
    double sigma = 0.0;
    TaggedValue kappa3_v;         // kappa_3(V_T/sigma)
    TaggedValue kappa4_v;         // kappa_4(V_T/sigma)
    TaggedValue mean_ratio_gap;   // |E G_T / (rho sqrt T) - 1|
    TaggedValue variance_gap;     // |E[(G_T - E G_T)^2] - sigma^2|
    TaggedValue r_norm;           // ||R_T||_{L2}
    TaggedValue a_norm;           // ||A_T||_{L2}
    TaggedValue a_scalar;         // a_T
    std::uint64_t mc_replications = 0;
};

// Exact pieces are computed within the cap; above it they are downgraded to
// Monte Carlo estimates (source tags record which route produced each value).
// ||R_T|| is always estimated from coupled paths; ||A_T|| is zero for the
// AMCE, Monte Carlo for the increment-form AMLE and closed-form for the
// Ito-form AMLE.
BoundComponents bound_components_for(Application application, const OuParams& params,
                                     const SamplingGrid& grid, const McBudget& budget,
                                     std::size_t cap = kDefaultExactCap);

}  // namespace oulab
