#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oulab/distance.hpp"
#include "oulab/ensemble.hpp"
#include "oulab/moments.hpp"
#include "oulab/ratecurves.hpp"

// Assembles one grid point into a bound report: every deterministic bound
// component, the constant-free theorem rate, and the empirical distances
// with their uncertainties.
namespace oulab {

RateCurve theorem_curve_for(Application application);

struct BoundReport {
    Application application;
    double theta = 0.0;
    std::size_t n = 0;
    double delta = 0.0;
    double t_horizon = 0.0;

    BoundComponents components;
    double theorem_rate = 0.0;
    int theorem_argmax_term = 0;

    std::uint64_t replications = 0;
    std::uint64_t excluded = 0;
    double d_statistic = 0.0;
    double d_std_error = 0.0;     // pointwise CLT standard error at the attaining point
    double dkw_radius = 0.0;
    double w1 = 0.0;
    double w1_std_error = 0.0;    // influence-function standard error
    double mp_bound = 0.0;
    double mp_std_error = 0.0;
    double mp_eps = 0.0;
};

// Pointwise standard error of the KS statistic: sqrt(p(1-p)/M) at the
// candidate attaining the sup.
double ks_pointwise_std_error(const SampleEnsemble& sample);

// First-order (influence function) standard error of the empirical W1
// integral, truncated consistently with the estimate itself.
double wasserstein_std_error(const SampleEnsemble& sample);

BoundReport bound_report(Application application, const OuParams& params,
                         const SamplingGrid& grid, std::uint64_t replications,
                         const McBudget& component_budget, double confidence = 0.95,
                         std::span<const double> eps_grid = {},
                         std::size_t cap = kDefaultExactCap);

// Same, reusing an ensemble that has already been generated for this
// (application, params, grid, seed) so the heavy pass runs once.
BoundReport bound_report_from_ensemble(Application application, const OuParams& params,
                                       const SamplingGrid& grid,
                                       const ReplicationEnsemble& ensemble,
                                       std::uint64_t ensemble_seed,
                                       const McBudget& component_budget, double confidence,
                                       std::span<const double> eps_grid,
                                       std::size_t cap = kDefaultExactCap);

// Long-format rows for the reports table:
// estimator,theta,n,delta,T,field,value,source,stderr
struct ReportRow {
    std::string field;
    double value = 0.0;
    ValueSource source = ValueSource::kExact;
    double std_error = 0.0;
    bool has_std_error = false;
};

std::vector<ReportRow> report_rows(const BoundReport& report);

}  // namespace oulab
