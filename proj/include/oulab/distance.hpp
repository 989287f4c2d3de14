#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Empirical distances between a Monte Carlo ensemble and the standard
// normal law: the one-sample Kolmogorov-Smirnov statistic with its DKW
// confidence radius, the L1 (Wasserstein-1) distance between CDFs, and the
// Michel-Pfanzagl three-term bound for random ratios.
namespace oulab {

struct SampleEnsemble {
    std::vector<double> values;        // finite values only
    std::uint64_t master_seed = 0;
    std::string description;
    std::uint64_t excluded_count = 0;  // degenerate replications, kept out of values
};

double normal_cdf(double z);
double normal_pdf(double z);
double normal_quantile(double p);

struct KsResult {
    double d_statistic;   // sup_z |F_hat(z) - Phi(z)| over the 2M candidates
    double dkw_radius;    // sqrt(log(2/alpha) / (2M)) at alpha = 1 - confidence
};

KsResult ks_statistic_vs_normal(const SampleEnsemble& sample, double confidence = 0.95);

// integral of |F_hat - Phi| in closed form between order statistics,
// tails truncated at |z| = 10.
double wasserstein_empirical_vs_normal(const SampleEnsemble& sample);

// d_Kol(X/Z, N) <= d_Kol(X, N) + P{|Z-1| > eps} + eps, minimized over the
// epsilon grid; both the numerator distance and the tail probability are
// empirical.
struct MpBound {
    double best_bound;
    double best_eps;
};

std::vector<double> default_eps_grid();

MpBound michel_pfanzagl_bound(const SampleEnsemble& numerator, const SampleEnsemble& denominator,
                              std::span<const double> eps_grid);

}  // namespace oulab
