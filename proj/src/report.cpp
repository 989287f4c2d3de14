#include "oulab/report.hpp"

#include <algorithm>
#include <cmath>

namespace oulab {

RateCurve theorem_curve_for(Application application) {
    switch (application) {
        case Application::kAmce: return RateCurve::kThm41;
        case Application::kAmleHat: return RateCurve::kThm42;
        case Application::kAmleBar: return RateCurve::kThm43;
    }
    return RateCurve::kThm41;
}

double ks_pointwise_std_error(const SampleEnsemble& sample) {
    const std::size_t m = sample.values.size();
    std::vector<double> sorted(sample.values);
    std::sort(sorted.begin(), sorted.end());
    double best = 0.0;
    double p_at_best = 0.5;
    for (std::size_t i = 0; i < m; ++i) {
        const double phi = normal_cdf(sorted[i]);
        const double upper = static_cast<double>(i + 1) / static_cast<double>(m) - phi;
        const double lower = phi - static_cast<double>(i) / static_cast<double>(m);
        if (upper > best) {
            best = upper;
            p_at_best = phi;
        }
        if (lower > best) {
            best = lower;
            p_at_best = phi;
        }
    }
    return std::sqrt(p_at_best * (1.0 - p_at_best) / static_cast<double>(m));
}

double wasserstein_std_error(const SampleEnsemble& sample) {
    // W1 = integral of |F_hat - Phi|; its first-order expansion in the
    // empirical CDF gives the influence value psi(x) = G(x) + const with
    // G(x) = integral over s >= x of sgn(F_hat(s) - Phi(s)) ds.
    constexpr double kCut = 10.0;
    const std::size_t m = sample.values.size();
    if (m < 2) return 0.0;
    std::vector<double> sorted(sample.values);
    std::sort(sorted.begin(), sorted.end());

    // piece boundaries: -cut, clipped order statistics, +cut
    std::vector<double> edge;
    edge.reserve(m + 2);
    edge.push_back(-kCut);
    for (double v : sorted)
        if (v > -kCut && v < kCut) edge.push_back(v);
    edge.push_back(kCut);

    // signed length of each piece, sign of F_hat - Phi at the midpoint
    // (F_hat is constant and Phi crosses it at most once per piece, so the
    // midpoint sign is a first-order-adequate surrogate)
    const std::size_t pieces = edge.size() - 1;
    std::vector<double> suffix(pieces + 1, 0.0);
    for (std::size_t k = pieces; k-- > 0;) {
        const double mid = 0.5 * (edge[k] + edge[k + 1]);
        const double level =
            static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), mid) -
                                sorted.begin()) /
            static_cast<double>(m);
        const double sgn = (level >= normal_cdf(mid)) ? 1.0 : -1.0;
        suffix[k] = suffix[k + 1] + sgn * (edge[k + 1] - edge[k]);
    }

    auto g_value = [&](double x) {
        if (x <= -kCut) return suffix[0];
        if (x >= kCut) return 0.0;
        const std::size_t k = static_cast<std::size_t>(
            std::upper_bound(edge.begin(), edge.end(), x) - edge.begin() - 1);
        const double mid = 0.5 * (edge[k] + edge[k + 1]);
        const double level =
            static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), mid) -
                                sorted.begin()) /
            static_cast<double>(m);
        const double sgn = (level >= normal_cdf(mid)) ? 1.0 : -1.0;
        return suffix[k + 1] + sgn * (edge[k + 1] - x);
    };

    double mean = 0.0;
    for (double v : sorted) mean += g_value(v);
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : sorted) {
        const double d = g_value(v) - mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(m - 1);
    return std::sqrt(var / static_cast<double>(m));
}

BoundReport bound_report_from_ensemble(Application application, const OuParams& params,
                                       const SamplingGrid& grid,
                                       const ReplicationEnsemble& ensemble,
                                       std::uint64_t ensemble_seed,
                                       const McBudget& component_budget, double confidence,
                                       std::span<const double> eps_grid, std::size_t cap) {
    BoundReport report;
    report.application = application;
    report.theta = params.theta;
    report.n = grid.n;
    report.delta = grid.delta;
    report.t_horizon = grid.horizon();

    report.components = bound_components_for(application, params, grid, component_budget, cap);
    const RateCurve curve = theorem_curve_for(application);
    report.theorem_rate = eval_rate(curve, report.t_horizon, static_cast<double>(grid.n));
    report.theorem_argmax_term =
        rate_argmax_term(curve, report.t_horizon, static_cast<double>(grid.n));

    const SampleEnsemble values =
        ensemble.value_ensemble(ensemble_seed, std::string(to_string(application)));
    const SampleEnsemble numerators = ensemble.numerator_ensemble(ensemble_seed, "numerator");
    const SampleEnsemble denominators =
        ensemble.denominator_ensemble(ensemble_seed, "denominator");

    report.replications = ensemble.values.size();
    report.excluded = ensemble.excluded_count;

    const KsResult ks = ks_statistic_vs_normal(values, confidence);
    report.d_statistic = ks.d_statistic;
    report.dkw_radius = ks.dkw_radius;
    report.d_std_error = ks_pointwise_std_error(values);
    report.w1 = wasserstein_empirical_vs_normal(values);
    report.w1_std_error = wasserstein_std_error(values);

    const std::vector<double> default_grid = default_eps_grid();
    const std::span<const double> grid_eps =
        eps_grid.empty() ? std::span<const double>(default_grid) : eps_grid;
    const MpBound mp = michel_pfanzagl_bound(numerators, denominators, grid_eps);
    report.mp_bound = mp.best_bound;
    report.mp_eps = mp.best_eps;
    // numerator-distance pointwise error plus the binomial error of the tail
    const double m = static_cast<double>(numerators.values.size());
    const double d_num_se = ks_pointwise_std_error(numerators);
    const double tail = mp.best_bound - mp.best_eps -
                        ks_statistic_vs_normal(numerators, confidence).d_statistic;
    const double tail_clamped = std::clamp(tail, 0.0, 1.0);
    report.mp_std_error =
        std::sqrt(d_num_se * d_num_se + tail_clamped * (1.0 - tail_clamped) / m);
    return report;
}

BoundReport bound_report(Application application, const OuParams& params,
                         const SamplingGrid& grid, std::uint64_t replications,
                         const McBudget& component_budget, double confidence,
                         std::span<const double> eps_grid, std::size_t cap) {
    const ReplicationEnsemble ensemble =
        generate_error_ensemble(application, params, grid, replications,
                                component_budget.master_seed, component_budget.workers);
    return bound_report_from_ensemble(application, params, grid, ensemble,
                                      component_budget.master_seed, component_budget, confidence,
                                      eps_grid, cap);
}

namespace {

ReportRow tagged_row(const std::string& field, const TaggedValue& tv) {
    ReportRow row;
    row.field = field;
    row.value = tv.value;
    row.source = tv.source;
    row.std_error = tv.std_error;
    row.has_std_error = tv.source == ValueSource::kMonteCarlo;
    return row;
}

ReportRow plain_row(const std::string& field, double value, ValueSource source,
                    double std_error = 0.0, bool has_se = false) {
    return {field, value, source, std_error, has_se};
}

}  // namespace

std::vector<ReportRow> report_rows(const BoundReport& report) {
    std::vector<ReportRow> rows;
    rows.push_back(plain_row("rho", report.components.rho, ValueSource::kExact));
    rows.push_back(plain_row("sigma", report.components.sigma, ValueSource::kExact));
    rows.push_back(tagged_row("kappa3_v", report.components.kappa3_v));
    rows.push_back(tagged_row("kappa4_v", report.components.kappa4_v));
    rows.push_back(tagged_row("mean_ratio_gap", report.components.mean_ratio_gap));
    rows.push_back(tagged_row("variance_gap", report.components.variance_gap));
    rows.push_back(tagged_row("r_norm", report.components.r_norm));
    rows.push_back(tagged_row("a_norm", report.components.a_norm));
    rows.push_back(tagged_row("a_scalar", report.components.a_scalar));
    rows.push_back(plain_row("theorem_rate", report.theorem_rate, ValueSource::kExact));
    rows.push_back(plain_row("theorem_argmax_term",
                             static_cast<double>(report.theorem_argmax_term),
                             ValueSource::kExact));
    rows.push_back(plain_row("d_kol", report.d_statistic, ValueSource::kMonteCarlo,
                             report.d_std_error, true));
    rows.push_back(plain_row("dkw_radius", report.dkw_radius, ValueSource::kExact));
    rows.push_back(
        plain_row("w1", report.w1, ValueSource::kMonteCarlo, report.w1_std_error, true));
    rows.push_back(plain_row("mp_bound", report.mp_bound, ValueSource::kMonteCarlo,
                             report.mp_std_error, true));
    rows.push_back(plain_row("mp_eps", report.mp_eps, ValueSource::kMonteCarlo));
    rows.push_back(plain_row("replications", static_cast<double>(report.replications),
                             ValueSource::kExact));
    rows.push_back(
        plain_row("excluded", static_cast<double>(report.excluded), ValueSource::kExact));
    return rows;
}

}  // namespace oulab
