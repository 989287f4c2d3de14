#include "oulab/distance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oulab {

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

namespace {

// Acklam's rational approximation, then Halley refinement through erfc;
// accurate to full double precision for p in (0,1).
double normal_quantile_guess(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// antiderivative of Phi
double big_phi(double z) { return z * normal_cdf(z) + normal_pdf(z); }

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile: p must be in (0,1)");
    double x = normal_quantile_guess(p);
    for (int it = 0; it < 2; ++it) {
        const double e = normal_cdf(x) - p;
        const double u = e / normal_pdf(x);
        x = x - u / (1.0 + 0.5 * x * u);  // Halley step
    }
    return x;
}

KsResult ks_statistic_vs_normal(const SampleEnsemble& sample, double confidence) {
    const std::size_t m = sample.values.size();
    if (m < 1) throw std::invalid_argument("ks_statistic_vs_normal: empty sample");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("ks_statistic_vs_normal: confidence must be in (0,1)");

    std::vector<double> sorted(sample.values);
    std::sort(sorted.begin(), sorted.end());

    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double phi = normal_cdf(sorted[i]);
        const double upper = static_cast<double>(i + 1) / static_cast<double>(m) - phi;
        const double lower = phi - static_cast<double>(i) / static_cast<double>(m);
        d = std::max({d, upper, lower});
    }
    const double alpha = 1.0 - confidence;
    const double radius = std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(m)));
    return {d, radius};
}

double wasserstein_empirical_vs_normal(const SampleEnsemble& sample) {
    const std::size_t m = sample.values.size();
    if (m < 1) throw std::invalid_argument("wasserstein_empirical_vs_normal: empty sample");

    constexpr double kCut = 10.0;
    std::vector<double> sorted(sample.values);
    std::sort(sorted.begin(), sorted.end());

    // Piece boundaries inside [-kCut, kCut]; the empirical CDF level on
    // (-inf, x_(1)) is 0, between order statistics k/m, and 1 above x_(m).
    double total = 0.0;
    double left = -kCut;
    std::size_t k = 0;  // values strictly below `left` among sorted
    while (k < m && sorted[k] <= left) ++k;

    auto segment = [&](double a, double b, double level) {
        if (b <= a) return;
        // integral of |level - Phi| over [a, b]; Phi crosses `level` at most once
        if (level <= 0.0) {
            total += big_phi(b) - big_phi(a);
            return;
        }
        if (level >= 1.0) {
            total += (b - a) - (big_phi(b) - big_phi(a));
            return;
        }
        const double zstar = normal_quantile(level);
        if (zstar <= a) {
            total += (big_phi(b) - big_phi(a)) - level * (b - a);
        } else if (zstar >= b) {
            total += level * (b - a) - (big_phi(b) - big_phi(a));
        } else {
            total += level * (zstar - a) - (big_phi(zstar) - big_phi(a));
            total += (big_phi(b) - big_phi(zstar)) - level * (b - zstar);
        }
    };

    while (k < m && sorted[k] < kCut) {
        const double next = sorted[k];
        segment(left, next, static_cast<double>(k) / static_cast<double>(m));
        left = next;
        ++k;
    }
    segment(left, kCut, static_cast<double>(k) / static_cast<double>(m));
    return total;
}

std::vector<double> default_eps_grid() {
    // 40 log-spaced points in [1e-4, 1]
    std::vector<double> grid(40);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(grid.size() - 1);
        grid[i] = std::pow(10.0, -4.0 * (1.0 - t));
    }
    return grid;
}

MpBound michel_pfanzagl_bound(const SampleEnsemble& numerator, const SampleEnsemble& denominator,
                              std::span<const double> eps_grid) {
    if (eps_grid.empty()) throw std::invalid_argument("michel_pfanzagl_bound: empty eps grid");
    for (double e : eps_grid)
        if (!(e > 0.0)) throw std::invalid_argument("michel_pfanzagl_bound: eps must be > 0");

    const double d_num = ks_statistic_vs_normal(numerator).d_statistic;

    std::vector<double> dev(denominator.values.size());
    for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::abs(denominator.values[i] - 1.0);
    std::sort(dev.begin(), dev.end());

    const double m = static_cast<double>(dev.size());
    MpBound best{std::numeric_limits<double>::infinity(), 0.0};
    for (double eps : eps_grid) {
        // P{|Z-1| > eps} empirically
        const auto it = std::upper_bound(dev.begin(), dev.end(), eps);
        const double tail = static_cast<double>(dev.end() - it) / m;
        const double bound = d_num + tail + eps;
        if (bound < best.best_bound) best = {bound, eps};
    }
    return best;
}

}  // namespace oulab
