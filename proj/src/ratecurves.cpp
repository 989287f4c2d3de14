#include "oulab/ratecurves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oulab {

const char* to_string(RateCurve curve) {
    switch (curve) {
        case RateCurve::kThm41: return "thm41";
        case RateCurve::kThm42: return "thm42";
        case RateCurve::kThm43: return "thm43";
        case RateCurve::kBishwalAmce: return "bishwal_amce";
        case RateCurve::kBbAmleHat: return "bb_amle_hat";
        case RateCurve::kBbAmleBar: return "bb_amle_bar";
        case RateCurve::kWassersteinAmce: return "wasserstein_amce";
        case RateCurve::kWassersteinAmleHat: return "wasserstein_amle_hat";
    }
    return "unknown";
}

namespace {

std::vector<double> rate_terms(RateCurve curve, double t, double n) {
    switch (curve) {
        case RateCurve::kThm41:
        case RateCurve::kThm43:
        case RateCurve::kWassersteinAmce:
            return {1.0 / std::sqrt(t), t * t / (n * n)};
        case RateCurve::kThm42:
            return {1.0 / std::sqrt(t), std::sqrt(t / n), std::sqrt(t * t * t / (n * n))};
        case RateCurve::kWassersteinAmleHat:
            return {1.0 / std::sqrt(t), std::sqrt(t * t * t / (n * n))};
        case RateCurve::kBishwalAmce:
        case RateCurve::kBbAmleBar:
            return {std::sqrt(std::log(t) / t), std::pow(t, 4) / (n * n * std::log(t))};
        case RateCurve::kBbAmleHat:
            return {std::sqrt(std::log(t) / t), t * t / (n * std::log(t))};
    }
    throw std::invalid_argument("rate_terms: unknown curve");
}

bool is_log_bearing(RateCurve curve) {
    return curve == RateCurve::kBishwalAmce || curve == RateCurve::kBbAmleHat ||
           curve == RateCurve::kBbAmleBar;
}

void check_domain(RateCurve curve, double t, double n) {
    if (n < 1.0) throw std::invalid_argument("eval_rate: n must be >= 1");
    if (is_log_bearing(curve)) {
        if (!(t > 1.0)) throw std::domain_error("undefined at T <= 1");
    } else if (!(t > 0.0)) {
        throw std::domain_error("eval_rate: T must be > 0");
    }
}

}  // namespace

double eval_rate(RateCurve curve, double t_horizon, double n) {
    check_domain(curve, t_horizon, n);
    const std::vector<double> terms = rate_terms(curve, t_horizon, n);
    return *std::max_element(terms.begin(), terms.end());
}

int rate_argmax_term(RateCurve curve, double t_horizon, double n) {
    check_domain(curve, t_horizon, n);
    const std::vector<double> terms = rate_terms(curve, t_horizon, n);
    return static_cast<int>(std::max_element(terms.begin(), terms.end()) - terms.begin());
}

SlopeFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit_loglog_slope: size mismatch");
    if (xs.size() < 2) throw std::invalid_argument("fit_loglog_slope: need at least 2 points");

    SlopeFit fit;
    fit.points.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("fit_loglog_slope: data must be positive");
        fit.points.emplace_back(std::log(xs[i]), std::log(ys[i]));
    }

    const double n = static_cast<double>(fit.points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [lx, ly] : fit.points) {
        mx += lx;
        my += ly;
    }
    mx /= n;
    my /= n;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [lx, ly] : fit.points) {
        sxx += (lx - mx) * (lx - mx);
        sxy += (lx - mx) * (ly - my);
        syy += (ly - my) * (ly - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("degenerate design: all x equal");

    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (const auto& [lx, ly] : fit.points) {
        const double resid = ly - (fit.intercept + fit.slope * lx);
        ss_res += resid * resid;
    }
    fit.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

}  // namespace oulab
