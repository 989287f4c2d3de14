#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

// Constant-free rate curves from the convergence theorems and the
// literature baselines, plus the log-log least-squares slope fitter used
// to compare them against empirical distances.
namespace oulab {

enum class RateCurve {
    kThm41,               // max(1/sqrt(T), T^2/n^2)
    kThm42,               // max(1/sqrt(T), sqrt(T/n), sqrt(T^3/n^2))
    kThm43,               // max(1/sqrt(T), T^2/n^2)
    kBishwalAmce,         // max(sqrt(log T / T), T^4/(n^2 log T))
    kBbAmleHat,           // max(sqrt(log T / T), T^2/(n log T))
    kBbAmleBar,           // max(sqrt(log T / T), T^4/(n^2 log T))
    kWassersteinAmce,     // max(1/sqrt(T), T^2/n^2)
    kWassersteinAmleHat,  // max(1/sqrt(T), sqrt(T^3/n^2))
};

const char* to_string(RateCurve curve);

// Largest term of the curve at (T, n), without the unknown constant.
// Log-bearing curves are undefined at T <= 1.
double eval_rate(RateCurve curve, double t_horizon, double n);

// Index (0-based) of the term attaining the max, for regime identification.
int rate_argmax_term(RateCurve curve, double t_horizon, double n);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> points;  // (log x, log y)
};

// Ordinary least squares on (log x, log y). Throws on fewer than two
// distinct x values ("degenerate design") or non-positive data.
SlopeFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace oulab
