#include "oulab/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace oulab {

namespace {

void check_path(const PathSample& path) {
    if (path.x.size() != path.grid.n + 1)
        throw std::invalid_argument("estimators: path must have n+1 points");
}

}  // namespace

double lambda_n_zeta_form(const PathSample& path, const OuParams& params) {
    check_path(path);
    const double theta = params.theta;
    double sum = 0.0;
    for (std::size_t i = 1; i <= path.grid.n; ++i) {
        const double ti = path.grid.time(i);
        const double tprev = path.grid.time(i - 1);
        const double zeta_i = std::exp(theta * ti) * path.x[i];
        const double zeta_prev = std::exp(theta * tprev) * path.x[i - 1];
        sum += std::exp(-theta * ti) * path.x[i - 1] * (zeta_i - zeta_prev);
    }
    return sum;
}

StatisticSet compute_statistics(const PathSample& path, const OuParams& params,
                                Indexing indexing) {
    check_path(path);
    const std::size_t n = path.grid.n;
    const double T = path.grid.horizon();
    const double r = std::exp(-params.theta * path.grid.delta);
    const double center = params.stationary_variance();

    StatisticSet stats;

    double sq_prev = 0.0;  // sum_{i=1..n} X_{t_{i-1}}^2
    for (std::size_t i = 1; i <= n; ++i) {
        const double xp = path.x[i - 1];
        const double xc = path.x[i];
        sq_prev += xp * xp;
        stats.quad_increment += xp * (xc - xp);
        stats.lambda_n += xp * (xc - r * xp);
    }
    stats.s_n = path.grid.delta * sq_prev;

    const std::size_t lo = (indexing == Indexing::kFromZero) ? 0 : 1;
    const std::size_t hi = (indexing == Indexing::kFromZero) ? n - 1 : n;
    double sq_window = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) sq_window += path.x[i] * path.x[i];
    stats.fn_x = sq_window / static_cast<double>(n);
    stats.Fn_x = std::sqrt(T) * (stats.fn_x - center);

    if (path.z) {
        double sq_z = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) sq_z += (*path.z)[i] * (*path.z)[i];
        stats.fn_z = sq_z / static_cast<double>(n);
        stats.Fn_z = std::sqrt(T) * (*stats.fn_z - center);
    }
    return stats;
}

std::optional<double> amce(const PathSample& path) {
    check_path(path);
    double sq = 0.0;
    for (std::size_t i = 1; i <= path.grid.n; ++i) sq += path.x[i] * path.x[i];
    const double denom = 2.0 * sq / static_cast<double>(path.grid.n);
    if (!(denom > 0.0)) return std::nullopt;
    return 1.0 / denom;
}

std::optional<double> amle_hat(const PathSample& path) {
    check_path(path);
    double sq_prev = 0.0;
    double quad = 0.0;
    for (std::size_t i = 1; i <= path.grid.n; ++i) {
        const double xp = path.x[i - 1];
        sq_prev += xp * xp;
        quad += xp * (path.x[i] - xp);
    }
    const double denom = path.grid.delta * sq_prev;
    if (!(denom > 0.0)) return std::nullopt;
    return -quad / denom;
}

std::optional<double> amle_bar(const PathSample& path) {
    check_path(path);
    double sq_prev = 0.0;
    for (std::size_t i = 1; i <= path.grid.n; ++i) sq_prev += path.x[i - 1] * path.x[i - 1];
    const double denom = path.grid.delta * sq_prev;
    if (!(denom > 0.0)) return std::nullopt;
    const double xT = path.x[path.grid.n];
    return -0.5 * (xT * xT - path.grid.horizon()) / denom;
}

double normalized_error(double estimate, const OuParams& params, const SamplingGrid& grid) {
    return std::sqrt(grid.horizon() / (2.0 * params.theta)) * (params.theta - estimate);
}

}  // namespace oulab
