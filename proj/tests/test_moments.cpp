#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "oulab/moments.hpp"
#include "oulab/process.hpp"
#include "oulab/rng.hpp"
#include "oulab/sampler.hpp"

using namespace oulab;

namespace {

double relative_gap(double a, double b) {
    return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

CovarianceMatrix random_psd(std::mt19937_64& gen, int m) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = normal(gen);
    CovarianceMatrix cov;
    cov.entries = a * a.transpose();
    return cov;
}

// Var(x' A x) = 2 tr((A Sigma)^2) for centered Gaussian x; used as the
// exact cross-check for the Monte Carlo L2 norms.
double general_quadform_variance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma) {
    const Eigen::MatrixXd prod = a * sigma;
    return 2.0 * prod.cwiseProduct(prod.transpose()).sum();
}

// literal pre-telescoping double sum for the Lambda cross term
double cross_term_double_sum(double theta, double delta, std::size_t n) {
    const double t_horizon = static_cast<double>(n) * delta;
    double outer = 0.0;
    for (std::size_t j = 2; j <= n; ++j) {
        double inner = 0.0;
        for (std::size_t i = 1; i < j; ++i) {
            const double ti = static_cast<double>(i) * delta;
            const double tprev = static_cast<double>(i - 1) * delta;
            inner += std::exp(theta * (ti + tprev)) * (1.0 - std::exp(-2.0 * theta * tprev));
        }
        outer += std::exp(-2.0 * theta * static_cast<double>(j - 1) * delta) * inner;
    }
    return t_horizon / theta -
           (delta / theta) * (1.0 - std::exp(-2.0 * theta * delta)) * outer;
}

}  // namespace

TEST_CASE("chi-square-1 cumulants from both engines") {
    CovarianceMatrix cov;
    cov.entries = Eigen::MatrixXd::Identity(1, 1);
    const double w[] = {1.0};

    const CumulantSet trace = quadratic_form_cumulants(cov, w);
    CHECK(trace.mean == doctest::Approx(1.0));
    CHECK(trace.kappa2 == doctest::Approx(2.0));
    CHECK(trace.kappa3 == doctest::Approx(8.0));
    CHECK(trace.kappa4 == doctest::Approx(48.0));

    const CumulantSet oracle = isserlis_oracle(cov, w);
    CHECK(oracle.mean == doctest::Approx(trace.mean));
    CHECK(oracle.kappa2 == doctest::Approx(trace.kappa2));
    CHECK(oracle.kappa3 == doctest::Approx(trace.kappa3));
    CHECK(oracle.kappa4 == doctest::Approx(trace.kappa4));
}

TEST_CASE("zero weights zero every cumulant") {
    CovarianceMatrix cov;
    cov.entries = Eigen::MatrixXd::Identity(3, 3);
    const double w[] = {0.0, 0.0, 0.0};
    for (const CumulantSet& c : {quadratic_form_cumulants(cov, w), isserlis_oracle(cov, w)}) {
        CHECK(c.mean == 0.0);
        CHECK(c.kappa2 == 0.0);
        CHECK(c.kappa3 == 0.0);
        CHECK(c.kappa4 == 0.0);
    }
}

TEST_CASE("independent coordinates add cumulants") {
    CovarianceMatrix cov;
    cov.entries = Eigen::MatrixXd::Identity(2, 2);
    const double w[] = {1.0, 1.0};
    const CumulantSet c = quadratic_form_cumulants(cov, w);
    CHECK(c.kappa3 == doctest::Approx(16.0));
    CHECK(isserlis_oracle(cov, w).kappa3 == doctest::Approx(16.0));
}

TEST_CASE("trace engine agrees with the Isserlis oracle on random instances") {
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> weight(-1.5, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + static_cast<int>(gen() % 5);
        const CovarianceMatrix cov = random_psd(gen, m);
        std::vector<double> w(static_cast<std::size_t>(m));
        for (double& wi : w) wi = weight(gen);

        const CumulantSet a = quadratic_form_cumulants(cov, w);
        const CumulantSet b = isserlis_oracle(cov, w);
        CHECK(relative_gap(a.mean, b.mean) < 1e-10);
        CHECK(relative_gap(a.kappa2, b.kappa2) < 1e-10);
        CHECK(relative_gap(a.kappa3, b.kappa3) < 1e-10);
        CHECK(relative_gap(a.kappa4, b.kappa4) < 1e-10);
    }
}

TEST_CASE("oracle and engine size guards") {
    std::mt19937_64 gen(5);
    const CovarianceMatrix big = random_psd(gen, 7);
    std::vector<double> w(7, 1.0);
    CHECK_THROWS_WITH_AS(isserlis_oracle(big, w), doctest::Contains("oracle size exceeded"),
                         std::invalid_argument);
    const CovarianceMatrix ok = random_psd(gen, 3);
    std::vector<double> bad_w(2, 1.0);
    CHECK_THROWS_AS(quadratic_form_cumulants(ok, bad_w), std::invalid_argument);
}

TEST_CASE("F_1(Z) reduces to a centered chi-square") {
    const OuParams params(0.5);
    const SamplingGrid grid(1, 1.0);
    const CumulantSet c = fn_z_cumulants(params, grid);
    CHECK(c.mean == doctest::Approx(0.0));
    CHECK(c.kappa2 == doctest::Approx(2.0));
    CHECK(c.kappa3 == doctest::Approx(8.0));
    CHECK(c.kappa4 == doctest::Approx(48.0));
    CHECK(variance_gap_fn_z(params, grid) == doctest::Approx(2.0));  // |2 - 1/(2 theta^3)|
}

TEST_CASE("kappa2 of F_n(Z) approaches 1/(2 theta^3) in the joint limit") {
    // the two error terms delta^2/(6 theta) and 1/(4 theta^4 n delta) can
    // cancel, so only the absolute gap is asserted, not monotonicity
    const OuParams params(1.0);
    const double fine = variance_gap_fn_z(params, SamplingGrid(4096, 0.02));
    CHECK(fine < 0.01);
    const CumulantSet c = fn_z_cumulants(params, SamplingGrid(4096, 0.02));
    CHECK(c.kappa2 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("kappa2 matches an independent entrywise trace") {
    const OuParams params(0.8);
    const SamplingGrid grid(64, 0.1);
    const CovarianceMatrix cov = build_stationary_covariance(params, grid, grid.n);
    double tr2 = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i)
        for (std::size_t j = 0; j < grid.n; ++j)
            tr2 += cov.entries(i, j) * cov.entries(j, i);
    const double w = std::sqrt(grid.horizon()) / static_cast<double>(grid.n);
    const CumulantSet c = fn_z_cumulants(params, grid);
    CHECK(relative_gap(c.kappa2, 2.0 * w * w * tr2) < 1e-12);
}

TEST_CASE("third cumulant of F_n(Z) scales like 1/sqrt(T) at fixed delta") {
    // A (n delta)^{-3/2} envelope is sometimes quoted for this cumulant;
    // the exact engine disagrees. kappa3 * sqrt(T) is the stable
    // combination at fixed delta, settling at 3/(2 theta^5).
    const OuParams params(1.0);
    double prev = 0.0;
    for (std::size_t n : {64, 128, 256, 512}) {
        const SamplingGrid grid(n, 0.1);
        const CumulantSet c = fn_z_cumulants(params, grid);
        const double scaled = c.kappa3 * std::sqrt(grid.horizon());
        CHECK(scaled > 1.2);
        CHECK(scaled < 1.6);
        CHECK(scaled > prev);  // increases toward the 3/(2 theta^5) limit
        prev = scaled;
    }
}

TEST_CASE("variance gap ratio at delta = 0.05 stays in the observed band") {
    // ratio of the exact gap to (delta^2 + 1/(n delta)); the band is what the
    // exact computation itself produces across the dyadic range
    const OuParams params(1.0);
    const double delta = 0.05;
    double lo = 1e9, hi = 0.0;
    for (std::size_t n = 128; n <= 4096; n *= 2) {
        const SamplingGrid grid(n, delta);
        const double ratio = variance_gap_fn_z(params, grid) /
                             (delta * delta + 1.0 / (static_cast<double>(n) * delta));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        CHECK(ratio > 0.10);
        CHECK(ratio < 0.25);
    }
    CHECK(hi / lo < 2.5);
}

TEST_CASE("mean gap closed form") {
    const OuParams params(1.0);

    // n = 1: only the t_0 = 0 term, contributing -1/(2 theta n)
    CHECK(mean_gap_and_a_t(params, SamplingGrid(1, 0.3)).mean_gap == doctest::Approx(-0.5));

    const SamplingGrid grid(2, std::log(2.0));
    CHECK(mean_gap_and_a_t(params, grid).mean_gap == doctest::Approx(-0.3125).epsilon(1e-14));
}

TEST_CASE("mean gap equals direct summation for large n") {
    const OuParams params(0.7);
    for (std::size_t n : {10UL, 1000UL, 100000UL}) {
        const SamplingGrid grid(n, 0.05);
        double direct = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            direct += std::exp(-2.0 * params.theta * grid.time(i));
        direct *= -1.0 / (2.0 * params.theta * static_cast<double>(n));
        CHECK(relative_gap(mean_gap_and_a_t(params, grid).mean_gap, direct) < 1e-13);
    }
}

TEST_CASE("a_T stays bounded as T grows at fixed delta") {
    const OuParams params(1.0);
    double lo = 1e300, hi = 0.0;
    for (std::size_t n : {100UL, 1000UL, 10000UL, 100000UL}) {
        const double a = std::abs(mean_gap_and_a_t(params, SamplingGrid(n, 0.1)).a_t);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    CHECK(hi < 1.0);
    CHECK(hi / lo < 1.05);  // already settled on this range
}

TEST_CASE("expected S_n closed form matches direct summation") {
    const OuParams params(1.3);
    const SamplingGrid grid(500, 0.04);
    double direct = 0.0;
    for (std::size_t i = 1; i <= grid.n; ++i) {
        const double t = grid.time(i - 1);
        direct += (1.0 - std::exp(-2.0 * params.theta * t)) / (2.0 * params.theta);
    }
    direct *= grid.delta;
    CHECK(relative_gap(expected_s_n(params, grid), direct) < 1e-13);
}

TEST_CASE("lambda cross closed forms: degenerate n = 1") {
    const OuParams params(1.0);
    const SamplingGrid grid(1, 0.5);
    const LambdaCrossForms f = lambda_cross_closed_forms(params, grid);
    CHECK(f.b_nt == 0.0);
    CHECK(f.a_nt == doctest::Approx(0.5));  // delta / theta
    CHECK(f.cross_term == doctest::Approx(0.5));
}

TEST_CASE("lambda cross closed form equals the literal double sum") {
    const LambdaCrossForms f = lambda_cross_closed_forms(OuParams(1.0), SamplingGrid(4, 0.5));
    CHECK(relative_gap(f.cross_term, cross_term_double_sum(1.0, 0.5, 4)) < 1e-12);

    std::mt19937_64 gen(2023);
    std::uniform_real_distribution<double> theta_dist(0.3, 3.0);
    std::uniform_real_distribution<double> delta_dist(0.02, 0.8);
    for (int trial = 0; trial < 10; ++trial) {
        const double theta = theta_dist(gen);
        const double delta = delta_dist(gen);
        const std::size_t n = 1 + gen() % 200;
        const LambdaCrossForms forms =
            lambda_cross_closed_forms(OuParams(theta), SamplingGrid(n, delta));
        CHECK(relative_gap(forms.cross_term, cross_term_double_sum(theta, delta, n)) < 1e-10);
    }
}

TEST_CASE("a_nT is bounded by C (n delta^2 + delta + 1) across the grid") {
    const OuParams params(1.0);
    double worst = 0.0;
    for (std::size_t n : {10UL, 100UL, 1000UL, 10000UL})
        for (double delta : {0.02, 0.1, 0.5}) {
            const LambdaCrossForms f = lambda_cross_closed_forms(params, SamplingGrid(n, delta));
            const double envelope = static_cast<double>(n) * delta * delta + delta + 1.0;
            worst = std::max(worst, std::abs(f.a_nt) / envelope);
        }
    CHECK(worst < 2.0);
}

TEST_CASE("cross term agrees with a coupled Monte Carlo estimate") {
    const OuParams params(1.0);
    const SamplingGrid grid(4, 0.5);
    const LambdaCrossForms f = lambda_cross_closed_forms(params, grid);

    const std::uint64_t reps = 200000;
    const double r = std::exp(-params.theta * grid.delta);
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
        const PathSample path = sample_x_only(params, grid, {424242, rep});
        double s = 0.0, lam = 0.0;
        for (std::size_t i = 1; i <= grid.n; ++i) {
            s += path.x[i - 1] * path.x[i - 1];
            lam += path.x[i - 1] * (path.x[i] - r * path.x[i - 1]);
        }
        const double value = lam * grid.delta * s;
        sum += value;
        sum_sq += value * value;
    }
    const double mean = sum / static_cast<double>(reps);
    const double sd = std::sqrt(sum_sq / static_cast<double>(reps) - mean * mean);
    const double estimate = grid.horizon() / params.theta - 2.0 * params.theta * mean;
    const double se = 2.0 * params.theta * sd / std::sqrt(static_cast<double>(reps));
    CHECK(std::abs(estimate - f.cross_term) < 4.0 * se);
}

TEST_CASE("k-statistics of a known-cumulant sample land within their standard errors") {
    // centered exponential mixture is overkill; a plain Gaussian has
    // kappa_2 = v and all higher cumulants zero
    const double v = 2.5;
    ReplicationStream rng({77, 0});
    std::vector<double> sample(200000);
    for (double& s : sample) s = std::sqrt(v) * rng.next_normal();

    const KStatistics k = sample_k_statistics(sample);
    std::vector<double> kappa(8, 0.0);
    kappa[1] = v;  // kappa_2 in the 1-based layout kappa_1..kappa_8
    const KStatStdErrors se = k_statistic_std_errors(kappa, sample.size());
    CHECK(std::abs(k.k2 - v) < 4.0 * se.k2);
    CHECK(std::abs(k.k3) < 4.0 * se.k3);
    CHECK(std::abs(k.k4) < 4.0 * se.k4);

    const KStatStdErrors batch = k_statistic_batch_std_errors(sample);
    CHECK(batch.k2 == doctest::Approx(se.k2).epsilon(0.5));
    CHECK(batch.k3 == doctest::Approx(se.k3).epsilon(0.5));
    CHECK(batch.k4 == doctest::Approx(se.k4).epsilon(0.5));
}

TEST_CASE("Monte Carlo cumulants of F_n(Z) match the exact engine") {
    const OuParams params(1.0);
    const SamplingGrid grid(16, 0.25);
    const std::vector<double> kappa = fn_z_cumulants_upto(params, grid, 8);

    const std::uint64_t reps = 200000;
    std::vector<double> sample(reps);
    const double w = std::sqrt(grid.horizon()) / static_cast<double>(grid.n);
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
        double acc = 0.0;
        for_each_coupled_observation(params, grid, {31001, rep},
                                     [&](std::size_t i, double, double z) {
                                         if (i < grid.n) acc += z * z;
                                     });
        sample[rep] = w * acc - std::sqrt(grid.horizon()) * params.stationary_variance();
    }

    const KStatistics k = sample_k_statistics(sample);
    const KStatStdErrors se = k_statistic_std_errors(
        std::span<const double>(kappa.data() + 1, 8), reps);
    CHECK(std::abs(k.k2 - kappa[2]) < 4.0 * se.k2);
    CHECK(std::abs(k.k3 - kappa[3]) < 4.0 * se.k3);
    CHECK(std::abs(k.k4 - kappa[4]) < 4.0 * se.k4);

    const CumulantSet mc = monte_carlo_cumulants(sample);
    CHECK(mc.source == ValueSource::kMonteCarlo);
    REQUIRE(mc.std_errors.has_value());
    CHECK(mc.kappa3 == k.k3);
    CHECK(std::abs(mc.kappa2 - kappa[2]) < 5.0 * (*mc.std_errors)[1]);
}

TEST_CASE("bound components: exact fields and application-specific zeros") {
    const OuParams params(1.0);
    const SamplingGrid grid(256, 0.1);
    McBudget budget{20000, 515151, 2};

    const BoundComponents amce = bound_components_for(Application::kAmce, params, grid, budget);
    CHECK(amce.rho == doctest::Approx(0.5));
    CHECK(amce.sigma == doctest::Approx(std::sqrt(0.5)));
    CHECK(amce.a_norm.value == 0.0);
    CHECK(amce.a_scalar.value ==
          doctest::Approx(mean_gap_and_a_t(params, grid).a_t).epsilon(1e-15));
    CHECK(amce.kappa3_v.source == ValueSource::kExact);
    CHECK(amce.variance_gap.source == ValueSource::kExact);

    const BoundComponents hat = bound_components_for(Application::kAmleHat, params, grid, budget);
    CHECK(hat.a_scalar.value == 0.0);
    CHECK(hat.a_norm.source == ValueSource::kMonteCarlo);
    CHECK(hat.a_norm.value > 0.0);

    const BoundComponents bar = bound_components_for(Application::kAmleBar, params, grid, budget);
    CHECK(bar.a_scalar.value == 0.0);
    CHECK(bar.a_norm.source == ValueSource::kClosedForm);
    CHECK(bar.a_norm.value > 0.0);

    // kappa_3(V/sigma), kappa_4(V/sigma) agree with the normalized engine values
    const std::vector<double> kappa = fn_z_cumulants_upto(params, grid, 4);
    const double s = amce.sigma;
    CHECK(relative_gap(amce.kappa3_v.value, kappa[3] / (s * s * s)) < 1e-12);
    CHECK(relative_gap(amce.kappa4_v.value, kappa[4] / (s * s * s * s)) < 1e-12);
}

TEST_CASE("Monte Carlo R and A norms match exact quadratic-form oracles") {
    const OuParams params(1.0);
    const SamplingGrid grid(32, 0.2);
    McBudget budget{400000, 626262, 2};

    const BoundComponents hat = bound_components_for(Application::kAmleHat, params, grid, budget);

    // ||R_T||^2 = T^2 Var(f_n(X) - f_n(Z)); the difference is the quadratic
    // form with matrix A over (Z_{t_0}, ..., Z_{t_{n-1}})
    {
        const std::size_t n = grid.n;
        const CovarianceMatrix sigma = build_stationary_covariance(params, grid, n);
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        double diag0 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            diag0 += std::exp(-2.0 * params.theta * grid.time(i));
        a(0, 0) = diag0 / static_cast<double>(n) - 2.0 / static_cast<double>(n);
        for (std::size_t i = 1; i < n; ++i) {
            const double c = -std::exp(-params.theta * grid.time(i)) / static_cast<double>(n);
            a(0, i) = c;
            a(i, 0) = c;
        }
        const double var = general_quadform_variance(a, sigma.entries);
        const double exact_r = grid.horizon() * std::sqrt(var);
        CHECK(std::abs(hat.r_norm.value - exact_r) < 5.0 * hat.r_norm.std_error + 1e-12);
    }

    // ||A_T||^2 = 2 theta E[(quad + theta E S_n)^2] with quad a quadratic
    // form over (X_{t_0}, ..., X_{t_n})
    {
        const std::size_t pts = grid.n + 1;
        const CovarianceMatrix sigma_x = build_x_covariance(params, grid, pts);
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(pts, pts);
        for (std::size_t i = 1; i <= grid.n; ++i) {
            q(i - 1, i) += 0.5;
            q(i, i - 1) += 0.5;
            q(i - 1, i - 1) -= 1.0;
        }
        const Eigen::MatrixXd prod = q * sigma_x.entries;
        const double mean_quad = prod.trace();
        const double var_quad = general_quadform_variance(q, sigma_x.entries);
        const double shift = mean_quad + params.theta * expected_s_n(params, grid);
        const double exact_a =
            std::sqrt(2.0 * params.theta * (var_quad + shift * shift));
        CHECK(std::abs(hat.a_norm.value - exact_a) < 5.0 * hat.a_norm.std_error + 1e-12);
    }
}

TEST_CASE("R norm stays bounded across horizon doublings at fixed delta") {
    // ||f_n(X) - f_n(Z)|| decays like 1/(n delta), so R_T = T (centered
    // difference) should neither grow nor vanish as T doubles
    const OuParams params(1.0);
    double lo = 1e300, hi = 0.0;
    for (std::size_t n : {256UL, 512UL, 1024UL, 2048UL}) {
        const SamplingGrid grid(n, 0.05);
        McBudget budget{40000, 848484, 2};
        const BoundComponents c =
            bound_components_for(Application::kAmce, params, grid, budget);
        lo = std::min(lo, c.r_norm.value);
        hi = std::max(hi, c.r_norm.value);
    }
    CHECK(lo > 0.0);
    CHECK(hi / lo < 3.0);
}

TEST_CASE("cap overflow downgrades exact fields to Monte Carlo with tags") {
    const OuParams params(1.0);
    const SamplingGrid grid(96, 0.1);
    McBudget budget{60000, 737373, 2};
    const BoundComponents out =
        bound_components_for(Application::kAmce, params, grid, budget, /*cap=*/64);
    CHECK(out.kappa3_v.source == ValueSource::kMonteCarlo);
    CHECK(out.kappa4_v.source == ValueSource::kMonteCarlo);
    CHECK(out.variance_gap.source == ValueSource::kMonteCarlo);
    CHECK(out.kappa3_v.std_error > 0.0);

    // the downgraded values still agree with the exact engine within errors
    const std::vector<double> kappa = fn_z_cumulants_upto(params, grid, 8);
    const double s3 = std::pow(out.sigma, 3);
    const double s4 = std::pow(out.sigma, 4);
    CHECK(std::abs(out.kappa3_v.value - kappa[3] / s3) < 5.0 * out.kappa3_v.std_error);
    CHECK(std::abs(out.kappa4_v.value - kappa[4] / s4) < 5.0 * out.kappa4_v.std_error);
    CHECK(std::abs(out.variance_gap.value - variance_gap_fn_x(params, grid)) <
          5.0 * out.variance_gap.std_error + 1e-4);
}
