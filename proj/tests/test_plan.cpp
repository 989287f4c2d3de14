#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oulab/plan.hpp"

using namespace oulab;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kSmallPlan = R"({
  "estimator": "amce",
  "theta": 1.0,
  "grid": [{"n": 60, "delta": 0.1}, {"n": 120, "delta": 0.1}],
  "replications": 3000,
  "master_seed": 20240811,
  "mc_budget": 2000,
  "outputs": ["ensembles", "reports", "rate_fits"]
})";

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("oulab_test_" + tag);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("plan parsing applies documented defaults") {
    PlanDiagnostics diag;
    const ExperimentPlan plan = parse_plan_text(
        R"({"estimator":"amle_bar","grid":[{"n":10,"delta":0.5}],"replications":5})", diag);
    CHECK(diag.ok());
    CHECK(plan.theta == 1.0);
    CHECK(plan.confidence == 0.95);
    CHECK(plan.estimator == Application::kAmleBar);
    // omitted defaults are surfaced as warnings
    CHECK(diag.warnings.size() >= 1);
}

TEST_CASE("plan validation reports missing and invalid fields by name") {
    PlanDiagnostics diag;
    parse_plan_text(R"({"grid":[{"n":10,"delta":0.5}],"replications":5})", diag);
    REQUIRE_FALSE(diag.ok());
    CHECK(diag.errors.front().find("estimator") != std::string::npos);

    PlanDiagnostics diag_m0;
    parse_plan_text(
        R"({"estimator":"amce","grid":[{"n":10,"delta":0.5}],"replications":0})", diag_m0);
    REQUIRE_FALSE(diag_m0.ok());
    CHECK(diag_m0.errors.front().find("replications") != std::string::npos);

    PlanDiagnostics diag_parse;
    parse_plan_text("{not json", diag_parse);
    REQUIRE_FALSE(diag_parse.ok());
    CHECK(diag_parse.errors.front().find("parse error at byte") != std::string::npos);
}

TEST_CASE("amle_hat plans warn when T^3/n^2 exceeds one") {
    PlanDiagnostics diag;
    // n = 20, delta = 1 -> T = 20, T^3/n^2 = 20
    parse_plan_text(
        R"({"estimator":"amle_hat","grid":[{"n":20,"delta":1.0}],"replications":5,"master_seed":1,"theta":1.0})",
        diag);
    CHECK(diag.ok());
    bool found = false;
    for (const std::string& w : diag.warnings)
        if (w.find("T^3/n^2") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("grid rules expand to (n, delta) schedules") {
    PlanDiagnostics diag;
    const ExperimentPlan fixed = parse_plan_text(
        R"({"estimator":"amce","grid_rule":{"T":[10,20],"delta":0.1},"replications":5,"master_seed":1,"theta":1.0})",
        diag);
    REQUIRE(diag.ok());
    REQUIRE(fixed.grid.size() == 2);
    CHECK(fixed.grid[0].n == 100);
    CHECK(fixed.grid[1].n == 200);

    PlanDiagnostics diag2;
    const ExperimentPlan ruled = parse_plan_text(
        R"({"estimator":"amce","grid_rule":{"T":[16,64],"delta_coeff":1.0,"delta_gamma":0.5},"replications":5,"master_seed":1,"theta":1.0})",
        diag2);
    REQUIRE(diag2.ok());
    REQUIRE(ruled.grid.size() == 2);
    CHECK(ruled.grid[0].delta == doctest::Approx(0.25));   // 16^{-1/2}
    CHECK(ruled.grid[0].n == 64);                          // T/delta
    CHECK(ruled.grid[1].delta == doctest::Approx(0.125));  // 64^{-1/2}
    CHECK(ruled.grid[1].n == 512);
}

TEST_CASE("run_plan writes the documented artifacts with exact headers") {
    PlanDiagnostics diag;
    const ExperimentPlan plan = parse_plan_text(kSmallPlan, diag);
    REQUIRE(diag.ok());

    const fs::path dir = fresh_dir("artifacts");
    const PlanResult result = run_plan(plan, dir.string(), 2);
    REQUIRE(result.reports.size() == 2);

    const std::string reports = read_file(dir / "reports.csv");
    CHECK(reports.rfind("estimator,theta,n,delta,T,field,value,source,stderr\n", 0) == 0);
    CHECK(reports.find("amce,1,60,0.1,6,") != std::string::npos);
    CHECK(reports.find(",d_kol,") != std::string::npos);
    CHECK(reports.find(",monte_carlo,") != std::string::npos);

    const std::string fits = read_file(dir / "rate_fits.csv");
    CHECK(fits.rfind("estimator,curve,slope,intercept,r_squared,n_points\n", 0) == 0);
    CHECK(fits.find("amce,d_kol_empirical,") != std::string::npos);
    CHECK(fits.find("amce,thm41,") != std::string::npos);
    CHECK(fits.find("amce,wasserstein_amce,") != std::string::npos);

    const std::string ensemble = read_file(dir / "ensemble_point00.csv");
    CHECK(ensemble.rfind("replication,value,excluded\n", 0) == 0);
    // header plus one row per replication
    CHECK(std::count(ensemble.begin(), ensemble.end(), '\n') == 3001);

    fs::remove_all(dir);
}

TEST_CASE("reruns and worker counts leave the bytes unchanged") {
    PlanDiagnostics diag;
    const ExperimentPlan plan = parse_plan_text(kSmallPlan, diag);
    REQUIRE(diag.ok());

    const fs::path dir1 = fresh_dir("det1");
    const fs::path dir2 = fresh_dir("det2");
    const fs::path dir3 = fresh_dir("det3");
    run_plan(plan, dir1.string(), 1);
    run_plan(plan, dir2.string(), 3);
    run_plan(plan, dir3.string(), 3);  // rerun with identical settings

    for (const char* name : {"reports.csv", "rate_fits.csv", "ensemble_point00.csv",
                             "ensemble_point01.csv"}) {
        const std::string a = read_file(dir1 / name);
        CHECK(a == read_file(dir2 / name));
        CHECK(a == read_file(dir3 / name));
    }
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    fs::remove_all(dir3);
}

TEST_CASE("json output format mirrors the csv content") {
    PlanDiagnostics diag;
    ExperimentPlan plan = parse_plan_text(kSmallPlan, diag);
    REQUIRE(diag.ok());
    plan.grid.resize(1);

    const fs::path dir = fresh_dir("json");
    run_plan(plan, dir.string(), 2, OutputFormat::kJson);
    CHECK(fs::exists(dir / "reports.json"));
    CHECK(fs::exists(dir / "ensemble_point00.json"));
    const std::string text = read_file(dir / "reports.json");
    CHECK(text.find("\"field\": \"d_kol\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("bound_report composes exact components with empirical distances") {
    const OuParams params(1.0);
    const SamplingGrid grid(1024, 0.05);
    McBudget budget{4000, 112, 2};
    const BoundReport r =
        bound_report(Application::kAmce, params, grid, 20000, budget);

    CHECK(r.components.kappa3_v.source == ValueSource::kExact);
    CHECK(r.components.kappa4_v.source == ValueSource::kExact);
    CHECK(r.components.variance_gap.source == ValueSource::kExact);
    CHECK(r.components.a_scalar.value ==
          doctest::Approx(mean_gap_and_a_t(params, grid).a_t).epsilon(1e-15));
    CHECK(r.theorem_rate ==
          doctest::Approx(eval_rate(RateCurve::kThm41, grid.horizon(), 1024.0)));
    CHECK(r.d_statistic > 0.0);
    CHECK(r.dkw_radius > 0.0);
    CHECK(r.w1 > 0.0);
    CHECK(r.mp_bound >= r.d_statistic - r.dkw_radius);
    CHECK(r.excluded == 0);
}

TEST_CASE("run_plan rejects invalid plans outright") {
    ExperimentPlan plan;
    plan.replications = 0;
    plan.grid = {{10, 0.1}};
    CHECK_THROWS_AS(run_plan(plan, (fs::temp_directory_path() / "oulab_never").string(), 1),
                    std::invalid_argument);
}
