#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oulab/moments.hpp"
#include "oulab/process.hpp"
#include "oulab/ratecurves.hpp"
#include "oulab/report.hpp"

// Configuration-driven experiment plans: one JSON document describes the
// estimator, the (n, delta) schedule, the replication budget and the
// requested outputs. Runs are reproducible byte-for-byte from
// (plan, master_seed) for any worker count.
namespace oulab {

enum class OutputFormat { kCsv, kJson };

struct GridPoint {
    std::size_t n = 0;
    double delta = 0.0;
};

struct ExperimentPlan {
    Application estimator = Application::kAmce;
    double theta = 1.0;
    std::vector<GridPoint> grid;
    std::uint64_t replications = 0;
    std::uint64_t master_seed = 0;
    double confidence = 0.95;
    std::uint64_t mc_budget = 10000;
    bool want_ensembles = true;
    bool want_reports = true;
    bool want_rate_fits = true;
    std::vector<double> eps_grid;  // empty -> default 40-point log grid
    std::size_t exact_cap = kDefaultExactCap;
};

struct PlanDiagnostics {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }
};

// Parses and validates; diagnostics collect every problem found rather
// than stopping at the first.
ExperimentPlan parse_plan_text(const std::string& text, PlanDiagnostics& diagnostics);

ExperimentPlan load_plan_file(const std::string& path, PlanDiagnostics& diagnostics);

struct RateFitRow {
    std::string curve;
    SlopeFit fit;
    std::size_t n_points = 0;
};

struct PlanResult {
    std::vector<BoundReport> reports;
    std::vector<RateFitRow> fits;
    std::vector<std::string> files_written;
};

// Derived per-point seeds keep ensemble and component streams disjoint
// across grid points while remaining pure functions of the master seed.
std::uint64_t plan_point_seed(std::uint64_t master_seed, std::size_t point_index);
std::uint64_t plan_component_seed(std::uint64_t master_seed, std::size_t point_index);

PlanResult run_plan(const ExperimentPlan& plan, const std::string& out_dir, int workers,
                    OutputFormat format = OutputFormat::kCsv);

}  // namespace oulab
