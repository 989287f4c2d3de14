// Command-line front door for the OU drift-estimation laboratory.
//
// Subcommands: simulate, estimate, cumulants, distance, report, run,
// validate. Exit codes: 0 success, 1 validation failure, 2 runtime failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "oulab/distance.hpp"
#include "oulab/ensemble.hpp"
#include "oulab/estimators.hpp"
#include "oulab/format.hpp"
#include "oulab/moments.hpp"
#include "oulab/plan.hpp"
#include "oulab/report.hpp"
#include "oulab/sampler.hpp"

namespace {

using namespace oulab;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::optional<Application> application_from(const std::string& name) {
    if (name == "amce") return Application::kAmce;
    if (name == "amle_hat") return Application::kAmleHat;
    if (name == "amle_bar") return Application::kAmleBar;
    return std::nullopt;
}

// path CSV reader matching write_path_csv (header `i,t,x,z`)
PathSample read_path_csv(std::istream& in, double theta) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("i,t,", 0) != 0)
        throw std::invalid_argument("path csv: missing i,t,x,z header");
    std::vector<double> xs, zs;
    bool has_z = true;
    double delta = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');  // i
        std::getline(row, cell, ',');  // t
        const double t = std::stod(cell);
        std::getline(row, cell, ',');
        xs.push_back(std::stod(cell));
        if (std::getline(row, cell, ',') && !cell.empty()) zs.push_back(std::stod(cell));
        else has_z = false;
        if (xs.size() == 2) delta = t;
    }
    if (xs.size() < 2) throw std::invalid_argument("path csv: need at least 2 rows");
    PathSample path{SamplingGrid(xs.size() - 1, delta), std::move(xs), std::nullopt, 0.0, {}};
    if (has_z && zs.size() == path.x.size()) {
        path.z = std::move(zs);
        path.z0 = (*path.z)[0];
    }
    (void)theta;
    return path;
}

std::vector<double> read_ensemble_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open ensemble file: " + file);
    std::string line;
    if (!std::getline(in, line) || line.rfind("replication,", 0) != 0)
        throw std::invalid_argument("ensemble csv: missing replication,value,excluded header");
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');  // replication
        std::string value_cell;
        std::getline(row, value_cell, ',');
        std::string excluded_cell;
        std::getline(row, excluded_cell, ',');
        if (excluded_cell == "1" || value_cell.empty()) continue;
        values.push_back(std::stod(value_cell));
    }
    return values;
}

void print_field(std::ostream& out, const std::string& field, double value,
                 const char* source) {
    out << field << ',' << format_double(value) << ',' << source << '\n';
}

int cmd_simulate(double theta, std::size_t n, double delta, std::uint64_t seed,
                 std::uint64_t replication, bool coupled, const std::string& out_file) {
    const OuParams params(theta);
    const SamplingGrid grid(n, delta);
    const RngStreamSpec stream{seed, replication};
    const PathSample path = coupled ? sample_coupled_paths(params, grid, stream)
                                    : sample_x_only(params, grid, stream);
    if (out_file.empty()) {
        write_path_csv(std::cout, path);
    } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + out_file);
        write_path_csv(out, path);
    }
    return kExitOk;
}

int cmd_estimate(const std::string& in_file, double theta, const std::string& indexing_name) {
    std::ifstream in(in_file);
    if (!in) throw std::invalid_argument("cannot open path file: " + in_file);
    const OuParams params(theta);
    const PathSample path = read_path_csv(in, theta);
    const Indexing indexing =
        indexing_name == "from_one" ? Indexing::kFromOne : Indexing::kFromZero;
    const StatisticSet stats = compute_statistics(path, params, indexing);

    std::cout << "field,value,source\n";
    print_field(std::cout, "fn_x", stats.fn_x, "exact");
    if (stats.fn_z) print_field(std::cout, "fn_z", *stats.fn_z, "exact");
    print_field(std::cout, "Fn_x", stats.Fn_x, "exact");
    if (stats.Fn_z) print_field(std::cout, "Fn_z", *stats.Fn_z, "exact");
    print_field(std::cout, "s_n", stats.s_n, "exact");
    print_field(std::cout, "lambda_n", stats.lambda_n, "exact");
    print_field(std::cout, "quad_increment", stats.quad_increment, "exact");

    const auto tilde = amce(path);
    const auto hat = amle_hat(path);
    const auto bar = amle_bar(path);
    if (tilde) {
        print_field(std::cout, "amce", *tilde, "exact");
        print_field(std::cout, "amce_normalized_error",
                    normalized_error(*tilde, params, path.grid), "exact");
    } else {
        std::cout << "amce,,degenerate denominator\n";
    }
    if (hat) {
        print_field(std::cout, "amle_hat", *hat, "exact");
        print_field(std::cout, "amle_hat_normalized_error",
                    normalized_error(*hat, params, path.grid), "exact");
    } else {
        std::cout << "amle_hat,,degenerate denominator\n";
    }
    if (bar) {
        print_field(std::cout, "amle_bar", *bar, "exact");
        print_field(std::cout, "amle_bar_normalized_error",
                    normalized_error(*bar, params, path.grid), "exact");
    } else {
        std::cout << "amle_bar,,degenerate denominator\n";
    }
    return kExitOk;
}

int cmd_cumulants(double theta, std::size_t n, double delta, std::size_t cap) {
    const OuParams params(theta);
    const SamplingGrid grid(n, delta);
    std::cout << "field,value,source\n";

    const CumulantSet fnz = fn_z_cumulants(params, grid, cap);
    print_field(std::cout, "fnz_mean", fnz.mean, "exact");
    print_field(std::cout, "fnz_kappa2", fnz.kappa2, "exact");
    print_field(std::cout, "fnz_kappa3", fnz.kappa3, "exact");
    print_field(std::cout, "fnz_kappa4", fnz.kappa4, "exact");
    print_field(std::cout, "variance_gap_fnz", variance_gap_fn_z(params, grid, cap), "exact");
    print_field(std::cout, "variance_gap_fnx", variance_gap_fn_x(params, grid, cap), "exact");

    const MeanGapResult gap = mean_gap_and_a_t(params, grid);
    print_field(std::cout, "mean_gap", gap.mean_gap, "closed_form");
    print_field(std::cout, "a_T", gap.a_t, "closed_form");

    const LambdaCrossForms cross = lambda_cross_closed_forms(params, grid);
    print_field(std::cout, "a_nT", cross.a_nt, "closed_form");
    print_field(std::cout, "b_nT", cross.b_nt, "closed_form");
    print_field(std::cout, "cross_term", cross.cross_term, "closed_form");
    return kExitOk;
}

int cmd_distance(const std::string& in_file, double confidence, const std::string& num_file,
                 const std::string& den_file) {
    SampleEnsemble sample;
    sample.values = read_ensemble_csv(in_file);
    if (sample.values.empty()) throw std::invalid_argument("ensemble is empty");

    std::cout << "field,value,source\n";
    const KsResult ks = ks_statistic_vs_normal(sample, confidence);
    print_field(std::cout, "d_kol", ks.d_statistic, "monte_carlo");
    print_field(std::cout, "dkw_radius", ks.dkw_radius, "exact");
    print_field(std::cout, "w1", wasserstein_empirical_vs_normal(sample), "monte_carlo");

    if (!num_file.empty() && !den_file.empty()) {
        SampleEnsemble numerator, denominator;
        numerator.values = read_ensemble_csv(num_file);
        denominator.values = read_ensemble_csv(den_file);
        const std::vector<double> eps = default_eps_grid();
        const MpBound mp = michel_pfanzagl_bound(numerator, denominator, eps);
        print_field(std::cout, "mp_bound", mp.best_bound, "monte_carlo");
        print_field(std::cout, "mp_eps", mp.best_eps, "monte_carlo");
    }
    return kExitOk;
}

int cmd_report(const std::string& application_name, double theta, std::size_t n, double delta,
               std::uint64_t replications, std::uint64_t mc_budget, std::uint64_t seed,
               int workers, std::size_t cap) {
    const auto application = application_from(application_name);
    if (!application) {
        std::cerr << "error: unknown application '" << application_name << "'\n";
        return kExitValidation;
    }
    const OuParams params(theta);
    const SamplingGrid grid(n, delta);
    McBudget budget{mc_budget, seed, workers};
    const BoundReport report =
        bound_report(*application, params, grid, replications, budget);

    std::cout << "estimator,theta,n,delta,T,field,value,source,stderr\n";
    const std::string prefix = std::string(to_string(*application)) + ',' +
                               format_double(theta) + ',' + std::to_string(n) + ',' +
                               format_double(delta) + ',' + format_double(grid.horizon()) + ',';
    for (const ReportRow& row : report_rows(report)) {
        std::cout << prefix << row.field << ',' << format_double(row.value) << ','
                  << to_string(row.source) << ','
                  << (row.has_std_error ? format_double(row.std_error) : std::string()) << '\n';
    }
    (void)cap;
    return kExitOk;
}

int cmd_validate(const std::string& config) {
    PlanDiagnostics diag;
    load_plan_file(config, diag);
    for (const std::string& e : diag.errors) std::cout << "error: " << e << '\n';
    for (const std::string& w : diag.warnings) std::cout << "warning: " << w << '\n';
    if (diag.ok()) {
        std::cout << "plan ok\n";
        return kExitOk;
    }
    return kExitValidation;
}

int cmd_run(const std::string& config, const std::string& out_dir, int workers,
            std::optional<std::uint64_t> seed_override, const std::string& format_name) {
    PlanDiagnostics diag;
    ExperimentPlan plan = load_plan_file(config, diag);
    for (const std::string& w : diag.warnings) std::cerr << "warning: " << w << '\n';
    if (!diag.ok()) {
        for (const std::string& e : diag.errors) std::cerr << "error: " << e << '\n';
        return kExitValidation;
    }
    if (seed_override) plan.master_seed = *seed_override;
    const OutputFormat format =
        format_name == "json" ? OutputFormat::kJson : OutputFormat::kCsv;
    const PlanResult result = run_plan(plan, out_dir, workers, format);
    for (const std::string& f : result.files_written) std::cout << f << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for discretized OU drift estimators"};
    app.require_subcommand(1);

    double theta = 1.0;
    std::size_t n = 100;
    double delta = 0.1;
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;
    bool coupled = false;
    std::string out_file, in_file, config, out_dir = "out", format_name = "csv";
    std::string application_name = "amce", indexing_name = "from_zero";
    std::string num_file, den_file;
    int workers = 1;
    std::uint64_t replications = 10000, mc_budget = 10000;
    double confidence = 0.95;
    std::size_t cap = kDefaultExactCap;
    std::optional<std::uint64_t> seed_override;

    auto* simulate = app.add_subcommand("simulate", "emit one sampled path as CSV");
    simulate->add_option("--theta", theta);
    simulate->add_option("--n", n);
    simulate->add_option("--delta", delta);
    simulate->add_option("--seed", seed);
    simulate->add_option("--replication", replication);
    simulate->add_flag("--coupled", coupled, "emit the coupled Z path as well");
    simulate->add_option("--out", out_file);

    auto* estimate = app.add_subcommand("estimate", "statistics and estimates from one path");
    estimate->add_option("--in", in_file)->required();
    estimate->add_option("--theta", theta);
    estimate->add_option("--indexing", indexing_name)
        ->check(CLI::IsMember({"from_zero", "from_one"}));

    auto* cumulants = app.add_subcommand("cumulants", "exact moment engine at one grid point");
    cumulants->add_option("--theta", theta);
    cumulants->add_option("--n", n)->required();
    cumulants->add_option("--delta", delta)->required();
    cumulants->add_option("--cap", cap);

    auto* distance = app.add_subcommand("distance", "distances of an ensemble to N(0,1)");
    distance->add_option("--in", in_file)->required();
    distance->add_option("--confidence", confidence);
    distance->add_option("--num", num_file, "numerator ensemble for the MP bound");
    distance->add_option("--den", den_file, "denominator ensemble for the MP bound");

    auto* report = app.add_subcommand("report", "bound report at one grid point");
    report->add_option("--application", application_name)->required();
    report->add_option("--theta", theta);
    report->add_option("--n", n)->required();
    report->add_option("--delta", delta)->required();
    report->add_option("--replications", replications);
    report->add_option("--mc-budget", mc_budget);
    report->add_option("--seed", seed);
    report->add_option("--workers", workers);
    report->add_option("--cap", cap);

    auto* run = app.add_subcommand("run", "run a full experiment plan");
    run->add_option("--config", config)->required();
    run->add_option("--out", out_dir);
    run->add_option("--workers", workers);
    run->add_option("--seed", seed_override, "override the plan master seed");
    run->add_option("--format", format_name)->check(CLI::IsMember({"csv", "json"}));

    auto* validate = app.add_subcommand("validate", "validate a plan file");
    validate->add_option("--config", config)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return cmd_simulate(theta, n, delta, seed, replication, coupled, out_file);
        if (estimate->parsed()) return cmd_estimate(in_file, theta, indexing_name);
        if (cumulants->parsed()) return cmd_cumulants(theta, n, delta, cap);
        if (distance->parsed()) return cmd_distance(in_file, confidence, num_file, den_file);
        if (report->parsed())
            return cmd_report(application_name, theta, n, delta, replications, mc_budget, seed,
                              workers, cap);
        if (run->parsed()) return cmd_run(config, out_dir, workers, seed_override, format_name);
        if (validate->parsed()) return cmd_validate(config);
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
