#include "oulab/plan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "oulab/ensemble.hpp"
#include "oulab/format.hpp"
#include "oulab/rng.hpp"

namespace oulab {

namespace {

using nlohmann::json;

bool parse_estimator(const std::string& name, Application& out) {
    if (name == "amce") out = Application::kAmce;
    else if (name == "amle_hat") out = Application::kAmleHat;
    else if (name == "amle_bar") out = Application::kAmleBar;
    else return false;
    return true;
}

void parse_grid(const json& doc, ExperimentPlan& plan, PlanDiagnostics& diag) {
    if (doc.contains("grid")) {
        if (!doc["grid"].is_array() || doc["grid"].empty()) {
            diag.errors.push_back("grid: must be a non-empty array of {n, delta}");
            return;
        }
        for (const auto& pt : doc["grid"]) {
            GridPoint g;
            if (!pt.contains("n") || !pt.contains("delta")) {
                diag.errors.push_back("grid: each point needs fields n and delta");
                return;
            }
            const double n_raw = pt["n"].get<double>();
            g.delta = pt["delta"].get<double>();
            if (n_raw < 1 || n_raw != std::floor(n_raw)) {
                diag.errors.push_back("grid: n must be a positive integer");
                return;
            }
            g.n = static_cast<std::size_t>(n_raw);
            if (!(g.delta > 0)) {
                diag.errors.push_back("grid: delta must be > 0");
                return;
            }
            plan.grid.push_back(g);
        }
        return;
    }
    if (doc.contains("grid_rule")) {
        const auto& rule = doc["grid_rule"];
        if (!rule.contains("T") || !rule["T"].is_array() || rule["T"].empty()) {
            diag.errors.push_back("grid_rule: needs a non-empty T array");
            return;
        }
        const bool fixed_delta = rule.contains("delta");
        const bool power_rule = rule.contains("delta_coeff") && rule.contains("delta_gamma");
        if (!fixed_delta && !power_rule) {
            diag.errors.push_back(
                "grid_rule: needs either delta or (delta_coeff, delta_gamma)");
            return;
        }
        for (const auto& tj : rule["T"]) {
            const double t = tj.get<double>();
            if (!(t > 0)) {
                diag.errors.push_back("grid_rule: T values must be > 0");
                return;
            }
            const double delta = fixed_delta
                                     ? rule["delta"].get<double>()
                                     : rule["delta_coeff"].get<double>() *
                                           std::pow(t, -rule["delta_gamma"].get<double>());
            if (!(delta > 0)) {
                diag.errors.push_back("grid_rule: derived delta must be > 0");
                return;
            }
            const double n = std::max(1.0, std::round(t / delta));
            plan.grid.push_back({static_cast<std::size_t>(n), delta});
        }
        return;
    }
    diag.errors.push_back("missing field: grid (or grid_rule)");
}

void validate_semantics(ExperimentPlan& plan, PlanDiagnostics& diag) {
    if (!(plan.theta > 0) || !std::isfinite(plan.theta))
        diag.errors.push_back("theta: must be finite and > 0");
    if (plan.replications < 1) diag.errors.push_back("replications: must be >= 1");
    if (!(plan.confidence > 0 && plan.confidence < 1))
        diag.errors.push_back("confidence: must be in (0,1)");
    for (double e : plan.eps_grid)
        if (!(e > 0)) diag.errors.push_back("eps_grid: entries must be > 0");

    if (plan.estimator == Application::kAmleHat) {
        for (const GridPoint& g : plan.grid) {
            const double t = static_cast<double>(g.n) * g.delta;
            const double ratio = t * t * t / (static_cast<double>(g.n) * static_cast<double>(g.n));
            if (ratio > 1.0) {
                std::ostringstream msg;
                msg << "grid point n=" << g.n << " delta=" << format_double(g.delta)
                    << ": T^3/n^2 = " << format_double(ratio)
                    << " > 1; the amle_hat rate theorem assumes T^3/n^2 -> 0";
                diag.warnings.push_back(msg.str());
            }
        }
    }
}

}  // namespace

ExperimentPlan parse_plan_text(const std::string& text, PlanDiagnostics& diag) {
    ExperimentPlan plan;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        std::ostringstream msg;
        msg << "parse error at byte " << err.byte << ": " << err.what();
        diag.errors.push_back(msg.str());
        return plan;
    }
    if (!doc.is_object()) {
        diag.errors.push_back("plan must be a JSON object");
        return plan;
    }

    try {
        if (!doc.contains("estimator")) {
            diag.errors.push_back("missing field: estimator");
        } else if (!parse_estimator(doc["estimator"].get<std::string>(), plan.estimator)) {
            diag.errors.push_back("estimator: must be one of amce, amle_hat, amle_bar");
        }

        if (doc.contains("theta")) plan.theta = doc["theta"].get<double>();
        else diag.warnings.push_back("theta omitted; using default 1.0");

        parse_grid(doc, plan, diag);

        if (!doc.contains("replications")) diag.errors.push_back("missing field: replications");
        else plan.replications = doc["replications"].get<std::uint64_t>();

        if (doc.contains("master_seed")) plan.master_seed = doc["master_seed"].get<std::uint64_t>();
        else diag.warnings.push_back("master_seed omitted; using default 0");

        if (doc.contains("confidence")) plan.confidence = doc["confidence"].get<double>();
        if (doc.contains("mc_budget")) plan.mc_budget = doc["mc_budget"].get<std::uint64_t>();
        if (doc.contains("exact_cap")) plan.exact_cap = doc["exact_cap"].get<std::size_t>();
        if (doc.contains("eps_grid"))
            plan.eps_grid = doc["eps_grid"].get<std::vector<double>>();

        if (doc.contains("outputs")) {
            plan.want_ensembles = plan.want_reports = plan.want_rate_fits = false;
            for (const auto& item : doc["outputs"]) {
                const std::string kind = item.get<std::string>();
                if (kind == "ensembles") plan.want_ensembles = true;
                else if (kind == "reports") plan.want_reports = true;
                else if (kind == "rate_fits") plan.want_rate_fits = true;
                else diag.warnings.push_back("outputs: unknown kind '" + kind + "' ignored");
            }
        }
    } catch (const json::exception& err) {
        diag.errors.push_back(std::string("malformed field: ") + err.what());
        return plan;
    }

    validate_semantics(plan, diag);
    return plan;
}

ExperimentPlan load_plan_file(const std::string& path, PlanDiagnostics& diag) {
    std::ifstream in(path);
    if (!in) {
        diag.errors.push_back("cannot open plan file: " + path);
        return {};
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_plan_text(buffer.str(), diag);
}

std::uint64_t plan_point_seed(std::uint64_t master_seed, std::size_t point_index) {
    return detail::mix64(master_seed ^ (0xA24BAED4963EE407ULL * (point_index + 1)));
}

std::uint64_t plan_component_seed(std::uint64_t master_seed, std::size_t point_index) {
    return detail::mix64(master_seed ^ (0x9FB21C651E98DF25ULL * (point_index + 1)));
}

namespace {

std::string csv_cell(double value, bool present = true) {
    return present ? format_double(value) : std::string();
}

void write_text_file(const std::filesystem::path& path, const std::string& text,
                     std::vector<std::string>& files) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    files.push_back(path.string());
}

std::string ensemble_csv(const ReplicationEnsemble& ensemble) {
    std::string text = "replication,value,excluded\n";
    for (std::size_t i = 0; i < ensemble.values.size(); ++i) {
        text += std::to_string(i);
        text += ',';
        if (!ensemble.excluded[i]) text += format_double(ensemble.values[i]);
        text += ',';
        text += ensemble.excluded[i] ? '1' : '0';
        text += '\n';
    }
    return text;
}

json ensemble_json(const ReplicationEnsemble& ensemble) {
    json rows = json::array();
    for (std::size_t i = 0; i < ensemble.values.size(); ++i) {
        json row;
        row["replication"] = i;
        if (ensemble.excluded[i]) row["value"] = nullptr;
        else row["value"] = ensemble.values[i];
        row["excluded"] = ensemble.excluded[i] ? 1 : 0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

PlanResult run_plan(const ExperimentPlan& plan, const std::string& out_dir, int workers,
                    OutputFormat format) {
    PlanDiagnostics diag;
    ExperimentPlan checked = plan;
    if (checked.grid.empty()) diag.errors.push_back("grid: must be non-empty");
    validate_semantics(checked, diag);
    if (!diag.ok())
        throw std::invalid_argument("run_plan: invalid plan: " + diag.errors.front());

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    const OuParams params(plan.theta);
    PlanResult result;

    std::string report_csv = "estimator,theta,n,delta,T,field,value,source,stderr\n";
    json report_json = json::array();

    for (std::size_t p = 0; p < plan.grid.size(); ++p) {
        const GridPoint& gp = plan.grid[p];
        const SamplingGrid grid(gp.n, gp.delta);
        const std::uint64_t point_seed = plan_point_seed(plan.master_seed, p);

        const ReplicationEnsemble ensemble = generate_error_ensemble(
            plan.estimator, params, grid, plan.replications, point_seed, workers);

        McBudget component_budget;
        component_budget.replications = std::max<std::uint64_t>(plan.mc_budget, 2);
        component_budget.master_seed = plan_component_seed(plan.master_seed, p);
        component_budget.workers = workers;

        BoundReport report = bound_report_from_ensemble(
            plan.estimator, params, grid, ensemble, point_seed, component_budget,
            plan.confidence, plan.eps_grid, plan.exact_cap);
        result.reports.push_back(report);

        if (plan.want_ensembles) {
            std::ostringstream name;
            name << "ensemble_point" << (p < 10 ? "0" : "") << p
                 << (format == OutputFormat::kCsv ? ".csv" : ".json");
            if (format == OutputFormat::kCsv) {
                write_text_file(dir / name.str(), ensemble_csv(ensemble), result.files_written);
            } else {
                write_text_file(dir / name.str(), ensemble_json(ensemble).dump(2) + "\n",
                                result.files_written);
            }
        }

        const std::string prefix = std::string(to_string(plan.estimator)) + ',' +
                                   format_double(plan.theta) + ',' + std::to_string(gp.n) + ',' +
                                   format_double(gp.delta) + ',' +
                                   format_double(grid.horizon()) + ',';
        for (const ReportRow& row : report_rows(report)) {
            report_csv += prefix + row.field + ',' + format_double(row.value) + ',' +
                          to_string(row.source) + ',' +
                          (row.has_std_error ? csv_cell(row.std_error) : std::string()) + '\n';
            json jrow;
            jrow["estimator"] = to_string(plan.estimator);
            jrow["theta"] = plan.theta;
            jrow["n"] = gp.n;
            jrow["delta"] = gp.delta;
            jrow["T"] = grid.horizon();
            jrow["field"] = row.field;
            jrow["value"] = row.value;
            jrow["source"] = to_string(row.source);
            if (row.has_std_error) jrow["stderr"] = row.std_error;
            report_json.push_back(jrow);
        }
    }

    if (plan.want_reports) {
        if (format == OutputFormat::kCsv)
            write_text_file(dir / "reports.csv", report_csv, result.files_written);
        else
            write_text_file(dir / "reports.json", report_json.dump(2) + "\n",
                            result.files_written);
    }

    // rate fits over the grid horizons
    if (plan.want_rate_fits) {
        std::vector<double> t_values, d_values, w1_values, two_sqrt_w1, mp_values;
        for (const BoundReport& r : result.reports) {
            t_values.push_back(r.t_horizon);
            d_values.push_back(r.d_statistic);
            w1_values.push_back(r.w1);
            two_sqrt_w1.push_back(2.0 * std::sqrt(r.w1));
            mp_values.push_back(r.mp_bound);
        }

        auto add_fit = [&](const std::string& name, const std::vector<double>& xs,
                           const std::vector<double>& ys) {
            bool positive = xs.size() >= 2;
            for (double y : ys)
                if (!(y > 0.0)) positive = false;
            if (!positive) return;
            std::vector<double> distinct(xs);
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            if (distinct.size() < 2) return;
            RateFitRow row;
            row.curve = name;
            row.fit = fit_loglog_slope(xs, ys);
            row.n_points = xs.size();
            result.fits.push_back(row);
        };

        add_fit("d_kol_empirical", t_values, d_values);
        add_fit("w1_empirical", t_values, w1_values);
        add_fit("two_sqrt_w1_empirical", t_values, two_sqrt_w1);
        add_fit("mp_bound", t_values, mp_values);

        // constant-free theory curves evaluated on the same schedule
        std::vector<RateCurve> curves;
        switch (plan.estimator) {
            case Application::kAmce:
                curves = {RateCurve::kThm41, RateCurve::kWassersteinAmce,
                          RateCurve::kBishwalAmce};
                break;
            case Application::kAmleHat:
                curves = {RateCurve::kThm42, RateCurve::kWassersteinAmleHat,
                          RateCurve::kBbAmleHat};
                break;
            case Application::kAmleBar:
                curves = {RateCurve::kThm43, RateCurve::kBbAmleBar};
                break;
        }
        for (RateCurve curve : curves) {
            std::vector<double> xs, ys;
            for (const BoundReport& r : result.reports) {
                try {
                    const double v =
                        eval_rate(curve, r.t_horizon, static_cast<double>(r.n));
                    xs.push_back(r.t_horizon);
                    ys.push_back(v);
                } catch (const std::domain_error&) {
                    // log-bearing curves skip T <= 1
                }
            }
            add_fit(to_string(curve), xs, ys);
        }

        std::string fit_csv = "estimator,curve,slope,intercept,r_squared,n_points\n";
        json fit_json = json::array();
        for (const RateFitRow& row : result.fits) {
            fit_csv += std::string(to_string(plan.estimator)) + ',' + row.curve + ',' +
                       format_double(row.fit.slope) + ',' + format_double(row.fit.intercept) +
                       ',' + format_double(row.fit.r_squared) + ',' +
                       std::to_string(row.n_points) + '\n';
            json jrow;
            jrow["estimator"] = to_string(plan.estimator);
            jrow["curve"] = row.curve;
            jrow["slope"] = row.fit.slope;
            jrow["intercept"] = row.fit.intercept;
            jrow["r_squared"] = row.fit.r_squared;
            jrow["n_points"] = row.n_points;
            fit_json.push_back(jrow);
        }
        if (format == OutputFormat::kCsv)
            write_text_file(dir / "rate_fits.csv", fit_csv, result.files_written);
        else
            write_text_file(dir / "rate_fits.json", fit_json.dump(2) + "\n",
                            result.files_written);
    }

    // timestamps live only here, outside the reproducibility contract
    {
        const auto now = std::chrono::system_clock::now();
        const std::time_t stamp = std::chrono::system_clock::to_time_t(now);
        std::ofstream log(dir / "run_log.txt", std::ios::app);
        log << "run estimator=" << to_string(plan.estimator) << " points=" << plan.grid.size()
            << " replications=" << plan.replications << " workers=" << workers
            << " time=" << stamp << "\n";
    }

    return result;
}

}  // namespace oulab
