#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "lrfs/divergences.hpp"
#include "lrfs/errors.hpp"
#include "lrfs/io.hpp"
#include "lrfs/metrics.hpp"
#include "lrfs/multiscan.hpp"
#include "lrfs/sim.hpp"
#include "lrfs/tracker.hpp"

namespace {

using lrfs::io::FieldError;
using lrfs::io::Json;

unsigned resolve_threads(std::optional<unsigned> flag)
{
    if (const char* env = std::getenv("LRFS_THREADS"); env != nullptr && *env != '\0') {
        try {
            const int value = std::stoi(env);
            if (value < 1) {
                throw std::invalid_argument("non-positive");
            }
            return static_cast<unsigned>(value);
        } catch (const std::exception&) {
            throw FieldError("LRFS_THREADS", "expected a positive integer");
        }
    }
    if (flag) {
        return std::max(1U, *flag);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

std::string format_number(double value)
{
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

lrfs::EstimatorKind filter_estimator(const std::string& name)
{
    if (name == "glmb") {
        return lrfs::EstimatorKind::glmb;
    }
    if (name == "label_mam") {
        return lrfs::EstimatorKind::label_mam;
    }
    if (name == "phd_mam") {
        return lrfs::EstimatorKind::phd_mam;
    }
    if (name == "phd_jom") {
        return lrfs::EstimatorKind::phd_jom;
    }
    throw FieldError("--estimator", "unknown filter estimator '" + name + "'");
}

lrfs::TrajectoryEstimatorKind smoother_estimator(const std::string& name)
{
    if (name == "top_hypothesis") {
        return lrfs::TrajectoryEstimatorKind::top_hypothesis;
    }
    if (name == "top_given_cardinality") {
        return lrfs::TrajectoryEstimatorKind::top_given_cardinality;
    }
    if (name == "label_mam_sequence") {
        return lrfs::TrajectoryEstimatorKind::label_mam_sequence;
    }
    if (name == "label_mam_length") {
        return lrfs::TrajectoryEstimatorKind::label_mam_length;
    }
    throw FieldError("--estimator", "unknown smoother estimator '" + name + "'");
}

lrfs::TrackerConfig load_config(const std::string& file, unsigned threads)
{
    lrfs::TrackerConfig cfg = file.empty() ? lrfs::TrackerConfig{} : lrfs::io::tracker_config_from_json(lrfs::io::read_json(file), file);
    cfg.filter.threads = threads;
    return cfg;
}

int run_simulate(const std::string& params_file, std::uint64_t seed, const std::string& out)
{
    lrfs::SimParams params;
    if (!params_file.empty()) {
        const Json j = lrfs::io::read_json(params_file);
        if (j.contains("preset")) {
            if (j["preset"] != "desk_scale") {
                throw FieldError(params_file + ".preset", "unknown preset");
            }
            params = lrfs::desk_scale_params();
        }
        params = lrfs::io::params_from_json(j, params_file, params);
    }
    lrfs::io::write_json(out, lrfs::io::scenario_to_json(lrfs::generate(params, seed)));
    return 0;
}

int run_filter(const std::string& scenario_file, const std::string& config_file, const std::string& estimator,
               const std::string& out, const std::string& report_file, unsigned threads)
{
    const lrfs::Scenario scenario = lrfs::io::scenario_from_json(lrfs::io::read_json(scenario_file), scenario_file);
    lrfs::TrackerConfig cfg = load_config(config_file, threads);
    cfg.estimator.kind = filter_estimator(estimator);
    std::size_t dropped = 0;
    const auto inputs = lrfs::tracker_inputs(scenario, cfg, &dropped);
    const auto model = lrfs::make_tracker_model(scenario, cfg);
    const auto scans = lrfs::run_glmb_tracker(inputs, model, cfg);
    lrfs::io::write_json(out, lrfs::io::tracks_to_json(lrfs::io::track_records(scans)));
    if (!report_file.empty()) {
        Json rows = Json::array();
        for (const auto& s : scans) {
            rows.push_back(Json{{"k", s.k},
                                {"hypotheses", s.report.kept},
                                {"candidates", s.report.candidates},
                                {"discarded_l1", s.report.discarded_l1},
                                {"captured_mass", s.report.captured_mass},
                                {"seconds", s.seconds}});
        }
        lrfs::io::write_json(report_file, Json{{"scans", std::move(rows)}, {"dropped_measurements", dropped}});
    }
    return 0;
}

int run_smooth(const std::string& scenario_file, const std::string& config_file, int window,
               const std::string& estimator, const std::string& out, const std::string& stats_file, unsigned threads)
{
    const lrfs::Scenario scenario = lrfs::io::scenario_from_json(lrfs::io::read_json(scenario_file), scenario_file);
    const lrfs::TrackerConfig cfg = load_config(config_file, threads);
    if (window < 0) {
        throw FieldError("--window", "must be non-negative");
    }
    const auto inputs = lrfs::tracker_inputs(scenario, cfg);
    const auto model = lrfs::make_tracker_model(scenario, cfg);
    const lrfs::SmootherConfig smoother{cfg.filter, window, cfg.multiscan_sweeps, cfg.multiscan_chains};
    const lrfs::MultiScanGlmb post = lrfs::run_smoother(inputs, model, smoother);
    const auto estimates = lrfs::estimate_trajectories(post, smoother_estimator(estimator), model.survival.motion);
    lrfs::io::write_json(out, lrfs::io::tracks_to_json(lrfs::io::track_records(estimates)));
    if (!stats_file.empty()) {
        const lrfs::TrajectoryStats stats = lrfs::trajectory_stats(post);
        Json by_label = Json::array();
        for (const auto& [label, dist] : stats.length_by_label) {
            by_label.push_back(Json{{"label", lrfs::io::to_json(label)}, {"distribution", dist}});
        }
        Json sets = Json::array();
        for (const auto& [labels, weight] : stats.label_sets) {
            Json ls = Json::array();
            for (const auto& l : labels) {
                ls.push_back(lrfs::io::to_json(l));
            }
            sets.push_back(Json{{"labels", std::move(ls)}, {"weight", weight}});
        }
        lrfs::io::write_json(stats_file, Json{{"first_scan", post.first_scan()},
                                              {"last_scan", post.last_scan()},
                                              {"cardinality", stats.cardinality},
                                              {"length_distribution", stats.length_distribution},
                                              {"length_by_label", std::move(by_label)},
                                              {"label_sets", std::move(sets)}});
    }
    return 0;
}

int run_divergence(const std::string& kind, const std::string& a_file, const std::string& b_file, double alpha,
                   double unit)
{
    const lrfs::LmbDensity a = lrfs::io::lmb_from_json(lrfs::io::read_json(a_file), a_file);
    const lrfs::LmbDensity b = lrfs::io::lmb_from_json(lrfs::io::read_json(b_file), b_file);
    double value = 0.0;
    if (kind == "renyi") {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw FieldError("--alpha", "must lie in (0, 1)");
        }
        value = lrfs::renyi_lmb(a, b, alpha);
    } else if (kind == "kl") {
        value = lrfs::kl_lmb(a, b);
    } else if (kind == "chi2") {
        value = lrfs::chi2_lmb(a, b);
    } else if (kind == "cs") {
        if (!(unit > 0.0)) {
            throw FieldError("--unit-u", "must be positive");
        }
        value = lrfs::csd_lmb(a, b, unit);
    } else if (kind == "bhatt") {
        value = lrfs::bhattacharyya_lmb(a, b);
    } else {
        throw FieldError("--kind", "unknown divergence '" + kind + "'");
    }
    std::cout << format_number(value) << "\n";
    return 0;
}

int run_eval(const std::string& truth_file, const std::string& tracks_file, double cutoff, double order, int window,
             const std::string& out)
{
    if (!(cutoff > 0.0)) {
        throw FieldError("--ospa-c", "must be positive");
    }
    if (!(order >= 1.0)) {
        throw FieldError("--ospa-p", "must be at least 1");
    }
    if (window < 1) {
        throw FieldError("--window", "must be at least 1");
    }
    const lrfs::Scenario scenario = lrfs::io::scenario_from_json(lrfs::io::read_json(truth_file), truth_file);
    const auto estimates = lrfs::io::trajectories_from_file_json(lrfs::io::read_json(tracks_file), tracks_file);
    const auto sensor = lrfs::position_sensor(scenario.params.measurement_noise);
    const auto truth = lrfs::project(scenario.truth, sensor);
    const auto tracks = lrfs::project(estimates, sensor);
    std::ostringstream csv;
    csv << "k,ospa,ospa2\n";
    for (const auto& scan : scenario.scans) {
        const auto x = lrfs::states_at(truth, scan.k);
        const auto y = lrfs::states_at(tracks, scan.k);
        const int first = std::max(scenario.scans.front().k, scan.k - window + 1);
        csv << scan.k << ',' << format_number(lrfs::ospa(x, y, cutoff, order)) << ','
            << format_number(lrfs::ospa2(truth, tracks, cutoff, order, first, scan.k)) << '\n';
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        lrfs::io::write_text(out, csv.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Labeled random finite set tracking: simulation, filtering, smoothing, divergences, evaluation"};
    app.require_subcommand(1);
    std::optional<unsigned> threads_flag;
    app.add_option("--threads", threads_flag, "Worker threads (LRFS_THREADS overrides)")->check(CLI::PositiveNumber);

    std::string params_file;
    std::string scenario_file;
    std::string config_file;
    std::string out;
    std::string report_file;
    std::string stats_file;
    std::string filter_estimator_name;
    std::string smooth_estimator_name;
    std::uint64_t seed = 0;
    int window = 0;

    auto* simulate = app.add_subcommand("simulate", "Generate a scenario");
    simulate->add_option("--params", params_file, "Scenario parameters (JSON)");
    simulate->add_option("--seed", seed, "Random seed")->required();
    simulate->add_option("--out", out, "Scenario output (JSON)")->required();

    auto* filter = app.add_subcommand("filter", "Run the GLMB filter");
    filter->add_option("--scenario", scenario_file)->required();
    filter->add_option("--config", config_file, "Tracker configuration (JSON)");
    filter->add_option("--estimator", filter_estimator_name, "glmb | label_mam | phd_mam | phd_jom")->default_val("glmb");
    filter->add_option("--out", out, "Track output (JSON)")->required();
    filter->add_option("--report", report_file, "Per-scan report (JSON)");

    auto* smooth = app.add_subcommand("smooth", "Run the multi-scan GLMB smoother");
    smooth->add_option("--scenario", scenario_file)->required();
    smooth->add_option("--config", config_file, "Tracker configuration (JSON)");
    smooth->add_option("--window", window, "Trailing scans revised by multi-scan Gibbs")->default_val(0);
    smooth->add_option("--estimator", smooth_estimator_name,
                       "top_hypothesis | top_given_cardinality | label_mam_sequence | label_mam_length")
        ->default_val("top_hypothesis");
    smooth->add_option("--out", out, "Trajectory output (JSON)")->required();
    smooth->add_option("--stats", stats_file, "Trajectory statistics (JSON)");

    std::string kind;
    std::string a_file;
    std::string b_file;
    double alpha = 0.5;
    double unit = 1.0;
    auto* divergence = app.add_subcommand("divergence", "Divergence between two LMB densities");
    divergence->add_option("--kind", kind, "renyi | kl | chi2 | cs | bhatt")->required();
    divergence->add_option("--a", a_file)->required();
    divergence->add_option("--b", b_file)->required();
    divergence->add_option("--alpha", alpha)->default_val(0.5);
    divergence->add_option("--unit-u", unit)->default_val(1.0);

    std::string truth_file;
    std::string tracks_file;
    double cutoff = 100.0;
    double order = 1.0;
    int eval_window = 1;
    auto* eval = app.add_subcommand("eval", "OSPA and OSPA2 series as CSV");
    eval->add_option("--truth", truth_file)->required();
    eval->add_option("--tracks", tracks_file)->required();
    eval->add_option("--ospa-c", cutoff)->default_val(100.0);
    eval->add_option("--ospa-p", order)->default_val(1.0);
    eval->add_option("--window", eval_window)->default_val(10);
    eval->add_option("--out", out, "CSV output (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const unsigned threads = resolve_threads(threads_flag);
        if (*simulate) {
            return run_simulate(params_file, seed, out);
        }
        if (*filter) {
            return run_filter(scenario_file, config_file, filter_estimator_name, out, report_file, threads);
        }
        if (*smooth) {
            return run_smooth(scenario_file, config_file, window, smooth_estimator_name, out, stats_file, threads);
        }
        if (*divergence) {
            return run_divergence(kind, a_file, b_file, alpha, unit);
        }
        if (*eval) {
            return run_eval(truth_file, tracks_file, cutoff, order, eval_window, out);
        }
    } catch (const FieldError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const lrfs::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
