#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdesplit/iterative_schemes.hpp"
#include "sdesplit/metrics.hpp"

namespace sdesplit {

enum class ReferenceKind { exact_linear, fine_milstein };
enum class OutputFormat { csv, json };

class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string problem = "scalar10"; // scalar10 | vec2x2:<preset> | vecMxM:<m> | coulomb
    std::vector<std::string> schemes = {"em"};
    std::vector<double> dt_list = {0.1};
    int n_paths = 1000;
    double t_end = 1.0;
    std::uint64_t master_seed = 0;
    ReferenceKind reference = ReferenceKind::exact_linear;
    double reference_dt = 1e-5; // fine grid of the fine_milstein reference
    std::string output;         // report destination; empty writes to stdout
    OutputFormat format = OutputFormat::csv;
    bool zero_noise = false;
    double v0 = 1.0;
    double mu0 = 1.0 - 1e-8;
    double phi0 = 1.0;
    int sweeps = 2;
    QuadRule quad_rule = QuadRule::trapezoid;
    int iter_substeps = 10;
    IterVariant iter_variant = IterVariant::resolved;
    C3Mode c3_mode = C3Mode::ds_weighted;
    int threads = 1;
    double max_failures = 0.5; // tolerated fraction of excluded paths
    bool measure_timing = true;
    int timing_repeats = 3;
};

struct ConvergenceReport {
    std::string scheme;
    double dt = 0.0;
    int n_paths = 0;
    double strong_error = 0.0;
    double weak_error = 0.0;
    double mean_bias = 0.0;
    double variance = 0.0;
    double time_avg_mse = 0.0;
    double runtime_seconds = 0.0;
    long clamp_events = 0;
    long excluded_paths = 0;
};

struct Trajectory {
    std::string scheme; // "reference" for the reference trajectory
    double dt = 0.0;
    bool coulomb = false; // columns t,v,mu,phi instead of t,y1..ym
    std::vector<double> times;
    std::vector<Vector> states;
};

struct ExperimentResult {
    std::vector<ConvergenceReport> reports;
    std::vector<ErrorSample> samples;     // per included path, for re-aggregation
    std::vector<Trajectory> trajectories; // sample 0 of every (scheme, dt) and reference
};

/// Runs the configured common-noise comparison. Paths that raise a
/// singularity or divergence are excluded from aggregates and counted.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string render_report_csv(const std::vector<ConvergenceReport>& reports);
std::string render_report_json(const std::vector<ConvergenceReport>& reports);
std::vector<ConvergenceReport> parse_report_csv(const std::string& text);

/// Writes the report to `path` (stdout when empty).
void emit_report(const std::vector<ConvergenceReport>& reports, OutputFormat format,
                 const std::string& path);

/// Writes plot-ready CSV files (error vs dt, variance vs dt, per-path samples,
/// sample-0 trajectories) plus a gnuplot script into `dir`.
void emit_plot_data(const ExperimentResult& result, const std::string& dir);

} // namespace sdesplit
