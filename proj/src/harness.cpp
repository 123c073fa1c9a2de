#include "sdesplit/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

namespace sdesplit {

namespace {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// scheme and problem parsing
// ---------------------------------------------------------------------------

enum class SchemeKind { em, milstein, milstein_full, ab_split, summative, iter, coulomb_relax,
                        coulomb_taylor };

struct ParsedScheme {
    std::string id;
    SchemeKind kind = SchemeKind::em;
    int param = 0; // summative sub-increments, iterations, or sweeps
    QuadRule rule = QuadRule::trapezoid;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

int parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error("invalid integer '" + s + "' in " + what);
    }
}

QuadRule parse_rule(const std::string& s, const std::string& what) {
    if (s == "trapezoid") return QuadRule::trapezoid;
    if (s == "simpson") return QuadRule::simpson;
    throw config_error("unknown quadrature rule '" + s + "' in " + what);
}

ParsedScheme parse_scheme(const std::string& id, const ExperimentConfig& cfg) {
    ParsedScheme ps;
    ps.id = id;
    const auto parts = split(id, ':');
    const std::string& head = parts[0];
    const std::string rest = parts.size() > 1 ? parts[1] : std::string();
    if (parts.size() > 2) throw config_error("malformed scheme id '" + id + "'");

    auto no_params = [&](SchemeKind k) {
        if (!rest.empty()) throw config_error("scheme '" + head + "' takes no parameters");
        ps.kind = k;
    };
    if (head == "em") {
        no_params(SchemeKind::em);
    } else if (head == "milstein") {
        no_params(SchemeKind::milstein);
    } else if (head == "milstein_full") {
        no_params(SchemeKind::milstein_full);
    } else if (head == "ab_split") {
        no_params(SchemeKind::ab_split);
    } else if (head == "summative") {
        ps.kind = SchemeKind::summative;
        ps.param = rest.empty() ? 4 : parse_int(rest, id);
        if (ps.param < 1) throw config_error("summative: sub-increment count must be positive");
    } else if (head == "iter") {
        ps.kind = SchemeKind::iter;
        ps.param = rest.empty() ? 2 : parse_int(rest, id);
        if (ps.param < 1 || ps.param > 3)
            throw config_error("iter: iteration count must be 1, 2 or 3");
    } else if (head == "coulomb_relax" || head == "coulomb_taylor") {
        ps.kind = head == "coulomb_relax" ? SchemeKind::coulomb_relax : SchemeKind::coulomb_taylor;
        ps.param = cfg.sweeps;
        ps.rule = cfg.quad_rule;
        if (!rest.empty()) {
            const auto sub = split(rest, ',');
            if (!sub[0].empty()) ps.param = parse_int(sub[0], id);
            if (sub.size() > 1) ps.rule = parse_rule(sub[1], id);
            if (sub.size() > 2) throw config_error("malformed scheme id '" + id + "'");
        }
        if (ps.param < 1) throw config_error(head + ": sweep count must be positive");
    } else {
        throw config_error("unknown scheme '" + id + "'");
    }
    return ps;
}

struct ProblemSetup {
    bool is_coulomb = false;
    LinearSdeProblem linear;
    CoulombProblem coulomb;
    CoulombState ic;
    int noise_dims = 0;
};

ProblemSetup parse_problem(const ExperimentConfig& cfg) {
    ProblemSetup setup;
    const auto parts = split(cfg.problem, ':');
    const std::string& head = parts[0];
    const std::string rest = parts.size() > 1 ? parts[1] : std::string();
    if (parts.size() > 2) throw config_error("malformed problem id '" + cfg.problem + "'");

    if (head == "scalar10") {
        if (!rest.empty()) throw config_error("scalar10 takes no parameters");
        setup.linear = build_scalar_noise_problem(cfg.t_end);
    } else if (head == "vec2x2") {
        double alpha2 = 1.0;
        if (rest == "strong" || rest.empty()) alpha2 = 1.0;
        else if (rest == "weak01") alpha2 = 0.1;
        else if (rest == "weak001") alpha2 = 0.01;
        else throw config_error("unknown vec2x2 preset '" + rest + "'");
        setup.linear = build_vectorial_2x2(1.0, alpha2);
        setup.linear.t_end = cfg.t_end;
    } else if (head == "vecMxM") {
        const int m = rest.empty() ? 10 : parse_int(rest, cfg.problem);
        setup.linear = build_vectorial_mxm(m);
        setup.linear.t_end = cfg.t_end;
    } else if (head == "coulomb") {
        if (!rest.empty()) throw config_error("coulomb takes no parameters");
        setup.is_coulomb = true;
        setup.coulomb.validate();
        setup.ic = CoulombState{cfg.v0, cfg.mu0, cfg.phi0};
        if (!(setup.ic.v > -1.0))
            throw config_error("coulomb: v0 must exceed -1");
    } else {
        throw config_error("unknown problem '" + cfg.problem + "'");
    }
    setup.noise_dims = setup.is_coulomb ? 3 : setup.linear.noise_dims();
    return setup;
}

void check_compatibility(const ParsedScheme& ps, const ProblemSetup& setup,
                         const std::string& problem_id) {
    const bool coulomb_scheme =
        ps.kind == SchemeKind::coulomb_relax || ps.kind == SchemeKind::coulomb_taylor;
    if (setup.is_coulomb) {
        const bool ok = ps.kind == SchemeKind::em || ps.kind == SchemeKind::milstein || coulomb_scheme;
        if (!ok)
            throw config_error("scheme '" + ps.id + "' is not defined for problem '" + problem_id +
                               "'");
        return;
    }
    if (coulomb_scheme)
        throw config_error("scheme '" + ps.id + "' requires the coulomb problem, got '" +
                           problem_id + "'");
    const bool scalar_only = ps.kind == SchemeKind::ab_split || ps.kind == SchemeKind::summative ||
                             (ps.kind == SchemeKind::iter && ps.param == 3);
    if (scalar_only && setup.linear.noise_dims() != 1)
        throw config_error("scheme '" + ps.id + "' needs a single-noise problem; '" + problem_id +
                           "' has " + std::to_string(setup.linear.noise_dims()) +
                           " noise dimensions");
}

// ---------------------------------------------------------------------------
// per-(scheme, dt) engines with precomputed operators
// ---------------------------------------------------------------------------

struct SchemeEngine {
    ParsedScheme ps;
    double dt = 0.0;
    Matrix drift_factor;                         // ab_split / summative
    std::shared_ptr<IterScalarWorkspace> ws;     // scalar iterative scheme
    IterConfig icfg;

    Vector step_linear(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx) const {
        switch (ps.kind) {
        case SchemeKind::em: return em_step_linear(y, p, ctx);
        case SchemeKind::milstein: return milstein_step_diag(y, p, ctx);
        case SchemeKind::milstein_full: return milstein_step_full(y, p, ctx);
        case SchemeKind::ab_split: return ab_split_step(y, drift_factor, p, ctx);
        case SchemeKind::summative:
            return summative_split_step(y, drift_factor, p, ctx, ps.param);
        case SchemeKind::iter:
            if (p.noise_dims() == 1) return iter_scalar_step(y, p, ctx, icfg, *ws);
            return iter_vectorial_step(y, p, ctx, icfg);
        default: throw config_error("scheme '" + ps.id + "' cannot run on a linear problem");
        }
    }

    CoulombState step_coulomb(const CoulombState& s, const CoulombProblem& p,
                              const StepContext& ctx) const {
        switch (ps.kind) {
        case SchemeKind::em: return em_step_coulomb(s, p, ctx);
        case SchemeKind::milstein: return milstein_step_coulomb(s, p, ctx);
        case SchemeKind::coulomb_relax: return coulomb_relax_step(s, p, ctx, icfg);
        case SchemeKind::coulomb_taylor: return coulomb_taylor_step(s, p, ctx, icfg);
        default: throw config_error("scheme '" + ps.id + "' cannot run on the coulomb problem");
        }
    }
};

SchemeEngine make_engine(const ParsedScheme& ps, const ProblemSetup& setup, double dt,
                         const ExperimentConfig& cfg) {
    SchemeEngine eng;
    eng.ps = ps;
    eng.dt = dt;
    eng.icfg.iterations = ps.kind == SchemeKind::iter ? ps.param : 1;
    eng.icfg.quadrature_substeps = cfg.iter_substeps;
    eng.icfg.quad_rule = ps.kind == SchemeKind::coulomb_relax || ps.kind == SchemeKind::coulomb_taylor
                             ? ps.rule
                             : cfg.quad_rule;
    eng.icfg.sweeps = ps.kind == SchemeKind::coulomb_relax || ps.kind == SchemeKind::coulomb_taylor
                          ? ps.param
                          : cfg.sweeps;
    eng.icfg.variant = cfg.iter_variant;
    eng.icfg.c3_mode = cfg.c3_mode;
    eng.icfg.validate();
    if (!setup.is_coulomb) {
        if (ps.kind == SchemeKind::ab_split || ps.kind == SchemeKind::summative)
            eng.drift_factor = ab_drift_factor(setup.linear, dt);
        if (ps.kind == SchemeKind::iter && setup.linear.noise_dims() == 1)
            eng.ws = std::make_shared<IterScalarWorkspace>(setup.linear, dt, eng.icfg);
    }
    return eng;
}

// ---------------------------------------------------------------------------
// integration
// ---------------------------------------------------------------------------

struct IntegrationOutput {
    Vector end;
    std::vector<Vector> traj; // filled only when recording
    long clamps = 0;
};

IntegrationOutput integrate_linear(const SchemeEngine& eng, const LinearSdeProblem& p,
                                   const WienerPath& path, bool record) {
    IntegrationOutput out;
    Vector y = p.y0;
    if (record) {
        out.traj.reserve(path.n_steps + 1);
        out.traj.push_back(y);
    }
    for (int k = 0; k < path.n_steps; ++k) {
        y = eng.step_linear(y, p, StepContext{path, k});
        if (!y.allFinite())
            throw divergence_error("linear scheme produced a non-finite state", k);
        if (record) out.traj.push_back(y);
    }
    out.end = std::move(y);
    return out;
}

IntegrationOutput integrate_exact_reference(const LinearSdeProblem& p, const WienerPath& path,
                                            bool record) {
    IntegrationOutput out;
    Vector y = p.y0;
    if (record) {
        out.traj.reserve(path.n_steps + 1);
        out.traj.push_back(y);
    }
    for (int k = 0; k < path.n_steps; ++k) {
        y = exact_linear_step(y, p, StepContext{path, k});
        if (record) out.traj.push_back(y);
    }
    out.end = std::move(y);
    return out;
}

IntegrationOutput integrate_fine_reference_linear(const LinearSdeProblem& p, const WienerPath& path) {
    IntegrationOutput out;
    Vector y = p.y0;
    out.traj.reserve(path.n_steps + 1);
    out.traj.push_back(y);
    for (int k = 0; k < path.n_steps; ++k) {
        y = milstein_step_full(y, p, StepContext{path, k});
        out.traj.push_back(y);
    }
    out.end = std::move(y);
    return out;
}

IntegrationOutput integrate_coulomb(const SchemeEngine& eng, const CoulombProblem& p,
                                    const CoulombState& ic, const WienerPath& path, bool record) {
    IntegrationOutput out;
    CoulombState s = ic;
    if (record) {
        out.traj.reserve(path.n_steps + 1);
        out.traj.push_back(s.to_vector());
    }
    for (int k = 0; k < path.n_steps; ++k) {
        if (mu_needs_clamp(s, p)) ++out.clamps;
        s = eng.step_coulomb(s, p, StepContext{path, k});
        if (record) out.traj.push_back(s.to_vector());
    }
    out.end = s.to_vector();
    return out;
}

IntegrationOutput integrate_fine_reference_coulomb(const CoulombProblem& p, const CoulombState& ic,
                                                   const WienerPath& path) {
    IntegrationOutput out;
    CoulombState s = ic;
    out.traj.reserve(path.n_steps + 1);
    out.traj.push_back(s.to_vector());
    for (int k = 0; k < path.n_steps; ++k) {
        if (mu_needs_clamp(s, p)) ++out.clamps;
        s = milstein_step_coulomb(s, p, StepContext{path, k});
        out.traj.push_back(s.to_vector());
    }
    out.end = s.to_vector();
    return out;
}

struct PathOutcome {
    bool excluded = false;
    double err[3] = {0.0, 0.0, 0.0};
    Vector diff;
    double tmse = 0.0;
    long clamps = 0;
};

double median3(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == ':' || c == ',' || c == '/') c = '-';
    return out;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// run_experiment
// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.n_paths < 1) throw config_error("n_paths must be positive");
    if (!(cfg.t_end > 0.0)) throw config_error("t_end must be positive");
    if (cfg.schemes.empty()) throw config_error("at least one scheme required");
    if (cfg.dt_list.empty()) throw config_error("at least one dt required");
    if (cfg.threads < 1) throw config_error("threads must be positive");
    if (cfg.timing_repeats < 1) throw config_error("timing_repeats must be positive");

    const ProblemSetup setup = parse_problem(cfg);
    if (setup.is_coulomb && cfg.reference == ReferenceKind::exact_linear)
        throw config_error("the exact_linear reference requires a linear problem; "
                           "use fine_milstein for 'coulomb'");

    std::vector<ParsedScheme> schemes;
    for (const std::string& id : cfg.schemes) {
        schemes.push_back(parse_scheme(id, cfg));
        check_compatibility(schemes.back(), setup, cfg.problem);
    }

    // Grid layout: one base path per sample, coarsened per dt.
    const double base_dt =
        cfg.reference == ReferenceKind::fine_milstein
            ? cfg.reference_dt
            : *std::min_element(cfg.dt_list.begin(), cfg.dt_list.end());
    if (!(base_dt > 0.0)) throw config_error("base grid step must be positive");
    const long base_steps = std::llround(cfg.t_end / base_dt);
    if (base_steps < 1 || std::abs(base_steps * base_dt - cfg.t_end) > 1e-9 * cfg.t_end)
        throw config_error("t_end is not an integer multiple of the base grid step");

    std::vector<int> factors;
    for (double dt : cfg.dt_list) {
        if (!(dt > 0.0)) throw config_error("dt values must be positive");
        const long f = std::llround(dt / base_dt);
        if (f < 1 || std::abs(f * base_dt - dt) > 1e-9 * dt || base_steps % f != 0)
            throw config_error("dt " + fmt(dt) + " does not sit on the base grid (base step " +
                               fmt(base_dt) + ")");
        factors.push_back(static_cast<int>(f));
    }

    const std::size_t n_schemes = schemes.size();
    const std::size_t n_dts = cfg.dt_list.size();
    std::vector<std::vector<SchemeEngine>> engines(n_schemes);
    for (std::size_t s = 0; s < n_schemes; ++s)
        for (std::size_t d = 0; d < n_dts; ++d)
            engines[s].push_back(make_engine(schemes[s], setup, cfg.dt_list[d], cfg));

    // outcome[s][d][i]
    std::vector<std::vector<std::vector<PathOutcome>>> outcomes(
        n_schemes, std::vector<std::vector<PathOutcome>>(n_dts, std::vector<PathOutcome>(cfg.n_paths)));
    std::vector<Trajectory> sample0_trajs;
    std::vector<Trajectory> ref_trajs(n_dts);

    auto make_base_path = [&](long i) {
        WienerPath base = generate_path(setup.noise_dims, static_cast<int>(base_steps), base_dt,
                                        GaussianStream::derive(cfg.master_seed, stream_tag::sample,
                                                               static_cast<std::uint64_t>(i)));
        if (cfg.zero_noise) base = with_zero_noise(std::move(base));
        return base;
    };

    auto process_sample = [&](long i) {
        const WienerPath base = make_base_path(i);
        IntegrationOutput fine_ref;
        if (cfg.reference == ReferenceKind::fine_milstein) {
            try {
                fine_ref = setup.is_coulomb
                               ? integrate_fine_reference_coulomb(setup.coulomb, setup.ic, base)
                               : integrate_fine_reference_linear(setup.linear, base);
            } catch (const singularity_error&) {
            } catch (const divergence_error&) {
            }
            const bool ref_ok = fine_ref.traj.size() == static_cast<std::size_t>(base_steps) + 1 &&
                                fine_ref.end.size() > 0 && fine_ref.end.allFinite();
            if (!ref_ok) {
                // No usable reference for this sample: exclude it everywhere.
                for (std::size_t s = 0; s < n_schemes; ++s)
                    for (std::size_t d = 0; d < n_dts; ++d) outcomes[s][d][i].excluded = true;
                return;
            }
        }

        for (std::size_t d = 0; d < n_dts; ++d) {
            const WienerPath coarse = coarsen(base, factors[d]);
            const std::vector<Vector>* ref_traj = nullptr;
            IntegrationOutput exact_ref;
            if (cfg.reference == ReferenceKind::exact_linear) {
                exact_ref = integrate_exact_reference(setup.linear, coarse, true);
                ref_traj = &exact_ref.traj;
            } else {
                ref_traj = &fine_ref.traj;
            }
            const Vector ref_end = ref_traj->back();

            if (i == 0) {
                Trajectory t;
                t.scheme = "reference";
                t.dt = cfg.dt_list[d];
                t.coulomb = setup.is_coulomb;
                const std::size_t n_nodes =
                    cfg.reference == ReferenceKind::exact_linear ? exact_ref.traj.size()
                                                                 : fine_ref.traj.size();
                const double node_dt =
                    cfg.reference == ReferenceKind::exact_linear ? cfg.dt_list[d] : base_dt;
                for (std::size_t k = 0; k < n_nodes; ++k) t.times.push_back(k * node_dt);
                t.states = *ref_traj;
                ref_trajs[d] = std::move(t);
            }

            for (std::size_t s = 0; s < n_schemes; ++s) {
                PathOutcome& po = outcomes[s][d][i];
                try {
                    IntegrationOutput run =
                        setup.is_coulomb
                            ? integrate_coulomb(engines[s][d], setup.coulomb, setup.ic, coarse, true)
                            : integrate_linear(engines[s][d], setup.linear, coarse, true);
                    po.clamps = run.clamps;
                    po.diff = run.end - ref_end;
                    if (setup.is_coulomb) {
                        po.err[0] = std::abs(po.diff[0]);
                        po.err[1] = std::abs(po.diff[1]);
                        po.err[2] = std::abs(po.diff[2]);
                    } else {
                        po.err[0] = po.diff.norm();
                    }
                    po.tmse = time_avg_mse(run.traj, *ref_traj, cfg.dt_list[d], cfg.t_end);
                    if (i == 0) {
                        Trajectory t;
                        t.scheme = schemes[s].id;
                        t.dt = cfg.dt_list[d];
                        t.coulomb = setup.is_coulomb;
                        for (std::size_t k = 0; k < run.traj.size(); ++k)
                            t.times.push_back(k * cfg.dt_list[d]);
                        t.states = std::move(run.traj);
                        sample0_trajs.push_back(std::move(t));
                    }
                } catch (const singularity_error&) {
                    po.excluded = true;
                } catch (const divergence_error&) {
                    po.excluded = true;
                }
            }
        }
    };

    // Measurement pass. Sample 0 runs first on the calling thread so the
    // plotting slots are written without synchronization.
    process_sample(0);
    {
        const long first = 1;
        const long total = cfg.n_paths - first;
        const int n_workers = std::max(1, std::min<int>(cfg.threads, static_cast<int>(total)));
        if (total > 0 && n_workers > 1) {
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(n_workers);
            const long chunk = (total + n_workers - 1) / n_workers;
            for (int w = 0; w < n_workers; ++w) {
                const long lo = first + w * chunk;
                const long hi = std::min<long>(first + (w + 1) * chunk, cfg.n_paths);
                if (lo >= hi) break;
                pool.emplace_back([&, lo, hi, w] {
                    try {
                        for (long i = lo; i < hi; ++i) process_sample(i);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        } else {
            for (long i = first; i < cfg.n_paths; ++i) process_sample(i);
        }
    }

    // Timing pass: wall clock around the integration loop only, median of
    // cfg.timing_repeats; path generation and coarsening are excluded.
    std::vector<std::vector<double>> runtimes(n_schemes, std::vector<double>(n_dts, 0.0));
    if (cfg.measure_timing) {
        using clock = std::chrono::steady_clock;
        for (std::size_t s = 0; s < n_schemes; ++s) {
            for (std::size_t d = 0; d < n_dts; ++d) {
                std::vector<double> reps;
                for (int r = 0; r < cfg.timing_repeats; ++r) {
                    double acc = 0.0;
                    for (long i = 0; i < cfg.n_paths; ++i) {
                        const WienerPath base = make_base_path(i);
                        const WienerPath coarse = coarsen(base, factors[d]);
                        const auto t0 = clock::now();
                        try {
                            if (setup.is_coulomb)
                                integrate_coulomb(engines[s][d], setup.coulomb, setup.ic, coarse,
                                                  false);
                            else
                                integrate_linear(engines[s][d], setup.linear, coarse, false);
                        } catch (const singularity_error&) {
                        } catch (const divergence_error&) {
                        }
                        acc += std::chrono::duration<double>(clock::now() - t0).count();
                    }
                    reps.push_back(acc);
                }
                runtimes[s][d] = median3(std::move(reps));
            }
        }
    }

    // Aggregation in fixed (scheme, dt, path-index) order.
    ExperimentResult result;
    for (std::size_t s = 0; s < n_schemes; ++s) {
        for (std::size_t d = 0; d < n_dts; ++d) {
            const auto& slot = outcomes[s][d];
            std::vector<double> norms;
            Vector diff_sum;
            double tmse_sum = 0.0;
            long clamps = 0, excluded = 0;
            for (long i = 0; i < cfg.n_paths; ++i) {
                const PathOutcome& po = slot[i];
                if (po.excluded) {
                    ++excluded;
                    continue;
                }
                ErrorSample sample;
                sample.scheme = schemes[s].id;
                sample.dt = cfg.dt_list[d];
                sample.path_index = i;
                sample.err_v = po.err[0];
                sample.err_mu = po.err[1];
                sample.err_phi = po.err[2];
                result.samples.push_back(sample);
                norms.push_back(sample.norm());
                if (diff_sum.size() == 0)
                    diff_sum = po.diff;
                else
                    diff_sum += po.diff;
                tmse_sum += po.tmse;
                clamps += po.clamps;
            }
            ConvergenceReport rep;
            rep.scheme = schemes[s].id;
            rep.dt = cfg.dt_list[d];
            rep.n_paths = static_cast<int>(norms.size());
            if (!norms.empty()) {
                rep.strong_error = strong_error(std::span<const double>(norms));
                rep.weak_error = weak_error(std::span<const double>(norms));
                rep.mean_bias = (diff_sum / static_cast<double>(norms.size())).norm();
                rep.variance =
                    norms.size() > 1 ? error_variance(std::span<const double>(norms)) : 0.0;
                rep.time_avg_mse = tmse_sum / static_cast<double>(norms.size());
            }
            rep.runtime_seconds = runtimes[s][d];
            rep.clamp_events = clamps;
            rep.excluded_paths = excluded;
            result.reports.push_back(std::move(rep));
        }
    }

    for (auto& t : ref_trajs)
        if (!t.states.empty()) result.trajectories.push_back(std::move(t));
    for (auto& t : sample0_trajs) result.trajectories.push_back(std::move(t));

    // Soft per-step cost ordering check (warn only).
    if (cfg.measure_timing) {
        auto per_step = [&](std::size_t s, std::size_t d) {
            const double steps = cfg.t_end / cfg.dt_list[d];
            return runtimes[s][d] / std::max(1.0, steps * cfg.n_paths);
        };
        const std::vector<SchemeKind> order = {SchemeKind::em, SchemeKind::milstein,
                                               SchemeKind::milstein_full, SchemeKind::iter};
        for (std::size_t d = 0; d < n_dts; ++d) {
            double last = -1.0;
            std::string last_id;
            for (SchemeKind kind : order) {
                for (std::size_t s = 0; s < n_schemes; ++s) {
                    if (schemes[s].kind != kind) continue;
                    const double cost = per_step(s, d);
                    if (last >= 0.0 && cost < last)
                        std::cerr << "warning: per-step cost of '" << schemes[s].id
                                  << "' is below '" << last_id << "' at dt " << cfg.dt_list[d]
                                  << "\n";
                    last = cost;
                    last_id = schemes[s].id;
                }
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// report emission
// ---------------------------------------------------------------------------

static const char* kCsvHeader =
    "scheme,dt,n_paths,strong_error,weak_error,mean_bias,variance,time_avg_mse,"
    "runtime_seconds,clamp_events,excluded_paths";

std::string render_report_csv(const std::vector<ConvergenceReport>& reports) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const ConvergenceReport& r : reports) {
        out += r.scheme;
        out += ',';
        out += fmt(r.dt) + ',' + std::to_string(r.n_paths) + ',';
        out += fmt(r.strong_error) + ',' + fmt(r.weak_error) + ',' + fmt(r.mean_bias) + ',';
        out += fmt(r.variance) + ',' + fmt(r.time_avg_mse) + ',' + fmt(r.runtime_seconds) + ',';
        out += std::to_string(r.clamp_events) + ',' + std::to_string(r.excluded_paths) + '\n';
    }
    return out;
}

std::string render_report_json(const std::vector<ConvergenceReport>& reports) {
    ordered_json arr = ordered_json::array();
    for (const ConvergenceReport& r : reports) {
        ordered_json row;
        row["scheme"] = r.scheme;
        row["dt"] = r.dt;
        row["n_paths"] = r.n_paths;
        row["strong_error"] = r.strong_error;
        row["weak_error"] = r.weak_error;
        row["mean_bias"] = r.mean_bias;
        row["variance"] = r.variance;
        row["time_avg_mse"] = r.time_avg_mse;
        row["runtime_seconds"] = r.runtime_seconds;
        row["clamp_events"] = r.clamp_events;
        row["excluded_paths"] = r.excluded_paths;
        arr.push_back(std::move(row));
    }
    return arr.dump(2) + "\n";
}

std::vector<ConvergenceReport> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw io_error("parse_report_csv: unexpected header");
    std::vector<ConvergenceReport> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 11) throw io_error("parse_report_csv: malformed row '" + line + "'");
        ConvergenceReport r;
        r.scheme = f[0];
        r.dt = std::strtod(f[1].c_str(), nullptr);
        r.n_paths = parse_int(f[2], "csv row");
        r.strong_error = std::strtod(f[3].c_str(), nullptr);
        r.weak_error = std::strtod(f[4].c_str(), nullptr);
        r.mean_bias = std::strtod(f[5].c_str(), nullptr);
        r.variance = std::strtod(f[6].c_str(), nullptr);
        r.time_avg_mse = std::strtod(f[7].c_str(), nullptr);
        r.runtime_seconds = std::strtod(f[8].c_str(), nullptr);
        r.clamp_events = std::strtol(f[9].c_str(), nullptr, 10);
        r.excluded_paths = std::strtol(f[10].c_str(), nullptr, 10);
        out.push_back(std::move(r));
    }
    return out;
}

void emit_report(const std::vector<ConvergenceReport>& reports, OutputFormat format,
                 const std::string& path) {
    if (reports.empty()) throw std::invalid_argument("emit_report: no reports");
    const std::string body =
        format == OutputFormat::csv ? render_report_csv(reports) : render_report_json(reports);
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("emit_report: cannot open '" + path + "' for writing");
    out << body;
    if (!out) throw io_error("emit_report: write to '" + path + "' failed");
}

void emit_plot_data(const ExperimentResult& result, const std::string& dir) {
    if (result.reports.empty()) throw std::invalid_argument("emit_plot_data: empty result");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("emit_plot_data: cannot create directory '" + dir + "'");

    auto open = [&](const std::string& name) {
        std::ofstream out(dir + "/" + name, std::ios::binary);
        if (!out) throw io_error("emit_plot_data: cannot open '" + dir + "/" + name + "'");
        return out;
    };

    std::vector<std::string> scheme_order;
    {
        auto err = open("error_vs_dt.csv");
        err << "scheme,dt,strong_error,weak_error,mean_bias\n";
        auto var = open("variance_vs_dt.csv");
        var << "scheme,dt,variance\n";
        for (const ConvergenceReport& r : result.reports) {
            err << r.scheme << ',' << fmt(r.dt) << ',' << fmt(r.strong_error) << ','
                << fmt(r.weak_error) << ',' << fmt(r.mean_bias) << '\n';
            var << r.scheme << ',' << fmt(r.dt) << ',' << fmt(r.variance) << '\n';
            if (std::find(scheme_order.begin(), scheme_order.end(), r.scheme) == scheme_order.end())
                scheme_order.push_back(r.scheme);
        }
    }
    for (const std::string& scheme : scheme_order) {
        auto out = open("error_vs_dt_" + sanitize(scheme) + ".csv");
        out << "dt,strong_error,weak_error,mean_bias,variance\n";
        for (const ConvergenceReport& r : result.reports)
            if (r.scheme == scheme)
                out << fmt(r.dt) << ',' << fmt(r.strong_error) << ',' << fmt(r.weak_error) << ','
                    << fmt(r.mean_bias) << ',' << fmt(r.variance) << '\n';
    }
    {
        auto out = open("samples.csv");
        out << "scheme,dt,path_index,err_v,err_mu,err_phi\n";
        for (const ErrorSample& s : result.samples)
            out << s.scheme << ',' << fmt(s.dt) << ',' << s.path_index << ',' << fmt(s.err_v) << ','
                << fmt(s.err_mu) << ',' << fmt(s.err_phi) << '\n';
    }
    for (const Trajectory& t : result.trajectories) {
        const Eigen::Index dim = t.states.empty() ? 0 : t.states.front().size();
        char dt_label[32];
        std::snprintf(dt_label, sizeof(dt_label), "%g", t.dt);
        auto out = open("trajectory_" + sanitize(t.scheme) + "_" + dt_label + ".csv");
        if (t.coulomb)
            out << "t,v,mu,phi\n";
        else {
            out << "t";
            for (Eigen::Index c = 0; c < dim; ++c) out << ",y" << (c + 1);
            out << "\n";
        }
        for (std::size_t k = 0; k < t.states.size(); ++k) {
            out << fmt(t.times[k]);
            for (Eigen::Index c = 0; c < dim; ++c) out << ',' << fmt(t.states[k][c]);
            out << '\n';
        }
    }
    {
        auto out = open("plot.gp");
        out << "# gnuplot script for the convergence and trajectory figures\n"
               "set datafile separator ','\n"
               "set term pngcairo size 900,600\n"
               "set logscale xy\n"
               "set xlabel 'dt'\n"
               "set ylabel 'strong error'\n"
               "set key outside\n"
               "set output 'strong_error.png'\n"
               "plot";
        bool first = true;
        for (const std::string& scheme : scheme_order) {
            out << (first ? " " : ", \\\n     ") << "'error_vs_dt_" << sanitize(scheme)
                << ".csv' using 1:2 skip 1 with linespoints title '" << scheme << "'";
            first = false;
        }
        out << "\n\nset output 'variance.png'\nset ylabel 'variance'\nplot";
        first = true;
        for (const std::string& scheme : scheme_order) {
            out << (first ? " " : ", \\\n     ") << "'error_vs_dt_" << sanitize(scheme)
                << ".csv' using 1:5 skip 1 with linespoints title '" << scheme << "'";
            first = false;
        }
        out << "\n";
    }
}

} // namespace sdesplit
