#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "gwlimit/applications.hpp"
#include "gwlimit/poincare.hpp"
#include "gwlimit/reconstruct.hpp"
#include "gwlimit/simulate.hpp"
#include "io.hpp"

namespace gwlimit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())));
}

struct Common {
    std::string pgf_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
};

struct SolveOpts {
    std::string method = "newton";
    std::size_t order = 80;
    std::optional<double> tol;
    std::optional<int> max_iters;
};

struct SimOpts {
    std::size_t reps = 100000;
    int gens = 12;
    std::size_t bins = 100;
    double tail_lo = 0.7;
    double tail_hi = 1.0;
    unsigned workers = 0;
    std::uint64_t cap = 1000000000;
};

// Records outputs and writes manifest.json last.
class Run {
public:
    Run(std::string command, const std::vector<std::string>& args, const Common& common)
        : dir_(common.out_dir) {
        fs::create_directories(dir_);
        manifest_ = {{"program", "gwlimit-cli"},
                     {"command", std::move(command)},
                     {"arguments", args},
                     {"out_dir", common.out_dir},
                     {"seed", common.seed},
                     {"started_utc", utc_now()}};
        if (!common.pgf_path.empty()) manifest_["pgf_path"] = common.pgf_path;
    }

    fs::path file(const std::string& name) {
        outputs_.push_back(name);
        return dir_ / name;
    }

    json& manifest() { return manifest_; }

    void finish() {
        outputs_.push_back("manifest.json");
        manifest_["outputs"] = outputs_;
        manifest_["finished_utc"] = utc_now();
        write_json(dir_ / "manifest.json", manifest_);
    }

private:
    fs::path dir_;
    json manifest_;
    std::vector<std::string> outputs_;
};

Pgf load_pgf(const std::string& path) {
    if (path.empty()) throw InputError("--pgf is required");
    return pgf_from_json(read_json(path));
}

void add_solve_flags(CLI::App* cmd, SolveOpts& o) {
    cmd->add_option("--method", o.method, "forward | fixed | newton")
        ->check(CLI::IsMember({"forward", "fixed", "newton"}))
        ->capture_default_str();
    cmd->add_option("--order", o.order, "highest Taylor coefficient N")->check(CLI::Range(2, 170))->capture_default_str();
    cmd->add_option("--tol", o.tol, "stopping tolerance (default 1e-14 newton, 1e-8 fixed)")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", o.max_iters, "iteration cap (default 50 newton, 10000 fixed)")->check(CLI::PositiveNumber);
}

void add_sim_flags(CLI::App* cmd, SimOpts& o, const std::string& prefix) {
    cmd->add_option("--" + prefix + "reps", o.reps, "Monte-Carlo replicates M")->check(CLI::Range(std::size_t{100}, std::size_t{1} << 40))->capture_default_str();
    cmd->add_option("--" + prefix + "gens", o.gens, "generations T")->check(CLI::Range(1, 100000))->capture_default_str();
    cmd->add_option("--bins", o.bins, "histogram bins")->check(CLI::Range(std::size_t{3}, std::size_t{1} << 24))->capture_default_str();
    cmd->add_option("--tail-lo", o.tail_lo, "start of the tail-fit range, fraction of the max sample")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--tail-hi", o.tail_hi, "end of the tail-fit range")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--workers", o.workers, "threads (0 = hardware concurrency)")->capture_default_str();
    cmd->add_option("--cap", o.cap, "population cap per replicate")->capture_default_str();
}

SolverConfig solver_config(const SolveOpts& o) {
    SolverConfig cfg;
    cfg.order = o.order;
    cfg.tol = o.tol;
    cfg.max_iters = o.max_iters;
    return cfg;
}

void record_solver(json& manifest, const SolveOpts& o, Method method) {
    manifest["method"] = std::string(to_string(method));
    manifest["order"] = o.order;
    manifest["tol"] = o.tol.value_or(default_tolerance(method));
    manifest["max_iters"] = o.max_iters.value_or(default_max_iterations(method));
}

SimConfig sim_config(const SimOpts& o, std::uint64_t seed) {
    SimConfig cfg;
    cfg.replicates = o.reps;
    cfg.generations = o.gens;
    cfg.seed = seed;
    cfg.bins = o.bins;
    cfg.tail_fit_range = {o.tail_lo, o.tail_hi};
    cfg.workers = o.workers;
    cfg.population_cap = o.cap;
    return cfg;
}

SolveReport solve_and_warn(const Pgf& pgf, const SolveOpts& o, std::ostream& err) {
    const Method method = parse_method(o.method);
    SolveReport report = solve(pgf, method, solver_config(o));
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    if (!report.converged)
        err << fmt::format("warning: {} did not reach tolerance after {} iterations (residual {})\n", o.method,
                           report.iterations, format_double(report.final_residual));
    return report;
}

double model_mean_offspring(const std::optional<double>& m_flag, const std::string& pgf_path) {
    if (m_flag) {
        if (!(*m_flag > 1.0)) throw InputError("--m must exceed 1");
        return *m_flag;
    }
    if (pgf_path.empty()) throw InputError("pass --pgf or --m to supply the mean offspring number");
    return mean(load_pgf(pgf_path));
}

int cmd_solve(const Common& common, const SolveOpts& o, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
    const Pgf pgf = load_pgf(common.pgf_path);
    Run run("solve", args, common);
    const SolveReport report = solve_and_warn(pgf, o, err);
    record_solver(run.manifest(), o, report.method);

    std::vector<double> index(report.phi.size());
    for (std::size_t j = 0; j < index.size(); ++j) index[j] = double(j);
    const auto coeffs = report.phi.coeffs();
    write_csv(run.file("phi.csv"), {"index", "coefficient"}, {index, {coeffs.begin(), coeffs.end()}});

    json doc = {{"method", std::string(to_string(report.method))},
                {"order", report.phi.order()},
                {"iterations", report.iterations},
                {"final_residual", report.final_residual},
                {"converged", report.converged},
                {"residual_history", report.residual_history},
                {"warnings", report.warnings},
                {"pgf", pgf_to_json(pgf)}};
    write_json(run.file("report.json"), doc);
    run.finish();

    out << fmt::format("method {}  iterations {}  residual {}  converged {}\n", to_string(report.method),
                       report.iterations, format_double(report.final_residual), report.converged);
    return report.converged ? kSuccess : kNotConverged;
}

int cmd_density(const Common& common, const SolveOpts& o, const SimOpts& s, std::optional<double> beta_flag,
                std::optional<std::size_t> basis, std::size_t grid, const std::vector<std::string>& args,
                std::ostream& out, std::ostream& err) {
    const Pgf pgf = load_pgf(common.pgf_path);
    const GwInvariants inv = invariants(pgf);
    Run run("density", args, common);
    const SolveReport report = solve_and_warn(pgf, o, err);
    record_solver(run.manifest(), o, report.method);
    const MomentVector moments = moments_from_coeffs(report.phi);

    double beta = 0.0;
    if (beta_flag) {
        if (!(*beta_flag > 0.0)) throw InputError("--beta must be positive");
        beta = *beta_flag;
        run.manifest()["beta_source"] = "user";
    } else {
        const SimOutput sim = simulate_w(pgf, sim_config(s, common.seed));
        if (!sim.tail_fit) throw std::runtime_error("tail fit underdetermined; pass --beta explicitly");
        beta = sim.tail_fit->beta_hat;
        if (!(beta > 0.0)) throw std::runtime_error("estimated beta is not positive; pass --beta explicitly");
        run.manifest()["beta_source"] = "estimated";
        run.manifest()["simulation"] = {{"replicates", s.reps}, {"generations", s.gens}, {"bins", s.bins},
                                        {"tail_fit_range", {s.tail_lo, s.tail_hi}}, {"fit_r2", sim.tail_fit->r2}};
    }
    run.manifest()["beta"] = beta;

    const DensityModel model = fit_density(moments, inv.q, inv.alpha, beta, basis);
    const double mass = model.q + continuous_mass(model);
    if (std::abs(mass - 1.0) > 1e-3) err << "warning: total mass " << format_double(mass) << " differs from 1 by more than 1e-3\n";
    write_json(run.file("model.json"), model_to_json(model));

    double x_max = 50.0 / beta;
    try {
        x_max = quantile(model, 0.999);
    } catch (const std::runtime_error&) {
        err << "warning: 0.999 quantile not reached; density grid uses 50/beta\n";
    }
    std::vector<double> xs(grid), f(grid), fplus(grid), cdf(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        xs[i] = x_max * double(i + 1) / double(grid);
        f[i] = density_at(model, xs[i]);
        fplus[i] = f[i] / (1.0 - model.q);
        cdf[i] = cdf_at(model, xs[i]);
    }
    const auto mono = monotone_cdf(model, xs);
    write_csv(run.file("density.csv"), {"x", "density", "conditional_density"}, {xs, f, fplus});
    write_csv(run.file("cdf.csv"), {"x", "cdf", "cdf_monotone"}, {xs, cdf, mono});
    run.finish();

    out << fmt::format("q {}\nalpha {}\nbeta {}\nm {}\nmass {}\n", format_double(inv.q), format_double(inv.alpha),
                       format_double(beta), format_double(inv.m), format_double(mass));
    return report.converged ? kSuccess : kNotConverged;
}

int cmd_simulate(const Common& common, const SimOpts& s, const std::vector<std::string>& args, std::ostream& out) {
    const Pgf pgf = load_pgf(common.pgf_path);
    Run run("simulate", args, common);
    const SimOutput sim = simulate_w(pgf, sim_config(s, common.seed));
    run.manifest()["simulation"] = {{"replicates", s.reps}, {"generations", s.gens}, {"bins", s.bins},
                                    {"tail_fit_range", {s.tail_lo, s.tail_hi}}};

    write_csv(run.file("wsamples.csv"), {"w"}, {sim.w_samples});
    std::vector<double> lo, hi, counts;
    for (std::size_t k = 0; k < sim.histogram.counts.size(); ++k) {
        lo.push_back(sim.histogram.edges[k]);
        hi.push_back(sim.histogram.edges[k + 1]);
        counts.push_back(double(sim.histogram.counts[k]));
    }
    write_csv(run.file("histogram.csv"), {"lo", "hi", "count"}, {lo, hi, counts});
    run.finish();

    out << "survived_fraction " << format_double(sim.survived_fraction) << '\n';
    if (sim.tail_fit) {
        out << "beta_hat " << format_double(sim.tail_fit->beta_hat) << "\nr2 " << format_double(sim.tail_fit->r2) << '\n';
    } else {
        out << "beta_hat unavailable (tail fit underdetermined)\n";
    }
    return kSuccess;
}

int cmd_predict(const Common& common, const std::string& model_path, std::optional<double> m_flag, int n, double level,
                std::optional<double> K, std::ostream& out) {
    const DensityModel model = model_from_json(read_json(model_path));
    const double m = model_mean_offspring(m_flag, common.pgf_path);
    const auto [lo, hi] = prediction_interval(model, m, n, level);
    json doc = {{"n", n}, {"level", level}, {"m", m}, {"interval", {lo, hi}}};
    if (K) {
        if (!(*K > 0.0)) throw InputError("--K must be positive");
        doc["K"] = *K;
        doc["exceedance_probability"] = exceedance_probability(model, m, n, *K);
    }
    out << doc.dump(2) << '\n';
    return kSuccess;
}

struct TimeGrid {
    double start;
    double stop;
    std::size_t count;
};

TimeGrid parse_grid(const std::string& text) {
    double a = 0.0;
    double b = 0.0;
    unsigned long n = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lu%c", &a, &b, &n, &tail) != 3 || !(a < b) || n < 2)
        throw InputError("--t-grid expects start:stop:count with start < stop and count >= 2");
    return {a, b, n};
}

int cmd_establish(const Common& common, const std::string& model_path, std::optional<double> m_flag, double K,
                  const std::string& grid_text, const std::vector<std::string>& args, std::ostream& out) {
    if (!(K > 0.0)) throw InputError("--K must be positive");
    const DensityModel model = model_from_json(read_json(model_path));
    const double m = model_mean_offspring(m_flag, common.pgf_path);
    const EstablishmentQuery query{K, model, m};

    TimeGrid grid{};
    if (!grid_text.empty()) {
        grid = parse_grid(grid_text);
    } else {
        // tau = log(K / W) / log m between the extreme quantiles of W | W > 0.
        const double t_early = std::log(K / quantile(model, 1.0 - 1e-4)) / std::log(m);
        const double t_late = std::log(K / quantile(model, 1e-4)) / std::log(m);
        const double pad = 0.05 * (t_late - t_early);
        grid = {t_early - pad, t_late + pad, 1001};
    }

    Run run("establish", args, common);
    run.manifest()["K"] = K;
    run.manifest()["m"] = m;
    run.manifest()["t_grid"] = {grid.start, grid.stop, grid.count};

    std::vector<double> ts(grid.count), g(grid.count), G(grid.count);
    const double h = (grid.stop - grid.start) / double(grid.count - 1);
    double integral = 0.0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        ts[i] = grid.start + h * double(i);
        g[i] = establishment_density(query, ts[i]);
        G[i] = establishment_cdf(query, ts[i]);
        if (i > 0) integral += 0.5 * h * (g[i] + g[i - 1]);
    }
    write_csv(run.file("tau_density.csv"), {"t", "density", "cdf"}, {ts, g, G});

    const auto n_max = static_cast<std::size_t>(std::max(0.0, std::ceil(grid.stop)));
    const auto pmf = establishment_pmf(query, n_max);
    std::vector<double> ns(pmf.size());
    for (std::size_t n = 0; n < ns.size(); ++n) ns[n] = double(n);
    write_csv(run.file("tau_pmf.csv"), {"n", "probability"}, {ns, pmf});
    run.finish();

    out << "integral " << format_double(integral) << '\n';
    return kSuccess;
}

int cmd_moments(const Common& common, const SolveOpts& o, int k, const std::vector<std::string>& args,
                std::ostream& out, std::ostream& err) {
    const Pgf pgf = load_pgf(common.pgf_path);
    Run run("moments", args, common);
    const SolveReport report = solve_and_warn(pgf, o, err);
    record_solver(run.manifest(), o, report.method);
    const MomentVector moments = moments_of_sum(moments_from_coeffs(report.phi), k);
    const double atom = sum_atom(extinction_probability(pgf), k);
    run.manifest()["k"] = k;
    run.manifest()["atom"] = atom;

    std::vector<double> index(moments.order() + 1);
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = double(i);
    write_csv(run.file("moments.csv"), {"index", "moment"}, {index, {moments.values().begin(), moments.values().end()}});
    run.finish();

    out << "atom " << format_double(atom) << '\n';
    return report.converged ? kSuccess : kNotConverged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Distribution of the limit W of a supercritical Galton-Watson process"};
    app.name("gwlimit-cli");
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* cmd, bool needs_pgf) {
        auto* opt = cmd->add_option("--pgf", common.pgf_path, "offspring law JSON");
        if (needs_pgf) opt->required();
        cmd->add_option("--out", common.out_dir, "output directory")->capture_default_str();
        cmd->add_option("--seed", common.seed, "64-bit RNG seed")->capture_default_str();
    };

    SolveOpts solve_opts;
    SimOpts sim_opts;
    std::optional<double> beta_flag;
    std::optional<std::size_t> basis;
    std::size_t grid = 500;
    std::string model_path;
    std::optional<double> m_flag;
    int n = 0;
    double level = 0.9;
    std::optional<double> K_opt;
    double K = 100.0;
    std::string t_grid;
    int k = 1;

    auto* solve_cmd = app.add_subcommand("solve", "Taylor coefficients of the Laplace transform of W");
    add_common(solve_cmd, true);
    add_solve_flags(solve_cmd, solve_opts);

    auto* density_cmd = app.add_subcommand("density", "moment-matched Laguerre density of W");
    add_common(density_cmd, true);
    add_solve_flags(density_cmd, solve_opts);
    add_sim_flags(density_cmd, sim_opts, "sim-");
    density_cmd->add_option("--beta", beta_flag, "tail rate; skips the simulation");
    density_cmd->add_option("--basis", basis, "number of Laguerre terms S+1 (default floor((N+1)/2))")->check(CLI::PositiveNumber);
    density_cmd->add_option("--grid", grid, "points in density.csv and cdf.csv")->check(CLI::Range(std::size_t{2}, std::size_t{10000000}))->capture_default_str();

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo samples of Z_T / m^T");
    add_common(simulate_cmd, true);
    add_sim_flags(simulate_cmd, sim_opts, "");

    auto* predict_cmd = app.add_subcommand("predict", "prediction interval for Z_n given survival");
    add_common(predict_cmd, false);
    predict_cmd->add_option("--model", model_path, "model.json from density")->required();
    predict_cmd->add_option("--m", m_flag, "mean offspring number (else taken from --pgf)");
    predict_cmd->add_option("--n", n, "generation")->required()->check(CLI::NonNegativeNumber);
    predict_cmd->add_option("--level", level, "coverage in (0, 1)")->capture_default_str();
    predict_cmd->add_option("--K", K_opt, "also report P(Z_n >= K | survival)");

    auto* establish_cmd = app.add_subcommand("establish", "density of the time to reach K individuals");
    add_common(establish_cmd, false);
    establish_cmd->add_option("--model", model_path, "model.json from density")->required();
    establish_cmd->add_option("--m", m_flag, "mean offspring number (else taken from --pgf)");
    establish_cmd->add_option("--K", K, "population threshold")->capture_default_str();
    establish_cmd->add_option("--t-grid", t_grid, "start:stop:count (default spans the 1e-4 quantiles)");

    auto* moments_cmd = app.add_subcommand("moments", "moments of W, or of the sum of k copies");
    add_common(moments_cmd, true);
    add_solve_flags(moments_cmd, solve_opts);
    moments_cmd->add_option("--k", k, "number of ancestors")->check(CLI::PositiveNumber)->capture_default_str();

    std::vector<std::string> argv_storage{"gwlimit-cli"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInputError;
    }

    try {
        if (*solve_cmd) return cmd_solve(common, solve_opts, args, out, err);
        if (*density_cmd) return cmd_density(common, solve_opts, sim_opts, beta_flag, basis, grid, args, out, err);
        if (*simulate_cmd) return cmd_simulate(common, sim_opts, args, out);
        if (*predict_cmd) return cmd_predict(common, model_path, m_flag, n, level, K_opt, out);
        if (*establish_cmd) return cmd_establish(common, model_path, m_flag, K, t_grid, args, out);
        if (*moments_cmd) return cmd_moments(common, solve_opts, k, args, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNotConverged;
    }
    return kInputError;
}

}  // namespace gwlimit::cli
