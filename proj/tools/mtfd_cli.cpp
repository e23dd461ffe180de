// Command-line experiment harness for the multi-term time-fractional
// diffusion toolkit.  Subcommands: ml-eval, solve, crosscheck, asymptotics,
// invert, accept.  Exit codes: 0 all checks pass, 2 configuration violation,
// 3 numeric failure or failed check.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mtfd/acceptance.hpp"
#include "mtfd/asymptotics.hpp"
#include "mtfd/config.hpp"
#include "mtfd/csv.hpp"
#include "mtfd/inverse.hpp"
#include "mtfd/solvers.hpp"

namespace {

using namespace mtfd;
namespace fs = std::filesystem;

struct CliArgs {
    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    std::optional<std::uint64_t> seed;  // overrides the config seed
};

struct Loaded {
    ExperimentConfig cfg;
    Grid1D grid;
    DiscreteProblem d;

    explicit Loaded(const CliArgs& args)
        : cfg(load_config(require_config(args))),
          grid(cfg.problem.x_lo, cfg.problem.x_hi, cfg.disc.N),
          d(assemble(cfg.problem, grid)) {
        if (args.seed) cfg.seed = *args.seed;
    }

    static const std::string& require_config(const CliArgs& args) {
        if (args.config_path.empty()) throw spec_error("--config is required for this subcommand");
        return args.config_path;
    }
};

ContourSpec contour_for(const ExperimentConfig& cfg, double t_min) {
    if (cfg.contour) {
        ContourSpec c = *cfg.contour;
        c.validate(cfg.problem.orders.largest());
        return c;
    }
    return ContourSpec::standard(cfg.problem.orders.largest(), t_min);
}

// Runs the named solver on the configured discretization.  The Laplace solver
// cannot produce t = 0; its field starts at the first positive grid time.
Field run_solver(const std::string& name, const Loaded& L, const TimeGrid& times, int threads) {
    if (name == "l1") return l1_solve(L.d, times);
    if (name == "picard") {
        EigenBasis basis = eigendecompose(L.d.A, L.grid.h);
        return picard_solve(L.d, basis, times);
    }
    if (name == "spectral") {
        if (L.d.orders.ell() != 1)
            throw spec_error("solver 'spectral' requires a single-term problem");
        EigenBasis basis = eigendecompose(L.d.A, L.grid.h);
        return spectral_single_term(L.grid, basis, L.d.orders.largest(), L.d.initial, times);
    }
    if (name == "laplace") {
        std::vector<double> pos;
        for (double t : times.times)
            if (t > 0.0) pos.push_back(t);
        if (pos.empty()) throw spec_error("solver 'laplace' needs positive times");
        return laplace_solve(L.d, contour_for(L.cfg, pos.front()), TimeGrid::samples(pos),
                             threads);
    }
    throw spec_error("unknown solver '" + name + "'");
}

void write_field_csv(const std::string& path, const Field& f) {
    CsvWriter w(path);
    w.header({"x", "t", "u"});
    for (int k = 0; k < f.time_count(); ++k)
        for (int i = 0; i < f.grid.n; ++i)
            w.row({f.grid.node(i), f.times.times[k], f.values(i, k)});
}

// ---------------------------------------------------------------------------

int cmd_ml_eval(const CliArgs& args) {
    Loaded L(args);
    const MlEvalConfig& m = L.cfg.ml;
    fs::create_directories(args.out_dir);
    CsvWriter w((fs::path(args.out_dir) / "mleval.csv").string());
    w.header({"alpha", "beta", "x", "value", "recurrence_residual"});
    double worst = 0.0;
    for (double alpha : m.alphas) {
        MLParams p(alpha, m.beta);  // validates the parameter ranges
        for (int i = 0; i < m.count; ++i) {
            double x = m.x_lo + (m.x_hi - m.x_lo) * i / (m.count - 1);
            complex z(x, 0.0);
            double v = detail::ml_eval(p.alpha, p.beta, z, 1e-12).value.real();
            // E_{a,b}(z) = z E_{a,b+a}(z) + 1/Gamma(b)
            double rhs = (x == 0.0)
                             ? rgamma(m.beta)
                             : x * detail::ml_eval(p.alpha, p.beta + p.alpha, z, 1e-12).value.real() +
                                   rgamma(m.beta);
            double res = std::abs(v - rhs) / std::max(1.0, std::abs(v));
            worst = std::max(worst, res);
            w.row({alpha, m.beta, x, v, res});
        }
    }
    std::printf("ml-eval: %zu orders, %d points each, max recurrence residual %s\n",
                m.alphas.size(), m.count, format_full(worst).c_str());
    if (worst > 1e-8) {
        std::fprintf(stderr, "ml-eval: recurrence identity residual above 1e-8\n");
        return 3;
    }
    return 0;
}

int cmd_solve(const CliArgs& args) {
    Loaded L(args);
    auto times = TimeGrid::graded(L.cfg.disc.T, L.cfg.disc.K, L.cfg.disc.grading);
    Field u = run_solver(L.cfg.solver, L, times, args.threads);
    fs::create_directories(args.out_dir);
    std::string path = (fs::path(args.out_dir) / "solve.csv").string();
    write_field_csv(path, u);
    std::printf("solve: solver %s, %d x %d samples -> %s\n", L.cfg.solver.c_str(), u.grid.n,
                u.time_count(), path.c_str());
    return 0;
}

int cmd_crosscheck(const CliArgs& args) {
    Loaded L(args);
    if (!L.cfg.crosscheck) throw spec_error("config.crosscheck: required for this subcommand");
    const CrosscheckConfig& cc = *L.cfg.crosscheck;
    auto times = TimeGrid::graded(L.cfg.disc.T, L.cfg.disc.K, L.cfg.disc.grading);
    Field ua = run_solver(cc.solvers[0], L, times, args.threads);
    Field ub = run_solver(cc.solvers[1], L, times, args.threads);

    // compare on the common (positive) times
    fs::create_directories(args.out_dir);
    CsvWriter w((fs::path(args.out_dir) / "crosscheck.csv").string());
    w.header({"t", "norm_" + cc.solvers[0], "norm_" + cc.solvers[1], "l2_diff"});
    // the Laplace solver drops the leading t = 0 sample; align by offset
    int offa = (int)times.times.size() - ua.time_count();
    int offb = (int)times.times.size() - ub.time_count();
    double max_diff = 0.0, max_norm = 0.0;
    for (int k = 0; k < (int)times.times.size(); ++k) {
        double t = times.times[k];
        int ka = k - offa, kb = k - offb;
        if (ka < 0 || kb < 0) continue;
        double na = ua.l2_norm(ka), nb = ub.l2_norm(kb);
        double diff = std::sqrt(L.grid.h) * (ua.values.col(ka) - ub.values.col(kb)).norm();
        max_diff = std::max(max_diff, diff);
        max_norm = std::max(max_norm, nb);
        w.row({t, na, nb, diff});
    }
    double rel = max_diff / std::max(max_norm, 1e-300);
    std::printf("crosscheck: %s vs %s, max relative L2 difference %s (tolerance %s)\n",
                cc.solvers[0].c_str(), cc.solvers[1].c_str(), format_full(rel).c_str(),
                format_full(cc.tolerance).c_str());
    if (!(rel <= cc.tolerance)) {
        std::fprintf(stderr, "crosscheck: solvers disagree beyond tolerance\n");
        return 3;
    }
    return 0;
}

int cmd_asymptotics(const CliArgs& args) {
    Loaded L(args);
    const AsymptoticsConfig& ac = L.cfg.asymptotics;
    auto times = TimeGrid::logspace(ac.t_lo, ac.t_hi, ac.count);
    AsymptoticsReport rep = verify_theorem_asymp(L.d, times, args.threads);

    fs::create_directories(args.out_dir);
    {
        CsvWriter w((fs::path(args.out_dir) / "asymptotics.csv").string());
        w.header({"t", "norm_u", "norm_u_minus_v", "norm_u_minus_ul"});
        for (std::size_t k = 0; k < rep.times.size(); ++k)
            w.row({rep.times[k], rep.norm_u[k], rep.norm_u_minus_v[k], rep.norm_u_minus_ul[k]});
    }
    {
        CsvWriter w((fs::path(args.out_dir) / "asymptotics_fits.csv").string());
        w.header({"quantity", "slope", "intercept", "log_rms_residual", "target_slope", "pass"});
        auto fit_row = [&](const char* q, const DecayFit& f, double target, bool pass) {
            w.raw_row({q, format_full(f.slope), format_full(f.intercept),
                       format_full(f.residual), format_full(target), pass ? "1" : "0"});
        };
        fit_row("norm_u", rep.fit_u, rep.target_slope_u, rep.pass_u);
        fit_row("norm_u_minus_v", rep.fit_uv, rep.target_slope_diff, rep.pass_uv);
        fit_row("norm_u_minus_ul", rep.fit_ul, rep.target_slope_diff, rep.pass_ul);
    }
    std::printf("asymptotics: ||u|| slope %s (target %s), ||u-v|| slope %s, ||u-u_l|| slope %s "
                "(target %s) -> %s\n",
                format_full(rep.fit_u.slope).c_str(), format_full(rep.target_slope_u).c_str(),
                format_full(rep.fit_uv.slope).c_str(), format_full(rep.fit_ul.slope).c_str(),
                format_full(rep.target_slope_diff).c_str(), rep.pass() ? "PASS" : "FAIL");
    return rep.pass() ? 0 : 3;
}

int cmd_invert(const CliArgs& args) {
    Loaded L(args);
    if (!L.cfg.invert) throw spec_error("config.invert: required for this subcommand");
    const InvertConfig& iv = *L.cfg.invert;
    if (iv.observation.empty())
        throw spec_error("config.invert.observation: required for this subcommand");

    CsvTable table = read_csv(iv.observation);
    Observation obs;
    obs.x0 = iv.x0;
    obs.times = TimeGrid::samples(table.column("t"));
    obs.values = table.column("u");

    int ell = L.d.orders.ell();
    OrderSet init = iv.init.empty() ? L.d.orders : OrderSet(iv.init);
    EstimateOptions opts;
    opts.max_evals = iv.max_evals;
    opts.threads = args.threads;
    InversionResult res = estimate_orders(obs, L.d, ell, init, opts);

    fs::create_directories(args.out_dir);
    {
        CsvWriter w((fs::path(args.out_dir) / "orders.csv").string());
        std::vector<std::string> names;
        for (int j = 1; j <= ell; ++j) names.push_back("alpha_" + std::to_string(j));
        names.push_back("misfit");
        names.push_back("evaluations");
        names.push_back("converged");
        names.push_back("fixed_sign_initial");
        w.header(names);
        std::vector<double> row(res.orders.alphas);
        row.push_back(res.misfit);
        row.push_back((double)res.evaluations);
        row.push_back(res.converged ? 1.0 : 0.0);
        row.push_back(res.fixed_sign_initial ? 1.0 : 0.0);
        w.row(row);
    }
    if (!res.trace.s_values.empty()) {
        CsvWriter w((fs::path(args.out_dir) / "discriminator.csv").string());
        w.header({"s", "w", "q1"});
        for (std::size_t k = 0; k < res.trace.s_values.size(); ++k)
            w.row({res.trace.s_values[k], res.trace.w_values[k], res.trace.q1_values[k]});
    }

    std::printf("invert: recovered orders (");
    for (int j = 0; j < ell; ++j)
        std::printf("%s%s", j ? ", " : "", format_full(res.orders.alphas[j]).c_str());
    std::printf("), misfit %s, %d evaluations\n", format_full(res.misfit).c_str(),
                res.evaluations);
    if (!res.fixed_sign_initial)
        std::fprintf(stderr, "invert: warning: initial data changes sign; the uniqueness "
                             "hypothesis does not hold\n");
    if (!res.converged) {
        std::fprintf(stderr, "invert: optimizer stagnated above the misfit tolerance; orders "
                             "not identified\n");
        return 3;
    }
    return 0;
}

int cmd_accept(const CliArgs& args) {
    std::uint64_t seed = args.seed ? *args.seed : 1;
    if (!args.config_path.empty()) {
        ExperimentConfig cfg = load_config(args.config_path);  // validated, seed honored
        if (!args.seed) seed = cfg.seed;
    }
    AcceptanceReport rep = run_acceptance(seed, args.out_dir, args.threads);
    for (const auto& r : rep.results)
        std::printf("[criterion %2d] %-4s %s — %s\n", r.id, r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.detail.c_str());
    std::printf("accept: %s\n", rep.all_pass() ? "all criteria passed" : "FAILURES present");
    return rep.all_pass() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-term time-fractional diffusion toolkit"};
    app.require_subcommand(1);

    CliArgs args;
    std::uint64_t seed_value = 0;
    for (const char* name :
         {"ml-eval", "solve", "crosscheck", "asymptotics", "invert", "accept"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config_path, "experiment config (JSON)");
        sub->add_option("--out", args.out_dir, "artifact output directory");
        sub->add_option("--threads", args.threads, "worker threads")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed_value, "random seed (overrides the config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) args.seed = seed_value;
    const std::string name = sub->get_name();

    try {
        if (name == "ml-eval") return cmd_ml_eval(args);
        if (name == "solve") return cmd_solve(args);
        if (name == "crosscheck") return cmd_crosscheck(args);
        if (name == "asymptotics") return cmd_asymptotics(args);
        if (name == "invert") return cmd_invert(args);
        if (name == "accept") return cmd_accept(args);
        std::fprintf(stderr, "unknown subcommand '%s'\n", name.c_str());
        return 2;
    } catch (const std::invalid_argument& e) {  // spec_error and kin
        std::fprintf(stderr, "config violation: %s\n", e.what());
        return 2;
    } catch (const std::logic_error& e) {
        std::fprintf(stderr, "config violation: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {  // numeric_error, accuracy_error, ...
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    }
}
