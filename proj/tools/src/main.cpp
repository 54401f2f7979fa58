// modalsyn: synthesis, re-analysis, load simulation and rendering of
// compliant mechanisms with multiple pseudo-mobility.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "modalsyn/errors.hpp"
#include "modalsyn/io/bundle.hpp"
#include "modalsyn/io/export.hpp"
#include "modalsyn/io/problem.hpp"

#ifndef MODALSYN_VERSION
#define MODALSYN_VERSION "0.0.0"
#endif

namespace {

using namespace modalsyn;
using namespace modalsyn::io;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

/// Bad input files and flag values: exit 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthOptions {
    std::string problem;
    std::string output;
    std::string csv_prefix;
    std::string log_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> starts;
    std::optional<double> mu;
    std::string mu_sweep;
    std::optional<long> guards;
    std::optional<int> max_iters;
    int threads = 1;
    bool verbose = false;
};

struct AnalyzeOptions {
    std::string bundle;
    std::string csv_prefix;
    double tolerance = 1e-9;
};

struct SimulateOptions {
    std::string bundle;
    std::string forces;
    std::string output;
};

struct RenderOptions {
    std::string bundle;
    std::string output;
    int mode = 0;
    int loadcase = 0;
};

std::vector<double> parse_sweep(const std::string& text) {
    double lo = 0, hi = 0;
    int n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || !in.eof() || n < 1) {
        throw UsageError("--mu-sweep expects lo:hi:n, got '" + text + "'");
    }
    return linspace(lo, hi, n);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
}

template <class Fn>
void write_with(const std::string& path, Fn&& fn) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write " + path);
    fn(out);
}

ParsedProblem load_problem(const std::string& path) {
    try {
        return parse_problem(path);
    } catch (const ParseError& e) {
        throw UsageError(std::string(e.what()));
    }
}

ResultBundle load_bundle(const std::string& path) {
    try {
        return parse_bundle(path);
    } catch (const ParseError& e) {
        throw UsageError(std::string(e.what()));
    }
}

BuiltProblem build_checked(const ProblemSpec& spec) {
    try {
        return build_problem(spec);
    } catch (const ParseError& e) {
        throw UsageError(std::string(e.what()));
    }
}

void print_vector(std::ostream& out, const Vector& v, int precision = 6) {
    out << std::setprecision(precision);
    for (Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
}

void print_similarity(std::ostream& out, const SimilarityReport& s) {
    out << "delta_e " << std::setprecision(10) << s.delta_e << "\n";
    for (Index i = 0; i < s.alpha.rows(); ++i) {
        out << "  phi'_" << (i + 1) << " = ";
        for (Index j = 0; j < s.alpha.cols(); ++j) {
            const double a = s.alpha(i, j);
            out << (j ? (a < 0 ? " - " : " + ") : (a < 0 ? "-" : "")) << std::setprecision(4) << std::abs(a) << "*chi_"
                << (j + 1);
        }
        out << "   residual " << std::setprecision(3) << s.residuals[i] << "\n";
    }
}

void print_load_cases(std::ostream& out, const std::vector<LoadCaseResult>& cases) {
    for (const auto& lc : cases) {
        out << "load case '" << lc.name << "': |u_a| " << std::setprecision(6) << lc.response.displacement.norm()
            << "  kinematic fraction " << lc.response.kinematic_fraction << "  parasitic residual "
            << lc.response.parasitic_residual << "  alpha [";
        print_vector(out, lc.response.alpha);
        out << "]\n";
    }
}

int run_synth(const SynthOptions& o) {
    ParsedProblem parsed = load_problem(o.problem);
    for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
    ProblemSpec spec = parsed.spec;

    if (o.seed) spec.config.seed = *o.seed;
    if (o.starts) spec.config.n_starts = *o.starts;
    if (o.guards) spec.config.n_guard = static_cast<Index>(*o.guards);
    if (o.max_iters) spec.config.max_iters = *o.max_iters;
    if (o.mu && !o.mu_sweep.empty()) throw UsageError("give --mu or --mu-sweep, not both");
    if (o.mu) spec.mu_values = {*o.mu};
    if (!o.mu_sweep.empty()) spec.mu_values = parse_sweep(o.mu_sweep);
    spec.config.mu = spec.mu_values.front();
    if (o.threads < 1) throw UsageError("--threads must be at least 1");

    BuiltProblem built = build_checked(spec);
    try {
        spec.config.validate(built.problem.ground.element_count());
        for (double mu : spec.mu_values) {
            if (!(mu > 0.0)) throw InvalidArgument("every mu must be positive");
        }
        if (spec.config.n_guard > built.problem.dofs.active_count() - built.problem.modes.m()) {
            throw InvalidArgument("--guards exceeds the number of undesired modes");
        }
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }

    std::ofstream log_file;
    std::ostream* log = nullptr;
    if (!o.log_path.empty()) {
        log_file.open(o.log_path);
        if (!log_file) throw UsageError("cannot write " + o.log_path);
        log = &log_file;
    } else if (o.verbose) {
        log = &std::cerr;
    }
    ProgressFn progress;
    if (log) {
        progress = [log](const RunTag& tag, const IterationRecord& r) {
            *log << "mu=" << tag.mu << " start=" << tag.start << " s=" << r.step << " lambda=[";
            print_vector(*log, r.lambdas, 8);
            *log << "] S=" << std::setprecision(6) << r.selectivity << " lp=" << to_string(r.lp_status)
                 << (r.escalated ? " escalated" : "") << (r.restoration ? " restoration" : "") << "\n";
        };
    }

    const auto& ground = built.problem.ground;
    std::cout << "problem '" << spec.name << "': " << ground.element_count() << " elements, "
              << ground.structural_dof_count() << " structural DoFs (" << ground.dof_count() << " free), "
              << built.problem.dofs.active_count() << " active, m=" << built.problem.modes.m() << "\n"
              << "running " << spec.mu_values.size() << " mu value(s) x " << spec.config.n_starts << " start(s)\n";

    std::vector<SynthesisResult> ranked =
        multi_start(built.problem, spec.config, spec.mu_values, o.threads, progress);
    ResultBundle bundle = make_bundle(spec, built, ranked, MODALSYN_VERSION);

    for (std::size_t k = 0; k < bundle.runs.size(); ++k) {
        const auto& r = bundle.runs[k];
        std::cout << std::setw(3) << (k + 1) << "  mu " << std::setw(8) << std::setprecision(6) << r.mu << "  start "
                  << std::setw(3) << r.start << "  " << std::setw(18) << std::left << to_string(r.status)
                  << std::right << " it " << std::setw(5) << r.iterations << "  S " << std::setw(9) << r.selectivity
                  << "  delta_e " << std::setprecision(8) << r.delta_e << "  spread " << std::setprecision(3)
                  << r.spread << "\n";
    }
    const auto& best = bundle.best;
    std::cout << std::setprecision(6) << "best: mu " << best.mu << " start " << best.start << " (" << to_string(best.status)
              << ")\neigenvalues: ";
    print_vector(std::cout, best.modal.eigenvalues.head(std::min<Index>(best.modal.size(), best.modal.m + 3)), 8);
    std::cout << "\nselectivity " << std::setprecision(6) << best.summary.selectivity << "\n";
    print_similarity(std::cout, best.similarity);
    print_load_cases(std::cout, bundle.load_cases);

    const std::string out = o.output.empty() ? std::string("bundle.json") : o.output;
    write_text(out, emit_bundle(bundle));
    std::cout << "wrote " << out << "\n";
    if (!o.csv_prefix.empty()) {
        write_with(o.csv_prefix + "history.csv", [&](std::ostream& s) { write_history_csv(s, best.history); });
        write_with(o.csv_prefix + "eigen.csv", [&](std::ostream& s) { write_eigen_csv(s, best.modal); });
        write_with(o.csv_prefix + "runs.csv", [&](std::ostream& s) { write_runs_csv(s, bundle.runs); });
    }
    const bool any_usable = std::any_of(ranked.begin(), ranked.end(), [](const SynthesisResult& r) {
        return r.status != RunStatus::stalled_infeasible;
    });
    return any_usable ? kExitOk : kExitNumerical;
}

int run_analyze(const AnalyzeOptions& o) {
    const ResultBundle bundle = load_bundle(o.bundle);
    const BuiltProblem built = build_checked(bundle.problem);
    const Reanalysis re = reanalyze(bundle, built);
    const auto& e = re.evaluation;
    std::cout << "eigenvalues: ";
    print_vector(std::cout, e.modal.eigenvalues, 10);
    std::cout << "\nprimary: ";
    print_vector(std::cout, e.summary.primary, 10);
    std::cout << "\nsecondary " << std::setprecision(10) << e.summary.secondary << "  selectivity "
              << e.summary.selectivity << "\n";
    print_similarity(std::cout, e.similarity);
    print_load_cases(std::cout, re.load_cases);
    std::cout << "max difference to stored metrics: " << std::setprecision(3) << re.max_difference << "\n";
    if (!o.csv_prefix.empty()) {
        write_with(o.csv_prefix + "eigen.csv", [&](std::ostream& s) { write_eigen_csv(s, e.modal); });
        write_with(o.csv_prefix + "history.csv", [&](std::ostream& s) { write_history_csv(s, bundle.best.history); });
    }
    if (!(re.max_difference <= o.tolerance)) {
        std::cerr << "error: recomputed metrics differ from the bundle by more than " << o.tolerance << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

int run_simulate(const SimulateOptions& o) {
    ResultBundle bundle = load_bundle(o.bundle);
    const BuiltProblem built = build_checked(bundle.problem);
    std::ifstream in(o.forces, std::ios::binary);
    if (!in) throw UsageError("cannot open " + o.forces);
    std::stringstream text;
    text << in.rdbuf();
    std::vector<LoadCaseSpec> cases;
    try {
        cases = parse_load_cases_text(text.str(), bundle.problem.active);
    } catch (const ParseError& e) {
        throw UsageError(o.forces + ": " + e.what());
    }
    const auto evaluation = evaluate_design(built.problem, bundle.best.x);
    const auto results = run_load_cases(evaluation, cases);
    print_load_cases(std::cout, results);
    if (!o.output.empty()) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            bundle.problem.load_cases.push_back(cases[i]);
            bundle.load_cases.push_back(results[i]);
        }
        bundle.config_hash = fnv1a_hex(emit_problem(bundle.problem));
        write_text(o.output, emit_bundle(bundle));
        std::cout << "wrote " << o.output << "\n";
    }
    return kExitOk;
}

int run_render(const RenderOptions& o) {
    const ResultBundle bundle = load_bundle(o.bundle);
    const BuiltProblem built = build_checked(bundle.problem);
    if (o.mode > 0 && o.loadcase > 0) throw UsageError("give --mode or --loadcase, not both");
    SvgOptions svg;
    svg.render_threshold = bundle.problem.export_options.render_threshold;
    svg.displacement_scale = bundle.problem.export_options.displacement_scale;
    svg.x_upper = bundle.problem.config.x_upper;
    std::ostringstream title;
    title << (bundle.problem.name.empty() ? "design" : bundle.problem.name) << ", mu = " << bundle.best.mu;

    Vector field;
    if (o.mode > 0 || o.loadcase > 0) {
        const auto evaluation = evaluate_design(built.problem, bundle.best.x);
        if (o.mode > 0) {
            if (o.mode > evaluation.modal.size()) throw UsageError("--mode exceeds the number of eigenmodes");
            field = mode_field(evaluation, o.mode - 1);
            title << ", eigenmode " << o.mode << " (lambda = " << std::setprecision(6)
                  << evaluation.modal.eigenvalues[o.mode - 1] << ")";
        } else {
            if (o.loadcase > static_cast<int>(bundle.problem.load_cases.size())) {
                throw UsageError("--loadcase exceeds the number of load cases");
            }
            const auto& lc = bundle.problem.load_cases[static_cast<std::size_t>(o.loadcase - 1)];
            field = simulate(evaluation.system, evaluation.modal, lc.forces).full_displacement;
            title << ", load case '" << lc.name << "'";
        }
    }
    svg.title = title.str();
    write_text(o.output, render_svg(built, bundle.best.x, field, svg));
    std::cout << "wrote " << o.output << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Modal synthesis of compliant mechanisms with multiple pseudo-mobility"};
    app.set_version_flag("--version", MODALSYN_VERSION);
    app.require_subcommand(1);

    SynthOptions synth;
    auto* s = app.add_subcommand("synth", "run the multi-start synthesis of a problem file");
    s->add_option("problem", synth.problem, "problem file (JSON)")->required();
    s->add_option("-o,--output", synth.output, "result bundle to write")->capture_default_str();
    s->add_option("--seed", synth.seed, "base random seed")->envname("MODALSYN_SEED");
    s->add_option("--starts", synth.starts, "random starts per mu")->envname("MODALSYN_STARTS");
    s->add_option("--mu", synth.mu, "single primary-stiffness cap")->envname("MODALSYN_MU");
    s->add_option("--mu-sweep", synth.mu_sweep, "lo:hi:n evenly spaced caps")->envname("MODALSYN_MU_SWEEP");
    s->add_option("--guards", synth.guards, "stabilizing undesired modes (0 = all)")->envname("MODALSYN_GUARDS");
    s->add_option("--max-iters", synth.max_iters, "iteration limit per run")->envname("MODALSYN_MAX_ITERS");
    s->add_option("--threads", synth.threads, "worker threads")->envname("MODALSYN_THREADS");
    s->add_option("--csv-prefix", synth.csv_prefix, "write <prefix>history.csv, eigen.csv, runs.csv");
    s->add_option("--log", synth.log_path, "per-iteration progress log file");
    s->add_flag("-v,--verbose", synth.verbose, "per-iteration progress on stderr");

    AnalyzeOptions analyze;
    auto* a = app.add_subcommand("analyze", "recompute spectra, similarity and load cases of a bundle");
    a->add_option("bundle", analyze.bundle, "result bundle")->required();
    a->add_option("--csv-prefix", analyze.csv_prefix, "write <prefix>eigen.csv and history.csv");
    a->add_option("--tolerance", analyze.tolerance, "allowed difference to stored metrics")->capture_default_str();

    SimulateOptions simulate_opts;
    auto* m = app.add_subcommand("simulate", "apply load cases to the best design of a bundle");
    m->add_option("bundle", simulate_opts.bundle, "result bundle")->required();
    m->add_option("--forces", simulate_opts.forces, "JSON file with a load_cases list")->required();
    m->add_option("-o,--output", simulate_opts.output, "write the bundle with the new load cases appended");

    RenderOptions render;
    auto* r = app.add_subcommand("render", "draw the best design of a bundle as SVG");
    r->add_option("bundle", render.bundle, "result bundle")->required();
    r->add_option("--mode", render.mode, "overlay eigenmode k (1-based)")->check(CLI::PositiveNumber);
    r->add_option("--loadcase", render.loadcase, "overlay load case j (1-based)")->check(CLI::PositiveNumber);
    r->add_option("-o,--output", render.output, "SVG file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*s) return run_synth(synth);
        if (*a) return run_analyze(analyze);
        if (*m) return run_simulate(simulate_opts);
        if (*r) return run_render(render);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const modalsyn::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
