#include "modalsyn/io/bundle.hpp"

#include <algorithm>
#include <cmath>

#include "json_reader.hpp"
#include "modalsyn/errors.hpp"

namespace modalsyn::io {

using detail::JsonReader;
using detail::matrix_from;
using detail::to_json;
using detail::vector_from;
using json = nlohmann::ordered_json;

RunSummary summarize_run(const SynthesisResult& run) {
    RunSummary s;
    s.mu = run.mu;
    s.start = run.start;
    s.seed = run.seed;
    s.status = run.status;
    s.iterations = static_cast<int>(run.history.size());
    s.selectivity = run.summary.selectivity;
    s.delta_e = run.similarity.delta_e;
    s.spread = primary_spread(run);
    const Index m = run.modal.m;
    s.lambdas = run.modal.eigenvalues.head(std::min(m + 1, run.modal.size()));
    return s;
}

std::vector<LoadCaseResult> run_load_cases(const DesignEvaluation& evaluation,
                                           const std::vector<LoadCaseSpec>& cases) {
    std::vector<LoadCaseResult> out;
    out.reserve(cases.size());
    for (const auto& lc : cases) out.push_back({lc.name, simulate(evaluation.system, evaluation.modal, lc.forces)});
    return out;
}

ResultBundle make_bundle(const ProblemSpec& spec, const BuiltProblem& built, const std::vector<SynthesisResult>& ranked,
                         std::string tool_version) {
    if (ranked.empty()) throw InvalidArgument("no runs to bundle");
    ResultBundle b;
    b.tool_version = std::move(tool_version);
    b.config_hash = fnv1a_hex(emit_problem(spec));
    b.problem = spec;
    for (const auto& run : ranked) b.runs.push_back(summarize_run(run));
    b.best = ranked.front();
    b.load_cases = run_load_cases(evaluate_design(built.problem, b.best.x), spec.load_cases);
    return b;
}

namespace {

std::string_view status_name(LpStatus s) { return to_string(s); }

RunStatus parse_run_status(const json& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(where, "expected a string");
    const auto text = j.get<std::string>();
    for (RunStatus s : {RunStatus::converged, RunStatus::max_iters, RunStatus::stalled_infeasible}) {
        if (to_string(s) == text) return s;
    }
    throw ParseError(where, "unknown run status '" + text + "'");
}

LpStatus parse_lp_status(const json& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(where, "expected a string");
    const auto text = j.get<std::string>();
    for (LpStatus s : {LpStatus::optimal, LpStatus::infeasible, LpStatus::unbounded, LpStatus::iteration_limit}) {
        if (to_string(s) == text) return s;
    }
    throw ParseError(where, "unknown LP status '" + text + "'");
}

json run_summary_json(const RunSummary& s) {
    json j;
    j["mu"] = s.mu;
    j["start"] = s.start;
    j["seed"] = s.seed;
    j["status"] = std::string(to_string(s.status));
    j["iterations"] = s.iterations;
    j["selectivity"] = s.selectivity;
    j["delta_e"] = s.delta_e;
    j["spread"] = s.spread;
    j["lambdas"] = to_json(s.lambdas);
    return j;
}

json load_case_json(const LoadCaseResult& lc) {
    json j;
    j["name"] = lc.name;
    j["forces"] = to_json(lc.response.forces);
    j["displacement"] = to_json(lc.response.displacement);
    j["alpha"] = to_json(lc.response.alpha);
    j["parasitic_residual"] = lc.response.parasitic_residual;
    j["kinematic_fraction"] = lc.response.kinematic_fraction;
    return j;
}

double rel_diff(double a, double b) {
    const double scale = std::max({1e-300, std::abs(a), std::abs(b)});
    return std::abs(a - b) / scale;
}

double rel_diff(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    if (a.size() == 0) return 0.0;
    const double scale = std::max({1e-300, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

std::string emit_bundle(const ResultBundle& b) {
    json doc;
    doc["schema_version"] = b.schema_version;
    doc["provenance"] = {{"tool_version", b.tool_version},
                         {"config_hash", b.config_hash},
                         {"seed", b.problem.config.seed}};
    doc["problem"] = json::parse(emit_problem(b.problem));

    doc["runs"] = json::array();
    for (const auto& r : b.runs) doc["runs"].push_back(run_summary_json(r));

    const SynthesisResult& best = b.best;
    json jb;
    jb["mu"] = best.mu;
    jb["start"] = best.start;
    jb["seed"] = best.seed;
    jb["status"] = std::string(to_string(best.status));
    jb["x"] = to_json(best.x);
    jb["eigenvalues"] = to_json(best.modal.eigenvalues);
    jb["eigenmodes"] = to_json(best.modal.eigenmodes);
    jb["m"] = best.modal.m;
    jb["selectivity"] = best.summary.selectivity;
    json sim;
    sim["delta_e"] = best.similarity.delta_e;
    sim["alpha"] = to_json(best.similarity.alpha);
    sim["approximations"] = to_json(best.similarity.approximations);
    sim["residuals"] = to_json(best.similarity.residuals);
    sim["beta"] = to_json(best.similarity.beta);
    sim["b"] = to_json(best.similarity.b);
    jb["similarity"] = sim;
    json hist = json::array();
    for (const auto& h : best.history) {
        json jh;
        jh["step"] = h.step;
        jh["lambdas"] = to_json(h.lambdas);
        jh["selectivity"] = h.selectivity;
        jh["lp_status"] = std::string(status_name(h.lp_status));
        jh["escalated"] = h.escalated;
        jh["restoration"] = h.restoration;
        jh["max_step"] = h.max_step;
        jh["volume"] = h.volume;
        jh["cap_max"] = h.cap_max;
        hist.push_back(jh);
    }
    jb["history"] = hist;
    doc["best"] = jb;

    doc["load_cases"] = json::array();
    for (const auto& lc : b.load_cases) doc["load_cases"].push_back(load_case_json(lc));
    return doc.dump(1) + "\n";
}

ResultBundle parse_bundle_text(std::string_view text) {
    const json doc = detail::parse_json(text);
    ResultBundle b;
    JsonReader root(doc, "");
    b.schema_version = root.integer("schema_version");
    if (b.schema_version != kBundleSchemaVersion) {
        throw ParseError("schema_version", "unsupported bundle version " + std::to_string(b.schema_version));
    }
    JsonReader prov(root.at("provenance"), "provenance");
    b.tool_version = prov.string("tool_version");
    b.config_hash = prov.string("config_hash");
    (void)prov.unsigned_integer("seed", 0);
    prov.finish();

    try {
        b.problem = parse_problem_text(root.at("problem").dump()).spec;
    } catch (const ParseError& e) {
        throw ParseError("problem." + e.where(), e.what());
    }

    const auto& runs = root.at("runs");
    if (!runs.is_array()) throw ParseError("runs", "expected a list");
    for (std::size_t i = 0; i < runs.size(); ++i) {
        JsonReader r(runs[i], "runs[" + std::to_string(i) + "]");
        RunSummary s;
        s.mu = r.number("mu");
        s.start = r.integer("start");
        s.seed = r.unsigned_integer("seed", 0);
        s.status = parse_run_status(r.at("status"), r.path("status"));
        s.iterations = r.integer("iterations");
        s.selectivity = r.number("selectivity");
        s.delta_e = r.number("delta_e");
        s.spread = r.number("spread");
        s.lambdas = vector_from(r.at("lambdas"), r.path("lambdas"));
        r.finish();
        b.runs.push_back(std::move(s));
    }

    JsonReader jb(root.at("best"), "best");
    SynthesisResult& best = b.best;
    best.mu = jb.number("mu");
    best.start = jb.integer("start");
    best.seed = jb.unsigned_integer("seed", 0);
    best.status = parse_run_status(jb.at("status"), jb.path("status"));
    best.x = vector_from(jb.at("x"), jb.path("x"));
    best.modal.eigenvalues = vector_from(jb.at("eigenvalues"), jb.path("eigenvalues"));
    best.modal.eigenmodes = matrix_from(jb.at("eigenmodes"), jb.path("eigenmodes"));
    best.modal.m = jb.integer("m");
    best.summary = summarize(best.modal, best.modal.m);
    const double stored_s = jb.number("selectivity");
    if (stored_s != best.summary.selectivity) {
        throw ParseError(jb.path("selectivity"), "inconsistent with the stored eigenvalues");
    }
    JsonReader sim(jb.at("similarity"), jb.path("similarity"));
    best.similarity.delta_e = sim.number("delta_e");
    best.similarity.alpha = matrix_from(sim.at("alpha"), sim.path("alpha"));
    best.similarity.approximations = matrix_from(sim.at("approximations"), sim.path("approximations"));
    best.similarity.residuals = vector_from(sim.at("residuals"), sim.path("residuals"));
    best.similarity.beta = vector_from(sim.at("beta"), sim.path("beta"));
    best.similarity.b = matrix_from(sim.at("b"), sim.path("b"));
    sim.finish();
    const auto& hist = jb.at("history");
    if (!hist.is_array()) throw ParseError(jb.path("history"), "expected a list");
    for (std::size_t i = 0; i < hist.size(); ++i) {
        JsonReader h(hist[i], jb.path("history") + "[" + std::to_string(i) + "]");
        IterationRecord rec;
        rec.step = h.integer("step");
        rec.lambdas = vector_from(h.at("lambdas"), h.path("lambdas"));
        rec.selectivity = h.number("selectivity");
        rec.lp_status = parse_lp_status(h.at("lp_status"), h.path("lp_status"));
        rec.escalated = h.boolean("escalated", false);
        rec.restoration = h.boolean("restoration", false);
        rec.max_step = h.number("max_step");
        rec.volume = h.number("volume");
        rec.cap_max = h.number("cap_max");
        h.finish();
        best.history.push_back(std::move(rec));
    }
    jb.finish();

    const auto& cases = root.at("load_cases");
    if (!cases.is_array()) throw ParseError("load_cases", "expected a list");
    for (std::size_t i = 0; i < cases.size(); ++i) {
        JsonReader r(cases[i], "load_cases[" + std::to_string(i) + "]");
        LoadCaseResult lc;
        lc.name = r.string("name");
        lc.response.forces = vector_from(r.at("forces"), r.path("forces"));
        lc.response.displacement = vector_from(r.at("displacement"), r.path("displacement"));
        lc.response.alpha = vector_from(r.at("alpha"), r.path("alpha"));
        lc.response.parasitic_residual = r.number("parasitic_residual");
        lc.response.kinematic_fraction = r.number("kinematic_fraction");
        r.finish();
        b.load_cases.push_back(std::move(lc));
    }
    root.finish();
    return b;
}

ResultBundle parse_bundle(const std::filesystem::path& path) { return parse_bundle_text(detail::read_file(path)); }

Reanalysis reanalyze(const ResultBundle& bundle, const BuiltProblem& built) {
    if (bundle.best.x.size() != built.problem.ground.element_count()) {
        throw ParseError("best.x", "length differs from the element count of the embedded problem");
    }
    Reanalysis out;
    out.evaluation = evaluate_design(built.problem, bundle.best.x);
    out.load_cases = run_load_cases(out.evaluation, bundle.problem.load_cases);

    const auto& e = out.evaluation;
    double d = 0.0;
    d = std::max(d, rel_diff(e.modal.eigenvalues, bundle.best.modal.eigenvalues));
    d = std::max(d, rel_diff(e.summary.selectivity, bundle.best.summary.selectivity));
    d = std::max(d, std::abs(e.similarity.delta_e - bundle.best.similarity.delta_e));
    d = std::max(d, rel_diff(e.similarity.residuals, bundle.best.similarity.residuals));
    if (out.load_cases.size() != bundle.load_cases.size()) {
        d = std::numeric_limits<double>::infinity();
    } else {
        for (std::size_t i = 0; i < out.load_cases.size(); ++i) {
            d = std::max(d, rel_diff(out.load_cases[i].response.displacement,
                                     bundle.load_cases[i].response.displacement));
        }
    }
    out.max_difference = d;
    return out;
}

}  // namespace modalsyn::io
