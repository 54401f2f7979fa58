#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "modalsyn/errors.hpp"
#include "modalsyn/io/bundle.hpp"
#include "modalsyn/io/export.hpp"
#include "modalsyn/io/problem.hpp"

namespace modalsyn::io {
namespace {

namespace fs = std::filesystem;

const fs::path kProblems = MODALSYN_PROBLEMS_DIR;

const std::vector<std::string> kBundled{"example1.problem", "example2.problem", "example2_coarse.problem",
                                        "example3.problem", "example3_coarse.problem"};

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// Smallest useful document: 3 x 3 lattice, bottom clamped, two top corners.
nlohmann::json minimal_problem() {
    return nlohmann::json::parse(R"({
      "schema_version": 1,
      "name": "mini",
      "grid": {"width": 40, "height": 30, "pitch": 10},
      "section": {"area": 20, "elastic_modulus": 210000, "second_moment": 6.66},
      "supports": {"sides": ["bottom"]},
      "active": {"nodes": [[0, 3], [4, 3]]},
      "modes": {"generator": "rotation_translation"},
      "config": {"mu": 300, "volume_fraction": 0.6, "max_iters": 40, "nu": 0.05, "seed": 4},
      "load_cases": [{"name": "push", "forces": [1, 0, 1, 0]}]
    })");
}

ParseError parse_error_of(const std::string& text) {
    try {
        parse_problem_text(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "document was accepted";
    return ParseError("", "");
}

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("modalsyn_" + std::to_string(::getpid()) + "_" +
               ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    int cli(const std::string& args, std::string* output = nullptr) const {
        const fs::path log = dir / "cli.log";
        const std::string cmd = std::string(MODALSYN_CLI) + " " + args + " > " + log.string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        if (output) *output = read_text(log);
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path dir;
};

TEST(ProblemFile, BundledExample1HasThePublishedCounts) {
    const auto parsed = parse_problem(kProblems / "example1.problem");
    EXPECT_TRUE(parsed.warnings.empty());
    const auto built = build_problem(parsed.spec);
    EXPECT_EQ(built.problem.ground.element_count(), 796);
    EXPECT_EQ(built.problem.ground.structural_dof_count(), 663);
    EXPECT_EQ(built.problem.dofs.active_count(), 4);
    EXPECT_EQ(built.problem.modes.m(), 2);
    EXPECT_EQ(parsed.spec.config.volume, 636.8);
    EXPECT_EQ(parsed.spec.mu_values.size(), 7u);
}

TEST(ProblemFile, BundledExamplesBuildWithTheirPublishedSizes) {
    struct Expect {
        std::string file;
        Index elements, structural, active, m;
    };
    for (const auto& e : {Expect{"example2.problem", 6480, 5043, 64, 2}, Expect{"example2_coarse.problem", 1640, 1323, 32, 2},
                          Expect{"example3.problem", 4870, 3813, 82, 3}, Expect{"example3_coarse.problem", 1235, 1008, 42, 3}}) {
        const auto built = build_problem(parse_problem(kProblems / e.file).spec);
        EXPECT_EQ(built.problem.ground.element_count(), e.elements) << e.file;
        EXPECT_EQ(built.problem.ground.structural_dof_count(), e.structural) << e.file;
        EXPECT_EQ(built.problem.dofs.active_count(), e.active) << e.file;
        EXPECT_EQ(built.problem.modes.m(), e.m) << e.file;
    }
}

TEST(ProblemFile, RoundTripsLosslessly) {
    for (const auto& name : kBundled) {
        const auto spec = parse_problem(kProblems / name).spec;
        const std::string text = emit_problem(spec);
        const auto again = parse_problem_text(text).spec;
        EXPECT_TRUE(again == spec) << name;
        EXPECT_EQ(emit_problem(again), text) << name;
    }
}

TEST(ProblemFile, DefaultsAreApplied) {
    auto doc = minimal_problem();
    doc["config"].erase("nu");
    const auto spec = parse_problem_text(doc.dump()).spec;
    EXPECT_EQ(spec.config.x_lower, 1e-8);
    EXPECT_EQ(spec.config.x_upper, 1.0);
    EXPECT_EQ(spec.config.nu, 1e-3);
    EXPECT_EQ(spec.grid.connectivity_radius, 1);
}

TEST(ProblemFile, MissingMuNamesTheField) {
    auto doc = minimal_problem();
    doc["config"].erase("mu");
    const auto e = parse_error_of(doc.dump());
    EXPECT_EQ(e.where(), "config.mu");
}

TEST(ProblemFile, UnknownKeysAndBadValuesNameTheField) {
    auto doc = minimal_problem();
    doc["config"]["nu_sched"] = "geometric";
    EXPECT_EQ(parse_error_of(doc.dump()).where(), "config.nu_sched");

    doc = minimal_problem();
    doc["grid"]["pitch"] = -1;
    EXPECT_EQ(parse_error_of(doc.dump()).where(), "grid.pitch");

    doc = minimal_problem();
    doc["active"]["nodes"] = {{0, 9}};
    EXPECT_THROW(build_problem(parse_problem_text(doc.dump()).spec), ParseError);

    doc = minimal_problem();
    doc["load_cases"][0]["forces"] = {1, 2};
    EXPECT_EQ(parse_error_of(doc.dump()).where(), "load_cases[0].forces");

    const auto malformed = parse_error_of("{\"schema_version\": 1,\n  \"grid\": [}");
    EXPECT_NE(std::string(malformed.what()).find("line 2"), std::string::npos) << malformed.what();
}

TEST(ProblemFile, NonOrthogonalExplicitModesAreOrthonormalizedWithAWarning) {
    auto doc = minimal_problem();
    doc["modes"] = {{"generator", "explicit"}, {"vectors", {{1, 0, 1, 0}, {1, 1, 0, 0}}}};
    const auto parsed = parse_problem_text(doc.dump());
    ASSERT_EQ(parsed.warnings.size(), 1u);
    const Matrix& v = parsed.spec.modes.vectors;
    EXPECT_TRUE(is_orthonormal(v, 1e-12));
    EXPECT_NEAR(v(0, 0), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(v(2, 0), std::sqrt(0.5), 1e-15);
    // Already orthonormal input: no warning.
    doc["modes"]["vectors"] = {{1, 0, 0, 0}, {0, 1, 0, 0}};
    EXPECT_TRUE(parse_problem_text(doc.dump()).warnings.empty());
}

TEST(ProblemFile, MissingFileIsAParseError) {
    EXPECT_THROW(parse_problem("/nonexistent/dir/x.problem"), ParseError);
}

TEST(Fnv1a, KnownVectors) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

class Bundles : public TempDir {
protected:
    ResultBundle make() const {
        const auto spec = parse_problem_text(minimal_problem().dump()).spec;
        const auto built = build_problem(spec);
        const auto ranked = multi_start(built.problem, spec.config, spec.mu_values);
        return make_bundle(spec, built, ranked, "test");
    }
};

TEST_F(Bundles, AreReproducibleByteForByte) {
    EXPECT_EQ(emit_bundle(make()), emit_bundle(make()));
}

TEST_F(Bundles, RoundTripAndReanalysisReproduceStoredMetrics) {
    const auto bundle = make();
    const std::string text = emit_bundle(bundle);
    const auto parsed = parse_bundle_text(text);
    EXPECT_EQ(emit_bundle(parsed), text);
    EXPECT_EQ(parsed.config_hash, fnv1a_hex(emit_problem(parsed.problem)));
    const auto re = reanalyze(parsed, build_problem(parsed.problem));
    EXPECT_LE(re.max_difference, 1e-9);
    ASSERT_EQ(re.load_cases.size(), 1u);
    EXPECT_EQ(re.load_cases[0].name, "push");
}

TEST_F(Bundles, InconsistentStoredSelectivityIsRejected) {
    auto doc = nlohmann::json::parse(emit_bundle(make()));
    doc["best"]["selectivity"] = 1.0;
    EXPECT_THROW(parse_bundle_text(doc.dump()), ParseError);
}

TEST_F(Bundles, CsvTablesHaveHeadersAndOneRowPerEntry) {
    const auto bundle = make();
    std::ostringstream h, e, r;
    write_history_csv(h, bundle.best.history);
    write_eigen_csv(e, bundle.best.modal);
    write_runs_csv(r, bundle.runs);
    auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
    EXPECT_EQ(h.str().rfind("step,lambda_1,lambda_2,lambda_3,selectivity", 0), 0u);
    EXPECT_EQ(lines(h.str()), static_cast<long>(bundle.best.history.size()) + 1);
    EXPECT_EQ(e.str().rfind("i,lambda,role\n1,", 0), 0u);
    EXPECT_EQ(lines(e.str()), 4 + 1);
    EXPECT_EQ(lines(r.str()), static_cast<long>(bundle.runs.size()) + 1);
}

std::vector<double> stroke_widths(const std::string& svg) {
    std::vector<double> out;
    static const std::regex re("<line [^>]*stroke-width=\"([0-9.]+)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
        out.push_back(std::stod((*it)[1]));
    }
    return out;
}

TEST(Svg, EqualDesignGivesUniformStrokes) {
    const auto built = build_problem(parse_problem_text(minimal_problem().dump()).spec);
    const Index r = built.problem.ground.element_count();
    const auto widths = stroke_widths(render_svg(built, Vector::Constant(r, 0.5), Vector(), SvgOptions{}));
    ASSERT_EQ(widths.size(), static_cast<std::size_t>(r));
    EXPECT_EQ(std::set<double>(widths.begin(), widths.end()).size(), 1u);
}

TEST(Svg, DominantElementIsTheOnlyThickStrokeAndThinOnesAreOmitted) {
    const auto built = build_problem(parse_problem_text(minimal_problem().dump()).spec);
    const Index r = built.problem.ground.element_count();
    Vector x = Vector::Constant(r, 1e-8);
    x[3] = 1.0;
    x[5] = 0.02;
    const auto widths = stroke_widths(render_svg(built, x, Vector(), SvgOptions{}));
    ASSERT_EQ(widths.size(), 2u);
    EXPECT_GT(std::max(widths[0], widths[1]), 10 * std::min(widths[0], widths[1]));
}

TEST(Svg, DeformedOverlayAddsASecondLayer) {
    const auto built = build_problem(parse_problem_text(minimal_problem().dump()).spec);
    const Index r = built.problem.ground.element_count();
    const Vector u = Vector::Ones(built.problem.ground.dof_count());
    const std::string svg = render_svg(built, Vector::Constant(r, 0.5), u, SvgOptions{});
    EXPECT_EQ(stroke_widths(svg).size(), static_cast<std::size_t>(2 * r));
    EXPECT_THROW(render_svg(built, Vector::Constant(r, 0.5), Vector::Ones(3), SvgOptions{}), InvalidArgument);
}

TEST_F(TempDir, CliFullCycleOnExample1) {
    const fs::path bundle = dir / "ex1.json";
    std::string out;
    ASSERT_EQ(cli("synth " + (kProblems / "example1.problem").string() + " --mu 1500 --starts 1 -o " +
                      bundle.string() + " --csv-prefix " + (dir / "ex1_").string(),
                  &out),
              0)
        << out;
    const auto parsed = parse_bundle(bundle);
    EXPECT_EQ(parsed.best.status, RunStatus::converged);
    EXPECT_TRUE(fs::exists(dir / "ex1_history.csv"));

    EXPECT_EQ(cli("analyze " + bundle.string(), &out), 0) << out;
    EXPECT_NE(out.find("max difference to stored metrics:"), std::string::npos) << out;

    write_text(dir / "forces.json", R"({"load_cases": [{"name": "tip", "point_forces": [{"node": [10, 16], "dof": "y", "value": 2}]}]})");
    EXPECT_EQ(cli("simulate " + bundle.string() + " --forces " + (dir / "forces.json").string() + " -o " +
                  (dir / "ex1s.json").string(), &out), 0) << out;
    EXPECT_EQ(parse_bundle(dir / "ex1s.json").load_cases.size(), 4u);

    EXPECT_EQ(cli("render " + bundle.string() + " --mode 3 -o " + (dir / "m.svg").string(), &out), 0) << out;
    EXPECT_EQ(cli("render " + bundle.string() + " --loadcase 1 -o " + (dir / "l.svg").string(), &out), 0) << out;
    EXPECT_EQ(read_text(dir / "m.svg").rfind("<svg", 0), 0u);
    EXPECT_EQ(cli("render " + bundle.string() + " --loadcase 9 -o " + (dir / "l.svg").string()), 1);
}

TEST_F(TempDir, CliEnvironmentOverridesMirrorFlags) {
    const fs::path problem = dir / "mini.problem";
    write_text(problem, minimal_problem().dump());
    std::string out;
    const std::string run = "MODALSYN_STARTS=2 MODALSYN_MAX_ITERS=5 " + std::string(MODALSYN_CLI) + " synth " +
                            problem.string() + " -o " + (dir / "b.json").string() + " > " + (dir / "log").string();
    ASSERT_EQ(std::system(run.c_str()), 0);
    const auto b = parse_bundle(dir / "b.json");
    EXPECT_EQ(b.runs.size(), 2u);
    EXPECT_LE(b.best.history.size(), 5u);
    EXPECT_EQ(b.problem.config.n_starts, 2);
}

TEST_F(TempDir, CliExitCodes) {
    EXPECT_EQ(cli("render " + (dir / "missing.json").string() + " -o " + (dir / "x.svg").string()), 1);
    EXPECT_EQ(cli(""), 1);
    EXPECT_EQ(cli("synth " + (kProblems / "example1.problem").string() + " --bogus"), 1);
    EXPECT_EQ(cli("synth " + (kProblems / "example1.problem").string() + " --mu-sweep 1:2"), 1);
    EXPECT_EQ(cli("--version"), 0);

    // A bundle whose stored design no longer matches its metrics is a
    // numerical failure, not a usage error.
    const fs::path problem = dir / "mini.problem";
    write_text(problem, minimal_problem().dump());
    const fs::path bundle = dir / "b.json";
    ASSERT_EQ(cli("synth " + problem.string() + " -o " + bundle.string()), 0);
    auto doc = nlohmann::json::parse(read_text(bundle));
    for (auto& v : doc["best"]["x"]) v = v.get<double>() * 0.5;
    write_text(dir / "tampered.json", doc.dump());
    EXPECT_EQ(cli("analyze " + (dir / "tampered.json").string()), 2);
}

}  // namespace
}  // namespace modalsyn::io
