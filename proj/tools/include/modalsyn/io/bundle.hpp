#pragma once

// Result bundles: the ranked outcome of a synth run together with the
// problem that produced it, so every stored metric can be recomputed.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "modalsyn/assessor.hpp"
#include "modalsyn/io/problem.hpp"
#include "modalsyn/synthesis.hpp"

namespace modalsyn::io {

inline constexpr int kBundleSchemaVersion = 1;

/// One line of the ranking table.
struct RunSummary {
    double mu = 0.0;
    int start = 0;
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::max_iters;
    int iterations = 0;
    double selectivity = 0.0;
    double delta_e = 0.0;
    double spread = 0.0;
    Vector lambdas;  ///< lambda_1 .. lambda_{m+1}
};

RunSummary summarize_run(const SynthesisResult& run);

struct LoadCaseResult {
    std::string name;
    LoadCase response;
};

struct ResultBundle {
    int schema_version = kBundleSchemaVersion;
    std::string tool_version;
    std::string config_hash;  ///< FNV-1a of the canonical problem text
    ProblemSpec problem;
    std::vector<RunSummary> runs;  ///< ranked, best first
    SynthesisResult best;
    std::vector<LoadCaseResult> load_cases;  ///< responses of the best design
};

/// Solves every load case on the design evaluated in `evaluation`.
std::vector<LoadCaseResult> run_load_cases(const DesignEvaluation& evaluation,
                                           const std::vector<LoadCaseSpec>& cases);

/// `ranked` must be non-empty and already ranked.
ResultBundle make_bundle(const ProblemSpec& spec, const BuiltProblem& built, const std::vector<SynthesisResult>& ranked,
                         std::string tool_version);

std::string emit_bundle(const ResultBundle& bundle);
/// Throws ParseError naming the offending field.
ResultBundle parse_bundle_text(std::string_view text);
ResultBundle parse_bundle(const std::filesystem::path& path);

struct Reanalysis {
    DesignEvaluation evaluation;
    std::vector<LoadCaseResult> load_cases;
    /// Largest relative difference between recomputed and stored metrics
    /// (eigenvalues, selectivity, delta_e, fit residuals, load responses).
    double max_difference = 0.0;
};

/// Re-runs spectra, similarity and load cases on the stored design.
Reanalysis reanalyze(const ResultBundle& bundle, const BuiltProblem& built);

}  // namespace modalsyn::io
