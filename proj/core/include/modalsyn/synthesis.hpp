#pragma once

// Global iteration: alternate the constrained-base computation and the LP
// design update until the design settles; multi-start over random initial
// designs and a sweep of primary-stiffness caps.

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "modalsyn/assessor.hpp"
#include "modalsyn/frame_model.hpp"
#include "modalsyn/mode_spec.hpp"
#include "modalsyn/reduction.hpp"
#include "modalsyn/simplex.hpp"
#include "modalsyn/spectra.hpp"

namespace modalsyn {

/// Immutable inputs shared by every run.
struct SynthesisProblem {
    GroundStructure ground;
    DofPartition dofs;
    DesiredModeSet modes;

    /// Throws InvalidArgument when the pieces do not fit together.
    void validate() const;
};

enum class NuSchedule { constant, geometric };

struct SynthesisConfig {
    double mu = 0.0;
    double volume = 0.0;
    double nu = 1e-3;
    double x_lower = 1e-8;
    double x_upper = 1.0;
    Index n_guard = 0;  ///< 0 selects q - m
    int max_iters = 2000;
    double conv_tol = 1e-6;
    int conv_sustain = 5;
    double selectivity_tol = 1e-3;
    int selectivity_window = 20;
    int n_starts = 1;
    std::uint64_t seed = 0;
    NuSchedule nu_schedule = NuSchedule::constant;
    double nu_decay = 0.995;
    double nu_min = 1e-5;
    double eq_band_rel = 1e-6;  ///< equality band is eq_band_rel * mu
    int stall_limit = 3;
    double similarity_threshold = 0.99;  ///< ranking gate on delta_e
    double spread_threshold = 0.01;      ///< ranking gate on (lambda_m - lambda_1) / lambda_m

    void validate(Index element_count) const;
    friend bool operator==(const SynthesisConfig&, const SynthesisConfig&) = default;
};

enum class RunStatus { converged, max_iters, stalled_infeasible };

std::string_view to_string(RunStatus status);
std::string_view to_string(NuSchedule schedule);

struct IterationRecord {
    int step = 0;
    Vector lambdas;  ///< lambda_1 .. lambda_{m+1} of the design entering the step
    double selectivity = 0.0;
    LpStatus lp_status = LpStatus::optimal;
    bool escalated = false;    ///< equality band widened for this step
    bool restoration = false;  ///< step came from the feasibility-restoration LP
    double max_step = 0.0;     ///< ||x(s+1) - x(s)||_inf
    double volume = 0.0;       ///< sum x(s+1)
    double cap_max = 0.0;      ///< max_i phi_i^T K(x(s+1)) phi_i
};

struct SynthesisResult {
    Vector x;
    std::vector<IterationRecord> history;
    ModalResult modal;
    StiffnessSummary summary;
    SimilarityReport similarity;
    RunStatus status = RunStatus::max_iters;
    double mu = 0.0;
    std::uint64_t seed = 0;
    int start = 0;
};

/// Identifies the run a progress record belongs to.
struct RunTag {
    double mu = 0.0;
    int start = 0;
    std::uint64_t seed = 0;
};

using ProgressFn = std::function<void(const RunTag& run, const IterationRecord& record)>;

/// Uniform entries in [lo, hi] from a 64-bit seed (bit-reproducible).
Vector random_start(Index size, double lo, double hi, std::uint64_t seed);

/// Per-run seed derived from the base seed, the cap index and the start index.
std::uint64_t run_seed(std::uint64_t base, std::size_t mu_index, std::size_t start);

/// Spectra and similarity of a fixed design.
struct DesignEvaluation {
    CondensedSystem system;
    ModalResult modal;
    StiffnessSummary summary;
    SimilarityReport similarity;
};
DesignEvaluation evaluate_design(const SynthesisProblem& problem, const Vector& x);

SynthesisResult iterate(const SynthesisProblem& problem, const SynthesisConfig& config, const Vector& x0,
                        const ProgressFn& progress = {});

/// Runs n_starts random starts for every cap in `mu_list` (config.mu when
/// empty) on up to `threads` worker threads, returned ranked.
std::vector<SynthesisResult> multi_start(const SynthesisProblem& problem, const SynthesisConfig& config,
                                         std::span<const double> mu_list, int threads = 1,
                                         const ProgressFn& progress = {});

/// (lambda_m - lambda_1) / lambda_m of a result's final spectrum.
double primary_spread(const SynthesisResult& result);

/// Stable sort: runs that are not stalled first, then delta_e above the
/// threshold, then primary spread below its threshold, then selectivity
/// descending.
void rank_results(std::vector<SynthesisResult>& results, double similarity_threshold,
                  double spread_threshold = 1.0);

/// n values evenly spaced over [lo, hi] (inclusive).
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace modalsyn
