#pragma once

// Tabular (CSV) and graphic (SVG) views of results.

#include <iosfwd>
#include <string>
#include <vector>

#include "modalsyn/io/bundle.hpp"
#include "modalsyn/io/problem.hpp"
#include "modalsyn/spectra.hpp"
#include "modalsyn/synthesis.hpp"

namespace modalsyn::io {

/// step, lambda_1..lambda_{m+1}, S, lp_status, escalated, restoration, max_step, volume, cap_max
void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history);
/// i, lambda, role (kinematic/parasitic)
void write_eigen_csv(std::ostream& out, const ModalResult& modal);
/// The ranking table of a bundle.
void write_runs_csv(std::ostream& out, const std::vector<RunSummary>& runs);

struct SvgOptions {
    double render_threshold = 0.01;  ///< display-only cut, relative to x_upper
    double x_upper = 1.0;
    double displacement_scale = 0.1;  ///< largest deflection as a fraction of the diagonal
    double width_px = 800.0;
    std::string title;
};

/// Topology drawing: strokes proportional to x, supports and active nodes
/// marked. With a non-empty `displacement` (one entry per free DoF) the
/// deformed shape is overlaid.
std::string render_svg(const BuiltProblem& built, const Vector& x, const Vector& displacement,
                       const SvgOptions& options);

/// Free-DoF displacement field of kinematic or parasitic eigenmode k.
Vector mode_field(const DesignEvaluation& evaluation, Index k);

}  // namespace modalsyn::io
