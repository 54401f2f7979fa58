#pragma once

// Problem files: a JSON document describing the ground structure, supports,
// active DoFs, desired modes, synthesis settings and load cases.

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "modalsyn/frame_model.hpp"
#include "modalsyn/mode_spec.hpp"
#include "modalsyn/synthesis.hpp"

namespace modalsyn::io {

inline constexpr int kProblemSchemaVersion = 1;

enum class Side { bottom, top, left, right };

std::string_view to_string(Side side);
std::string_view to_string(NodeDof dof);

using LatticeNode = std::array<int, 2>;  ///< (column, row)

struct SupportSpec {
    std::vector<Side> sides;          ///< every node on these sides is clamped
    std::vector<LatticeNode> nodes;   ///< extra clamped nodes
    friend bool operator==(const SupportSpec&, const SupportSpec&) = default;
};

/// Active DoFs: `dofs` of every node in `nodes`, node-major.
struct ActiveSpec {
    std::vector<LatticeNode> nodes;
    std::vector<NodeDof> dofs{NodeDof::x, NodeDof::y};
    friend bool operator==(const ActiveSpec&, const ActiveSpec&) = default;
};

enum class ModeGenerator { rotation_translation, platform_translation, contour, explicit_vectors };

std::string_view to_string(ModeGenerator generator);

struct ModeSpec {
    ModeGenerator generator = ModeGenerator::rotation_translation;
    ContourShapes contour;
    Matrix vectors;  ///< explicit modes (q x m), orthonormal after parsing
};

struct LoadCaseSpec {
    std::string name;
    Vector forces;  ///< one entry per active DoF
};

struct ExportOptions {
    double render_threshold = 0.01;    ///< elements with x < threshold * x_upper are not drawn
    double displacement_scale = 0.1;   ///< largest deflection drawn as this fraction of the diagonal
    friend bool operator==(const ExportOptions&, const ExportOptions&) = default;
};

struct ProblemSpec {
    int schema_version = kProblemSchemaVersion;
    std::string name;
    GridSpec grid;
    SectionProperties section;
    SupportSpec supports;
    ActiveSpec active;
    ModeSpec modes;
    SynthesisConfig config;
    std::vector<double> mu_values;  ///< non-empty; config.mu mirrors the first entry
    std::vector<LoadCaseSpec> load_cases;
    ExportOptions export_options;
};

bool operator==(const ProblemSpec& a, const ProblemSpec& b);

struct ParsedProblem {
    ProblemSpec spec;
    std::vector<std::string> warnings;
};

/// Throws ParseError naming the offending field (or the line/column for
/// malformed JSON).
ParsedProblem parse_problem_text(std::string_view text);
/// Throws ParseError when the file cannot be read.
ParsedProblem parse_problem(const std::filesystem::path& path);

/// Reads a document of the form {"load_cases": [...]} with the same entry
/// syntax as a problem file.
std::vector<LoadCaseSpec> parse_load_cases_text(std::string_view text, const ActiveSpec& active);

/// Canonical JSON text with every field written out.
std::string emit_problem(const ProblemSpec& spec);

/// Everything needed to run and post-process a problem.
struct BuiltProblem {
    SynthesisProblem problem;
    std::vector<Index> active_nodes;  ///< node index behind each active DoF
    std::vector<Index> support_nodes;
};

/// Throws ParseError for selections that do not exist on the grid.
BuiltProblem build_problem(const ProblemSpec& spec);

/// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace modalsyn::io
