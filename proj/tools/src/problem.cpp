#include "modalsyn/io/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "json_reader.hpp"
#include "modalsyn/errors.hpp"

namespace modalsyn::io {

using detail::JsonReader;
using json = nlohmann::ordered_json;

std::string_view to_string(Side side) {
    switch (side) {
        case Side::bottom: return "bottom";
        case Side::top: return "top";
        case Side::left: return "left";
        case Side::right: return "right";
    }
    return "?";
}

std::string_view to_string(NodeDof dof) {
    switch (dof) {
        case NodeDof::x: return "x";
        case NodeDof::y: return "y";
        case NodeDof::rotation: return "rotation";
    }
    return "?";
}

std::string_view to_string(ModeGenerator generator) {
    switch (generator) {
        case ModeGenerator::rotation_translation: return "rotation_translation";
        case ModeGenerator::platform_translation: return "platform_translation";
        case ModeGenerator::contour: return "contour";
        case ModeGenerator::explicit_vectors: return "explicit";
    }
    return "?";
}

namespace {

bool same(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a.cwiseEqual(b).all());
}

bool same(const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a.size() == 0 || a.cwiseEqual(b).all());
}

template <class Enum, std::size_t N>
Enum parse_enum(const json& j, const std::string& where, const std::array<Enum, N>& values) {
    if (!j.is_string()) throw ParseError(where, "expected a string");
    const auto text = j.get<std::string>();
    for (Enum v : values) {
        if (to_string(v) == text) return v;
    }
    std::string allowed;
    for (Enum v : values) allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(v));
    throw ParseError(where, "unknown value '" + text + "' (expected one of " + allowed + ")");
}

constexpr std::array kSides{Side::bottom, Side::top, Side::left, Side::right};
constexpr std::array kDofs{NodeDof::x, NodeDof::y, NodeDof::rotation};
constexpr std::array kGenerators{ModeGenerator::rotation_translation, ModeGenerator::platform_translation,
                                  ModeGenerator::contour, ModeGenerator::explicit_vectors};

LatticeNode parse_node(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
        throw ParseError(where, "expected [column, row] integers");
    }
    return {j[0].get<int>(), j[1].get<int>()};
}

std::vector<LatticeNode> parse_nodes(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where, "expected a list of [column, row] pairs");
    std::vector<LatticeNode> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_node(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

int lattice_extent(double length, double pitch) { return static_cast<int>(std::floor(length / pitch + 1e-9)) + 1; }

GridSpec parse_grid(JsonReader& r) {
    GridSpec g;
    g.width = r.number("width");
    g.height = r.number("height");
    g.pitch = r.number("pitch");
    g.connectivity_radius = r.integer("connectivity_radius", 1);
    if (r.has("cutouts")) {
        const auto& list = r.at("cutouts");
        const auto where = r.path("cutouts");
        if (!list.is_array()) throw ParseError(where, "expected a list of [x0, y0, x1, y1]");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto v = detail::number_list(list[i], where + "[" + std::to_string(i) + "]");
            if (v.size() != 4) throw ParseError(where + "[" + std::to_string(i) + "]", "expected [x0, y0, x1, y1]");
            g.cutouts.push_back(Rect{v[0], v[1], v[2], v[3]});
        }
    }
    r.finish();
    if (!(g.pitch > 0.0)) throw ParseError(r.path("pitch"), "must be positive");
    if (!(g.width >= 0.0) || !(g.height >= 0.0)) throw ParseError(r.path(), "width and height must be non-negative");
    if (g.connectivity_radius < 1) throw ParseError(r.path("connectivity_radius"), "must be at least 1");
    return g;
}

ActiveSpec parse_active(JsonReader& r, const GridSpec& grid) {
    ActiveSpec a;
    int selectors = 0;
    if (r.has("nodes")) {
        a.nodes = parse_nodes(r.at("nodes"), r.path("nodes"));
        ++selectors;
    }
    if (r.has("side")) {
        const Side side = parse_enum(r.at("side"), r.path("side"), kSides);
        const int cols = lattice_extent(grid.width, grid.pitch);
        const int rows = lattice_extent(grid.height, grid.pitch);
        if (side == Side::bottom || side == Side::top) {
            for (int c = 0; c < cols; ++c) a.nodes.push_back({c, side == Side::bottom ? 0 : rows - 1});
        } else {
            for (int row = 0; row < rows; ++row) a.nodes.push_back({side == Side::left ? 0 : cols - 1, row});
        }
        ++selectors;
    }
    if (r.has("ring")) {
        JsonReader ring(r.at("ring"), r.path("ring"));
        const LatticeNode center = parse_node(ring.at("center"), ring.path("center"));
        const int size = ring.integer("size");
        ring.finish();
        if (size < 2 || size % 2 == 0) throw ParseError(ring.path("size"), "ring size must be an odd number >= 3");
        const int h = (size - 1) / 2;
        const int c0 = center[0] - h, c1 = center[0] + h, r0 = center[1] - h, r1 = center[1] + h;
        // Counter-clockwise from the lower-left corner.
        for (int c = c0; c < c1; ++c) a.nodes.push_back({c, r0});
        for (int row = r0; row < r1; ++row) a.nodes.push_back({c1, row});
        for (int c = c1; c > c0; --c) a.nodes.push_back({c, r1});
        for (int row = r1; row > r0; --row) a.nodes.push_back({c0, row});
        ++selectors;
    }
    if (selectors != 1) throw ParseError(r.path(), "give exactly one of 'nodes', 'side' or 'ring'");
    if (r.has("dofs")) {
        const auto& list = r.at("dofs");
        if (!list.is_array() || list.empty()) throw ParseError(r.path("dofs"), "expected a non-empty list");
        a.dofs.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            a.dofs.push_back(parse_enum(list[i], r.path("dofs") + "[" + std::to_string(i) + "]", kDofs));
        }
    }
    r.finish();
    std::set<NodeDof> unique_dofs(a.dofs.begin(), a.dofs.end());
    if (unique_dofs.size() != a.dofs.size()) throw ParseError(r.path("dofs"), "duplicate DoF kind");
    std::set<LatticeNode> unique_nodes(a.nodes.begin(), a.nodes.end());
    if (unique_nodes.size() != a.nodes.size()) throw ParseError(r.path("nodes"), "duplicate node");
    if (a.nodes.empty()) throw ParseError(r.path(), "no active nodes selected");
    return a;
}

ModeSpec parse_modes(JsonReader& r, Index q, std::vector<std::string>& warnings) {
    ModeSpec m;
    m.generator = parse_enum(r.at("generator"), r.path("generator"), kGenerators);
    if (m.generator == ModeGenerator::contour) {
        m.contour.sine_periods = r.number("sine_periods", 1.0);
        m.contour.sine_phase = r.number("sine_phase", 0.0);
        m.contour.parabola_vanishes_at_ends = r.boolean("parabola_vanishes_at_ends", true);
    }
    if (m.generator == ModeGenerator::explicit_vectors) {
        const auto& list = r.at("vectors");
        const auto where = r.path("vectors");
        if (!list.is_array() || list.empty()) throw ParseError(where, "expected a non-empty list of mode vectors");
        Matrix raw(q, static_cast<Index>(list.size()));
        for (std::size_t k = 0; k < list.size(); ++k) {
            const auto entry_where = where + "[" + std::to_string(k) + "]";
            const auto v = detail::number_list(list[k], entry_where);
            if (static_cast<Index>(v.size()) != q) {
                throw ParseError(entry_where, "has " + std::to_string(v.size()) + " entries, expected one per active DoF (" +
                                                  std::to_string(q) + ")");
            }
            for (Index i = 0; i < q; ++i) raw(i, static_cast<Index>(k)) = v[static_cast<std::size_t>(i)];
        }
        if (is_orthonormal(raw, 1e-12)) {
            m.vectors = raw;
        } else {
            try {
                m.vectors = orthonormalize(raw).phibar;
            } catch (const InvalidArgument& e) {
                throw ParseError(where, e.what());
            }
            warnings.push_back(where + " are not orthonormal; Gram-Schmidt applied in the given order");
        }
    }
    r.finish();
    return m;
}

void parse_config(JsonReader& r, ProblemSpec& spec, Index element_count) {
    SynthesisConfig& c = spec.config;
    int mu_forms = 0;
    if (r.has("mu")) {
        spec.mu_values = {r.number("mu")};
        ++mu_forms;
    }
    if (r.has("mu_list")) {
        spec.mu_values = detail::number_list(r.at("mu_list"), r.path("mu_list"));
        if (spec.mu_values.empty()) throw ParseError(r.path("mu_list"), "must not be empty");
        ++mu_forms;
    }
    if (r.has("mu_sweep")) {
        JsonReader sw(r.at("mu_sweep"), r.path("mu_sweep"));
        const double lo = sw.number("lo");
        const double hi = sw.number("hi");
        const int n = sw.integer("n");
        sw.finish();
        if (n < 1) throw ParseError(sw.path("n"), "must be at least 1");
        spec.mu_values = linspace(lo, hi, n);
        ++mu_forms;
    }
    if (mu_forms == 0) throw ParseError(r.path("mu"), "required field is missing (or give mu_list / mu_sweep)");
    if (mu_forms > 1) throw ParseError(r.path("mu"), "give only one of mu, mu_list, mu_sweep");
    for (double mu : spec.mu_values) {
        if (!(mu > 0.0)) throw ParseError(r.path("mu"), "every mu must be positive");
    }
    c.mu = spec.mu_values.front();

    c.nu = r.number("nu", c.nu);
    c.x_lower = r.number("x_lower", c.x_lower);
    c.x_upper = r.number("x_upper", c.x_upper);
    if (r.has("volume") == r.has("volume_fraction")) {
        throw ParseError(r.path("volume"), "give exactly one of volume, volume_fraction");
    }
    c.volume = r.has("volume") ? r.number("volume")
                               : r.number("volume_fraction") * c.x_upper * static_cast<double>(element_count);
    c.n_guard = r.integer("n_guard", 0);
    c.max_iters = r.integer("max_iters", c.max_iters);
    c.conv_tol = r.number("conv_tol", c.conv_tol);
    c.conv_sustain = r.integer("conv_sustain", c.conv_sustain);
    c.selectivity_tol = r.number("selectivity_tol", c.selectivity_tol);
    c.selectivity_window = r.integer("selectivity_window", c.selectivity_window);
    c.n_starts = r.integer("n_starts", c.n_starts);
    c.seed = r.unsigned_integer("seed", c.seed);
    if (r.has("nu_schedule")) {
        const auto where = r.path("nu_schedule");
        const auto& j = r.at("nu_schedule");
        if (!j.is_string()) throw ParseError(where, "expected 'constant' or 'geometric'");
        const auto kind = j.get<std::string>();
        if (kind == "constant") {
            c.nu_schedule = NuSchedule::constant;
        } else if (kind == "geometric") {
            c.nu_schedule = NuSchedule::geometric;
        } else {
            throw ParseError(where, "unknown value '" + kind + "' (expected constant, geometric)");
        }
    }
    c.nu_decay = r.number("nu_decay", c.nu_decay);
    c.nu_min = r.number("nu_min", c.nu_min);
    c.eq_band_rel = r.number("eq_band_rel", c.eq_band_rel);
    c.stall_limit = r.integer("stall_limit", c.stall_limit);
    c.similarity_threshold = r.number("similarity_threshold", c.similarity_threshold);
    c.spread_threshold = r.number("spread_threshold", c.spread_threshold);
    r.finish();
    if (!(c.x_lower > 0.0)) throw ParseError(r.path("x_lower"), "must be positive");
    if (c.volume > c.x_upper * static_cast<double>(element_count) * (1.0 + 1e-12)) {
        throw ParseError(r.path("volume"), "exceeds the number of elements times x_upper");
    }
    try {
        c.validate(element_count);
    } catch (const InvalidArgument& e) {
        throw ParseError(r.path(), e.what());
    }
}

Index active_index(const ActiveSpec& a, const LatticeNode& node, NodeDof dof) {
    const auto n = std::find(a.nodes.begin(), a.nodes.end(), node);
    const auto d = std::find(a.dofs.begin(), a.dofs.end(), dof);
    if (n == a.nodes.end() || d == a.dofs.end()) return -1;
    return static_cast<Index>(n - a.nodes.begin()) * static_cast<Index>(a.dofs.size()) +
           static_cast<Index>(d - a.dofs.begin());
}

LoadCaseSpec parse_load_case(JsonReader& r, const ActiveSpec& active, std::size_t index) {
    const Index q = static_cast<Index>(active.nodes.size() * active.dofs.size());
    LoadCaseSpec lc;
    lc.name = r.has("name") ? r.string("name") : "loadcase" + std::to_string(index);
    if (r.has("forces") == r.has("point_forces")) {
        throw ParseError(r.path("forces"), "give exactly one of forces, point_forces");
    }
    if (r.has("forces")) {
        const auto v = detail::number_list(r.at("forces"), r.path("forces"));
        if (static_cast<Index>(v.size()) != q) {
            throw ParseError(r.path("forces"), "has " + std::to_string(v.size()) + " entries, expected " + std::to_string(q));
        }
        lc.forces = Eigen::Map<const Vector>(v.data(), q);
    } else {
        lc.forces = Vector::Zero(q);
        const auto& list = r.at("point_forces");
        const auto where = r.path("point_forces");
        if (!list.is_array()) throw ParseError(where, "expected a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            JsonReader pf(list[i], where + "[" + std::to_string(i) + "]");
            const LatticeNode node = parse_node(pf.at("node"), pf.path("node"));
            const NodeDof dof = parse_enum(pf.at("dof"), pf.path("dof"), kDofs);
            const double value = pf.number("value");
            pf.finish();
            const Index k = active_index(active, node, dof);
            if (k < 0) throw ParseError(pf.path(), "force acts on a DoF that is not active");
            lc.forces[k] += value;
        }
    }
    r.finish();
    return lc;
}

}  // namespace

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
    if (a.schema_version != b.schema_version || a.name != b.name || !(a.grid == b.grid) ||
        !(a.section == b.section) || !(a.supports == b.supports) || !(a.active == b.active) ||
        !(a.config == b.config) || a.mu_values != b.mu_values || !(a.export_options == b.export_options)) {
        return false;
    }
    if (a.modes.generator != b.modes.generator || !(a.modes.contour == b.modes.contour) ||
        !same(a.modes.vectors, b.modes.vectors)) {
        return false;
    }
    if (a.load_cases.size() != b.load_cases.size()) return false;
    for (std::size_t i = 0; i < a.load_cases.size(); ++i) {
        if (a.load_cases[i].name != b.load_cases[i].name || !same(a.load_cases[i].forces, b.load_cases[i].forces)) {
            return false;
        }
    }
    return true;
}

ParsedProblem parse_problem_text(std::string_view text) {
    const json doc = detail::parse_json(text);
    ParsedProblem out;
    ProblemSpec& spec = out.spec;
    JsonReader root(doc, "");
    spec.schema_version = root.integer("schema_version");
    if (spec.schema_version != kProblemSchemaVersion) {
        throw ParseError("schema_version", "unsupported version " + std::to_string(spec.schema_version) +
                                               " (this build reads " + std::to_string(kProblemSchemaVersion) + ")");
    }
    spec.name = root.has("name") ? root.string("name") : "";

    JsonReader grid(root.at("grid"), "grid");
    spec.grid = parse_grid(grid);
    Index element_count = 0;
    try {
        element_count = static_cast<Index>(build_grid(spec.grid).elements.size());
    } catch (const InvalidArgument& e) {
        throw ParseError("grid", e.what());
    }

    JsonReader section(root.at("section"), "section");
    spec.section.area = section.number("area");
    spec.section.elastic_modulus = section.number("elastic_modulus");
    spec.section.second_moment = section.number("second_moment");
    section.finish();
    try {
        spec.section.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError("section", e.what());
    }

    JsonReader supports(root.at("supports"), "supports");
    if (supports.has("sides")) {
        const auto& list = supports.at("sides");
        if (!list.is_array()) throw ParseError("supports.sides", "expected a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            spec.supports.sides.push_back(parse_enum(list[i], "supports.sides[" + std::to_string(i) + "]", kSides));
        }
    }
    if (supports.has("nodes")) spec.supports.nodes = parse_nodes(supports.at("nodes"), "supports.nodes");
    supports.finish();
    if (spec.supports.sides.empty() && spec.supports.nodes.empty()) {
        throw ParseError("supports", "no supports given; rigid-body motion would be unrestrained");
    }

    JsonReader active(root.at("active"), "active");
    spec.active = parse_active(active, spec.grid);
    const auto q = static_cast<Index>(spec.active.nodes.size() * spec.active.dofs.size());

    JsonReader modes(root.at("modes"), "modes");
    spec.modes = parse_modes(modes, q, out.warnings);

    JsonReader config(root.at("config"), "config");
    parse_config(config, spec, element_count);

    if (root.has("load_cases")) {
        const auto& list = root.at("load_cases");
        if (!list.is_array()) throw ParseError("load_cases", "expected a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            JsonReader lc(list[i], "load_cases[" + std::to_string(i) + "]");
            spec.load_cases.push_back(parse_load_case(lc, spec.active, i));
        }
    }
    if (root.has("export")) {
        JsonReader ex(root.at("export"), "export");
        spec.export_options.render_threshold = ex.number("render_threshold", spec.export_options.render_threshold);
        spec.export_options.displacement_scale =
            ex.number("displacement_scale", spec.export_options.displacement_scale);
        ex.finish();
    }
    root.finish();

    // Catch geometric mistakes (missing nodes, clamped active DoFs) at parse time.
    build_problem(spec);
    return out;
}

std::vector<LoadCaseSpec> parse_load_cases_text(std::string_view text, const ActiveSpec& active) {
    const json doc = detail::parse_json(text);
    JsonReader root(doc, "");
    const auto& list = root.at("load_cases");
    root.finish();
    if (!list.is_array()) throw ParseError("load_cases", "expected a list");
    std::vector<LoadCaseSpec> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        JsonReader lc(list[i], "load_cases[" + std::to_string(i) + "]");
        out.push_back(parse_load_case(lc, active, i));
    }
    return out;
}

ParsedProblem parse_problem(const std::filesystem::path& path) {
    return parse_problem_text(detail::read_file(path));
}

std::string emit_problem(const ProblemSpec& spec) {
    json doc;
    doc["schema_version"] = spec.schema_version;
    doc["name"] = spec.name;

    json grid;
    grid["width"] = spec.grid.width;
    grid["height"] = spec.grid.height;
    grid["pitch"] = spec.grid.pitch;
    grid["connectivity_radius"] = spec.grid.connectivity_radius;
    grid["cutouts"] = json::array();
    for (const auto& c : spec.grid.cutouts) grid["cutouts"].push_back({c.x0, c.y0, c.x1, c.y1});
    doc["grid"] = grid;

    doc["section"] = {{"area", spec.section.area},
                      {"elastic_modulus", spec.section.elastic_modulus},
                      {"second_moment", spec.section.second_moment}};

    json supports;
    supports["sides"] = json::array();
    for (Side s : spec.supports.sides) supports["sides"].push_back(std::string(to_string(s)));
    supports["nodes"] = json::array();
    for (const auto& n : spec.supports.nodes) supports["nodes"].push_back({n[0], n[1]});
    doc["supports"] = supports;

    json active;
    active["nodes"] = json::array();
    for (const auto& n : spec.active.nodes) active["nodes"].push_back({n[0], n[1]});
    active["dofs"] = json::array();
    for (NodeDof d : spec.active.dofs) active["dofs"].push_back(std::string(to_string(d)));
    doc["active"] = active;

    json modes;
    modes["generator"] = std::string(to_string(spec.modes.generator));
    if (spec.modes.generator == ModeGenerator::contour) {
        modes["sine_periods"] = spec.modes.contour.sine_periods;
        modes["sine_phase"] = spec.modes.contour.sine_phase;
        modes["parabola_vanishes_at_ends"] = spec.modes.contour.parabola_vanishes_at_ends;
    }
    if (spec.modes.generator == ModeGenerator::explicit_vectors) {
        modes["vectors"] = json::array();
        for (Index k = 0; k < spec.modes.vectors.cols(); ++k) {
            modes["vectors"].push_back(detail::to_json(Vector(spec.modes.vectors.col(k))));
        }
    }
    doc["modes"] = modes;

    const SynthesisConfig& c = spec.config;
    json config;
    if (spec.mu_values.size() == 1) {
        config["mu"] = spec.mu_values.front();
    } else {
        config["mu_list"] = spec.mu_values;
    }
    config["volume"] = c.volume;
    config["nu"] = c.nu;
    config["nu_schedule"] = std::string(to_string(c.nu_schedule));
    config["nu_decay"] = c.nu_decay;
    config["nu_min"] = c.nu_min;
    config["x_lower"] = c.x_lower;
    config["x_upper"] = c.x_upper;
    config["n_guard"] = c.n_guard;
    config["max_iters"] = c.max_iters;
    config["conv_tol"] = c.conv_tol;
    config["conv_sustain"] = c.conv_sustain;
    config["selectivity_tol"] = c.selectivity_tol;
    config["selectivity_window"] = c.selectivity_window;
    config["n_starts"] = c.n_starts;
    config["seed"] = c.seed;
    config["eq_band_rel"] = c.eq_band_rel;
    config["stall_limit"] = c.stall_limit;
    config["similarity_threshold"] = c.similarity_threshold;
    config["spread_threshold"] = c.spread_threshold;
    doc["config"] = config;

    doc["load_cases"] = json::array();
    for (const auto& lc : spec.load_cases) {
        doc["load_cases"].push_back({{"name", lc.name}, {"forces", detail::to_json(lc.forces)}});
    }
    doc["export"] = {{"render_threshold", spec.export_options.render_threshold},
                     {"displacement_scale", spec.export_options.displacement_scale}};
    return doc.dump(2) + "\n";
}

BuiltProblem build_problem(const ProblemSpec& spec) {
    GridLayout layout;
    try {
        layout = build_grid(spec.grid);
    } catch (const InvalidArgument& e) {
        throw ParseError("grid", e.what());
    }
    const NodeGrid& grid = layout.grid;

    auto node_of = [&](const LatticeNode& n, const std::string& where) {
        const Index idx = grid.node_at(n[0], n[1]);
        if (idx < 0) {
            throw ParseError(where, "no node at lattice position [" + std::to_string(n[0]) + ", " +
                                        std::to_string(n[1]) + "]");
        }
        return idx;
    };

    std::set<Index> clamped;
    for (Side side : spec.supports.sides) {
        for (std::size_t n = 0; n < grid.size(); ++n) {
            const auto [col, row] = grid.lattice[n];
            const bool on = (side == Side::bottom && row == 0) || (side == Side::top && row == grid.rows - 1) ||
                            (side == Side::left && col == 0) || (side == Side::right && col == grid.columns - 1);
            if (on) clamped.insert(static_cast<Index>(n));
        }
    }
    for (std::size_t i = 0; i < spec.supports.nodes.size(); ++i) {
        clamped.insert(node_of(spec.supports.nodes[i], "supports.nodes[" + std::to_string(i) + "]"));
    }
    const std::vector<Index> support_nodes(clamped.begin(), clamped.end());

    auto make_ground = [&] {
        try {
            return GroundStructure(grid, layout.elements, {spec.section}, clamp_nodes(support_nodes));
        } catch (const InvalidArgument& e) {
            throw ParseError("supports", e.what());
        }
    };
    BuiltProblem out{SynthesisProblem{make_ground(), {}, {}}, {}, support_nodes};
    const GroundStructure& ground = out.problem.ground;

    std::vector<Index> active;
    std::vector<Point2> contour;
    for (std::size_t i = 0; i < spec.active.nodes.size(); ++i) {
        const auto where = "active.nodes[" + std::to_string(i) + "]";
        const Index node = node_of(spec.active.nodes[i], where);
        contour.push_back(grid.positions[static_cast<std::size_t>(node)]);
        for (NodeDof d : spec.active.dofs) {
            const Index dof = ground.free_dof(node, d);
            if (dof < 0) throw ParseError(where, "active DoF " + std::string(to_string(d)) + " is clamped by a support");
            active.push_back(dof);
            out.active_nodes.push_back(node);
        }
    }
    out.problem.dofs = DofPartition(ground.dof_count(), active);

    const Index q = static_cast<Index>(active.size());
    const bool xy = spec.active.dofs == std::vector<NodeDof>{NodeDof::x, NodeDof::y};
    try {
        switch (spec.modes.generator) {
            case ModeGenerator::rotation_translation:
                if (q != 4 || !xy) throw InvalidArgument("needs two active nodes with dofs [x, y]");
                out.problem.modes = rotation_translation_modes(q);
                break;
            case ModeGenerator::platform_translation:
                if (!xy) throw InvalidArgument("needs active dofs [x, y]");
                out.problem.modes = platform_translation_modes(static_cast<Index>(spec.active.nodes.size()));
                break;
            case ModeGenerator::contour:
                if (!xy) throw InvalidArgument("needs active dofs [x, y]");
                out.problem.modes = contour_modes(contour, spec.modes.contour);
                break;
            case ModeGenerator::explicit_vectors:
                if (spec.modes.vectors.rows() != q) throw InvalidArgument("vector length differs from active DoF count");
                out.problem.modes = DesiredModeSet{spec.modes.vectors};
                break;
        }
        out.problem.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError("modes", e.what());
    }
    return out;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

}  // namespace modalsyn::io
