#include "modalsyn/frame_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "modalsyn/errors.hpp"

namespace modalsyn {

namespace {

constexpr double kGeomTol = 1e-9;

bool in_any_cutout(const std::vector<Rect>& cutouts, const Point2& p, double tol) {
    return std::any_of(cutouts.begin(), cutouts.end(),
                       [&](const Rect& r) { return r.contains_strictly(p, tol); });
}

}  // namespace

void SectionProperties::validate() const {
    if (!(area > 0.0) || !(elastic_modulus > 0.0) || !(second_moment > 0.0)) {
        throw InvalidArgument("section properties must be strictly positive (A=" +
                              std::to_string(area) + ", E=" + std::to_string(elastic_modulus) +
                              ", I=" + std::to_string(second_moment) + ")");
    }
}

Index NodeGrid::node_at(int column, int row) const {
    if (column < 0 || row < 0 || column >= columns || row >= rows) return -1;
    return lattice_to_node[static_cast<std::size_t>(row) * static_cast<std::size_t>(columns) +
                           static_cast<std::size_t>(column)];
}

GridLayout build_grid(const GridSpec& spec) {
    if (!(spec.width >= 0.0) || !(spec.height >= 0.0) || !(spec.pitch > 0.0)) {
        throw InvalidArgument("grid needs non-negative width/height and a positive pitch");
    }
    if (spec.connectivity_radius < 1) {
        throw InvalidArgument("connectivity radius must be at least 1");
    }
    const double tol = kGeomTol * std::max(1.0, spec.pitch);
    const int columns = static_cast<int>(std::floor(spec.width / spec.pitch + 1e-9)) + 1;
    const int rows = static_cast<int>(std::floor(spec.height / spec.pitch + 1e-9)) + 1;
    if (columns * rows < 2) {
        throw InvalidArgument("zero-size grid: width and height hold a single node");
    }

    GridLayout out;
    NodeGrid& grid = out.grid;
    grid.spacing = spec.pitch;
    grid.width = spec.width;
    grid.height = spec.height;
    grid.columns = columns;
    grid.rows = rows;
    grid.lattice_to_node.assign(static_cast<std::size_t>(columns) * static_cast<std::size_t>(rows), -1);

    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < columns; ++col) {
            const Point2 p{col * spec.pitch, row * spec.pitch};
            if (in_any_cutout(spec.cutouts, p, tol)) continue;
            grid.lattice_to_node[static_cast<std::size_t>(row) * static_cast<std::size_t>(columns) +
                                 static_cast<std::size_t>(col)] = static_cast<Index>(grid.positions.size());
            grid.positions.push_back(p);
            grid.lattice.push_back({col, row});
        }
    }

    // Half-plane of lattice offsets so each unordered pair is visited once.
    std::vector<std::array<int, 2>> offsets;
    const int rad = spec.connectivity_radius;
    for (int dy = 0; dy <= rad; ++dy) {
        for (int dx = -rad; dx <= rad; ++dx) {
            if (dy == 0 && dx <= 0) continue;
            if (std::gcd(std::abs(dx), dy) != 1) continue;
            offsets.push_back({dx, dy});
        }
    }

    for (std::size_t n = 0; n < grid.positions.size(); ++n) {
        const auto [col, row] = grid.lattice[n];
        for (const auto& [dx, dy] : offsets) {
            const Index other = grid.node_at(col + dx, row + dy);
            if (other < 0) continue;
            const Point2& a = grid.positions[n];
            const Point2& b = grid.positions[static_cast<std::size_t>(other)];
            const Point2 mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
            if (in_any_cutout(spec.cutouts, mid, tol)) continue;
            BeamElement e;
            e.node_a = static_cast<Index>(n);
            e.node_b = other;
            e.length = std::hypot(b.x - a.x, b.y - a.y);
            e.angle = std::atan2(b.y - a.y, b.x - a.x);
            out.elements.push_back(e);
        }
    }
    if (out.elements.empty()) {
        throw InvalidArgument("grid produced no elements");
    }
    return out;
}

GridLayout build_grid(double width, double height, double pitch, int connectivity_radius) {
    return build_grid(GridSpec{width, height, pitch, connectivity_radius, {}});
}

Matrix6 element_stiffness(double length, double angle, const SectionProperties& section) {
    section.validate();
    if (!(length > 0.0)) {
        throw InvalidArgument("zero-length element");
    }
    const double L = length;
    const double EA = section.elastic_modulus * section.area;
    const double EI = section.elastic_modulus * section.second_moment;
    const double a = EA / L;
    const double b1 = 12.0 * EI / (L * L * L);
    const double b2 = 6.0 * EI / (L * L);
    const double b3 = 4.0 * EI / L;
    const double b4 = 2.0 * EI / L;

    Matrix6 k;
    // clang-format off
    k <<  a,   0,   0,  -a,   0,   0,
          0,  b1,  b2,   0, -b1,  b2,
          0,  b2,  b3,   0, -b2,  b4,
         -a,   0,   0,   a,   0,   0,
          0, -b1, -b2,   0,  b1, -b2,
          0,  b2,  b4,   0, -b2,  b3;
    // clang-format on

    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Matrix6 t = Matrix6::Zero();
    for (int n = 0; n < 2; ++n) {
        const int o = 3 * n;
        t(o, o) = c;
        t(o, o + 1) = s;
        t(o + 1, o) = -s;
        t(o + 1, o + 1) = c;
        t(o + 2, o + 2) = 1.0;
    }
    Matrix6 kg = t.transpose() * k * t;
    return 0.5 * (kg + kg.transpose());
}

Matrix6 element_stiffness(const BeamElement& element, const SectionProperties& section) {
    return element_stiffness(element.length, element.angle, section);
}

GroundStructure::GroundStructure(NodeGrid grid, std::vector<BeamElement> elements,
                                 std::vector<SectionProperties> sections, std::vector<Index> supports)
    : grid_(std::move(grid)),
      elements_(std::move(elements)),
      sections_(std::move(sections)),
      supports_(std::move(supports)) {
    if (sections_.empty()) throw InvalidArgument("ground structure needs at least one section");
    for (const auto& s : sections_) s.validate();
    if (elements_.empty()) throw InvalidArgument("ground structure has no elements");
    if (supports_.empty()) {
        throw InvalidArgument("support set is empty; rigid-body motion would be unrestrained");
    }

    const Index node_dofs = static_cast<Index>(grid_.size()) * kDofsPerNode;
    std::sort(supports_.begin(), supports_.end());
    supports_.erase(std::unique(supports_.begin(), supports_.end()), supports_.end());
    for (Index s : supports_) {
        if (s < 0 || s >= node_dofs) {
            throw InvalidArgument("support DoF " + std::to_string(s) + " out of range");
        }
    }

    node_dof_to_free_.assign(static_cast<std::size_t>(node_dofs), -1);
    std::size_t next_support = 0;
    for (Index d = 0; d < node_dofs; ++d) {
        if (next_support < supports_.size() && supports_[next_support] == d) {
            ++next_support;
            continue;
        }
        node_dof_to_free_[static_cast<std::size_t>(d)] = free_count_++;
    }

    element_matrices_.reserve(elements_.size());
    element_dofs_.reserve(elements_.size());
    const auto n_nodes = static_cast<Index>(grid_.size());
    for (const auto& e : elements_) {
        if (e.node_a == e.node_b) throw InvalidArgument("element connects a node to itself");
        if (e.node_a < 0 || e.node_b < 0 || e.node_a >= n_nodes || e.node_b >= n_nodes) {
            throw InvalidArgument("element references a missing node");
        }
        if (e.section >= sections_.size()) throw InvalidArgument("element references a missing section");
        element_matrices_.push_back(element_stiffness(e, sections_[e.section]));
        std::array<Index, 6> dofs{};
        for (int k = 0; k < 3; ++k) {
            dofs[static_cast<std::size_t>(k)] =
                node_dof_to_free_[static_cast<std::size_t>(kDofsPerNode * e.node_a + k)];
            dofs[static_cast<std::size_t>(k + 3)] =
                node_dof_to_free_[static_cast<std::size_t>(kDofsPerNode * e.node_b + k)];
        }
        element_dofs_.push_back(dofs);
    }
}

Index GroundStructure::free_dof(Index node, NodeDof dof) const {
    if (node < 0 || node >= static_cast<Index>(grid_.size())) {
        throw InvalidArgument("node index " + std::to_string(node) + " out of range");
    }
    return node_dof_to_free_[static_cast<std::size_t>(kDofsPerNode * node + static_cast<int>(dof))];
}

namespace {

Eigen::Matrix<double, 6, 1> gather(const std::array<Index, 6>& dofs, const Vector& v) {
    Eigen::Matrix<double, 6, 1> out;
    for (int k = 0; k < 6; ++k) {
        const Index d = dofs[static_cast<std::size_t>(k)];
        out[k] = d >= 0 ? v[d] : 0.0;
    }
    return out;
}

}  // namespace

Vector GroundStructure::element_quadratic_forms(const Vector& v) const {
    if (v.size() != free_count_) throw InvalidArgument("vector length differs from structural DoF count");
    Vector out(element_count());
    for (Index e = 0; e < element_count(); ++e) {
        const auto ve = gather(element_dofs(e), v);
        out[e] = ve.dot(element_matrix(e) * ve);
    }
    return out;
}

Vector GroundStructure::element_bilinear_forms(const Vector& u, const Vector& v) const {
    if (u.size() != free_count_ || v.size() != free_count_) {
        throw InvalidArgument("vector length differs from structural DoF count");
    }
    Vector out(element_count());
    for (Index e = 0; e < element_count(); ++e) {
        const auto ue = gather(element_dofs(e), u);
        const auto ve = gather(element_dofs(e), v);
        out[e] = ue.dot(element_matrix(e) * ve);
    }
    return out;
}

SparseMatrix assemble(const GroundStructure& ground, std::span<const double> x) {
    if (static_cast<Index>(x.size()) != ground.element_count()) {
        throw InvalidArgument("design vector has " + std::to_string(x.size()) + " entries, expected " +
                              std::to_string(ground.element_count()));
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(x.size() * 36);
    for (Index e = 0; e < ground.element_count(); ++e) {
        const double xe = x[static_cast<std::size_t>(e)];
        if (!std::isfinite(xe) || xe < 0.0) {
            throw InvalidArgument("design variable " + std::to_string(e) + " is negative or not finite");
        }
        const auto& dofs = ground.element_dofs(e);
        const Matrix6& ke = ground.element_matrix(e);
        for (int i = 0; i < 6; ++i) {
            const Index di = dofs[static_cast<std::size_t>(i)];
            if (di < 0) continue;
            for (int j = 0; j < 6; ++j) {
                const Index dj = dofs[static_cast<std::size_t>(j)];
                if (dj < 0) continue;
                triplets.emplace_back(di, dj, xe * ke(i, j));
            }
        }
    }
    SparseMatrix k(ground.dof_count(), ground.dof_count());
    k.setFromTriplets(triplets.begin(), triplets.end());
    return k;
}

SparseMatrix assemble(const GroundStructure& ground, const Vector& x) {
    return assemble(ground, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

std::vector<Index> clamp_nodes(std::span<const Index> nodes) {
    std::vector<Index> out;
    out.reserve(nodes.size() * kDofsPerNode);
    for (Index n : nodes) {
        for (int k = 0; k < kDofsPerNode; ++k) out.push_back(kDofsPerNode * n + k);
    }
    return out;
}

}  // namespace modalsyn
