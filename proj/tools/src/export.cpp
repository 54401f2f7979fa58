#include "modalsyn/io/export.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "modalsyn/errors.hpp"
#include "modalsyn/reduction.hpp"

namespace modalsyn::io {

namespace {

// Enough digits to round-trip a double.
struct Precise {
    explicit Precise(std::ostream& out) : out_(out), old_(out.precision(17)) {}
    ~Precise() { out_.precision(old_); }
    std::ostream& out_;
    std::streamsize old_;
};

}  // namespace

void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history) {
    Precise guard(out);
    const Index cols = history.empty() ? 0 : history.front().lambdas.size();
    out << "step";
    for (Index i = 0; i < cols; ++i) out << ",lambda_" << (i + 1);
    out << ",selectivity,lp_status,escalated,restoration,max_step,volume,cap_max\n";
    for (const auto& h : history) {
        out << h.step;
        for (Index i = 0; i < cols; ++i) out << ',' << (i < h.lambdas.size() ? h.lambdas[i] : NAN);
        out << ',' << h.selectivity << ',' << to_string(h.lp_status) << ',' << int(h.escalated) << ','
            << int(h.restoration) << ',' << h.max_step << ',' << h.volume << ',' << h.cap_max << '\n';
    }
}

void write_eigen_csv(std::ostream& out, const ModalResult& modal) {
    Precise guard(out);
    out << "i,lambda,role\n";
    for (Index i = 0; i < modal.size(); ++i) {
        out << (i + 1) << ',' << modal.eigenvalues[i] << ',' << (i < modal.m ? "kinematic" : "parasitic") << '\n';
    }
}

void write_runs_csv(std::ostream& out, const std::vector<RunSummary>& runs) {
    Precise guard(out);
    const Index cols = runs.empty() ? 0 : runs.front().lambdas.size();
    out << "rank,mu,start,seed,status,iterations,selectivity,delta_e,spread";
    for (Index i = 0; i < cols; ++i) out << ",lambda_" << (i + 1);
    out << '\n';
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto& r = runs[k];
        out << (k + 1) << ',' << r.mu << ',' << r.start << ',' << r.seed << ',' << to_string(r.status) << ','
            << r.iterations << ',' << r.selectivity << ',' << r.delta_e << ',' << r.spread;
        for (Index i = 0; i < cols; ++i) out << ',' << (i < r.lambdas.size() ? r.lambdas[i] : NAN);
        out << '\n';
    }
}

Vector mode_field(const DesignEvaluation& evaluation, Index k) {
    if (k < 0 || k >= evaluation.modal.size()) throw InvalidArgument("mode index out of range");
    return expand(Vector(evaluation.modal.eigenmodes.col(k)), evaluation.system);
}

std::string render_svg(const BuiltProblem& built, const Vector& x, const Vector& displacement,
                       const SvgOptions& options) {
    const GroundStructure& ground = built.problem.ground;
    const NodeGrid& grid = ground.grid();
    if (x.size() != ground.element_count()) throw InvalidArgument("design vector length differs from element count");
    const bool deformed = displacement.size() > 0;
    if (deformed && displacement.size() != ground.dof_count()) {
        throw InvalidArgument("displacement length differs from the free DoF count");
    }

    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    for (const auto& p : grid.positions) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double diag = std::hypot(x1 - x0, y1 - y0);
    const double pad = 0.15 * std::max(x1 - x0, y1 - y0) + grid.spacing;
    const double scale = options.width_px / (x1 - x0 + 2 * pad);
    const double height_px = (y1 - y0 + 2 * pad) * scale;
    auto px = [&](double x) { return (x - x0 + pad) * scale; };
    auto py = [&](double y) { return (y1 - y + pad) * scale; };

    auto node_disp = [&](Index node) -> Point2 {
        if (!deformed) return {0.0, 0.0};
        const Index dx = ground.free_dof(node, NodeDof::x);
        const Index dy = ground.free_dof(node, NodeDof::y);
        return {dx >= 0 ? displacement[dx] : 0.0, dy >= 0 ? displacement[dy] : 0.0};
    };
    double amp = 0.0;
    if (deformed) {
        for (std::size_t n = 0; n < grid.size(); ++n) {
            const Point2 d = node_disp(static_cast<Index>(n));
            amp = std::max(amp, std::hypot(d.x, d.y));
        }
    }
    const double dscale = amp > 0.0 ? options.displacement_scale * diag / amp : 0.0;

    const double max_stroke = 0.35 * grid.spacing * scale;
    const double cut = options.render_threshold * options.x_upper;

    std::ostringstream svg;
    svg << std::fixed << std::setprecision(2);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width_px << "\" height=\"" << height_px
        << "\" viewBox=\"0 0 " << options.width_px << ' ' << height_px << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!options.title.empty()) {
        svg << "<text x=\"8\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">" << options.title << "</text>\n";
    }

    auto draw_members = [&](const char* colour, double opacity, bool displaced) {
        svg << "<g stroke=\"" << colour << "\" stroke-opacity=\"" << opacity << "\" stroke-linecap=\"round\">\n";
        for (Index e = 0; e < ground.element_count(); ++e) {
            if (x[e] < cut) continue;
            const auto& el = ground.elements()[static_cast<std::size_t>(e)];
            Point2 a = grid.positions[static_cast<std::size_t>(el.node_a)];
            Point2 b = grid.positions[static_cast<std::size_t>(el.node_b)];
            if (displaced) {
                const Point2 da = node_disp(el.node_a), db = node_disp(el.node_b);
                a = {a.x + dscale * da.x, a.y + dscale * da.y};
                b = {b.x + dscale * db.x, b.y + dscale * db.y};
            }
            const double w = std::max(0.3, max_stroke * x[e] / options.x_upper);
            svg << "<line x1=\"" << px(a.x) << "\" y1=\"" << py(a.y) << "\" x2=\"" << px(b.x) << "\" y2=\"" << py(b.y)
                << "\" stroke-width=\"" << w << "\"/>\n";
        }
        svg << "</g>\n";
    };

    draw_members("black", deformed ? 0.25 : 1.0, false);
    if (deformed) draw_members("#c0392b", 0.9, true);

    const double r = std::max(2.0, 0.15 * grid.spacing * scale);
    svg << "<g fill=\"#2471a3\">\n";
    for (Index n : built.support_nodes) {
        const auto& p = grid.positions[static_cast<std::size_t>(n)];
        svg << "<rect x=\"" << px(p.x) - r << "\" y=\"" << py(p.y) - r << "\" width=\"" << 2 * r << "\" height=\""
            << 2 * r << "\"/>\n";
    }
    svg << "</g>\n<g fill=\"#e67e22\">\n";
    std::vector<Index> active = built.active_nodes;
    active.erase(std::unique(active.begin(), active.end()), active.end());
    for (Index n : active) {
        const auto& p = grid.positions[static_cast<std::size_t>(n)];
        const Point2 d = node_disp(n);
        svg << "<circle cx=\"" << px(p.x + dscale * d.x) << "\" cy=\"" << py(p.y + dscale * d.y) << "\" r=\"" << r
            << "\"/>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

}  // namespace modalsyn::io
