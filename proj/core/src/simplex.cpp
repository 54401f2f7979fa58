#include "modalsyn/simplex.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "modalsyn/errors.hpp"

namespace modalsyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;

enum class VarState : unsigned char { basic, at_lower, at_upper, at_zero };

// Standard form: minimize cost^T z  s.t.  A z = b,  lo <= z <= hi.
// The first `structural` columns are the user variables, the next `rows`
// columns are row slacks, followed by phase-one artificials.
class BoundedSimplex {
public:
    BoundedSimplex(Matrix a, Vector b, Vector lo, Vector hi, const SimplexOptions& opt)
        : a_(std::move(a)), b_(std::move(b)), lo_(std::move(lo)), hi_(std::move(hi)), opt_(opt) {}

    LpStatus solve(const Vector& phase_two_cost, int max_iterations);
    const Vector& values() const { return z_; }
    int iterations() const { return iterations_; }

private:
    Index rows() const { return a_.rows(); }
    Index cols() const { return a_.cols(); }

    void initial_point();
    void refactor();
    LpStatus run(int max_iterations);
    double value_at_bound(Index j, VarState s) const;

    Matrix a_;
    Vector b_;
    Vector lo_;
    Vector hi_;
    Vector cost_;
    Vector z_;
    std::vector<VarState> state_;
    std::vector<Index> basis_;
    Matrix binv_;
    SimplexOptions opt_;
    int iterations_ = 0;
    int since_refactor_ = 0;
};

double BoundedSimplex::value_at_bound(Index j, VarState s) const {
    switch (s) {
        case VarState::at_lower: return lo_[j];
        case VarState::at_upper: return hi_[j];
        default: return 0.0;
    }
}

void BoundedSimplex::initial_point() {
    const Index n = cols();
    z_ = Vector::Zero(n);
    state_.assign(static_cast<std::size_t>(n), VarState::at_zero);
    for (Index j = 0; j < n; ++j) {
        VarState s = VarState::at_zero;
        if (std::isfinite(lo_[j])) {
            s = VarState::at_lower;
        } else if (std::isfinite(hi_[j])) {
            s = VarState::at_upper;
        }
        state_[static_cast<std::size_t>(j)] = s;
        z_[j] = value_at_bound(j, s);
    }
}

void BoundedSimplex::refactor() {
    const Index m = rows();
    Matrix basis_matrix(m, m);
    for (Index i = 0; i < m; ++i) basis_matrix.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
    Eigen::PartialPivLU<Matrix> lu(basis_matrix);
    binv_ = lu.inverse();
    Vector rhs = b_;
    for (Index j = 0; j < cols(); ++j) {
        if (state_[static_cast<std::size_t>(j)] != VarState::basic && z_[j] != 0.0) rhs -= a_.col(j) * z_[j];
    }
    const Vector xb = binv_ * rhs;
    for (Index i = 0; i < m; ++i) z_[basis_[static_cast<std::size_t>(i)]] = xb[i];
    since_refactor_ = 0;
}

LpStatus BoundedSimplex::run(int max_iterations) {
    const Index m = rows();
    const Index n = cols();
    refactor();
    int degenerate_streak = 0;
    bool bland = false;
    std::vector<std::pair<double, Index>> candidates;
    Vector cb(m);

    while (true) {
        if (since_refactor_ >= opt_.refactor_interval) refactor();
        for (Index i = 0; i < m; ++i) cb[i] = cost_[basis_[static_cast<std::size_t>(i)]];
        const Vector y = binv_.transpose() * cb;

        candidates.clear();
        for (Index j = 0; j < n; ++j) {
            const VarState s = state_[static_cast<std::size_t>(j)];
            if (s == VarState::basic || lo_[j] == hi_[j]) continue;
            const double d = cost_[j] - y.dot(a_.col(j));
            const bool eligible = (s == VarState::at_lower && d < -opt_.optimality_tol) ||
                                  (s == VarState::at_upper && d > opt_.optimality_tol) ||
                                  (s == VarState::at_zero && std::abs(d) > opt_.optimality_tol);
            if (eligible) candidates.emplace_back(d, j);
        }
        if (candidates.empty()) return LpStatus::optimal;
        if (bland) {
            std::sort(candidates.begin(), candidates.end(),
                      [](const auto& l, const auto& r) { return l.second < r.second; });
        } else {
            std::sort(candidates.begin(), candidates.end(), [](const auto& l, const auto& r) {
                return std::abs(l.first) > std::abs(r.first);
            });
        }

        // Bound flips leave the basis, and therefore the reduced costs,
        // unchanged, so candidates are consumed until a basis change occurs.
        bool basis_changed = false;
        for (const auto& [d, j] : candidates) {
            if (++iterations_ > max_iterations) return LpStatus::iteration_limit;
            const double dir = d < 0.0 ? 1.0 : -1.0;
            const Vector w = binv_ * a_.col(j);

            // Harris two-pass ratio test; Bland mode uses the exact minimum
            // with ties broken by the lowest variable index.
            double theta_max = kInf;
            for (Index i = 0; i < m; ++i) {
                const double rate = -dir * w[i];
                const Index k = basis_[static_cast<std::size_t>(i)];
                if (rate < -kPivotTol && std::isfinite(lo_[k])) {
                    theta_max = std::min(theta_max, (z_[k] - lo_[k] + opt_.feasibility_tol) / -rate);
                } else if (rate > kPivotTol && std::isfinite(hi_[k])) {
                    theta_max = std::min(theta_max, (hi_[k] - z_[k] + opt_.feasibility_tol) / rate);
                }
            }
            Index leave = -1;
            double theta = kInf;
            double best_rate = 0.0;
            Index best_var = std::numeric_limits<Index>::max();
            for (Index i = 0; i < m; ++i) {
                const double rate = -dir * w[i];
                const Index k = basis_[static_cast<std::size_t>(i)];
                double limit = kInf;
                if (rate < -kPivotTol && std::isfinite(lo_[k])) {
                    limit = (z_[k] - lo_[k]) / -rate;
                } else if (rate > kPivotTol && std::isfinite(hi_[k])) {
                    limit = (hi_[k] - z_[k]) / rate;
                } else {
                    continue;
                }
                limit = std::max(limit, 0.0);
                if (bland) {
                    if (limit < theta - 1e-12 || (limit <= theta + 1e-12 && k < best_var)) {
                        theta = std::min(theta, limit);
                        leave = i;
                        best_var = k;
                    }
                } else if (limit <= theta_max && std::abs(rate) > best_rate) {
                    best_rate = std::abs(rate);
                    leave = i;
                    theta = limit;
                }
            }

            const double range = hi_[j] - lo_[j];
            if (std::isfinite(range) && range <= theta) {
                z_[j] += dir * range;
                for (Index i = 0; i < m; ++i) z_[basis_[static_cast<std::size_t>(i)]] -= dir * range * w[i];
                state_[static_cast<std::size_t>(j)] = dir > 0.0 ? VarState::at_upper : VarState::at_lower;
                z_[j] = value_at_bound(j, state_[static_cast<std::size_t>(j)]);
                continue;
            }
            if (leave < 0) return LpStatus::unbounded;

            z_[j] += dir * theta;
            for (Index i = 0; i < m; ++i) z_[basis_[static_cast<std::size_t>(i)]] -= dir * theta * w[i];
            const Index k = basis_[static_cast<std::size_t>(leave)];
            const double rate = -dir * w[leave];
            state_[static_cast<std::size_t>(k)] = rate < 0.0 ? VarState::at_lower : VarState::at_upper;
            z_[k] = value_at_bound(k, state_[static_cast<std::size_t>(k)]);
            state_[static_cast<std::size_t>(j)] = VarState::basic;
            basis_[static_cast<std::size_t>(leave)] = j;

            const double pivot = w[leave];
            binv_.row(leave) /= pivot;
            for (Index i = 0; i < m; ++i) {
                if (i != leave && w[i] != 0.0) binv_.row(i) -= w[i] * binv_.row(leave);
            }
            ++since_refactor_;

            if (theta <= 1e-12) {
                if (++degenerate_streak >= opt_.degenerate_before_bland) bland = true;
            } else {
                degenerate_streak = 0;
                bland = false;
            }
            basis_changed = true;
            break;
        }
        if (!basis_changed) {
            // Every candidate flipped; re-price from a fresh factorization.
            refactor();
        }
    }
}

LpStatus BoundedSimplex::solve(const Vector& phase_two_cost, int max_iterations) {
    const Index m = rows();
    const Index n_orig = cols();
    initial_point();

    // Row residuals with every structural column at its starting bound.
    Vector residual = b_;
    for (Index j = 0; j < n_orig; ++j) {
        if (z_[j] != 0.0) residual -= a_.col(j) * z_[j];
    }

    // Slack of row i is column (n_orig - m + i). Slacks that cannot absorb
    // the residual are parked at a bound and an artificial takes the row.
    const Index slack0 = n_orig - m;
    basis_.assign(static_cast<std::size_t>(m), -1);
    std::vector<std::pair<Index, double>> artificials;
    for (Index i = 0; i < m; ++i) {
        const Index s = slack0 + i;
        const double r = residual[i] + z_[s];
        if (r >= lo_[s] - opt_.feasibility_tol && r <= hi_[s] + opt_.feasibility_tol) {
            state_[static_cast<std::size_t>(s)] = VarState::basic;
            z_[s] = r;
            basis_[static_cast<std::size_t>(i)] = s;
        } else {
            const VarState bound = r < lo_[s] ? VarState::at_lower : VarState::at_upper;
            state_[static_cast<std::size_t>(s)] = bound;
            z_[s] = value_at_bound(s, bound);
            artificials.emplace_back(i, r - z_[s] > 0.0 ? 1.0 : -1.0);
        }
    }

    if (!artificials.empty()) {
        const Index n_art = static_cast<Index>(artificials.size());
        a_.conservativeResize(Eigen::NoChange, n_orig + n_art);
        a_.rightCols(n_art).setZero();
        lo_.conservativeResize(n_orig + n_art);
        hi_.conservativeResize(n_orig + n_art);
        z_.conservativeResize(n_orig + n_art);
        cost_ = Vector::Zero(n_orig + n_art);
        for (Index k = 0; k < n_art; ++k) {
            const auto [row, sign] = artificials[static_cast<std::size_t>(k)];
            const Index col = n_orig + k;
            a_(row, col) = sign;
            lo_[col] = 0.0;
            hi_[col] = kInf;
            cost_[col] = 1.0;
            state_.push_back(VarState::basic);
            basis_[static_cast<std::size_t>(row)] = col;
        }
        const LpStatus phase_one = run(max_iterations);
        if (phase_one == LpStatus::iteration_limit) return phase_one;
        double infeasibility = 0.0;
        for (Index k = 0; k < n_art; ++k) infeasibility += std::abs(z_[n_orig + k]);
        if (infeasibility > opt_.feasibility_tol * static_cast<double>(std::max<Index>(1, m))) {
            return LpStatus::infeasible;
        }
        for (Index k = 0; k < n_art; ++k) {
            const Index col = n_orig + k;
            hi_[col] = 0.0;
            if (state_[static_cast<std::size_t>(col)] != VarState::basic) {
                state_[static_cast<std::size_t>(col)] = VarState::at_lower;
                z_[col] = 0.0;
            }
        }
    }

    cost_ = Vector::Zero(cols());
    cost_.head(phase_two_cost.size()) = phase_two_cost;
    return run(max_iterations);
}

}  // namespace

std::string_view to_string(LpStatus status) {
    switch (status) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

void LinearProgram::validate() const {
    const Index n = variables();
    if (lower.size() != n || upper.size() != n) throw InvalidArgument("LP bounds length differs from objective");
    if (a_ineq.rows() != b_ineq.size() || (a_ineq.rows() > 0 && a_ineq.cols() != n)) {
        throw InvalidArgument("LP inequality block has inconsistent shape");
    }
    if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != n)) {
        throw InvalidArgument("LP equality block has inconsistent shape");
    }
    if (eq_band < 0.0) throw InvalidArgument("LP equality band must be non-negative");
    for (Index j = 0; j < n; ++j) {
        if (lower[j] > upper[j]) {
            throw InvalidArgument("LP bound interval of variable " + std::to_string(j) + " is empty");
        }
    }
}

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
    lp.validate();
    const Index n = lp.variables();
    const Index mi = lp.a_ineq.rows();
    const Index me = lp.a_eq.rows();
    const Index m = mi + me;

    Matrix a = Matrix::Zero(m, n + m);
    Vector b(m);
    Vector lo(n + m);
    Vector hi(n + m);
    lo.head(n) = lp.lower;
    hi.head(n) = lp.upper;
    for (Index i = 0; i < m; ++i) {
        const bool is_eq = i >= mi;
        const auto row = is_eq ? lp.a_eq.row(i - mi) : lp.a_ineq.row(i);
        const double rhs = is_eq ? lp.b_eq[i - mi] : lp.b_ineq[i];
        double scale = row.size() > 0 ? row.cwiseAbs().maxCoeff() : 0.0;
        scale = scale > 0.0 ? 1.0 / scale : 1.0;
        a.block(i, 0, 1, n) = row * scale;
        a(i, n + i) = 1.0;
        b[i] = rhs * scale;
        if (is_eq) {
            lo[n + i] = -lp.eq_band * scale;
            hi[n + i] = lp.eq_band * scale;
        } else {
            lo[n + i] = 0.0;
            hi[n + i] = kInf;
        }
    }
    const double cmax = n > 0 ? lp.objective.cwiseAbs().maxCoeff() : 0.0;
    const Vector cost = -(cmax > 0.0 ? Vector(lp.objective / cmax) : lp.objective);

    SimplexOptions opt = options;
    const int limit = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(20 * (m + n) + 1000);

    BoundedSimplex simplex(std::move(a), std::move(b), std::move(lo), std::move(hi), opt);
    LpSolution out;
    out.status = simplex.solve(cost, limit);
    out.iterations = simplex.iterations();
    out.x = simplex.values().head(n);
    for (Index j = 0; j < n; ++j) out.x[j] = std::clamp(out.x[j], lp.lower[j], lp.upper[j]);
    out.objective = lp.objective.dot(out.x);
    return out;
}

double max_violation(const LinearProgram& lp, const Vector& x) {
    double worst = 0.0;
    for (Index j = 0; j < x.size(); ++j) {
        worst = std::max({worst, lp.lower[j] - x[j], x[j] - lp.upper[j]});
    }
    for (Index i = 0; i < lp.a_ineq.rows(); ++i) {
        const double v = lp.a_ineq.row(i).dot(x) - lp.b_ineq[i];
        worst = std::max(worst, v / std::max(1.0, std::abs(lp.b_ineq[i])));
    }
    for (Index i = 0; i < lp.a_eq.rows(); ++i) {
        const double v = std::abs(lp.a_eq.row(i).dot(x) - lp.b_eq[i]) - lp.eq_band;
        worst = std::max(worst, v / std::max(1.0, std::abs(lp.b_eq[i])));
    }
    return worst;
}

double weighted_row_violation(const LinearProgram& lp, const Vector& x) {
    double total = 0.0;
    for (Index i = 0; i < lp.a_ineq.rows(); ++i) {
        const double w = lp.a_ineq.row(i).cwiseAbs().maxCoeff();
        const double v = lp.a_ineq.row(i).dot(x) - lp.b_ineq[i];
        if (v > 0.0 && w > 0.0) total += v / w;
    }
    for (Index i = 0; i < lp.a_eq.rows(); ++i) {
        const double w = lp.a_eq.row(i).cwiseAbs().maxCoeff();
        const double v = std::abs(lp.a_eq.row(i).dot(x) - lp.b_eq[i]) - lp.eq_band;
        if (v > 0.0 && w > 0.0) total += v / w;
    }
    return total;
}

LinearProgram restoration_program(const LinearProgram& lp) {
    lp.validate();
    const Index n = lp.variables();
    const Index mi = lp.a_ineq.rows();
    const Index me = lp.a_eq.rows();
    const Index extra = mi + me;

    LinearProgram out;
    out.objective = Vector::Zero(n + extra);
    out.lower = Vector::Zero(n + extra);
    out.upper = Vector::Constant(n + extra, kInf);
    out.lower.head(n) = lp.lower;
    out.upper.head(n) = lp.upper;

    // Each equality band becomes two one-sided rows sharing one slack.
    out.a_ineq = Matrix::Zero(mi + 2 * me, n + extra);
    out.b_ineq = Vector(mi + 2 * me);
    for (Index i = 0; i < mi; ++i) {
        const double w = lp.a_ineq.row(i).cwiseAbs().maxCoeff();
        out.a_ineq.block(i, 0, 1, n) = lp.a_ineq.row(i);
        out.a_ineq(i, n + i) = -(w > 0.0 ? w : 1.0);
        out.b_ineq[i] = lp.b_ineq[i];
        out.objective[n + i] = -1.0;
    }
    for (Index i = 0; i < me; ++i) {
        const double w = lp.a_eq.row(i).cwiseAbs().maxCoeff();
        const double ws = w > 0.0 ? w : 1.0;
        const Index r = mi + 2 * i;
        out.a_ineq.block(r, 0, 1, n) = lp.a_eq.row(i);
        out.a_ineq(r, n + mi + i) = -ws;
        out.b_ineq[r] = lp.b_eq[i] + lp.eq_band;
        out.a_ineq.block(r + 1, 0, 1, n) = -lp.a_eq.row(i);
        out.a_ineq(r + 1, n + mi + i) = -ws;
        out.b_ineq[r + 1] = -lp.b_eq[i] + lp.eq_band;
        out.objective[n + mi + i] = -1.0;
    }
    out.a_eq.resize(0, n + extra);
    out.b_eq.resize(0);
    return out;
}

namespace {

void write_term(std::ostream& out, double coef, Index j, bool& first) {
    if (coef == 0.0) return;
    out << (coef < 0.0 ? " - " : (first ? " " : " + ")) << std::abs(coef) << " x" << j;
    first = false;
}

void write_row(std::ostream& out, const std::string& name, const Eigen::Ref<const Vector>& row) {
    out << ' ' << name << ':';
    bool first = true;
    for (Index j = 0; j < row.size(); ++j) write_term(out, row[j], j, first);
    if (first) out << " 0 x0";
}

}  // namespace

void write_cplex_lp(std::ostream& out, const LinearProgram& lp) {
    lp.validate();
    const auto old_precision = out.precision(17);
    out << "\\ design update LP, " << lp.variables() << " variables\n";
    out << "Maximize\n";
    write_row(out, "obj", lp.objective);
    out << "\nSubject To\n";
    for (Index i = 0; i < lp.a_ineq.rows(); ++i) {
        write_row(out, "c" + std::to_string(i), lp.a_ineq.row(i).transpose());
        out << " <= " << lp.b_ineq[i] << '\n';
    }
    for (Index i = 0; i < lp.a_eq.rows(); ++i) {
        const Vector row = lp.a_eq.row(i).transpose();
        if (lp.eq_band > 0.0) {
            write_row(out, "e" + std::to_string(i) + "_hi", row);
            out << " <= " << lp.b_eq[i] + lp.eq_band << '\n';
            write_row(out, "e" + std::to_string(i) + "_lo", row);
            out << " >= " << lp.b_eq[i] - lp.eq_band << '\n';
        } else {
            write_row(out, "e" + std::to_string(i), row);
            out << " = " << lp.b_eq[i] << '\n';
        }
    }
    out << "Bounds\n";
    for (Index j = 0; j < lp.variables(); ++j) {
        out << ' ';
        if (std::isfinite(lp.lower[j])) {
            out << lp.lower[j];
        } else {
            out << "-inf";
        }
        out << " <= x" << j << " <= ";
        if (std::isfinite(lp.upper[j])) {
            out << lp.upper[j];
        } else {
            out << "+inf";
        }
        out << '\n';
    }
    out << "End\n";
    out.precision(old_precision);
}

}  // namespace modalsyn
