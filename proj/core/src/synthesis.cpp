#include "modalsyn/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "modalsyn/base_solver.hpp"
#include "modalsyn/errors.hpp"
#include "modalsyn/lp_update.hpp"

namespace modalsyn {

void SynthesisProblem::validate() const {
    if (dofs.dof_count() != ground.dof_count()) {
        throw InvalidArgument("DoF partition covers " + std::to_string(dofs.dof_count()) +
                              " DoFs, ground structure has " + std::to_string(ground.dof_count()));
    }
    if (modes.active_count() != dofs.active_count()) {
        throw InvalidArgument("desired modes have " + std::to_string(modes.active_count()) +
                              " rows, expected one per active DoF (" + std::to_string(dofs.active_count()) + ")");
    }
    if (modes.m() < 1 || modes.m() >= dofs.active_count()) {
        throw InvalidArgument("pseudo-mobility must lie in [1, q)");
    }
    if (!is_orthonormal(modes.phibar, 1e-8)) {
        throw InvalidArgument("desired modes are not orthonormal");
    }
}

void SynthesisConfig::validate(Index element_count) const {
    auto fail = [](const std::string& what) { throw InvalidArgument(what); };
    if (!(mu > 0.0)) fail("mu must be positive");
    if (!(volume > 0.0)) fail("volume must be positive");
    if (!(nu > 0.0)) fail("nu must be positive");
    if (!(x_lower >= 0.0) || !(x_upper > x_lower)) fail("need 0 <= x_lower < x_upper");
    if (volume < x_lower * static_cast<double>(element_count)) {
        fail("volume is below the lower-bound total, the update can never be feasible");
    }
    if (n_guard < 0) fail("n_guard must be non-negative");
    if (max_iters < 1) fail("max_iters must be at least 1");
    if (conv_sustain < 1 || selectivity_window < 1) fail("convergence windows must be at least 1");
    if (n_starts < 1) fail("n_starts must be at least 1");
    if (nu_schedule == NuSchedule::geometric && (!(nu_decay > 0.0) || !(nu_decay <= 1.0) || !(nu_min > 0.0))) {
        fail("geometric nu schedule needs 0 < nu_decay <= 1 and nu_min > 0");
    }
    if (!(eq_band_rel >= 0.0)) fail("eq_band_rel must be non-negative");
    if (stall_limit < 1) fail("stall_limit must be at least 1");
    if (!(similarity_threshold >= 0.0) || !(spread_threshold >= 0.0)) fail("ranking thresholds must be non-negative");
}

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::converged: return "converged";
        case RunStatus::max_iters: return "max_iters";
        case RunStatus::stalled_infeasible: return "stalled_infeasible";
    }
    return "unknown";
}

std::string_view to_string(NuSchedule schedule) {
    return schedule == NuSchedule::geometric ? "geometric" : "constant";
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double cap_max(const LinearProgram& lp, const LpLayout& layout, const Vector& x) {
    double out = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < layout.caps; ++i) out = std::max(out, lp.a_ineq.row(i).dot(x));
    return out;
}

double step_nu(const SynthesisConfig& config, int step) {
    if (config.nu_schedule == NuSchedule::constant) return config.nu;
    return std::max(config.nu_min, config.nu * std::pow(config.nu_decay, step));
}

}  // namespace

Vector random_start(Index size, double lo, double hi, std::uint64_t seed) {
    // Mantissa construction by hand: std::uniform_real_distribution is not
    // specified bit-for-bit across standard libraries.
    std::mt19937_64 rng(seed);
    Vector x(size);
    for (Index i = 0; i < size; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x[i] = lo + u * (hi - lo);
    }
    return x;
}

std::uint64_t run_seed(std::uint64_t base, std::size_t mu_index, std::size_t start) {
    return splitmix64(splitmix64(splitmix64(base) ^ mu_index) ^ start);
}

DesignEvaluation evaluate_design(const SynthesisProblem& problem, const Vector& x) {
    DesignEvaluation out;
    out.system = condense(assemble(problem.ground, x), problem.dofs);
    const Index m = problem.modes.m();
    out.modal = eigen(out.system.kbar, m);
    out.summary = summarize(out.modal, m);
    out.similarity = assess_similarity(problem.modes.phibar, out.modal.kinematic());
    return out;
}

SynthesisResult iterate(const SynthesisProblem& problem, const SynthesisConfig& config, const Vector& x0,
                        const ProgressFn& progress) {
    problem.validate();
    const Index r = problem.ground.element_count();
    config.validate(r);
    if (x0.size() != r) throw InvalidArgument("initial design has the wrong length");
    for (Index e = 0; e < r; ++e) {
        if (!(x0[e] >= config.x_lower) || !(x0[e] <= config.x_upper)) {
            throw InvalidArgument("initial design variable " + std::to_string(e) + " is outside [x_lower, x_upper]");
        }
    }

    const Index m = problem.modes.m();
    SynthesisResult run;
    run.mu = config.mu;
    run.seed = config.seed;
    run.x = x0;
    run.status = RunStatus::max_iters;

    const RunTag tag{config.mu, 0, config.seed};
    Condenser condenser(problem.dofs);
    int small_steps = 0;
    int stalls = 0;
    double last_violation = std::numeric_limits<double>::infinity();

    for (int s = 0; s < config.max_iters; ++s) {
        const CondensedSystem system = condenser(assemble(problem.ground, run.x));
        const ModalResult modal = eigen(system.kbar, m);
        const StiffnessSummary summary = summarize(modal, m);
        const OrthonormalBase base =
            expand_base(solve_constrained_base(system.kbar, problem.modes.phibar), system);

        LpSettings settings;
        settings.mu = config.mu;
        settings.volume = config.volume;
        settings.x_lower = config.x_lower;
        settings.x_upper = config.x_upper;
        settings.nu = step_nu(config, s);
        settings.n_guard = config.n_guard;
        settings.eq_band = config.eq_band_rel * config.mu;
        LpLayout layout;
        LinearProgram lp = build_lp(problem.ground, base, settings, run.x, &layout);

        IterationRecord rec;
        rec.step = s;
        rec.lambdas = modal.eigenvalues.head(m + 1);
        rec.selectivity = summary.selectivity;

        LpSolution sol = solve_lp(lp);
        rec.lp_status = sol.status;
        if (sol.status != LpStatus::optimal && m > 1) {
            lp.eq_band = 10.0 * settings.eq_band;
            sol = solve_lp(lp);
            rec.escalated = true;
            rec.lp_status = sol.status;
        }

        Vector x_next;
        if (sol.status == LpStatus::optimal) {
            x_next = sol.x;
            stalls = 0;
            last_violation = std::numeric_limits<double>::infinity();
        } else {
            // Early designs routinely break the caps by orders of magnitude;
            // walk back toward the feasible set inside the same move limits.
            const LpSolution rsol = solve_lp(restoration_program(lp));
            if (rsol.status != LpStatus::optimal) {
                run.status = RunStatus::stalled_infeasible;
                run.history.push_back(rec);
                if (progress) progress(tag, run.history.back());
                break;
            }
            x_next = rsol.x.head(r);
            rec.restoration = true;
            const double violation = weighted_row_violation(lp, x_next);
            const bool progressed = violation <= 1e-12 || violation < last_violation * (1.0 - 1e-6);
            stalls = progressed ? 0 : stalls + 1;
            last_violation = violation;
        }

        rec.max_step = (x_next - run.x).cwiseAbs().maxCoeff();
        rec.volume = x_next.sum();
        rec.cap_max = cap_max(lp, layout, x_next);
        run.x = std::move(x_next);
        run.history.push_back(rec);
        if (progress) progress(tag, run.history.back());

        if (rec.restoration && stalls >= config.stall_limit) {
            run.status = RunStatus::stalled_infeasible;
            break;
        }
        small_steps = (!rec.restoration && rec.max_step < config.conv_tol) ? small_steps + 1 : 0;
        if (small_steps >= config.conv_sustain) {
            run.status = RunStatus::converged;
            break;
        }
        const auto w = static_cast<std::size_t>(config.selectivity_window);
        if (run.history.size() > w) {
            const auto first = run.history.end() - static_cast<std::ptrdiff_t>(w + 1);
            // The whole window has to sit inside the band; comparing the two
            // ends alone is fooled by zig-zagging iterates.
            bool clean = true;
            double s_lo = rec.selectivity;
            double s_hi = rec.selectivity;
            for (auto it = first; it != run.history.end(); ++it) {
                clean = clean && !it->restoration;
                s_lo = std::min(s_lo, it->selectivity);
                s_hi = std::max(s_hi, it->selectivity);
            }
            if (clean && s_hi - s_lo <= config.selectivity_tol * std::abs(rec.selectivity)) {
                run.status = RunStatus::converged;
                break;
            }
        }
    }

    const DesignEvaluation final_eval = evaluate_design(problem, run.x);
    run.modal = final_eval.modal;
    run.summary = final_eval.summary;
    run.similarity = final_eval.similarity;
    return run;
}

double primary_spread(const SynthesisResult& result) {
    const Vector& p = result.summary.primary;
    if (p.size() == 0 || !(p[p.size() - 1] > 0.0)) return 1.0;
    return (p[p.size() - 1] - p[0]) / p[p.size() - 1];
}

void rank_results(std::vector<SynthesisResult>& results, double similarity_threshold, double spread_threshold) {
    std::stable_sort(results.begin(), results.end(), [&](const SynthesisResult& a, const SynthesisResult& b) {
        const bool a_ok = a.status != RunStatus::stalled_infeasible;
        const bool b_ok = b.status != RunStatus::stalled_infeasible;
        if (a_ok != b_ok) return a_ok;
        const bool a_sim = a.similarity.delta_e >= similarity_threshold;
        const bool b_sim = b.similarity.delta_e >= similarity_threshold;
        if (a_sim != b_sim) return a_sim;
        const bool a_tight = primary_spread(a) <= spread_threshold;
        const bool b_tight = primary_spread(b) <= spread_threshold;
        if (a_tight != b_tight) return a_tight;
        return a.summary.selectivity > b.summary.selectivity;
    });
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw InvalidArgument("linspace needs at least one point");
    if (n == 1) return {lo};
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return out;
}

std::vector<SynthesisResult> multi_start(const SynthesisProblem& problem, const SynthesisConfig& config,
                                         std::span<const double> mu_list, int threads,
                                         const ProgressFn& progress) {
    problem.validate();
    const Index r = problem.ground.element_count();
    config.validate(r);
    std::vector<double> mus(mu_list.begin(), mu_list.end());
    if (mus.empty()) mus.push_back(config.mu);

    struct Task {
        std::size_t mu_index;
        int start;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        for (int k = 0; k < config.n_starts; ++k) tasks.push_back({i, k});
    }
    std::vector<SynthesisResult> results(tasks.size());

    std::mutex progress_mutex;

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            try {
                SynthesisConfig c = config;
                c.mu = mus[tasks[t].mu_index];
                c.seed = run_seed(config.seed, tasks[t].mu_index, static_cast<std::size_t>(tasks[t].start));
                const Vector x0 = random_start(r, c.x_lower, c.x_upper, c.seed);
                ProgressFn tagged;
                if (progress) {
                    tagged = [&, start = tasks[t].start](const RunTag& tag, const IterationRecord& rec) {
                        std::lock_guard lock(progress_mutex);
                        progress(RunTag{tag.mu, start, tag.seed}, rec);
                    };
                }
                results[t] = iterate(problem, c, x0, tagged);
                results[t].start = tasks[t].start;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(tasks.size());
            }
        }
    };

    const int n_threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    rank_results(results, config.similarity_threshold, config.spread_threshold);
    return results;
}

}  // namespace modalsyn
