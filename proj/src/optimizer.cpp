#include "relayarq/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "relayarq/engine.hpp"
#include "relayarq/metrics.hpp"

namespace relayarq {

namespace {

struct Candidate {
    std::vector<double> x;  // log10 of powers (and of rate parameters when free)
    double objective = -INFINITY;
    bool feasible = false;
    Metrics metrics;
};

class Evaluator {
public:
    explicit Evaluator(const OptProblem& p) : p_(p) {
        n_src_ = p.protocol.rounds();
        n_rel_ = p.protocol.m_max;
        if (p.free_rates)
            n_rate_ = p.protocol.coding == Coding::FixedLength ? 1 : p.protocol.rounds();
        dims_ = n_src_ + n_rel_ + n_rate_;
    }

    int dims() const { return dims_; }
    int rate_dims() const { return n_rate_; }

    std::vector<double> center() const {
        std::vector<double> x(dims_);
        const double cs = std::log10(source_budget());
        const double cr = std::log10(relay_budget());
        for (int i = 0; i < n_src_; ++i) x[i] = cs;
        for (int i = 0; i < n_rel_; ++i) x[n_src_ + i] = cr;
        if (n_rate_ == 1) x[n_src_ + n_rel_] = std::log10(p_.protocol.rates[0]);
        if (n_rate_ > 1)
            for (int i = 0; i < n_rate_; ++i)
                x[n_src_ + n_rel_ + i] = std::log10(p_.protocol.weight(i + 1));
        return x;
    }

    ProtocolConfig decode_protocol(const std::vector<double>& x) const {
        if (n_rate_ == 0) return p_.protocol;
        if (n_rate_ == 1)
            return ProtocolConfig::fixed_length(p_.protocol.protocol, p_.protocol.m_max,
                                                std::pow(10.0, x[n_src_ + n_rel_]));
        std::vector<double> rates(n_rate_);
        double acc = 0.0;
        for (int i = 0; i < n_rate_; ++i) {
            acc += std::pow(10.0, x[n_src_ + n_rel_ + i]);
            rates[i] = 1.0 / acc;
        }
        return ProtocolConfig::variable_length(p_.protocol.protocol, std::move(rates));
    }

    PowerAllocation decode_powers(const std::vector<double>& x) const {
        PowerAllocation pw;
        pw.p_source.resize(n_src_);
        pw.p_relay.assign(n_src_, 0.0);
        for (int i = 0; i < n_src_; ++i) pw.p_source[i] = std::pow(10.0, x[i]);
        for (int i = 0; i < n_rel_; ++i) pw.p_relay[i + 1] = std::pow(10.0, x[n_src_ + i]);
        return pw;
    }

    Candidate evaluate(const std::vector<double>& x) const {
        Candidate c;
        c.x = x;
        try {
            const ProtocolConfig cfg = decode_protocol(x);
            const PowerAllocation pw = decode_powers(x);
            c.metrics = analytic_metrics(p_.channel, cfg, pw, p_.inr_mode);
        } catch (const NumericalError&) {
            return c;
        } catch (const ConfigError&) {
            return c;  // e.g. the Theorem-2 bound outside its r >= 1 domain
        }
        c.feasible = violation(c.metrics) <= 1e-9;  // roundoff slack at the boundary
        c.objective = p_.objective == Objective::MaxThroughput ? c.metrics.throughput
                                                               : -c.metrics.outage;
        return c;
    }

    // Positive when a constraint is exceeded, scaled by the budget.
    double violation(const Metrics& m) const {
        if (const auto* s = std::get_if<SumPowerConstraint>(&p_.scenario))
            return (m.phi_total - s->phi_total) / s->phi_total;
        const auto& ind = std::get<IndividualConstraint>(p_.scenario);
        return std::max((m.phi_s - ind.phi_s) / ind.phi_s,
                        m.relay_ever_active ? (m.phi_r - ind.phi_r) / ind.phi_r : 0.0);
    }

    // Score minimized by Nelder-Mead; infeasible points carry a graded penalty.
    double score(const Candidate& c) const {
        if (!std::isfinite(c.objective)) return 1e9;
        const double v = violation(c.metrics);
        return -c.objective + (v > 0.0 ? 1e3 * (1.0 + v) : 0.0);
    }

    // Lexicographic preference: objective, then lower phi_total, then lower P^s_1.
    bool better(const Candidate& a, const Candidate& b) const {
        if (a.feasible != b.feasible) return a.feasible;
        if (!a.feasible) return a.objective > b.objective;
        if (std::abs(a.objective - b.objective) > 1e-12)
            return a.objective > b.objective;
        if (std::abs(a.metrics.phi_total - b.metrics.phi_total) > 1e-12)
            return a.metrics.phi_total < b.metrics.phi_total;
        return a.x[0] < b.x[0];
    }

    double source_budget() const {
        if (const auto* s = std::get_if<SumPowerConstraint>(&p_.scenario))
            return s->phi_total;
        return std::get<IndividualConstraint>(p_.scenario).phi_s;
    }
    double relay_budget() const {
        if (const auto* s = std::get_if<SumPowerConstraint>(&p_.scenario))
            return s->phi_total;
        return std::get<IndividualConstraint>(p_.scenario).phi_r;
    }

private:
    const OptProblem& p_;
    int n_src_ = 0, n_rel_ = 0, n_rate_ = 0, dims_ = 0;
};

// Deterministic Nelder-Mead in log space; returns the best point seen.
Candidate nelder_mead(const Evaluator& ev, const std::vector<double>& start, int iters,
                      std::uint64_t& evals) {
    const int n = static_cast<int>(start.size());
    std::vector<Candidate> simplex;
    simplex.reserve(n + 1);
    simplex.push_back(ev.evaluate(start));
    for (int i = 0; i < n; ++i) {
        std::vector<double> x = start;
        x[i] += 0.1;  // one decibel
        simplex.push_back(ev.evaluate(x));
    }
    evals += n + 1;
    Candidate best = simplex[0];
    for (const auto& c : simplex)
        if (ev.better(c, best)) best = c;

    for (int it = 0; it < iters; ++it) {
        std::sort(simplex.begin(), simplex.end(),
                  [&](const Candidate& a, const Candidate& b) {
                      return ev.score(a) < ev.score(b);
                  });
        const double f_best = ev.score(simplex.front());
        const double f_worst = ev.score(simplex.back());
        if (f_worst - f_best < 1e-12) break;

        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) centroid[k] += simplex[i].x[k] / n;

        auto blend = [&](double t) {
            std::vector<double> x(n);
            for (int k = 0; k < n; ++k)
                x[k] = centroid[k] + t * (simplex.back().x[k] - centroid[k]);
            return x;
        };
        const Candidate refl = ev.evaluate(blend(-1.0));
        ++evals;
        if (ev.better(refl, best)) best = refl;
        const double f_refl = ev.score(refl);
        if (f_refl < f_best) {
            const Candidate expanded = ev.evaluate(blend(-2.0));
            ++evals;
            if (ev.better(expanded, best)) best = expanded;
            simplex.back() = ev.score(expanded) < f_refl ? expanded : refl;
            continue;
        }
        if (f_refl < ev.score(simplex[n - 1])) {
            simplex.back() = refl;
            continue;
        }
        const Candidate contr = ev.evaluate(blend(f_refl < f_worst ? -0.5 : 0.5));
        ++evals;
        if (ev.better(contr, best)) best = contr;
        if (ev.score(contr) < std::min(f_refl, f_worst)) {
            simplex.back() = contr;
            continue;
        }
        for (int i = 1; i <= n; ++i) {  // shrink toward the best vertex
            std::vector<double> x(n);
            for (int k = 0; k < n; ++k)
                x[k] = 0.5 * (simplex[0].x[k] + simplex[i].x[k]);
            simplex[i] = ev.evaluate(x);
            ++evals;
            if (ev.better(simplex[i], best)) best = simplex[i];
        }
    }
    return best;
}

}  // namespace

OptResult optimize(const OptProblem& problem) {
    problem.channel.validate();
    problem.protocol.validate();
    if (problem.grid.span_db <= 0.0 || problem.grid.step_db <= 0.0)
        throw ConfigError("optimize: grid span and step must be > 0");
    if (const auto* s = std::get_if<SumPowerConstraint>(&problem.scenario)) {
        if (s->phi_total <= 0.0) throw ConfigError("optimize: power budget must be > 0");
    } else {
        const auto& ind = std::get<IndividualConstraint>(problem.scenario);
        if (ind.phi_s <= 0.0 || ind.phi_r <= 0.0)
            throw ConfigError("optimize: power budgets must be > 0");
    }

    const Evaluator ev(problem);
    const int dims = ev.dims();
    std::uint64_t evals = 0;

    // Grid resolution: honor the requested step unless the evaluation budget
    // forces a coarser one in high dimension.
    int ppd = static_cast<int>(2.0 * problem.grid.span_db / problem.grid.step_db) + 1;
    while (ppd > 2 &&
           std::pow(static_cast<double>(ppd), dims) >
               static_cast<double>(problem.grid.max_grid_evaluations))
        ppd = (ppd + 1) / 2;
    ppd = std::max(ppd, 2);

    const std::vector<double> center = ev.center();
    const double half_span = problem.grid.span_db / 10.0;  // log10 units
    std::uint64_t n_points = 1;
    for (int d = 0; d < dims; ++d) n_points *= ppd;

    auto grid_point = [&](std::uint64_t idx) {
        std::vector<double> x(dims);
        for (int d = 0; d < dims; ++d) {
            const int k = static_cast<int>(idx % ppd);
            idx /= ppd;
            x[d] = center[d] - half_span + 2.0 * half_span * k / (ppd - 1);
        }
        return x;
    };

    std::vector<Candidate> results(n_points);
    const int threads = std::max(1, problem.threads);
    if (threads == 1) {
        for (std::uint64_t i = 0; i < n_points; ++i) results[i] = ev.evaluate(grid_point(i));
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::uint64_t i = next.fetch_add(1);
                    if (i >= n_points) return;
                    results[i] = ev.evaluate(grid_point(i));
                }
            });
        for (auto& th : pool) th.join();
    }
    evals += n_points;

    // Uniform allocation at the constraint level is always a start; it is
    // feasible by the all-equal-powers identity.
    Candidate best = ev.evaluate(center);
    ++evals;
    std::vector<Candidate> top;  // feasible grid leaders, deterministic order
    for (const auto& c : results) {
        if (ev.better(c, best)) best = c;
        if (c.feasible) {
            top.push_back(c);
            std::sort(top.begin(), top.end(),
                      [&](const Candidate& a, const Candidate& b) { return ev.better(a, b); });
            if (top.size() > 4) top.pop_back();
        }
    }

    // Multi-start polish: grid leaders, the uniform point, and fixed offsets.
    std::vector<std::vector<double>> starts;
    for (const auto& c : top) starts.push_back(c.x);
    starts.push_back(center);
    static const double kOffsets[][2] = {{0.35, -0.2}, {-0.3, 0.25}, {0.15, 0.4},
                                         {-0.45, -0.1}, {0.5, 0.1},  {-0.2, -0.35}};
    for (const auto& off : kOffsets) {
        if (static_cast<int>(starts.size()) >= problem.multistarts) break;
        std::vector<double> x = best.feasible ? best.x : center;
        for (int d = 0; d < dims; ++d) x[d] += off[d % 2];
        starts.push_back(std::move(x));
    }
    while (static_cast<int>(starts.size()) > problem.multistarts) starts.pop_back();

    OptResult out;
    for (const auto& s : starts) {
        const Candidate c = nelder_mead(ev, s, problem.polish_iterations, evals);
        out.start_values.push_back(c.feasible ? c.objective : -INFINITY);
        if (ev.better(c, best)) best = c;
    }
    if (!best.feasible)
        throw InfeasibleError("optimize: no feasible power allocation found");

    // Re-derive everything from the winning point; no cached state leaks out.
    const ProtocolConfig cfg = ev.decode_protocol(best.x);
    out.powers = ev.decode_powers(best.x);
    out.rates = cfg.rates;
    out.metrics = analytic_metrics(problem.channel, cfg, out.powers, problem.inr_mode);
    out.objective_value = problem.objective == Objective::MaxThroughput
                              ? out.metrics.throughput
                              : -out.metrics.outage;
    out.evaluations = evals;
    return out;
}

double coverage_lambda_threshold(const OptProblem& problem, double eps, double lambda_lo,
                                 double lambda_hi, double rel_tol) {
    if (eps <= 0.0 || eps >= 1.0) throw ConfigError("coverage: eps must be in (0,1)");
    OptProblem p = problem;
    p.objective = Objective::MinOutage;
    auto outage_at = [&](double lambda_sd) {
        p.channel.lambda_sd = lambda_sd;
        return optimize(p).metrics.outage;
    };
    if (outage_at(lambda_lo) > eps)
        throw InfeasibleError("coverage: outage target unattainable even at lambda_lo");
    if (outage_at(lambda_hi) <= eps) return lambda_hi;
    double lo = std::log(lambda_lo), hi = std::log(lambda_hi);
    while (hi - lo > std::log1p(rel_tol)) {
        const double mid = 0.5 * (lo + hi);
        (outage_at(std::exp(mid)) <= eps ? lo : hi) = mid;
    }
    return std::exp(lo);
}

double coverage_ratio(const OptProblem& problem, double eps) {
    OptProblem base = problem;
    base.channel.lambda_sr = INFINITY;
    base.channel.lambda_rd = INFINITY;
    base.channel.delta = 0.0;
    base.channel.fading = FadingMode::QuasiStatic;
    base.protocol = ProtocolConfig::fixed_length(Protocol::Rtd, 0, problem.protocol.rates[0]);
    base.free_rates = false;
    if (const auto* ind = std::get_if<IndividualConstraint>(&problem.scenario))
        base.scenario = SumPowerConstraint{ind->phi_s};
    const double numer = coverage_lambda_threshold(problem, eps);
    const double denom = coverage_lambda_threshold(base, eps);
    if (denom <= 0.0) throw NumericalError("coverage: degenerate baseline", denom);
    return numer / denom;
}

}  // namespace relayarq
