#pragma once

// Globalized Newton ascent on the estimated yield over the distribution mean,
// with the adaptive sample-size rule. All yield values come from a
// YieldEvaluator, so plain MC and the hybrid estimator plug in alike.

#include "yieldopt/errors.hpp"
#include "yieldopt/estimator.hpp"
#include "yieldopt/hybrid.hpp"
#include "yieldopt/model.hpp"
#include "yieldopt/uq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace yieldopt {

struct NewtonConfig {
    bool adaptive = true;
    std::size_t n0 = 100;        ///< initial size and escalation increment
    std::size_t n_fixed = 2500;  ///< sample size when not adaptive
    double sigma_hat = 0.01;
    int max_iter = 50;
    double beta = 0.5;
    double c1 = 1e-4;
    int max_backtracks = 6;
    double grad_tol = 1e-3;
    double shift_fraction = 1e-2; ///< eigenvalue floor of -H, relative to its largest
    ParamVec lower;              ///< box for the mean; empty means unbounded
    ParamVec upper;

    void validate(std::size_t dim) const {
        if (n0 < 1 || n_fixed < 1) throw InvalidInput("newton: sample sizes must be positive");
        if (!(sigma_hat > 0.0)) throw InvalidInput("newton: sigma_hat must be positive");
        if (max_iter < 0 || max_backtracks < 0) throw InvalidInput("newton: iteration limits must be non-negative");
        if (!(beta > 0.0 && beta < 1.0)) throw InvalidInput("newton: beta must lie in (0, 1)");
        if (!(c1 > 0.0 && c1 < 1.0)) throw InvalidInput("newton: c1 must lie in (0, 1)");
        if (!(shift_fraction > 0.0 && shift_fraction < 1.0)) throw InvalidInput("newton: shift_fraction must lie in (0, 1)");
        if (lower.size() != upper.size()) throw InvalidInput("newton: box bounds differ in size");
        if (lower.size() != 0) {
            if (static_cast<std::size_t>(lower.size()) != dim) throw InvalidInput("newton: box dimension mismatch");
            if ((lower.array() > upper.array()).any()) throw InvalidInput("newton: box has lower > upper");
        }
    }

    bool operator==(const NewtonConfig& o) const {
        auto same = [](const ParamVec& a, const ParamVec& b) { return a.size() == b.size() && a == b; };
        return adaptive == o.adaptive && n0 == o.n0 && n_fixed == o.n_fixed && sigma_hat == o.sigma_hat &&
               max_iter == o.max_iter && beta == o.beta && c1 == o.c1 && max_backtracks == o.max_backtracks &&
               grad_tol == o.grad_tol && shift_fraction == o.shift_fraction && same(lower, o.lower) && same(upper, o.upper);
    }
};

enum class StepType { newton, shifted_newton, gradient, none };

inline const char* to_string(StepType t) {
    switch (t) {
    case StepType::newton: return "newton";
    case StepType::shifted_newton: return "shifted_newton";
    case StepType::gradient: return "gradient";
    case StepType::none: return "none";
    }
    return "?";
}

struct NewtonIterate {
    int iter = 0;
    std::size_t n_samples = 0;
    double yield = 0.0;
    double sigma = 0.0;
    double grad_norm = 0.0;
    StepType step = StepType::none;
    double step_len = 0.0; ///< accepted Armijo t, 0 when the search failed
    bool escalated = false;
    std::uint64_t cum_true_evals = 0;
    ParamVec mean;
};

enum class NewtonStop { gradient_small, stalled, max_iter };

inline const char* to_string(NewtonStop s) {
    switch (s) {
    case NewtonStop::gradient_small: return "gradient_small";
    case NewtonStop::stalled: return "stalled";
    case NewtonStop::max_iter: return "max_iter";
    }
    return "?";
}

struct NewtonResult {
    ParamVec mean;
    YieldEstimate start;
    YieldEstimate final;
    std::vector<NewtonIterate> trace;
    std::uint64_t true_evals = 0;
    NewtonStop stop = NewtonStop::max_iter;
};

namespace detail {

inline ParamVec clamp_box(const ParamVec& p, const NewtonConfig& c) {
    if (c.lower.size() == 0) return p;
    return p.cwiseMax(c.lower).cwiseMin(c.upper);
}

// Gradient with components zeroed where the box blocks ascent.
inline ParamVec projected_gradient(const ParamVec& g, const ParamVec& m, const NewtonConfig& c) {
    if (c.lower.size() == 0) return g;
    ParamVec pg = g;
    for (Eigen::Index i = 0; i < g.size(); ++i)
        if ((m[i] <= c.lower[i] && g[i] < 0.0) || (m[i] >= c.upper[i] && g[i] > 0.0)) pg[i] = 0.0;
    return pg;
}

} // namespace detail

/// Maximizes the estimated yield over the mean of `dist`, starting at dist.mean().
/// Every estimate at mean m uses sample(dist.recentered(m), N, seed), so
/// compared yields share their random offsets. Evaluation counts are the
/// evaluator's running totals, training included.
template <YieldEvaluator E>
NewtonResult maximize_yield(E& evaluator, const TruncatedGaussian& dist, const NewtonConfig& cfg,
                            std::uint64_t seed) {
    cfg.validate(dist.dimension());
    ParamVec m = dist.mean();
    if (cfg.lower.size() != 0 && detail::clamp_box(m, cfg) != m)
        throw InvalidInput("newton: start point lies outside the box");

    std::size_t n = cfg.adaptive ? cfg.n0 : cfg.n_fixed;

    struct Point {
        TruncatedGaussian d;
        SampleSet s;
        EvaluatedSet e;
    };
    auto eval_at = [&](const ParamVec& mean, std::size_t size) {
        Point pt{dist.recentered(mean), {}, {}};
        pt.s = sample(pt.d, size, seed);
        pt.e = evaluator.evaluate(pt.s);
        return pt;
    };

    Point cur = eval_at(m, n);
    NewtonResult out;
    out.start = cur.e.estimate;
    out.stop = NewtonStop::max_iter;

    for (int k = 0; k < cfg.max_iter; ++k) {
        const ParamVec g = yield_gradient_mc(cur.s, cur.e.accepted, cur.d);
        const Eigen::MatrixXd h = yield_hessian_mc(cur.s, cur.e.accepted, cur.d);
        const ParamVec pg = detail::projected_gradient(g, m, cfg);

        NewtonIterate rec;
        rec.iter = k;
        rec.n_samples = n;
        rec.grad_norm = pg.norm();

        if (rec.grad_norm <= cfg.grad_tol && cur.e.estimate.sigma <= cfg.sigma_hat) {
            rec.yield = cur.e.estimate.value;
            rec.sigma = cur.e.estimate.sigma;
            rec.cum_true_evals = evaluator.true_evals();
            rec.mean = m;
            out.trace.push_back(rec);
            out.stop = NewtonStop::gradient_small;
            break;
        }

        // Newton direction when -H is positive definite. Otherwise shift the
        // spectrum of -H just enough to make it so; plain gradient if -H has no
        // positive curvature at all or the result is not an ascent direction.
        ParamVec d = g;
        rec.step = StepType::gradient;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-h);
        if (eig.info() == Eigen::Success && g.norm() > 0.0) {
            const ParamVec lam = eig.eigenvalues();
            const double lmax = lam.maxCoeff();
            if (lmax > 0.0) {
                const double floor = cfg.shift_fraction * lmax;
                const bool pd = lam.minCoeff() >= floor;
                const ParamVec shifted = lam.array().max(floor).matrix();
                const Eigen::MatrixXd& v = eig.eigenvectors();
                const ParamVec dn = v * (v.transpose() * g).cwiseQuotient(shifted);
                if (dn.allFinite() && g.dot(dn) >= 1e-6 * g.norm() * dn.norm()) {
                    d = dn;
                    rec.step = pd ? StepType::newton : StepType::shifted_newton;
                }
            }
        }

        // Armijo backtracking on the projected step, same offsets for every trial.
        bool accepted = false;
        double t = 1.0;
        for (int ls = 0; ls <= cfg.max_backtracks; ++ls, t *= cfg.beta) {
            const ParamVec mt = detail::clamp_box(m + t * d, cfg);
            const double slope = g.dot(mt - m);
            if (!(slope > 0.0)) continue;
            Point trial = eval_at(mt, n);
            if (trial.e.estimate.value >= cur.e.estimate.value + cfg.c1 * slope) {
                m = mt;
                rec.step_len = t;
                accepted = true;
                const double y_prev = cur.e.estimate.value;
                cur = std::move(trial);
                // adaptive rule, on a successful step
                if (cfg.adaptive && std::abs(y_prev - cur.e.estimate.value) < cfg.sigma_hat &&
                    cfg.sigma_hat / 2.0 < cur.e.estimate.sigma) {
                    n += cfg.n0;
                    cur = eval_at(m, n);
                    rec.escalated = true;
                }
                break;
            }
        }
        if (!accepted) {
            rec.step = StepType::none;
            // no progress: |dY| = 0, so escalate if the estimator is still too noisy
            if (cfg.adaptive && cfg.sigma_hat / 2.0 < cur.e.estimate.sigma) {
                n += cfg.n0;
                cur = eval_at(m, n);
                rec.escalated = true;
            }
        }

        rec.yield = cur.e.estimate.value;
        rec.sigma = cur.e.estimate.sigma;
        rec.cum_true_evals = evaluator.true_evals();
        rec.mean = m;
        out.trace.push_back(rec);

        if (!accepted && !rec.escalated) {
            out.stop = NewtonStop::stalled;
            break;
        }
    }

    out.mean = m;
    out.final = cur.e.estimate;
    out.true_evals = evaluator.true_evals();
    return out;
}

/// Fixed sample size n_fixed, no escalation.
template <YieldEvaluator E>
NewtonResult classic_newton(E& evaluator, const TruncatedGaussian& dist, NewtonConfig cfg, std::uint64_t seed) {
    cfg.adaptive = false;
    return maximize_yield(evaluator, dist, cfg, seed);
}

inline void write_trace_csv(std::ostream& os, const std::vector<NewtonIterate>& trace) {
    os << "iter,n_samples,yield,sigma,grad_norm,step_type,step_len,escalated,cum_true_evals";
    const Eigen::Index d = trace.empty() ? 0 : trace.front().mean.size();
    for (Eigen::Index i = 0; i < d; ++i) os << ",p" << i + 1;
    os << '\n';
    for (const auto& r : trace) {
        os << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{},{:.17g},{},{}", r.iter, r.n_samples, r.yield, r.sigma,
                          r.grad_norm, to_string(r.step), r.step_len, r.escalated ? 1 : 0, r.cum_true_evals);
        for (Eigen::Index i = 0; i < r.mean.size(); ++i) os << fmt::format(",{:.17g}", r.mean[i]);
        os << '\n';
    }
}

} // namespace yieldopt
