#pragma once

// NSGA-II: constraint-domination sorting, crowding distance, binary tournament,
// SBX crossover, polynomial mutation, (mu + lambda) survival.

#include "yieldopt/errors.hpp"
#include "yieldopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace yieldopt {

inline constexpr double crowding_inf = std::numeric_limits<double>::infinity();

struct Individual {
    ParamVec x;
    std::vector<double> f;  ///< objectives, all minimized
    double violation = 0.0; ///< sum of max(0, g_n)
    int rank = 0;           ///< 1 = non-dominated
    double crowding = 0.0;

    bool feasible() const { return violation <= 0.0; }
};

struct Evaluation {
    std::vector<double> f;
    double violation = 0.0;
};

struct MooProblem {
    std::size_t n_obj = 2;
    ParamVec lower;
    ParamVec upper;
    std::function<Evaluation(const ParamVec&)> evaluate;
    /// Called once after every batch of evaluations (initial population, then
    /// each generation's offspring). Optional.
    std::function<void()> end_batch;

    std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }

    void validate() const {
        if (n_obj < 2) throw InvalidInput("moo: at least two objectives required");
        if (lower.size() == 0 || lower.size() != upper.size()) throw InvalidInput("moo: bounds missing or mismatched");
        if (!lower.allFinite() || !upper.allFinite()) throw InvalidInput("moo: bounds must be finite");
        if ((lower.array() >= upper.array()).any()) throw InvalidInput("moo: need lower < upper in every coordinate");
        if (!evaluate) throw InvalidInput("moo: no evaluation function");
    }
};

struct NsgaSettings {
    std::size_t pop_size = 200;
    std::size_t n_offspring = 100;
    int n_gen = 30;
    double eta_c = 15.0;
    double p_c = 0.9;
    double eta_m = 20.0;
    double p_m = -1.0; ///< per-variable mutation probability; <= 0 means 1/d

    void validate() const {
        if (pop_size < 2) throw InvalidInput("moo: population needs at least two individuals");
        if (n_offspring < 1) throw InvalidInput("moo: need at least one offspring per generation");
        if (n_gen < 0) throw InvalidInput("moo: generation count must be non-negative");
        if (!(eta_c >= 0.0) || !(eta_m >= 0.0)) throw InvalidInput("moo: distribution indices must be >= 0");
        if (!(p_c >= 0.0 && p_c <= 1.0)) throw InvalidInput("moo: crossover probability outside [0, 1]");
    }
};

/// Pareto dominance, minimization.
inline bool pareto_dominates(const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (std::size_t m = 0; m < a.size(); ++m) {
        if (a[m] > b[m]) return false;
        if (a[m] < b[m]) strict = true;
    }
    return strict;
}

/// Deb's constraint domination.
inline bool constraint_dominates(const Individual& a, const Individual& b) {
    const bool fa = a.feasible(), fb = b.feasible();
    if (fa && !fb) return true;
    if (!fa && fb) return false;
    if (!fa && !fb) return a.violation < b.violation;
    return pareto_dominates(a.f, b.f);
}

/// Fast non-dominated sort; sets rank (1-based) and returns fronts of indices.
inline std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (constraint_dominates(pop[i], pop[j])) {
                dominated[i].push_back(j);
                ++count[j];
            } else if (constraint_dominates(pop[j], pop[i])) {
                dominated[j].push_back(i);
                ++count[i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (count[i] == 0) fronts[0].push_back(i);
    int rank = 1;
    while (!fronts.back().empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : fronts.back()) {
            pop[i].rank = rank;
            for (std::size_t j : dominated[i])
                if (--count[j] == 0) next.push_back(j);
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
        ++rank;
    }
    fronts.pop_back();
    return fronts;
}

/// Crowding distance over one front; extremes get +inf, zero-width objective
/// ranges contribute nothing.
inline void crowding_distance(std::vector<Individual>& pop, const std::vector<std::size_t>& front) {
    for (std::size_t i : front) pop[i].crowding = 0.0;
    if (front.size() <= 2) {
        for (std::size_t i : front) pop[i].crowding = crowding_inf;
        return;
    }
    const std::size_t n_obj = pop[front.front()].f.size();
    std::vector<std::size_t> idx(front);
    for (std::size_t m = 0; m < n_obj; ++m) {
        // tie-break on index keeps the result independent of input order
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return pop[a].f[m] != pop[b].f[m] ? pop[a].f[m] < pop[b].f[m] : a < b;
        });
        const double lo = pop[idx.front()].f[m];
        const double hi = pop[idx.back()].f[m];
        pop[idx.front()].crowding = crowding_inf;
        pop[idx.back()].crowding = crowding_inf;
        const double range = hi - lo;
        if (!(range > 0.0) || !std::isfinite(range)) continue;
        for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
            Individual& ind = pop[idx[k]];
            if (ind.crowding == crowding_inf) continue;
            ind.crowding += (pop[idx[k + 1]].f[m] - pop[idx[k - 1]].f[m]) / range;
        }
    }
}

namespace detail {

// Bounded SBX on one variable pair (Deb & Agrawal), returns the two children.
inline std::pair<double, double> sbx_pair(double x1, double x2, double lo, double hi, double eta, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    if (std::abs(x1 - x2) < 1e-14) return {x1, x2};
    const double y1 = std::min(x1, x2), y2 = std::max(x1, x2);
    const double r = u01(rng);
    auto child = [&](double beta) {
        const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        const double betaq = r <= 1.0 / alpha ? std::pow(r * alpha, 1.0 / (eta + 1.0))
                                              : std::pow(1.0 / (2.0 - r * alpha), 1.0 / (eta + 1.0));
        return betaq;
    };
    const double bq1 = child(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
    const double bq2 = child(1.0 + 2.0 * (hi - y2) / (y2 - y1));
    double c1 = 0.5 * ((y1 + y2) - bq1 * (y2 - y1));
    double c2 = 0.5 * ((y1 + y2) + bq2 * (y2 - y1));
    c1 = std::clamp(c1, lo, hi);
    c2 = std::clamp(c2, lo, hi);
    if (u01(rng) < 0.5) std::swap(c1, c2);
    return x1 <= x2 ? std::pair{c1, c2} : std::pair{c2, c1};
}

inline double poly_mutate(double x, double lo, double hi, double eta, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double span = hi - lo;
    const double d1 = (x - lo) / span, d2 = (hi - x) / span;
    const double r = u01(rng);
    const double mp = 1.0 / (eta + 1.0);
    double dq;
    if (r < 0.5) {
        const double v = 2.0 * r + (1.0 - 2.0 * r) * std::pow(1.0 - d1, eta + 1.0);
        dq = std::pow(v, mp) - 1.0;
    } else {
        const double v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(1.0 - d2, eta + 1.0);
        dq = 1.0 - std::pow(v, mp);
    }
    return std::clamp(x + dq * span, lo, hi);
}

} // namespace detail

struct GenerationStats {
    int generation = 0;
    std::size_t feasible = 0;
    std::vector<double> best;   ///< per objective, over feasible members (NaN if none)
    std::vector<double> median;
};

struct MooResult {
    std::vector<Individual> population; ///< final population, ranked
    std::vector<Individual> front;      ///< feasible rank-1 members, sorted by f[0]
    std::vector<GenerationStats> history;
    std::size_t evaluations = 0;
};

namespace detail {

inline GenerationStats generation_stats(int gen, const std::vector<Individual>& pop, std::size_t n_obj) {
    GenerationStats s;
    s.generation = gen;
    s.best.assign(n_obj, std::numeric_limits<double>::quiet_NaN());
    s.median.assign(n_obj, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::vector<double>> vals(n_obj);
    for (const auto& ind : pop) {
        if (!ind.feasible()) continue;
        ++s.feasible;
        for (std::size_t m = 0; m < n_obj; ++m) vals[m].push_back(ind.f[m]);
    }
    for (std::size_t m = 0; m < n_obj && s.feasible > 0; ++m) {
        auto& v = vals[m];
        std::sort(v.begin(), v.end());
        s.best[m] = v.front();
        const std::size_t h = v.size() / 2;
        s.median[m] = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    }
    return s;
}

// Ranks `pop` and assigns crowding on every front.
inline std::vector<std::vector<std::size_t>> rank_population(std::vector<Individual>& pop) {
    auto fronts = non_dominated_sort(pop);
    for (const auto& fr : fronts) crowding_distance(pop, fr);
    return fronts;
}

} // namespace detail

/// Extracts the feasible rank-1 members and checks strict non-dominance.
inline std::vector<Individual> pareto_front(const std::vector<Individual>& pop) {
    std::vector<Individual> out;
    for (const auto& ind : pop)
        if (ind.rank == 1 && ind.feasible()) out.push_back(ind);
    std::stable_sort(out.begin(), out.end(), [](const Individual& a, const Individual& b) { return a.f[0] < b.f[0]; });
    for (const auto& a : out)
        for (const auto& b : out)
            if (pareto_dominates(a.f, b.f)) throw NumericalError("moo: reported front contains a dominated member");
    return out;
}

inline MooResult evolve(const MooProblem& problem, const NsgaSettings& settings, std::uint64_t seed) {
    problem.validate();
    settings.validate();
    const std::size_t d = problem.dim();
    const double p_m = settings.p_m > 0.0 ? settings.p_m : 1.0 / static_cast<double>(d);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    MooResult out;

    auto eval_batch = [&](std::vector<Individual>& batch) {
        for (auto& ind : batch) {
            try {
                Evaluation e = problem.evaluate(ind.x);
                if (e.f.size() != problem.n_obj) throw InvalidInput("moo: wrong number of objectives");
                ind.f = std::move(e.f);
                ind.violation = std::max(0.0, e.violation);
            } catch (const std::exception& ex) {
                log::warn(std::string("moo: evaluation failed, individual gets worst values: ") + ex.what());
                ind.f.assign(problem.n_obj, std::numeric_limits<double>::max());
                ind.violation = std::numeric_limits<double>::max();
            }
            ++out.evaluations;
        }
        if (problem.end_batch) problem.end_batch();
    };

    std::vector<Individual> pop(settings.pop_size);
    for (auto& ind : pop) {
        ind.x.resize(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            ind.x[k] = problem.lower[k] + u01(rng) * (problem.upper[k] - problem.lower[k]);
        }
    }
    eval_batch(pop);
    detail::rank_population(pop);
    out.history.push_back(detail::generation_stats(0, pop, problem.n_obj));

    auto better = [&](const Individual& a, const Individual& b) {
        const bool fa = a.feasible(), fb = b.feasible();
        if (fa != fb) return fa;
        if (!fa) return a.violation < b.violation;
        if (a.rank != b.rank) return a.rank < b.rank;
        return a.crowding > b.crowding;
    };
    std::uniform_int_distribution<std::size_t> pick(0, settings.pop_size - 1);
    auto tournament = [&]() -> const Individual& {
        const Individual& a = pop[pick(rng)];
        const Individual& b = pop[pick(rng)];
        if (better(a, b)) return a;
        if (better(b, a)) return b;
        return u01(rng) < 0.5 ? a : b;
    };

    for (int gen = 1; gen <= settings.n_gen; ++gen) {
        std::vector<Individual> kids;
        kids.reserve(settings.n_offspring + 1);
        while (kids.size() < settings.n_offspring) {
            Individual c1, c2;
            c1.x = tournament().x;
            c2.x = tournament().x;
            if (u01(rng) < settings.p_c) {
                for (std::size_t i = 0; i < d; ++i) {
                    if (u01(rng) >= 0.5) continue;
                    const auto k = static_cast<Eigen::Index>(i);
                    auto [a, b] = detail::sbx_pair(c1.x[k], c2.x[k], problem.lower[k], problem.upper[k],
                                                   settings.eta_c, rng);
                    c1.x[k] = a;
                    c2.x[k] = b;
                }
            }
            for (Individual* c : {&c1, &c2}) {
                for (std::size_t i = 0; i < d; ++i) {
                    const auto k = static_cast<Eigen::Index>(i);
                    if (u01(rng) < p_m)
                        c->x[k] = detail::poly_mutate(c->x[k], problem.lower[k], problem.upper[k], settings.eta_m, rng);
                }
                c->x = c->x.cwiseMax(problem.lower).cwiseMin(problem.upper);
            }
            kids.push_back(std::move(c1));
            if (kids.size() < settings.n_offspring) kids.push_back(std::move(c2));
        }
        eval_batch(kids);

        std::vector<Individual> merged = std::move(pop);
        merged.insert(merged.end(), std::make_move_iterator(kids.begin()), std::make_move_iterator(kids.end()));
        const auto fronts = detail::rank_population(merged);
        std::vector<Individual> next;
        next.reserve(settings.pop_size);
        for (const auto& fr : fronts) {
            if (next.size() + fr.size() <= settings.pop_size) {
                for (std::size_t i : fr) next.push_back(merged[i]);
                continue;
            }
            std::vector<std::size_t> rest(fr);
            std::stable_sort(rest.begin(), rest.end(),
                             [&](std::size_t a, std::size_t b) { return merged[a].crowding > merged[b].crowding; });
            for (std::size_t k = 0; next.size() < settings.pop_size; ++k) next.push_back(merged[rest[k]]);
            break;
        }
        pop = std::move(next);
        detail::rank_population(pop);
        out.history.push_back(detail::generation_stats(gen, pop, problem.n_obj));
    }

    out.front = pareto_front(pop);
    out.population = std::move(pop);
    return out;
}

// ---------------------------------------------------------------------------
// ZDT1 and the inverted generational distance
// ---------------------------------------------------------------------------

inline MooProblem zdt1_problem(std::size_t d = 30) {
    if (d < 2) throw InvalidInput("zdt1 needs at least two variables");
    MooProblem p;
    p.n_obj = 2;
    p.lower = ParamVec::Zero(static_cast<Eigen::Index>(d));
    p.upper = ParamVec::Ones(static_cast<Eigen::Index>(d));
    p.evaluate = [d](const ParamVec& x) {
        const double g = 1.0 + 9.0 * x.tail(static_cast<Eigen::Index>(d - 1)).sum() / static_cast<double>(d - 1);
        const double f1 = x[0];
        return Evaluation{{f1, g * (1.0 - std::sqrt(f1 / g))}, 0.0};
    };
    return p;
}

/// n points of f2 = 1 - sqrt(f1), f1 equispaced on [0, 1].
inline std::vector<std::vector<double>> zdt1_reference_front(std::size_t n = 1000) {
    std::vector<std::vector<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double f1 = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = {f1, 1.0 - std::sqrt(f1)};
    }
    return out;
}

/// Mean over reference points of the distance to the nearest approximation point.
inline double inverted_generational_distance(const std::vector<std::vector<double>>& reference,
                                             const std::vector<std::vector<double>>& approx) {
    if (reference.empty() || approx.empty()) throw InvalidInput("igd: empty point set");
    double sum = 0.0;
    for (const auto& r : reference) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : approx) {
            double s = 0.0;
            for (std::size_t m = 0; m < r.size(); ++m) s += (r[m] - a[m]) * (r[m] - a[m]);
            best = std::min(best, s);
        }
        sum += std::sqrt(best);
    }
    return sum / static_cast<double>(reference.size());
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Yield-vs-width front rows: f1_width,yield,p1..pd,violation,rank.
/// Expects f = {width, -yield}.
inline void write_pareto_csv(std::ostream& os, const std::vector<Individual>& front) {
    os << "f1_width,yield";
    const Eigen::Index d = front.empty() ? 0 : front.front().x.size();
    for (Eigen::Index i = 0; i < d; ++i) os << ",p" << i + 1;
    os << ",violation,rank\n";
    for (const auto& ind : front) {
        os << fmt::format("{:.17g},{:.17g}", ind.f[0], -ind.f[1]);
        for (Eigen::Index i = 0; i < ind.x.size(); ++i) os << fmt::format(",{:.17g}", ind.x[i]);
        os << fmt::format(",{:.17g},{}\n", ind.violation, ind.rank);
    }
}

inline void write_history_csv(std::ostream& os, const std::vector<GenerationStats>& history) {
    os << "generation,feasible";
    const std::size_t m = history.empty() ? 0 : history.front().best.size();
    for (std::size_t k = 0; k < m; ++k) os << ",best_f" << k + 1 << ",median_f" << k + 1;
    os << '\n';
    for (const auto& h : history) {
        os << h.generation << ',' << h.feasible;
        for (std::size_t k = 0; k < m; ++k) os << fmt::format(",{:.17g},{:.17g}", h.best[k], h.median[k]);
        os << '\n';
    }
}

} // namespace yieldopt
