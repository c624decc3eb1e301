#pragma once

// The four batch experiments behind the command line: estimate, newton, moo,
// bench-compare. Each returns its results and can write its CSV files.

#include "yieldopt/config.hpp"
#include "yieldopt/estimator.hpp"
#include "yieldopt/hybrid.hpp"
#include "yieldopt/moo.hpp"
#include "yieldopt/newton.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace yieldopt {

/// Independent seed for a named sub-stream of a run seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace streams {
inline constexpr std::uint64_t training = 1;
inline constexpr std::uint64_t estimate = 2;
inline constexpr std::uint64_t newton = 3;
inline constexpr std::uint64_t moo_yield = 4;
inline constexpr std::uint64_t moo_ga = 5;
} // namespace streams

/// Calls f(model) with the model named by the config.
template <class F>
decltype(auto) with_model(const RunConfig& c, F&& f) {
    if (c.model.kind == ModelKind::toy) {
        ToyLinearModel m;
        return f(m);
    }
    WaveguideModel m(c.model.width_a_mm);
    return f(m);
}

// ---------------------------------------------------------------------------
// estimate / bench-compare
// ---------------------------------------------------------------------------

struct EstimateReport {
    YieldEstimate mc;
    YieldEstimate hybrid;           ///< true_evals includes the initial training
    std::uint64_t training_evals = 0;
    std::size_t mismatched = 0;     ///< samples where the two methods disagree
    std::vector<ClassificationRecord> records;

    double savings_ratio() const {
        return hybrid.true_evals == 0 ? 0.0
                                      : static_cast<double>(mc.true_evals) / static_cast<double>(hybrid.true_evals);
    }
};

/// Plain MC and GPR-Hybrid on the same seeded sample set.
inline EstimateReport run_estimate(const RunConfig& c) {
    c.validate();
    return with_model(c, [&](const auto& model) {
        using M = std::decay_t<decltype(model)>;
        const TruncatedGaussian dist = c.distribution.make();
        const PerformanceSpec spec = c.spec.spec();
        const FrequencyGrid grid = c.spec.grid();
        const SampleSet s = sample(dist, c.n_samples, derive_seed(c.seed, streams::estimate));

        EstimateReport rep;
        const SafeDomainClassifier<M> cls(model, spec, grid);
        const McResult mc = estimate_yield_mc(cls, s, c.hybrid.short_circuit);
        rep.mc = mc.estimate;

        HybridEvaluator<M> he(model, spec, grid, c.hybrid, c.gpr);
        he.train(dist, derive_seed(c.seed, streams::training));
        HybridResult hr = he.run(s);
        rep.training_evals = he.training_evals();
        rep.hybrid = hr.estimate;
        rep.hybrid.true_evals = he.true_evals();
        for (std::size_t i = 0; i < s.size(); ++i)
            rep.mismatched += (!hr.records[i].unresolved && hr.accepted[i] != mc.accepted[i]) ? 1 : 0;
        rep.records = std::move(hr.records);
        return rep;
    });
}

inline void write_estimate_csv(std::ostream& os, const EstimateReport& r) {
    os << "method,yield,sigma,n_samples,true_evals,critical_count\n";
    auto row = [&](const char* name, const YieldEstimate& e) {
        os << fmt::format("{},{:.17g},{:.17g},{},{},{}\n", name, e.value, e.sigma, e.n_samples, e.true_evals,
                          e.critical_count);
    };
    row("mc", r.mc);
    row("gpr-hybrid", r.hybrid);
}

inline void write_bench_compare_csv(std::ostream& os, const EstimateReport& r) {
    os << "method,true_evals,yield,sigma,savings_ratio\n";
    os << fmt::format("mc,{},{:.17g},{:.17g},{:.17g}\n", r.mc.true_evals, r.mc.value, r.mc.sigma, 1.0);
    os << fmt::format("gpr-hybrid,{},{:.17g},{:.17g},{:.17g}\n", r.hybrid.true_evals, r.hybrid.value, r.hybrid.sigma,
                      r.savings_ratio());
}

// ---------------------------------------------------------------------------
// newton
// ---------------------------------------------------------------------------

/// Yield maximization from newton.start with a hybrid evaluator whose bank is
/// trained once at the start point and kept for the whole run.
inline NewtonResult run_newton(const RunConfig& c, bool classic) {
    c.validate();
    return with_model(c, [&](const auto& model) {
        using M = std::decay_t<decltype(model)>;
        const TruncatedGaussian dist = c.distribution.make().recentered(c.newton_start);
        HybridEvaluator<M> he(model, c.spec.spec(), c.spec.grid(), c.hybrid, c.gpr);
        he.train(dist, derive_seed(c.seed, streams::training));
        const std::uint64_t seed = derive_seed(c.seed, streams::newton);
        return classic ? classic_newton(he, dist, c.newton, seed) : maximize_yield(he, dist, c.newton, seed);
    });
}

// ---------------------------------------------------------------------------
// moo
// ---------------------------------------------------------------------------

/// Yield objective for the GA: hybrid estimation with one shared sample seed and
/// a bank frozen within each generation. Between generations a bounded number of
/// the generation's true evaluations is inserted into the bank.
template <QoiModel M>
class GenerationalYield {
public:
    GenerationalYield(const M& model, const RunConfig& c)
        : model_(&model), base_(c.distribution.make()), spec_(c.spec.spec()), grid_(c.spec.grid()),
          cfg_(c.hybrid), n_(c.moo.n_samples), seed_(derive_seed(c.seed, streams::moo_yield)),
          inserts_(c.moo.bank_inserts), bank_max_(c.moo.bank_max), pending_(grid_.size()) {
        cfg_.updates_enabled = false;
        const std::uint64_t before = model.eval_count();
        bank_ = initial_training(model, base_, grid_, cfg_.n_initial_train, derive_seed(c.seed, streams::training),
                                 c.gpr, cfg_.refit_period);
        evals_ += model.eval_count() - before;
    }

    double operator()(const ParamVec& mean) {
        const SampleSet s = sample(base_.recentered(mean), n_, seed_);
        const HybridResult r = estimate_yield_hybrid(bank_, s, cfg_, *model_, spec_, grid_);
        evals_ += r.estimate.true_evals;
        // first resolution per frequency of this individual becomes a candidate
        std::vector<bool> taken(grid_.size(), false);
        for (const Resolution& res : r.resolutions) {
            if (taken[res.freq_index]) continue;
            taken[res.freq_index] = true;
            pending_[res.freq_index].push_back({s.points[res.sample_id], res.value});
        }
        return r.estimate.value;
    }

    /// Inserts up to bank_inserts evenly spaced candidates per frequency.
    void end_generation() {
        for (std::size_t j = 0; j < pending_.size(); ++j) {
            auto& cand = pending_[j];
            const std::size_t room =
                bank_max_ > bank_.pair(j).re.size() ? bank_max_ - bank_.pair(j).re.size() : 0;
            const std::size_t k = std::min({inserts_, room, cand.size()});
            for (std::size_t t = 0; t < k; ++t) {
                const auto& [p, v] = cand[t * cand.size() / k];
                bank_.insert(j, p, v);
            }
            cand.clear();
        }
    }

    std::uint64_t true_evals() const { return evals_; }
    const SurrogateBank& bank() const { return bank_; }

private:
    const M* model_;
    TruncatedGaussian base_;
    PerformanceSpec spec_;
    FrequencyGrid grid_;
    HybridConfig cfg_;
    std::size_t n_;
    std::uint64_t seed_;
    std::size_t inserts_;
    std::size_t bank_max_;
    SurrogateBank bank_;
    std::vector<std::vector<std::pair<ParamVec, Complex>>> pending_;
    std::uint64_t evals_ = 0;
};

/// Size objective of the benchmark: total stack length 2 p1 + p2. The toy model
/// uses -p, which pulls against its yield.
inline double size_objective(const RunConfig& c, const ParamVec& p) {
    return c.model.kind == ModelKind::toy ? -p[0] : 2.0 * p[0] + p[1];
}

struct MooReport {
    MooResult result;
    std::uint64_t true_evals = 0;
};

inline MooReport run_moo(const RunConfig& c) {
    c.validate();
    return with_model(c, [&](const auto& model) {
        using M = std::decay_t<decltype(model)>;
        GenerationalYield<M> yield(model, c);
        MooProblem prob;
        prob.n_obj = 2;
        prob.lower = c.moo.lower;
        prob.upper = c.moo.upper;
        const double y_min = c.moo.y_min;
        prob.evaluate = [&](const ParamVec& p) {
            const double y = yield(p);
            return Evaluation{{size_objective(c, p), -y}, std::max(0.0, y_min - y)};
        };
        prob.end_batch = [&] { yield.end_generation(); };
        NsgaSettings ns;
        ns.pop_size = c.moo.pop;
        ns.n_offspring = c.moo.offspring;
        ns.n_gen = c.moo.generations;
        MooReport rep;
        rep.result = evolve(prob, ns, derive_seed(c.seed, streams::moo_ga));
        rep.true_evals = yield.true_evals();
        return rep;
    });
}

// ---------------------------------------------------------------------------
// file output
// ---------------------------------------------------------------------------

/// Opens `dir/name` for writing in binary mode (LF line endings everywhere).
inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + (dir / name).string() + "'");
    return f;
}

} // namespace yieldopt
