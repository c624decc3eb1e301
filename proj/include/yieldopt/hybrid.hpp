#pragma once

// GPR-Hybrid yield estimation.
//
// Each (sample, frequency) is first judged on the surrogate. When the band
// q +- gamma*sigma straddles the threshold the pair is critical: it is solved on
// the true model, the true value decides, and the solved point is added to that
// frequency's surrogate pair. Everything else is classified by the surrogate.

#include "yieldopt/errors.hpp"
#include "yieldopt/estimator.hpp"
#include "yieldopt/gpr.hpp"
#include "yieldopt/model.hpp"
#include "yieldopt/uq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

namespace yieldopt {

struct HybridConfig {
    double gamma = 2.0;
    std::size_t n_initial_train = 10;
    std::size_t refit_period = 10;
    bool sort_enabled = true;
    bool updates_enabled = true;
    bool short_circuit = true;

    void validate() const {
        if (!(gamma > 1.0)) throw InvalidInput("hybrid safety factor gamma must exceed 1");
        if (n_initial_train < 1) throw InvalidInput("hybrid needs at least one initial training point");
    }

    bool operator==(const HybridConfig&) const = default;
};

/// Surrogate prediction of the QoI at one frequency, with its std on the QoI scale.
struct BandPrediction {
    double q = 0.0;
    double sigma_c = 0.0;
    bool deep_pass = false; ///< |S| predicted as exactly zero
};

inline constexpr double db_per_neper = 20.0 / 2.302585092994045684; // 20 / ln 10

/// Maps a complex surrogate prediction to the QoI scale. For magnitudes in dB the
/// two component stds are combined root-sum-square and carried through the
/// first-order derivative of 20*log10|S|.
inline BandPrediction band_from_prediction(const SurrogateBank::ComplexPrediction& pred, QoiKind kind) {
    if (kind == QoiKind::real_part) return {pred.mean.real(), pred.std_re, false};
    const double mag = std::abs(pred.mean);
    if (mag == 0.0) return {deep_pass_db, 0.0, true};
    const double s = std::hypot(pred.std_re, pred.std_im);
    return {20.0 * std::log10(mag), db_per_neper * s / mag, false};
}

inline BandPrediction magnitude_prediction(const SurrogateBank& bank, const ParamVec& p, std::size_t freq_index,
                                           QoiKind kind = QoiKind::magnitude_db) {
    return band_from_prediction(bank.predict(freq_index, p), kind);
}

/// True iff q - gamma*sigma < c < q + gamma*sigma.
inline bool is_critical(double q, double sigma_c, double gamma, double c) {
    if (sigma_c < 0.0) throw InvalidInput("is_critical: sigma must be non-negative");
    const double half = gamma * sigma_c;
    return q - half < c && c < q + half;
}

enum class FreqStatus : std::uint8_t {
    surrogate_accepted,
    surrogate_rejected,
    critical_accepted,
    critical_rejected,
    skipped,
};

struct ClassificationRecord {
    std::size_t sample_id = 0;
    std::vector<FreqStatus> status;
    bool accepted = false;
    bool unresolved = false;
    std::size_t true_evals = 0;

    std::size_t n_critical() const {
        return static_cast<std::size_t>(std::count_if(status.begin(), status.end(), [](FreqStatus s) {
            return s == FreqStatus::critical_accepted || s == FreqStatus::critical_rejected;
        }));
    }
    bool critical() const { return n_critical() > 0; }
};

/// One true-model evaluation made for a critical (sample, frequency) pair.
struct Resolution {
    std::size_t sample_id = 0;
    std::size_t freq_index = 0;
    Complex value;
};

struct HybridResult {
    YieldEstimate estimate;
    AcceptFlags accepted;                      ///< indexed by sample id
    std::vector<ClassificationRecord> records; ///< indexed by sample id
    std::vector<Resolution> resolutions;       ///< in processing order
    std::size_t insertions = 0;
};

template <QoiModel M>
std::vector<std::vector<Complex>> solve_all_frequencies(const M& model, const std::vector<ParamVec>& points,
                                                        const FrequencyGrid& grid) {
    std::vector<std::vector<Complex>> out(points.size());
    const auto omegas = grid.omegas();
    for (std::size_t i = 0; i < points.size(); ++i) {
        out[i].reserve(omegas.size());
        for (double w : omegas) out[i].push_back(model.response(points[i], w));
    }
    return out;
}

/// Seeded draws from `dist`, solved at every grid frequency, used to fit a fresh bank.
template <QoiModel M>
SurrogateBank initial_training(const M& model, const TruncatedGaussian& dist, const FrequencyGrid& grid,
                               std::size_t n, std::uint64_t seed, const GprSettings& gpr,
                               std::size_t refit_period = 10) {
    if (n < 1) throw InvalidInput("initial_training: n must be at least 1");
    grid.validate();
    const SampleSet train = sample(dist, n, seed);
    SurrogateBank bank(grid.size(), gpr, refit_period);
    bank.train(train.points, solve_all_frequencies(model, train.points, grid));
    return bank;
}

/// Classifies `samples` with the surrogate bank, resolving critical pairs on the
/// true model. Mutates the bank when updates are enabled.
template <QoiModel M>
HybridResult estimate_yield_hybrid(SurrogateBank& bank, const SampleSet& samples, const HybridConfig& config,
                                   const M& model, const PerformanceSpec& spec, const FrequencyGrid& grid) {
    config.validate();
    spec.validate();
    grid.validate();
    if (samples.size() == 0) throw InvalidInput("estimate_yield_hybrid: empty sample set");
    if (bank.n_freq() != grid.size()) throw InvalidInput("surrogate bank does not match the frequency grid");

    const std::size_t n = samples.size();
    const std::size_t nf = grid.size();
    const auto omegas = grid.omegas();
    const double c = spec.threshold_c;
    const QoiKind kind = model.qoi_kind();

    struct Cached {
        BandPrediction band;
        std::uint64_t version = std::numeric_limits<std::uint64_t>::max();
    };
    std::vector<Cached> cache(n * nf);
    auto predict = [&](std::size_t i, std::size_t j) -> const BandPrediction& {
        Cached& e = cache[i * nf + j];
        if (e.version != bank.version(j)) {
            e.band = magnitude_prediction(bank, samples.points[i], j, kind);
            e.version = bank.version(j);
        }
        return e.band;
    };

    auto fill_cache = [&] {
        Eigen::MatrixXd pts(static_cast<Eigen::Index>(samples.points.front().size()), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) pts.col(static_cast<Eigen::Index>(i)) = samples.points[i];
        for (std::size_t j = 0; j < nf; ++j) {
            const auto preds = bank.predict_batch(j, pts);
            for (std::size_t i = 0; i < n; ++i) cache[i * nf + j] = {band_from_prediction(preds[i], kind), bank.version(j)};
        }
    };

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // With a frozen bank the order cannot change any decision, so sorting is skipped.
    if (config.sort_enabled || !config.updates_enabled) fill_cache();
    if (config.sort_enabled && config.updates_enabled) {
        constexpr double eps = 1e-12;
        std::vector<double> key(n, std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < nf; ++j) {
                const BandPrediction& b = predict(i, j);
                if (b.deep_pass) continue;
                key[i] = std::min(key[i], std::abs(b.q - c) / std::max(b.sigma_c, eps));
            }
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    }

    HybridResult out;
    out.accepted.assign(n, 0);
    out.records.resize(n);
    std::size_t n_acc = 0, n_unresolved = 0, n_crit = 0, n_noncrit = 0;
    std::uint64_t evals = 0;

    for (std::size_t i : order) {
        ClassificationRecord& rec = out.records[i];
        rec.sample_id = i;
        rec.status.assign(nf, FreqStatus::skipped);
        const ParamVec& p = samples.points[i];
        bool ok_all = true;
        for (std::size_t j = 0; j < nf && !rec.unresolved; ++j) {
            if (!ok_all && config.short_circuit) break;
            const BandPrediction& b = predict(i, j);
            bool ok;
            if (!b.deep_pass && is_critical(b.q, b.sigma_c, config.gamma, c)) {
                Complex s;
                try {
                    s = model.response(p, omegas[j]);
                } catch (const std::exception& e) {
                    log::warn(std::string("hybrid: model evaluation failed for sample ") + std::to_string(i) +
                              ": " + e.what());
                    rec.unresolved = true;
                    break;
                }
                ++rec.true_evals;
                ok = spec.satisfied(qoi_from_response(s, kind));
                rec.status[j] = ok ? FreqStatus::critical_accepted : FreqStatus::critical_rejected;
                out.resolutions.push_back({i, j, s});
                if (config.updates_enabled && bank.insert(j, p, s)) ++out.insertions;
            } else {
                ok = b.deep_pass || spec.satisfied(b.q);
                rec.status[j] = ok ? FreqStatus::surrogate_accepted : FreqStatus::surrogate_rejected;
            }
            ok_all = ok_all && ok;
        }
        evals += rec.true_evals;
        if (rec.unresolved) {
            ++n_unresolved;
            continue;
        }
        rec.accepted = ok_all;
        out.accepted[i] = ok_all ? 1 : 0;
        n_acc += ok_all ? 1 : 0;
        (rec.critical() ? n_crit : n_noncrit) += 1;
    }

    const std::size_t n_resolved = n - n_unresolved;
    if (n_crit + n_noncrit != n_resolved) throw NumericalError("hybrid: sample partition violated");
    if (n_resolved == 0) throw NumericalError("hybrid: every sample failed to evaluate");
    if (n_unresolved > 0) log::warn(std::to_string(n_unresolved) + " samples excluded as unresolved");
    out.estimate = make_estimate(n_acc, n_resolved, evals, n_crit);
    out.estimate.unresolved = n_unresolved;
    return out;
}

/// Per-sample record export: sample_id,final_flag,n_true_evals,n_critical_freqs
inline void write_records_csv(std::ostream& os, const std::vector<ClassificationRecord>& records) {
    os << "sample_id,final_flag,n_true_evals,n_critical_freqs\n";
    for (const auto& r : records)
        os << r.sample_id << ',' << (r.unresolved ? -1 : (r.accepted ? 1 : 0)) << ',' << r.true_evals << ','
           << r.n_critical() << '\n';
}

// ---------------------------------------------------------------------------
// Evaluators: a uniform "classify this sample set" handle for the optimizers
// ---------------------------------------------------------------------------

struct EvaluatedSet {
    YieldEstimate estimate;
    AcceptFlags accepted;
};

template <class E>
concept YieldEvaluator = requires(E& e, const SampleSet& s) {
    { e.evaluate(s) } -> std::same_as<EvaluatedSet>;
    { e.true_evals() } -> std::convertible_to<std::uint64_t>;
};

/// Plain MC on the true model.
template <QoiModel M>
class McEvaluator {
public:
    McEvaluator(const M& model, PerformanceSpec spec, FrequencyGrid grid) : classifier_(model, spec, grid) {}

    EvaluatedSet evaluate(const SampleSet& s) {
        McResult r = estimate_yield_mc(classifier_, s);
        total_ += r.estimate.true_evals;
        return {r.estimate, std::move(r.accepted)};
    }

    std::uint64_t true_evals() const { return total_; }

private:
    SafeDomainClassifier<M> classifier_;
    std::uint64_t total_ = 0;
};

/// GPR-Hybrid with a bank that persists across calls.
template <QoiModel M>
class HybridEvaluator {
public:
    HybridEvaluator(const M& model, PerformanceSpec spec, FrequencyGrid grid, HybridConfig cfg, GprSettings gpr)
        : model_(&model), spec_(spec), grid_(grid), cfg_(cfg), gpr_(gpr) {
        cfg_.validate();
    }

    /// Trains the bank on n_initial_train seeded draws from `dist`.
    void train(const TruncatedGaussian& dist, std::uint64_t seed) {
        const std::uint64_t before = model_->eval_count();
        bank_ = initial_training(*model_, dist, grid_, cfg_.n_initial_train, seed, gpr_, cfg_.refit_period);
        training_evals_ += model_->eval_count() - before;
        trained_ = true;
    }

    HybridResult run(const SampleSet& s) {
        if (!trained_) throw InvalidInput("HybridEvaluator: bank is not trained");
        HybridResult r = estimate_yield_hybrid(bank_, s, cfg_, *model_, spec_, grid_);
        estimation_evals_ += r.estimate.true_evals;
        return r;
    }

    EvaluatedSet evaluate(const SampleSet& s) {
        HybridResult r = run(s);
        return {r.estimate, std::move(r.accepted)};
    }

    std::uint64_t true_evals() const { return training_evals_ + estimation_evals_; }
    std::uint64_t training_evals() const { return training_evals_; }
    const SurrogateBank& bank() const { return bank_; }
    SurrogateBank& bank() { return bank_; }
    const HybridConfig& config() const { return cfg_; }

private:
    const M* model_;
    PerformanceSpec spec_;
    FrequencyGrid grid_;
    HybridConfig cfg_;
    GprSettings gpr_;
    SurrogateBank bank_;
    bool trained_ = false;
    std::uint64_t training_evals_ = 0;
    std::uint64_t estimation_evals_ = 0;
};

} // namespace yieldopt
