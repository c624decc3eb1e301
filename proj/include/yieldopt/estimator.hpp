#pragma once

// Plain Monte Carlo yield estimation and the MC estimators of the yield's
// gradient and Hessian with respect to the distribution mean.

#include "yieldopt/errors.hpp"
#include "yieldopt/model.hpp"
#include "yieldopt/uq.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace yieldopt {

using AcceptFlags = std::vector<std::uint8_t>;

struct YieldEstimate {
    double value = 0.0;
    double sigma = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t true_evals = 0;
    std::size_t critical_count = 0;
    std::size_t unresolved = 0;
};

/// sqrt(v (1 - v) / n); never exceeds 0.5 / sqrt(n).
inline double mc_sigma(double value, std::size_t n) {
    if (n == 0) throw InvalidInput("mc_sigma: n must be positive");
    const double v = value * (1.0 - value);
    return std::sqrt((v > 0.0 ? v : 0.0) / static_cast<double>(n));
}

inline YieldEstimate make_estimate(std::size_t accepted, std::size_t n, std::uint64_t true_evals,
                                   std::size_t critical_count = 0) {
    if (n == 0) throw InvalidInput("estimate over an empty sample set");
    if (accepted > n) throw InvalidInput("accepted count exceeds sample count");
    const double value = static_cast<double>(accepted) / static_cast<double>(n);
    return {value, mc_sigma(value, n), n, true_evals, critical_count, 0};
}

struct Classification {
    bool accepted = true;
    std::size_t evaluations = 0;
};

/// accept(p) iff Q_w(p) <= c at every grid frequency. Frequencies are swept in
/// ascending order; with short circuit the sweep stops at the first violation.
template <QoiModel M>
class SafeDomainClassifier {
public:
    SafeDomainClassifier(const M& model, PerformanceSpec spec, FrequencyGrid grid)
        : model_(&model), spec_(spec), grid_(grid), omegas_(grid.omegas()) {
        spec_.validate();
        grid_.validate();
    }

    Classification classify(const ParamVec& p, bool short_circuit = true) const {
        Classification out;
        for (double w : omegas_) {
            const double q = eval_qoi(*model_, p, w);
            ++out.evaluations;
            if (!spec_.satisfied(q)) {
                out.accepted = false;
                if (short_circuit) break;
            }
        }
        return out;
    }

    const M& model() const { return *model_; }
    const PerformanceSpec& spec() const { return spec_; }
    const FrequencyGrid& grid() const { return grid_; }
    const std::vector<double>& omegas() const { return omegas_; }

private:
    const M* model_;
    PerformanceSpec spec_;
    FrequencyGrid grid_;
    std::vector<double> omegas_;
};

struct McResult {
    YieldEstimate estimate;
    AcceptFlags accepted;
};

template <QoiModel M>
McResult estimate_yield_mc(const SafeDomainClassifier<M>& classifier, const SampleSet& samples,
                           bool short_circuit = true) {
    if (samples.size() == 0) throw InvalidInput("estimate_yield_mc: empty sample set");
    McResult out;
    out.accepted.resize(samples.size());
    std::size_t n_acc = 0;
    std::uint64_t evals = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Classification c = classifier.classify(samples.points[i], short_circuit);
        out.accepted[i] = c.accepted ? 1 : 0;
        n_acc += c.accepted ? 1 : 0;
        evals += c.evaluations;
    }
    out.estimate = make_estimate(n_acc, samples.size(), evals);
    return out;
}

namespace detail {
inline void check_flags(const SampleSet& samples, std::span<const std::uint8_t> flags,
                        const TruncatedGaussian& dist) {
    if (flags.size() != samples.size()) throw InvalidInput("accept flags do not match the sample set");
    if (samples.size() == 0) throw InvalidInput("empty sample set");
    if (dist.dimension() != static_cast<std::size_t>(samples.points.front().size()))
        throw InvalidInput("distribution dimension does not match the samples");
}
} // namespace detail

/// (1/n) sum_i 1_S(p_i) Sigma^{-1} (p_i - mean), the untruncated-Gaussian score form.
inline ParamVec yield_gradient_mc(const SampleSet& samples, std::span<const std::uint8_t> flags,
                                  const TruncatedGaussian& dist) {
    detail::check_flags(samples, flags, dist);
    const ParamVec inv_var = dist.variances().cwiseInverse();
    ParamVec g = ParamVec::Zero(static_cast<Eigen::Index>(dist.dimension()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!flags[i]) continue;
        g += (samples.points[i] - dist.mean()).cwiseProduct(inv_var);
    }
    return g / static_cast<double>(samples.size());
}

/// (1/n) sum_i 1_S(p_i) [Sigma^{-1} d d^T Sigma^{-1} - Sigma^{-1}], d = p_i - mean.
inline Eigen::MatrixXd yield_hessian_mc(const SampleSet& samples, std::span<const std::uint8_t> flags,
                                        const TruncatedGaussian& dist) {
    detail::check_flags(samples, flags, dist);
    const auto d = static_cast<Eigen::Index>(dist.dimension());
    const ParamVec inv_var = dist.variances().cwiseInverse();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    std::size_t n_acc = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!flags[i]) continue;
        const ParamVec v = (samples.points[i] - dist.mean()).cwiseProduct(inv_var);
        h.noalias() += v * v.transpose();
        ++n_acc;
    }
    h.diagonal() -= static_cast<double>(n_acc) * inv_var;
    return h / static_cast<double>(samples.size());
}

} // namespace yieldopt
