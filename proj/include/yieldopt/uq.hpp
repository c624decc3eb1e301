#pragma once

#include "yieldopt/errors.hpp"
#include "yieldopt/model.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace yieldopt {

/// Independent Gaussian coordinates, each truncated to [mean - lo_off, mean + hi_off].
/// The offsets travel with the mean.
class TruncatedGaussian {
public:
    TruncatedGaussian() = default;

    TruncatedGaussian(ParamVec mean, ParamVec std_dev, ParamVec lower_offset, ParamVec upper_offset)
        : mean_(std::move(mean)), std_(std::move(std_dev)), lo_off_(std::move(lower_offset)),
          hi_off_(std::move(upper_offset)) {
        validate();
    }

    static TruncatedGaussian symmetric(ParamVec mean, ParamVec std_dev, ParamVec offset) {
        ParamVec lo = offset;
        return {std::move(mean), std::move(std_dev), std::move(lo), std::move(offset)};
    }

    std::size_t dimension() const { return static_cast<std::size_t>(mean_.size()); }
    const ParamVec& mean() const { return mean_; }
    const ParamVec& std_dev() const { return std_; }
    ParamVec variances() const { return std_.array().square().matrix(); }
    const ParamVec& lower_offset() const { return lo_off_; }
    const ParamVec& upper_offset() const { return hi_off_; }
    ParamVec lower() const { return mean_ - lo_off_; }
    ParamVec upper() const { return mean_ + hi_off_; }

    TruncatedGaussian recentered(const ParamVec& new_mean) const {
        if (new_mean.size() != mean_.size()) throw InvalidInput("recentering mean has wrong dimension");
        TruncatedGaussian d = *this;
        d.mean_ = new_mean;
        d.validate();
        return d;
    }

    bool contains(const ParamVec& p) const {
        const ParamVec lo = lower(), hi = upper();
        for (Eigen::Index i = 0; i < p.size(); ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }

    /// Multivariate normal density; with `truncated`, the normalised truncated density.
    double pdf(const ParamVec& p, bool truncated = false) const {
        if (p.size() != mean_.size()) throw InvalidInput("pdf: dimension mismatch");
        if (truncated && !contains(p)) return 0.0;
        double log_density = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double u = (p[i] - mean_[i]) / std_[i];
            log_density += -0.5 * u * u - std::log(std_[i]) - 0.5 * std::log(2.0 * std::numbers::pi);
        }
        double density = std::exp(log_density);
        if (truncated) {
            for (Eigen::Index i = 0; i < p.size(); ++i)
                density /= std_normal_cdf(hi_off_[i] / std_[i]) - std_normal_cdf(-lo_off_[i] / std_[i]);
        }
        return density;
    }

private:
    void validate() const {
        const auto d = mean_.size();
        if (d == 0) throw InvalidInput("distribution needs at least one coordinate");
        if (std_.size() != d || lo_off_.size() != d || hi_off_.size() != d)
            throw InvalidInput("distribution vectors must share one dimension");
        if (!mean_.allFinite()) throw InvalidInput("distribution mean must be finite");
        for (Eigen::Index i = 0; i < d; ++i) {
            if (!(std_[i] > 0.0) || !std::isfinite(std_[i]))
                throw InvalidInput("standard deviations must be positive");
            if (!(lo_off_[i] > 0.0) || !(hi_off_[i] > 0.0))
                throw InvalidInput("truncation interval must have positive width on both sides of the mean");
        }
    }

    ParamVec mean_;
    ParamVec std_;
    ParamVec lo_off_;
    ParamVec hi_off_;
};

struct SampleSet {
    std::vector<ParamVec> points;
    std::uint64_t seed = 0;
    TruncatedGaussian dist;

    std::size_t size() const { return points.size(); }
};

/// Draws n i.i.d. points by per-coordinate rejection of standard normal draws.
/// Acceptance depends only on the standardized draw, so the same seed under a
/// moved mean yields the same offsets, and a size-n set is a prefix of any
/// larger set drawn with the same seed.
inline SampleSet sample(const TruncatedGaussian& dist, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidInput("sample size must be at least 1");
    const auto d = static_cast<Eigen::Index>(dist.dimension());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    SampleSet out{{}, seed, dist};
    out.points.reserve(n);
    const ParamVec& m = dist.mean();
    const ParamVec& s = dist.std_dev();
    const ParamVec& lo = dist.lower_offset();
    const ParamVec& hi = dist.upper_offset();
    for (std::size_t k = 0; k < n; ++k) {
        ParamVec p(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            double dev;
            do {
                dev = s[i] * normal(rng);
            } while (dev < -lo[i] || dev > hi[i]);
            p[i] = m[i] + dev;
        }
        out.points.push_back(std::move(p));
    }
    return out;
}

} // namespace yieldopt
