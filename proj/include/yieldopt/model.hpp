#pragma once

// Evaluatable frequency-domain device models.
//
// A model maps (parameter point, angular frequency) to a complex response and
// declares how that response becomes the scalar quantity of interest that is
// checked against the performance specification. Every response solve bumps an
// atomic evaluation counter; that counter is the cost unit used throughout.

#include "yieldopt/errors.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace yieldopt {

using ParamVec = Eigen::VectorXd;
using Complex = std::complex<double>;

namespace phys {
inline constexpr double c0 = 299792458.0;
inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);
} // namespace phys

/// dB value standing in for 20*log10(0): finite, and below every threshold.
inline constexpr double deep_pass_db = std::numeric_limits<double>::lowest();

inline double std_normal_pdf(double u) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

inline double std_normal_cdf(double u) {
    return 0.5 * std::erfc(-u / std::numbers::sqrt2);
}

/// Equidistant angular-frequency grid including both endpoints.
struct FrequencyGrid {
    double omega_lo = 2.0 * std::numbers::pi * 6.5e9;
    double omega_hi = 2.0 * std::numbers::pi * 7.5e9;
    std::size_t n_points = 11;

    static FrequencyGrid from_ghz(double f_lo_ghz, double f_hi_ghz, std::size_t n) {
        FrequencyGrid g{2.0 * std::numbers::pi * f_lo_ghz * 1e9,
                        2.0 * std::numbers::pi * f_hi_ghz * 1e9, n};
        g.validate();
        return g;
    }

    void validate() const {
        if (n_points < 1) throw InvalidInput("frequency grid needs at least one point");
        if (!(std::isfinite(omega_lo) && std::isfinite(omega_hi)) || !(omega_lo < omega_hi))
            throw InvalidInput("frequency grid requires omega_lo < omega_hi");
    }

    std::size_t size() const { return n_points; }

    double omega(std::size_t i) const {
        if (n_points == 1) return omega_lo;
        const double t = static_cast<double>(i) / static_cast<double>(n_points - 1);
        return i + 1 == n_points ? omega_hi : omega_lo + t * (omega_hi - omega_lo);
    }

    std::vector<double> omegas() const {
        std::vector<double> out(n_points);
        for (std::size_t i = 0; i < n_points; ++i) out[i] = omega(i);
        return out;
    }
};

/// Upper-bound specification Q <= c; the boundary counts as satisfied.
struct PerformanceSpec {
    double threshold_c = -24.0;

    bool satisfied(double q) const { return q <= threshold_c; }

    void validate() const {
        if (!std::isfinite(threshold_c)) throw InvalidInput("specification threshold must be finite");
    }
};

/// How a complex response maps to the scalar quantity of interest.
enum class QoiKind {
    magnitude_db, ///< 20*log10|S|
    real_part,    ///< Re(S), used by scalar test models
};

inline double qoi_from_response(Complex s, QoiKind kind) {
    if (kind == QoiKind::real_part) return s.real();
    const double mag = std::abs(s);
    return mag == 0.0 ? deep_pass_db : 20.0 * std::log10(mag);
}

/// Thread-safe evaluation counter; copies take a snapshot of the count.
class EvalCounter {
public:
    EvalCounter() = default;
    EvalCounter(const EvalCounter& o) : n_(o.get()) {}
    EvalCounter& operator=(const EvalCounter& o) {
        n_.store(o.get(), std::memory_order_relaxed);
        return *this;
    }

    void bump() const { n_.fetch_add(1, std::memory_order_relaxed); }
    std::uint64_t get() const { return n_.load(std::memory_order_relaxed); }
    void reset() { n_.store(0, std::memory_order_relaxed); }

private:
    mutable std::atomic<std::uint64_t> n_{0};
};

template <class M>
concept QoiModel = requires(const M& m, const ParamVec& p, double omega) {
    { m.response(p, omega) } -> std::convertible_to<Complex>;
    { m.qoi_kind() } -> std::same_as<QoiKind>;
    { m.dimension() } -> std::convertible_to<std::size_t>;
    { m.eval_count() } -> std::convertible_to<std::uint64_t>;
};

template <QoiModel M>
double eval_qoi(const M& model, const ParamVec& p, double omega) {
    return qoi_from_response(model.response(p, omega), model.qoi_kind());
}

// ---------------------------------------------------------------------------
// Rectangular waveguide, TE10 transfer-matrix cascade
// ---------------------------------------------------------------------------

/// Homogeneously filled waveguide section.
struct Section {
    double length_m = 0.0;
    double eps_r = 1.0;
    double mu_r = 1.0;
};

struct TwoPortS {
    Complex s11;
    Complex s21;
};

namespace detail {

// Branch with Re(kz) >= 0 and Im(kz) <= 0 (decaying under exp(+j w t)).
inline Complex te10_kz(double omega, double eps_r, double mu_r, double width_m) {
    const double kc = std::numbers::pi / width_m;
    const double k2 = omega * omega * phys::mu0 * mu_r * phys::eps0 * eps_r - kc * kc;
    return k2 >= 0.0 ? Complex(std::sqrt(k2), 0.0) : Complex(0.0, -std::sqrt(-k2));
}

inline Complex sinc(Complex x) {
    return std::abs(x) < 1e-8 ? Complex(1.0) - x * x / 6.0 : std::sin(x) / x;
}

} // namespace detail

/// Cascades the sections between two semi-infinite vacuum ports (port 1 on the
/// side of sections.front()). Lossless materials only.
inline TwoPortS cascade_sparams(std::span<const Section> sections, double omega, double width_m) {
    using namespace std::complex_literals;
    const Complex k0 = detail::te10_kz(omega, 1.0, 1.0, width_m);
    if (k0.real() <= 0.0) throw InvalidInput("operating frequency is below the TE10 cutoff of the port");
    const Complex z0 = omega * phys::mu0 / k0;

    Complex a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    for (const Section& s : sections) {
        const Complex kz = detail::te10_kz(omega, s.eps_r, s.mu_r, width_m);
        const double wmu = omega * phys::mu0 * s.mu_r;
        const Complex kl = kz * s.length_m;
        const Complex cs = std::cos(kl);
        // Z = w mu / kz; written via sinc so kz -> 0 stays finite.
        const Complex sb = 1.0i * wmu * s.length_m * detail::sinc(kl);
        const Complex sc = 1.0i * std::sin(kl) * kz / wmu;
        const Complex na = a * cs + b * sc;
        const Complex nb = a * sb + b * cs;
        const Complex nc = c * cs + d * sc;
        const Complex nd = c * sb + d * cs;
        a = na, b = nb, c = nc, d = nd;
    }
    const Complex den = a + b / z0 + c * z0 + d;
    return {(a + b / z0 - c * z0 - d) / den, 2.0 / den};
}

/// Two identical-length magneto-dielectric slabs separated by a vacuum spacer:
///   slab A: length p1 [mm], eps_r = 1+p3, mu_r = 1+p4
///   spacer: length p2 [mm], vacuum
///   slab B: length p1 [mm], eps_r = 1+p4, mu_r = 1+p3 (material roles swapped)
/// Total stack length is 2*p1 + p2.
class WaveguideModel {
public:
    explicit WaveguideModel(double width_a_mm = 80.0) : width_m_(width_a_mm * 1e-3) {
        if (!(width_a_mm > 0.0) || !std::isfinite(width_a_mm))
            throw InvalidInput("waveguide width must be positive");
    }

    static constexpr std::size_t dim = 4;

    std::size_t dimension() const { return dim; }
    QoiKind qoi_kind() const { return QoiKind::magnitude_db; }
    double width_a_mm() const { return width_m_ * 1e3; }
    double cutoff_omega() const { return phys::c0 * std::numbers::pi / width_m_; }

    std::vector<Section> sections(const ParamVec& p) const {
        check_params(p);
        const double la = p[0] * 1e-3;
        const double lg = p[1] * 1e-3;
        return {{la, 1.0 + p[2], 1.0 + p[3]}, {lg, 1.0, 1.0}, {la, 1.0 + p[3], 1.0 + p[2]}};
    }

    TwoPortS scattering(const ParamVec& p, double omega) const {
        const auto secs = sections(p);
        TwoPortS s = cascade_sparams(secs, omega, width_m_);
        counter_.bump();
        return s;
    }

    Complex response(const ParamVec& p, double omega) const { return scattering(p, omega).s11; }

    std::uint64_t eval_count() const { return counter_.get(); }
    void reset_count() { counter_.reset(); }

    static void check_params(const ParamVec& p) {
        if (p.size() != static_cast<Eigen::Index>(dim))
            throw InvalidInput("waveguide model expects 4 parameters");
        if (!p.allFinite()) throw InvalidInput("parameters must be finite");
        if (p[0] < 0.0 || p[1] < 0.0) throw InvalidInput("section lengths must be non-negative");
        if (1.0 + p[2] <= 0.0 || 1.0 + p[3] <= 0.0)
            throw InvalidInput("non-physical material: 1+p3 and 1+p4 must be positive");
    }

private:
    double width_m_;
    EvalCounter counter_;
};

/// Q(p) = p on a single coordinate, frequency independent.
class ToyLinearModel {
public:
    std::size_t dimension() const { return 1; }
    QoiKind qoi_kind() const { return QoiKind::real_part; }

    Complex response(const ParamVec& p, double /*omega*/) const {
        if (p.size() != 1 || !std::isfinite(p[0])) throw InvalidInput("toy model expects one finite parameter");
        counter_.bump();
        return {p[0], 0.0};
    }

    std::uint64_t eval_count() const { return counter_.get(); }
    void reset_count() { counter_.reset(); }

private:
    EvalCounter counter_;
};

struct ToyYield {
    double yield;
    double gradient;
    double hessian;
};

/// Yield of Q(p) = p <= c under p ~ N(p_mean, sigma^2) and its derivatives in p_mean.
inline ToyYield toy_yield_closed_form(double p_mean, double sigma, double c) {
    if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
    const double u = (c - p_mean) / sigma;
    const double phi = std_normal_pdf(u);
    return {std_normal_cdf(u), -phi / sigma, -u * phi / (sigma * sigma)};
}

} // namespace yieldopt
