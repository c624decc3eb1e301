#pragma once

// Gaussian process regression with a squared-exponential kernel
//     k(p, p') = zeta * exp(-|p - p'|^2 / (2 l^2)),
// a constant prior mean equal to the mean of the training targets and a fixed
// noise term alpha on the diagonal. Inference is exact (Cholesky of K + alpha I);
// new training points extend the factor by bordering instead of refactorizing.

#include "yieldopt/errors.hpp"
#include "yieldopt/model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace yieldopt {

struct KernelParams {
    double zeta = 0.1;   ///< signal variance
    double length = 1.0; ///< isotropic length scale

    bool operator==(const KernelParams&) const = default;
};

struct KernelBounds {
    double zeta_lo = 1e-5;
    double zeta_hi = 1e-1;
    double length_lo = 1e-5;
    double length_hi = 1e5;

    bool operator==(const KernelBounds&) const = default;
};

struct GprSettings {
    double alpha = 1e-5;
    KernelParams initial{};
    KernelBounds bounds{};
    int restarts = 2;         ///< extra seeded starts besides `initial`, first fit
    int refit_restarts = 0;   ///< same, periodic refits
    std::uint64_t restart_seed = 0x5eed;
    int max_iter = 100;

    bool operator==(const GprSettings&) const = default;
};

inline double kernel_eval(const KernelParams& k, const ParamVec& p, const ParamVec& q) {
    if (p.size() != q.size()) throw InvalidInput("kernel_eval: dimension mismatch");
    return k.zeta * std::exp(-(p - q).squaredNorm() / (2.0 * k.length * k.length));
}

class GprModel {
public:
    struct Prediction {
        double mean;
        double std;
    };

    GprModel() = default;

    GprModel(KernelParams kernel, double alpha) : kernel_(kernel), alpha_(alpha) {
        if (!(alpha > 0.0)) throw InvalidInput("GPR noise alpha must be positive");
        if (!(kernel.zeta > 0.0) || !(kernel.length > 0.0))
            throw InvalidInput("kernel hyperparameters must be positive");
    }

    static GprModel fit(const std::vector<ParamVec>& x, const std::vector<double>& y, KernelParams kernel,
                        double alpha) {
        if (x.empty()) throw InvalidInput("GPR fit needs at least one training point");
        if (x.size() != y.size()) throw InvalidInput("GPR fit: inputs and targets differ in length");
        GprModel m(kernel, alpha);
        const auto d = x.front().size();
        m.x_.resize(d, static_cast<Eigen::Index>(x.size()));
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i].size() != d) throw InvalidInput("GPR fit: inconsistent input dimensions");
            if (!x[i].allFinite() || !std::isfinite(y[i])) throw InvalidInput("GPR fit: non-finite data");
            for (std::size_t j = 0; j < i; ++j)
                if ((x[i] - x[j]).norm() < duplicate_tol)
                    throw InvalidInput("GPR fit: duplicate training inputs");
            m.x_.col(static_cast<Eigen::Index>(i)) = x[i];
        }
        m.y_ = y;
        m.n_ = x.size();
        m.refactorize();
        return m;
    }

    std::size_t size() const { return n_; }
    std::size_t input_dim() const { return static_cast<std::size_t>(x_.rows()); }
    const KernelParams& kernel() const { return kernel_; }
    double alpha() const { return alpha_; }
    double prior_mean() const { return m_; }
    const std::vector<double>& targets() const { return y_; }
    ParamVec input(std::size_t i) const { return x_.col(static_cast<Eigen::Index>(i)); }

    std::vector<ParamVec> inputs() const {
        std::vector<ParamVec> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = input(i);
        return out;
    }

    Prediction predict(const ParamVec& p) const {
        if (n_ == 0) return {0.0, std::sqrt(kernel_.zeta)};
        const Eigen::VectorXd k = kvec(p);
        const double mean = m_ + k.dot(w_.head(static_cast<Eigen::Index>(n_)));
        const Eigen::VectorXd v = lower().solve(k);
        const double var = kernel_.zeta - v.squaredNorm();
        return {mean, var > 0.0 ? std::sqrt(var) : 0.0};
    }

    /// Column-wise predictions for the inputs in `pts` (d x m).
    void predict_batch(const Eigen::MatrixXd& pts, Eigen::VectorXd& mean, Eigen::VectorXd& std) const {
        const Eigen::Index m = pts.cols();
        mean.resize(m);
        std.resize(m);
        if (n_ == 0) {
            mean.setZero();
            std.setConstant(std::sqrt(kernel_.zeta));
            return;
        }
        if (pts.rows() != x_.rows()) throw InvalidInput("GPR predict: dimension mismatch");
        const auto n = static_cast<Eigen::Index>(n_);
        const double s = -0.5 / (kernel_.length * kernel_.length);
        const auto xs = x_.leftCols(n);
        // |x - p|^2 = |x|^2 + |p|^2 - 2 x.p
        Eigen::MatrixXd kmat = -2.0 * (xs.transpose() * pts);
        kmat.colwise() += xs.colwise().squaredNorm().transpose();
        kmat.rowwise() += pts.colwise().squaredNorm();
        kmat = kernel_.zeta * (kmat.array().max(0.0) * s).exp();
        mean = (kmat.transpose() * w_.head(n)).array() + m_;
        lower().solveInPlace(kmat);
        const Eigen::ArrayXd var = kernel_.zeta - kmat.colwise().squaredNorm().transpose().array();
        std = var.max(0.0).sqrt().matrix();
    }

    double predict_mean(const ParamVec& p) const {
        if (n_ == 0) return 0.0;
        return m_ + kvec(p).dot(w_.head(static_cast<Eigen::Index>(n_)));
    }

    double log_marginal_likelihood() const {
        if (n_ == 0) return 0.0;
        const auto n = static_cast<Eigen::Index>(n_);
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(l_(i, i));
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) r[i] = y_[static_cast<std::size_t>(i)] - m_;
        return -0.5 * r.dot(w_.head(n)) - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    }

    /// Appends one training point. Near-duplicates are skipped (returns false).
    bool update(const ParamVec& p, double y) {
        if (!p.allFinite() || !std::isfinite(y)) throw InvalidInput("GPR update: non-finite data");
        if (n_ == 0) {
            x_.resize(p.size(), 0);
        } else if (p.size() != x_.rows()) {
            throw InvalidInput("GPR update: dimension mismatch");
        }
        for (std::size_t j = 0; j < n_; ++j) {
            if ((x_.col(static_cast<Eigen::Index>(j)) - p).norm() < duplicate_tol) {
                log::info("GPR update: skipped near-duplicate training input");
                return false;
            }
        }
        reserve(n_ + 1);
        const auto n = static_cast<Eigen::Index>(n_);
        const double kpp = kernel_.zeta + alpha_;
        if (n_ == 0) {
            l_(0, 0) = std::sqrt(kpp);
        } else {
            const Eigen::VectorXd b = lower().solve(kvec(p));
            const double d2 = kpp - b.squaredNorm();
            if (!(d2 > 0.0)) throw NumericalError("GPR update: bordered Cholesky lost positive definiteness");
            l_.block(n, 0, 1, n) = b.transpose();
            l_(n, n) = std::sqrt(d2);
        }
        x_.col(n) = p;
        y_.push_back(y);
        ++n_;
        refresh_weights();
        return true;
    }

    /// Replaces the hyperparameters and refactorizes from scratch.
    void set_kernel(KernelParams k) {
        if (!(k.zeta > 0.0) || !(k.length > 0.0)) throw InvalidInput("kernel hyperparameters must be positive");
        kernel_ = k;
        if (n_ > 0) refactorize();
    }

    static constexpr double duplicate_tol = 1e-12;

private:
    using LowerView = Eigen::TriangularView<const Eigen::Block<const Eigen::MatrixXd>, Eigen::Lower>;

    LowerView lower() const {
        const auto n = static_cast<Eigen::Index>(n_);
        return l_.topLeftCorner(n, n).triangularView<Eigen::Lower>();
    }

    Eigen::VectorXd kvec(const ParamVec& p) const {
        if (p.size() != x_.rows()) throw InvalidInput("GPR predict: dimension mismatch");
        const auto n = static_cast<Eigen::Index>(n_);
        const double s = -0.5 / (kernel_.length * kernel_.length);
        return kernel_.zeta * ((x_.leftCols(n).colwise() - p).colwise().squaredNorm().array() * s).exp().matrix().transpose();
    }

    void reserve(std::size_t n) {
        const auto cap = static_cast<std::size_t>(l_.rows());
        if (n <= cap) return;
        const auto new_cap = static_cast<Eigen::Index>(std::max<std::size_t>(n, std::max<std::size_t>(16, 2 * cap)));
        l_.conservativeResize(new_cap, new_cap);
        x_.conservativeResize(x_.rows(), new_cap);
        w_.conservativeResize(new_cap);
    }

    void refactorize() {
        const auto n = static_cast<Eigen::Index>(n_);
        reserve(n_);
        Eigen::MatrixXd a(n, n);
        const double s = -0.5 / (kernel_.length * kernel_.length);
        for (Eigen::Index j = 0; j < n; ++j) {
            a(j, j) = kernel_.zeta + alpha_;
            for (Eigen::Index i = j + 1; i < n; ++i) {
                const double v = kernel_.zeta * std::exp(s * (x_.col(i) - x_.col(j)).squaredNorm());
                a(i, j) = v;
                a(j, i) = v;
            }
        }
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success) throw NumericalError("GPR fit: K + alpha I is not positive definite");
        l_.topLeftCorner(n, n) = llt.matrixL();
        refresh_weights();
    }

    void refresh_weights() {
        const auto n = static_cast<Eigen::Index>(n_);
        double sum = 0.0;
        for (double v : y_) sum += v;
        m_ = sum / static_cast<double>(n_);
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) r[i] = y_[static_cast<std::size_t>(i)] - m_;
        const LowerView lv = lower();
        lv.solveInPlace(r);
        lv.transpose().solveInPlace(r);
        w_.head(n) = r;
    }

    KernelParams kernel_{};
    double alpha_ = 1e-5;
    std::size_t n_ = 0;
    Eigen::MatrixXd x_;      // d x capacity, one column per input
    std::vector<double> y_;
    Eigen::MatrixXd l_;      // capacity x capacity, lower factor in the top-left n x n block
    Eigen::VectorXd w_;      // (K + alpha I)^{-1} (y - m)
    double m_ = 0.0;
};

// ---------------------------------------------------------------------------
// Hyperparameter optimization
// ---------------------------------------------------------------------------

/// Log marginal likelihood and its gradient in theta = (log zeta, log l) for a
/// fixed training set. Pairwise squared distances are computed once.
class LmlObjective {
public:
    struct Value {
        double lml;
        std::array<double, 2> grad;
        bool ok;
    };

    LmlObjective(const std::vector<ParamVec>& x, const std::vector<double>& y, double alpha)
        : alpha_(alpha), n_(static_cast<Eigen::Index>(x.size())), r_(n_) {
        if (x.empty() || x.size() != y.size()) throw InvalidInput("LmlObjective: bad training data");
        d2_.resize(n_, n_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            d2_(j, j) = 0.0;
            for (Eigen::Index i = j + 1; i < n_; ++i) {
                const double v = (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]).squaredNorm();
                d2_(i, j) = v;
                d2_(j, i) = v;
            }
        }
        double sum = 0.0;
        for (double v : y) sum += v;
        const double m = sum / static_cast<double>(y.size());
        for (Eigen::Index i = 0; i < n_; ++i) r_[i] = y[static_cast<std::size_t>(i)] - m;
    }

    Value operator()(double log_zeta, double log_length) const {
        const double zeta = std::exp(log_zeta);
        const double len = std::exp(log_length);
        const Eigen::MatrixXd kern = zeta * (d2_.array() * (-0.5 / (len * len))).exp().matrix();
        Eigen::MatrixXd a = kern;
        a.diagonal().array() += alpha_;
        const Value fail{-std::numeric_limits<double>::infinity(), {0.0, 0.0}, false};

        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success) return fail;
        const Eigen::VectorXd w = llt.solve(r_);
        const auto& lf = llt.matrixLLT();
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) logdet += std::log(lf(i, i));
        const Eigen::MatrixXd ainv = llt.solve(Eigen::MatrixXd::Identity(n_, n_));
        auto inv_dot = [&](const Eigen::MatrixXd& m) { return (ainv.array() * m.array()).sum(); };
        const double lml = -0.5 * r_.dot(w) - logdet - 0.5 * static_cast<double>(n_) * std::log(2.0 * std::numbers::pi);
        if (!std::isfinite(lml)) return fail;

        // dLML/dtheta = 0.5 (w^T dA w - tr(A^{-1} dA)), dA = K (log zeta) or K .* D2 / l^2 (log l)
        const Eigen::MatrixXd kd = kern.cwiseProduct(d2_);
        const double g_zeta = 0.5 * (w.dot(kern * w) - inv_dot(kern));
        const double g_len = 0.5 * (w.dot(kd * w) - inv_dot(kd)) / (len * len);
        return {lml, {g_zeta, g_len}, true};
    }

private:
    double alpha_;
    Eigen::Index n_;
    Eigen::MatrixXd d2_;
    Eigen::VectorXd r_;
};

struct HyperoptResult {
    KernelParams kernel;
    double lml;
    bool converged;
    int evaluations;
};

namespace detail {

// Projected BFGS on a box, minimizing f = -LML over theta = (log zeta, log l).
inline HyperoptResult bounded_bfgs(const LmlObjective& obj, std::array<double, 2> x, const KernelBounds& b,
                                   int max_iter) {
    const std::array<double, 2> lo{std::log(b.zeta_lo), std::log(b.length_lo)};
    const std::array<double, 2> hi{std::log(b.zeta_hi), std::log(b.length_hi)};
    auto clamp = [&](std::array<double, 2> v) {
        for (int i = 0; i < 2; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
        return v;
    };
    x = clamp(x);
    int evals = 1;
    auto val = obj(x[0], x[1]);
    if (!val.ok) return {{std::exp(x[0]), std::exp(x[1])}, val.lml, false, evals};
    double f = -val.lml;
    std::array<double, 2> g{-val.grad[0], -val.grad[1]};
    Eigen::Matrix2d h = Eigen::Matrix2d::Identity();
    bool converged = false;

    for (int it = 0; it < max_iter; ++it) {
        std::array<bool, 2> free{};
        double pg = 0.0;
        for (int i = 0; i < 2; ++i) {
            free[i] = !((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0));
            if (free[i]) pg = std::max(pg, std::abs(g[i]));
        }
        if (pg < 1e-5) {
            converged = true;
            break;
        }
        Eigen::Vector2d gv(free[0] ? g[0] : 0.0, free[1] ? g[1] : 0.0);
        Eigen::Vector2d d = -h * gv;
        for (int i = 0; i < 2; ++i)
            if (!free[i]) d[i] = 0.0;
        if (gv.dot(d) >= 0.0) {
            h.setIdentity();
            d = -gv;
        }
        // keep steps in log-space bounded
        const double dn = d.lpNorm<Eigen::Infinity>();
        if (dn > 5.0) d *= 5.0 / dn;

        double t = 1.0;
        bool accepted = false;
        std::array<double, 2> xn{};
        LmlObjective::Value vn{};
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
            xn = clamp({x[0] + t * d[0], x[1] + t * d[1]});
            const double decrease = g[0] * (xn[0] - x[0]) + g[1] * (xn[1] - x[1]);
            if (xn == x) break;
            vn = obj(xn[0], xn[1]);
            ++evals;
            if (vn.ok && -vn.lml <= f + 1e-4 * decrease) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            converged = true; // no further decrease along the projected path
            break;
        }
        const double fn = -vn.lml;
        const std::array<double, 2> gn{-vn.grad[0], -vn.grad[1]};
        const Eigen::Vector2d s(xn[0] - x[0], xn[1] - x[1]);
        const Eigen::Vector2d yv(gn[0] - g[0], gn[1] - g[1]);
        const double sy = s.dot(yv);
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            const Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity();
            h = (i2 - rho * s * yv.transpose()) * h * (i2 - rho * yv * s.transpose()) + rho * s * s.transpose();
        }
        const double rel = std::abs(f - fn) / std::max({std::abs(f), std::abs(fn), 1.0});
        x = xn;
        f = fn;
        g = gn;
        if (rel < 2.2e-9) {
            converged = true;
            break;
        }
    }
    return {{std::exp(x[0]), std::exp(x[1])}, -f, converged, evals};
}

} // namespace detail

/// Maximizes the log marginal likelihood over (zeta, l) within bounds, starting
/// from `start` plus `restarts` log-uniform seeded starts. Returns the best point
/// evaluated, never worse than `start`.
inline HyperoptResult optimize_hyperparameters(const std::vector<ParamVec>& x, const std::vector<double>& y,
                                               double alpha, KernelParams start, const KernelBounds& bounds,
                                               int restarts, std::uint64_t seed, int max_iter = 100) {
    const LmlObjective obj(x, y, alpha);
    std::vector<std::array<double, 2>> starts{{std::log(start.zeta), std::log(start.length)}};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uz(std::log(bounds.zeta_lo), std::log(bounds.zeta_hi));
    std::uniform_real_distribution<double> ul(std::log(bounds.length_lo), std::log(bounds.length_hi));
    for (int r = 0; r < restarts; ++r) {
        const double a = uz(rng);
        const double b = ul(rng);
        starts.push_back({a, b});
    }
    HyperoptResult best{start, -std::numeric_limits<double>::infinity(), false, 0};
    int total = 0;
    for (const auto& s : starts) {
        HyperoptResult r = detail::bounded_bfgs(obj, s, bounds, max_iter);
        // exp(log(hi)) can land one ulp outside
        r.kernel.zeta = std::clamp(r.kernel.zeta, bounds.zeta_lo, bounds.zeta_hi);
        r.kernel.length = std::clamp(r.kernel.length, bounds.length_lo, bounds.length_hi);
        total += r.evaluations;
        if (r.lml > best.lml) best = r;
    }
    best.evaluations = total;
    if (!best.converged) log::info("GPR hyperparameter search did not converge; keeping best point");
    return best;
}

/// Re-optimizes the model's hyperparameters in place. Always starts from
/// s.initial: a warm start can sit on the flat small-l plateau forever.
inline HyperoptResult optimize_hyperparameters(GprModel& model, const GprSettings& s, bool refit = false) {
    if (model.size() == 0) throw InvalidInput("optimize_hyperparameters: model has no training data");
    HyperoptResult r = optimize_hyperparameters(model.inputs(), model.targets(), model.alpha(), s.initial, s.bounds,
                                                refit ? s.refit_restarts : s.restarts, s.restart_seed, s.max_iter);
    model.set_kernel(r.kernel);
    return r;
}

// ---------------------------------------------------------------------------
// Snapshot format
// ---------------------------------------------------------------------------
//
//   yieldopt-gpr 1
//   dim <d>
//   n <n>
//   alpha <alpha>
//   zeta <zeta>
//   length <l>
//   <x_1> ... <x_d> <y>        (n lines)
//
// Numbers use %.17g so a snapshot reloads to bit-identical data.

inline void write_snapshot(std::ostream& os, const GprModel& m) {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "yieldopt-gpr 1\n"
       << "dim " << m.input_dim() << '\n'
       << "n " << m.size() << '\n'
       << "alpha " << num(m.alpha()) << '\n'
       << "zeta " << num(m.kernel().zeta) << '\n'
       << "length " << num(m.kernel().length) << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        const ParamVec x = m.input(i);
        for (Eigen::Index k = 0; k < x.size(); ++k) os << num(x[k]) << ' ';
        os << num(m.targets()[i]) << '\n';
    }
}

inline GprModel read_snapshot(std::istream& is) {
    auto expect = [&](const char* key) {
        std::string tok;
        if (!(is >> tok) || tok != key) throw InvalidInput(std::string("GPR snapshot: expected '") + key + "'");
    };
    expect("yieldopt-gpr");
    int version = 0;
    if (!(is >> version) || version != 1) throw InvalidInput("GPR snapshot: unsupported version");
    std::size_t dim = 0, n = 0;
    double alpha = 0.0;
    KernelParams k;
    expect("dim");
    is >> dim;
    expect("n");
    is >> n;
    expect("alpha");
    is >> alpha;
    expect("zeta");
    is >> k.zeta;
    expect("length");
    is >> k.length;
    if (!is || dim == 0) throw InvalidInput("GPR snapshot: malformed header");
    std::vector<ParamVec> x(n, ParamVec(static_cast<Eigen::Index>(dim)));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) is >> x[i][static_cast<Eigen::Index>(j)];
        is >> y[i];
    }
    if (!is) throw InvalidInput("GPR snapshot: truncated data");
    if (n == 0) return GprModel(k, alpha);
    return GprModel::fit(x, y, k, alpha);
}

// ---------------------------------------------------------------------------
// Surrogate bank: one (Re, Im) model pair per frequency
// ---------------------------------------------------------------------------

class SurrogateBank {
public:
    struct Pair {
        GprModel re;
        GprModel im;
        std::size_t since_refit = 0;
        std::uint64_t version = 0;
    };

    struct ComplexPrediction {
        Complex mean;
        double std_re;
        double std_im;
    };

    SurrogateBank() = default;
    SurrogateBank(std::size_t n_freq, GprSettings settings, std::size_t refit_period = 10)
        : pairs_(n_freq), settings_(settings), refit_period_(refit_period) {
        for (auto& p : pairs_) {
            p.re = GprModel(settings.initial, settings.alpha);
            p.im = GprModel(settings.initial, settings.alpha);
        }
    }

    std::size_t n_freq() const { return pairs_.size(); }
    std::size_t n_models() const { return 2 * pairs_.size(); }
    const Pair& pair(std::size_t j) const { return pairs_.at(j); }
    const GprSettings& settings() const { return settings_; }
    std::size_t refit_period() const { return refit_period_; }
    std::uint64_t version(std::size_t j) const { return pairs_[j].version; }

    /// Fits every pair on the same inputs; responses[i][j] is the response of
    /// point i at frequency j. Hyperparameters are optimized from the fixed start.
    void train(const std::vector<ParamVec>& x, const std::vector<std::vector<Complex>>& responses) {
        if (x.empty() || responses.size() != x.size()) throw InvalidInput("bank training: bad data");
        for (std::size_t j = 0; j < pairs_.size(); ++j) {
            std::vector<double> re(x.size()), im(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (responses[i].size() != pairs_.size()) throw InvalidInput("bank training: response count");
                re[i] = responses[i][j].real();
                im[i] = responses[i][j].imag();
            }
            auto& p = pairs_[j];
            p.re = GprModel::fit(x, re, settings_.initial, settings_.alpha);
            p.im = GprModel::fit(x, im, settings_.initial, settings_.alpha);
            optimize_hyperparameters(p.re, settings_);
            optimize_hyperparameters(p.im, settings_);
            p.since_refit = 0;
            ++p.version;
        }
    }

    /// Adds one resolved point to the pair of frequency j; re-optimizes the
    /// pair's hyperparameters every refit_period insertions.
    bool insert(std::size_t j, const ParamVec& p, Complex value, bool allow_refit = true) {
        auto& pr = pairs_.at(j);
        const bool added = pr.re.update(p, value.real());
        if (!added) return false;
        pr.im.update(p, value.imag());
        ++pr.version;
        if (allow_refit && refit_period_ > 0 && ++pr.since_refit >= refit_period_) {
            optimize_hyperparameters(pr.re, settings_, true);
            optimize_hyperparameters(pr.im, settings_, true);
            pr.since_refit = 0;
        }
        return true;
    }

    /// Inserts the same input into every pair.
    std::size_t insert_all(const ParamVec& p, const std::vector<Complex>& values, bool allow_refit = true) {
        if (values.size() != pairs_.size()) throw InvalidInput("insert_all: one value per frequency required");
        std::size_t added = 0;
        for (std::size_t j = 0; j < pairs_.size(); ++j) added += insert(j, p, values[j], allow_refit) ? 1 : 0;
        return added;
    }

    std::vector<ComplexPrediction> predict_batch(std::size_t j, const Eigen::MatrixXd& pts) const {
        const auto& pr = pairs_.at(j);
        Eigen::VectorXd mre, sre, mim, sim;
        pr.re.predict_batch(pts, mre, sre);
        pr.im.predict_batch(pts, mim, sim);
        std::vector<ComplexPrediction> out(static_cast<std::size_t>(pts.cols()));
        for (Eigen::Index i = 0; i < pts.cols(); ++i) out[static_cast<std::size_t>(i)] = {{mre[i], mim[i]}, sre[i], sim[i]};
        return out;
    }

    ComplexPrediction predict(std::size_t j, const ParamVec& p) const {
        const auto& pr = pairs_.at(j);
        const auto re = pr.re.predict(p);
        const auto im = pr.im.predict(p);
        return {{re.mean, im.mean}, re.std, im.std};
    }

private:
    std::vector<Pair> pairs_;
    GprSettings settings_{};
    std::size_t refit_period_ = 10;
};

} // namespace yieldopt
