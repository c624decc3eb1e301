#pragma once

// Run configuration: an INI file with sections model, distribution, spec, gpr,
// hybrid, newton, moo, run. Missing keys take defaults; unknown keys are errors.
// Vectors are whitespace-separated numbers.

#include "yieldopt/errors.hpp"
#include "yieldopt/gpr.hpp"
#include "yieldopt/hybrid.hpp"
#include "yieldopt/model.hpp"
#include "yieldopt/newton.hpp"
#include "yieldopt/uq.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace yieldopt {

enum class ModelKind { waveguide, toy };

struct ModelSection {
    ModelKind kind = ModelKind::waveguide;
    double width_a_mm = 80.0;
};

struct DistributionSection {
    ParamVec mean = (ParamVec(4) << 10.36, 4.76, 0.58, 0.64).finished();
    ParamVec std_dev = (ParamVec(4) << 0.7, 0.7, 0.3, 0.3).finished();
    ParamVec offset = (ParamVec(4) << 3.0, 3.0, 0.3, 0.3).finished();

    TruncatedGaussian make() const { return TruncatedGaussian::symmetric(mean, std_dev, offset); }
};

struct SpecSection {
    double threshold = -24.0;
    double f_lo_ghz = 6.5;
    double f_hi_ghz = 7.5;
    std::size_t n_freq = 11;

    PerformanceSpec spec() const { return {threshold}; }
    FrequencyGrid grid() const { return FrequencyGrid::from_ghz(f_lo_ghz, f_hi_ghz, n_freq); }
};

struct MooSection {
    std::size_t pop = 200;
    std::size_t offspring = 100;
    int generations = 30;
    double y_min = 0.8;
    std::size_t n_samples = 2500;
    std::size_t bank_inserts = 10; ///< per frequency, between generations
    std::size_t bank_max = 150;    ///< per frequency
    ParamVec lower = (ParamVec(4) << 5.0, 3.0, 0.5, 0.5).finished();
    ParamVec upper = (ParamVec(4) << 25.0, 15.0, 1.5, 1.5).finished();
};

struct RunConfig {
    ModelSection model;
    DistributionSection distribution;
    SpecSection spec;
    GprSettings gpr;
    HybridConfig hybrid;
    NewtonConfig newton = default_newton();
    ParamVec newton_start = (ParamVec(4) << 9.0, 5.0, 1.0, 1.0).finished();
    MooSection moo;
    std::uint64_t seed = 1;
    std::size_t n_samples = 2500;

    static NewtonConfig default_newton() {
        NewtonConfig c;
        c.lower = (ParamVec(4) << 5.0, 3.0, 0.5, 0.5).finished();
        c.upper = (ParamVec(4) << 25.0, 15.0, 1.5, 1.5).finished();
        return c;
    }

    std::size_t dimension() const { return static_cast<std::size_t>(distribution.mean.size()); }

    /// Cross-section checks; throws InvalidInput naming the offending field.
    void validate() const;
};

namespace detail {

inline std::string fmt_num(double v) { return fmt::format("{:.17g}", v); }

inline std::string fmt_vec(const ParamVec& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt_num(v[i]);
    return s;
}

class ConfigReader {
public:
    explicit ConfigReader(const boost::property_tree::ptree& tree) : tree_(tree) {}

    /// Rejects sections and keys outside `known` (section -> keys).
    void check_known(const std::map<std::string, std::set<std::string>>& known) const {
        for (const auto& [section, body] : tree_) {
            if (!body.data().empty() && body.empty())
                throw InvalidInput("config: '" + section + "' must be a section, not a top-level key");
            auto it = known.find(section);
            if (it == known.end()) throw InvalidInput("config: unknown section [" + section + "]");
            for (const auto& [key, val] : body) {
                (void)val;
                if (!it->second.count(key)) throw InvalidInput("config: unknown key " + section + "." + key);
            }
        }
    }

    template <class T>
    void get(const std::string& path, T& out) const {
        const auto node = tree_.get_optional<std::string>(path);
        if (!node) return;
        out = parse<T>(path, *node);
    }

    void get_vec(const std::string& path, ParamVec& out) const {
        const auto node = tree_.get_optional<std::string>(path);
        if (!node) return;
        std::istringstream is(*node);
        std::vector<double> vals;
        std::string tok;
        while (is >> tok) vals.push_back(parse<double>(path, tok));
        if (vals.empty()) throw InvalidInput("config: " + path + ": expected at least one number");
        out = Eigen::Map<const ParamVec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    }

private:
    template <class T>
    static T parse(const std::string& path, const std::string& raw) {
        const std::string text = trim(raw);
        if constexpr (std::is_same_v<T, bool>) {
            if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
            if (text == "false" || text == "0" || text == "off" || text == "no") return false;
            throw InvalidInput("config: " + path + ": expected a boolean, got '" + text + "'");
        } else if constexpr (std::is_same_v<T, std::string>) {
            return text;
        } else {
            std::istringstream is(text);
            T v{};
            if constexpr (std::is_unsigned_v<T>) {
                if (!text.empty() && text.front() == '-')
                    throw InvalidInput("config: " + path + ": expected a non-negative integer, got '" + text + "'");
            }
            if (!(is >> v) || !(is >> std::ws).eof())
                throw InvalidInput("config: " + path + ": expected a number, got '" + text + "'");
            return v;
        }
    }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    const boost::property_tree::ptree& tree_;
};

inline const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> k{
        {"model", {"kind", "width_a_mm"}},
        {"distribution", {"mean", "std", "offset"}},
        {"spec", {"threshold", "f_lo_ghz", "f_hi_ghz", "n_freq"}},
        {"gpr",
         {"alpha", "zeta0", "zeta_lo", "zeta_hi", "length0", "length_lo", "length_hi", "restarts", "refit_restarts",
          "restart_seed", "max_iter"}},
        {"hybrid", {"gamma", "n_initial_train", "refit_period", "sort", "updates", "short_circuit"}},
        {"newton",
         {"n0", "n_classic", "sigma_hat", "max_iter", "beta", "c1", "max_backtracks", "grad_tol", "shift_fraction",
          "start", "lower", "upper"}},
        {"moo", {"pop", "offspring", "generations", "y_min", "n_samples", "bank_inserts", "bank_max", "lower", "upper"}},
        {"run", {"seed", "n_samples"}},
    };
    return k;
}

} // namespace detail

inline void RunConfig::validate() const {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw InvalidInput("config: " + what);
    };
    const auto d = distribution.mean.size();
    need(d >= 1, "distribution.mean must have at least one entry");
    need(distribution.std_dev.size() == d, "distribution.std must match distribution.mean in length");
    need(distribution.offset.size() == d, "distribution.offset must match distribution.mean in length");
    try {
        (void)distribution.make();
    } catch (const InvalidInput& e) {
        throw InvalidInput(std::string("config: distribution: ") + e.what());
    }
    if (model.kind == ModelKind::waveguide) {
        need(d == 4, "the waveguide model needs 4-dimensional distribution vectors");
        need(model.width_a_mm > 0.0, "model.width_a_mm must be positive");
    } else {
        need(d == 1, "the toy model needs 1-dimensional distribution vectors");
    }
    need(std::isfinite(spec.threshold), "spec.threshold must be finite");
    need(spec.n_freq >= 1, "spec.n_freq must be at least 1");
    need(spec.f_lo_ghz > 0.0 && spec.f_lo_ghz < spec.f_hi_ghz, "spec needs 0 < f_lo_ghz < f_hi_ghz");
    need(gpr.alpha > 0.0, "gpr.alpha must be positive");
    need(gpr.bounds.zeta_lo > 0.0 && gpr.bounds.zeta_lo <= gpr.bounds.zeta_hi, "gpr zeta bounds are invalid");
    need(gpr.bounds.length_lo > 0.0 && gpr.bounds.length_lo <= gpr.bounds.length_hi, "gpr length bounds are invalid");
    need(gpr.initial.zeta >= gpr.bounds.zeta_lo && gpr.initial.zeta <= gpr.bounds.zeta_hi,
         "gpr.zeta0 must lie within [zeta_lo, zeta_hi]");
    need(gpr.initial.length >= gpr.bounds.length_lo && gpr.initial.length <= gpr.bounds.length_hi,
         "gpr.length0 must lie within [length_lo, length_hi]");
    need(gpr.restarts >= 0 && gpr.refit_restarts >= 0, "gpr restart counts must be non-negative");
    need(gpr.max_iter >= 1, "gpr.max_iter must be at least 1");
    need(hybrid.gamma > 1.0, "hybrid.gamma must exceed 1");
    need(hybrid.n_initial_train >= 1, "hybrid.n_initial_train must be at least 1");
    try {
        newton.validate(static_cast<std::size_t>(d));
    } catch (const InvalidInput& e) {
        throw InvalidInput(std::string("config: newton: ") + e.what());
    }
    need(newton_start.size() == d, "newton.start must match the distribution dimension");
    if (newton.lower.size() != 0)
        need((newton_start.array() >= newton.lower.array()).all() && (newton_start.array() <= newton.upper.array()).all(),
             "newton.start must lie inside [newton.lower, newton.upper]");
    need(moo.pop >= 2, "moo.pop must be at least 2");
    need(moo.offspring >= 1, "moo.offspring must be at least 1");
    need(moo.generations >= 0, "moo.generations must be non-negative");
    need(moo.y_min >= 0.0 && moo.y_min <= 1.0, "moo.y_min must lie in [0, 1]");
    need(moo.n_samples >= 1, "moo.n_samples must be at least 1");
    need(moo.lower.size() == d && moo.upper.size() == d, "moo bounds must match the distribution dimension");
    need((moo.lower.array() < moo.upper.array()).all(), "moo needs lower < upper in every coordinate");
    need(n_samples >= 1, "run.n_samples must be at least 1");
}

inline RunConfig parse_config(std::istream& is) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidInput(std::string("config: ") + e.what());
    }
    const detail::ConfigReader r(tree);
    r.check_known(detail::known_keys());

    RunConfig c;
    std::string kind = "waveguide";
    r.get("model.kind", kind);
    if (kind == "waveguide")
        c.model.kind = ModelKind::waveguide;
    else if (kind == "toy")
        c.model.kind = ModelKind::toy;
    else
        throw InvalidInput("config: model.kind: expected 'waveguide' or 'toy', got '" + kind + "'");
    if (c.model.kind == ModelKind::toy) {
        // toy defaults: Q(p) = p, p ~ N(0, 1), c = 0
        c.distribution.mean = ParamVec::Zero(1);
        c.distribution.std_dev = ParamVec::Ones(1);
        c.distribution.offset = ParamVec::Constant(1, 10.0);
        c.spec.threshold = 0.0;
        c.spec.n_freq = 1;
        c.newton_start = ParamVec::Zero(1);
        c.newton.lower = ParamVec::Constant(1, -5.0);
        c.newton.upper = ParamVec::Constant(1, 5.0);
        c.moo.lower = ParamVec::Constant(1, -5.0);
        c.moo.upper = ParamVec::Constant(1, 5.0);
    }
    r.get("model.width_a_mm", c.model.width_a_mm);

    r.get_vec("distribution.mean", c.distribution.mean);
    r.get_vec("distribution.std", c.distribution.std_dev);
    r.get_vec("distribution.offset", c.distribution.offset);

    r.get("spec.threshold", c.spec.threshold);
    r.get("spec.f_lo_ghz", c.spec.f_lo_ghz);
    r.get("spec.f_hi_ghz", c.spec.f_hi_ghz);
    r.get("spec.n_freq", c.spec.n_freq);

    r.get("gpr.alpha", c.gpr.alpha);
    r.get("gpr.zeta0", c.gpr.initial.zeta);
    r.get("gpr.zeta_lo", c.gpr.bounds.zeta_lo);
    r.get("gpr.zeta_hi", c.gpr.bounds.zeta_hi);
    r.get("gpr.length0", c.gpr.initial.length);
    r.get("gpr.length_lo", c.gpr.bounds.length_lo);
    r.get("gpr.length_hi", c.gpr.bounds.length_hi);
    r.get("gpr.restarts", c.gpr.restarts);
    r.get("gpr.refit_restarts", c.gpr.refit_restarts);
    r.get("gpr.restart_seed", c.gpr.restart_seed);
    r.get("gpr.max_iter", c.gpr.max_iter);

    r.get("hybrid.gamma", c.hybrid.gamma);
    r.get("hybrid.n_initial_train", c.hybrid.n_initial_train);
    r.get("hybrid.refit_period", c.hybrid.refit_period);
    r.get("hybrid.sort", c.hybrid.sort_enabled);
    r.get("hybrid.updates", c.hybrid.updates_enabled);
    r.get("hybrid.short_circuit", c.hybrid.short_circuit);

    r.get("newton.n0", c.newton.n0);
    r.get("newton.n_classic", c.newton.n_fixed);
    r.get("newton.sigma_hat", c.newton.sigma_hat);
    r.get("newton.max_iter", c.newton.max_iter);
    r.get("newton.beta", c.newton.beta);
    r.get("newton.c1", c.newton.c1);
    r.get("newton.max_backtracks", c.newton.max_backtracks);
    r.get("newton.grad_tol", c.newton.grad_tol);
    r.get("newton.shift_fraction", c.newton.shift_fraction);
    r.get_vec("newton.start", c.newton_start);
    r.get_vec("newton.lower", c.newton.lower);
    r.get_vec("newton.upper", c.newton.upper);

    r.get("moo.pop", c.moo.pop);
    r.get("moo.offspring", c.moo.offspring);
    r.get("moo.generations", c.moo.generations);
    r.get("moo.y_min", c.moo.y_min);
    r.get("moo.n_samples", c.moo.n_samples);
    r.get("moo.bank_inserts", c.moo.bank_inserts);
    r.get("moo.bank_max", c.moo.bank_max);
    r.get_vec("moo.lower", c.moo.lower);
    r.get_vec("moo.upper", c.moo.upper);

    r.get("run.seed", c.seed);
    r.get("run.n_samples", c.n_samples);

    c.validate();
    return c;
}

inline RunConfig parse_config_string(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("config: cannot open '" + path + "'");
    return parse_config(f);
}

/// Writes every key, so parse(serialize(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
    using detail::fmt_num;
    using detail::fmt_vec;
    auto b = [](bool v) { return v ? "true" : "false"; };
    std::string s;
    s += "[model]\n";
    s += fmt::format("kind = {}\n", c.model.kind == ModelKind::toy ? "toy" : "waveguide");
    s += "width_a_mm = " + fmt_num(c.model.width_a_mm) + "\n\n";
    s += "[distribution]\n";
    s += "mean = " + fmt_vec(c.distribution.mean) + "\n";
    s += "std = " + fmt_vec(c.distribution.std_dev) + "\n";
    s += "offset = " + fmt_vec(c.distribution.offset) + "\n\n";
    s += "[spec]\n";
    s += "threshold = " + fmt_num(c.spec.threshold) + "\n";
    s += "f_lo_ghz = " + fmt_num(c.spec.f_lo_ghz) + "\n";
    s += "f_hi_ghz = " + fmt_num(c.spec.f_hi_ghz) + "\n";
    s += fmt::format("n_freq = {}\n\n", c.spec.n_freq);
    s += "[gpr]\n";
    s += "alpha = " + fmt_num(c.gpr.alpha) + "\n";
    s += "zeta0 = " + fmt_num(c.gpr.initial.zeta) + "\n";
    s += "zeta_lo = " + fmt_num(c.gpr.bounds.zeta_lo) + "\n";
    s += "zeta_hi = " + fmt_num(c.gpr.bounds.zeta_hi) + "\n";
    s += "length0 = " + fmt_num(c.gpr.initial.length) + "\n";
    s += "length_lo = " + fmt_num(c.gpr.bounds.length_lo) + "\n";
    s += "length_hi = " + fmt_num(c.gpr.bounds.length_hi) + "\n";
    s += fmt::format("restarts = {}\nrefit_restarts = {}\nrestart_seed = {}\nmax_iter = {}\n\n", c.gpr.restarts,
                     c.gpr.refit_restarts, c.gpr.restart_seed, c.gpr.max_iter);
    s += "[hybrid]\n";
    s += "gamma = " + fmt_num(c.hybrid.gamma) + "\n";
    s += fmt::format("n_initial_train = {}\nrefit_period = {}\nsort = {}\nupdates = {}\nshort_circuit = {}\n\n",
                     c.hybrid.n_initial_train, c.hybrid.refit_period, b(c.hybrid.sort_enabled),
                     b(c.hybrid.updates_enabled), b(c.hybrid.short_circuit));
    s += "[newton]\n";
    s += fmt::format("n0 = {}\nn_classic = {}\n", c.newton.n0, c.newton.n_fixed);
    s += "sigma_hat = " + fmt_num(c.newton.sigma_hat) + "\n";
    s += fmt::format("max_iter = {}\n", c.newton.max_iter);
    s += "beta = " + fmt_num(c.newton.beta) + "\n";
    s += "c1 = " + fmt_num(c.newton.c1) + "\n";
    s += fmt::format("max_backtracks = {}\n", c.newton.max_backtracks);
    s += "grad_tol = " + fmt_num(c.newton.grad_tol) + "\n";
    s += "shift_fraction = " + fmt_num(c.newton.shift_fraction) + "\n";
    s += "start = " + fmt_vec(c.newton_start) + "\n";
    if (c.newton.lower.size() != 0) {
        s += "lower = " + fmt_vec(c.newton.lower) + "\n";
        s += "upper = " + fmt_vec(c.newton.upper) + "\n";
    }
    s += "\n[moo]\n";
    s += fmt::format("pop = {}\noffspring = {}\ngenerations = {}\n", c.moo.pop, c.moo.offspring, c.moo.generations);
    s += "y_min = " + fmt_num(c.moo.y_min) + "\n";
    s += fmt::format("n_samples = {}\nbank_inserts = {}\nbank_max = {}\n", c.moo.n_samples, c.moo.bank_inserts,
                     c.moo.bank_max);
    s += "lower = " + fmt_vec(c.moo.lower) + "\n";
    s += "upper = " + fmt_vec(c.moo.upper) + "\n\n";
    s += "[run]\n";
    s += fmt::format("seed = {}\nn_samples = {}\n", c.seed, c.n_samples);
    return s;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
    auto same = [](const ParamVec& x, const ParamVec& y) { return x.size() == y.size() && x == y; };
    return a.model.kind == b.model.kind && a.model.width_a_mm == b.model.width_a_mm &&
           same(a.distribution.mean, b.distribution.mean) && same(a.distribution.std_dev, b.distribution.std_dev) &&
           same(a.distribution.offset, b.distribution.offset) && a.spec.threshold == b.spec.threshold &&
           a.spec.f_lo_ghz == b.spec.f_lo_ghz && a.spec.f_hi_ghz == b.spec.f_hi_ghz && a.spec.n_freq == b.spec.n_freq &&
           a.gpr == b.gpr && a.hybrid == b.hybrid && a.newton == b.newton && same(a.newton_start, b.newton_start) &&
           a.moo.pop == b.moo.pop && a.moo.offspring == b.moo.offspring && a.moo.generations == b.moo.generations &&
           a.moo.y_min == b.moo.y_min && a.moo.n_samples == b.moo.n_samples &&
           a.moo.bank_inserts == b.moo.bank_inserts && a.moo.bank_max == b.moo.bank_max && same(a.moo.lower, b.moo.lower) &&
           same(a.moo.upper, b.moo.upper) && a.seed == b.seed && a.n_samples == b.n_samples;
}

} // namespace yieldopt
