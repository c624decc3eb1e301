#include "yieldopt/estimator.hpp"
#include "yieldopt/hybrid.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace yieldopt;

namespace {

TruncatedGaussian benchmark() {
    return TruncatedGaussian::symmetric((ParamVec(4) << 10.36, 4.76, 0.58, 0.64).finished(),
                                        (ParamVec(4) << 0.7, 0.7, 0.3, 0.3).finished(),
                                        (ParamVec(4) << 3.0, 3.0, 0.3, 0.3).finished());
}

const PerformanceSpec spec{-24.0};

HybridConfig cfg(double gamma = 2.0, bool updates = true, bool sort = true, bool sc = true) {
    HybridConfig c;
    c.gamma = gamma;
    c.updates_enabled = updates;
    c.sort_enabled = sort;
    c.short_circuit = sc;
    return c;
}

bool is_crit(FreqStatus s) { return s == FreqStatus::critical_accepted || s == FreqStatus::critical_rejected; }

} // namespace

TEST(Critical, OpenBand) {
    EXPECT_TRUE(is_critical(-24.5, 0.3, 2.0, -24.0));
    EXPECT_TRUE(is_critical(-23.5, 0.3, 2.0, -24.0));
    EXPECT_FALSE(is_critical(-25.0, 0.3, 2.0, -24.0));
    EXPECT_FALSE(is_critical(-24.6, 0.3, 2.0, -24.0)); // edge is outside
    EXPECT_FALSE(is_critical(-24.0, 0.0, 2.0, -24.0));
    EXPECT_TRUE(is_critical(-24.0, 1e-9, 2.0, -24.0));
    EXPECT_THROW(is_critical(0, -1.0, 2.0, 0), InvalidInput);
}

TEST(DeltaMethod, MatchesSampledDecibelSpread) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> z;
    auto spread = [&](Complex m, double sr, double si) {
        double a = 0, b = 0;
        const int n = 200'000;
        for (int i = 0; i < n; ++i) {
            const double q = 20.0 * std::log10(std::abs(m + Complex(sr * z(rng), si * z(rng))));
            a += q;
            b += q * q;
        }
        a /= n;
        return std::sqrt(b / n - a * a);
    };
    // noise along the mean direction: first order is exact
    const SurrogateBank::ComplexPrediction radial{{0.05, 0.0}, 1e-4, 0.0};
    const auto b = band_from_prediction(radial, QoiKind::magnitude_db);
    EXPECT_NEAR(b.q, 20.0 * std::log10(0.05), 1e-12);
    EXPECT_NEAR(b.sigma_c, 20.0 / std::log(10.0) * 1e-4 / 0.05, 1e-14);
    EXPECT_NEAR(spread(radial.mean, 1e-4, 0.0) / b.sigma_c, 1.0, 0.01);
    // isotropic noise: only the radial half moves |S|, root-sum-square overstates by sqrt 2
    const SurrogateBank::ComplexPrediction iso{{0.03, -0.04}, 2e-4, 2e-4};
    const auto bi = band_from_prediction(iso, QoiKind::magnitude_db);
    EXPECT_NEAR(spread(iso.mean, 2e-4, 2e-4) / bi.sigma_c, 1.0 / std::sqrt(2.0), 0.01);

    EXPECT_TRUE(band_from_prediction({{0.0, 0.0}, 1e-3, 1e-3}, QoiKind::magnitude_db).deep_pass);
    const auto re = band_from_prediction({{0.7, 0.2}, 0.01, 0.5}, QoiKind::real_part);
    EXPECT_EQ(re.q, 0.7);
    EXPECT_EQ(re.sigma_c, 0.01);
}

TEST(Hybrid, HugeGammaReproducesMonteCarlo) {
    const WaveguideModel m(80.0);
    const auto grid = FrequencyGrid::from_ghz(6.5, 7.5, 11);
    const auto s = sample(benchmark(), 300, 31);
    const SafeDomainClassifier<WaveguideModel> cls(m, spec, grid);
    const auto mc = estimate_yield_mc(cls, s);
    for (bool updates : {false, true}) {
        auto bank = initial_training(m, benchmark(), grid, 10, 1, GprSettings{});
        const auto h = estimate_yield_hybrid(bank, s, cfg(1e6, updates), m, spec, grid);
        EXPECT_EQ(h.accepted, mc.accepted);
        EXPECT_EQ(h.estimate.value, mc.estimate.value);
        EXPECT_EQ(h.estimate.true_evals, mc.estimate.true_evals);
        EXPECT_EQ(h.estimate.critical_count, 300u);
    }
}

TEST(Hybrid, ConfidentSurrogateNeedsNoSolves) {
    const ToyLinearModel m;
    const auto grid = FrequencyGrid::from_ghz(1.0, 2.0, 1);
    const auto d = TruncatedGaussian::symmetric(ParamVec::Zero(1), ParamVec::Ones(1), ParamVec::Ones(1));
    const auto s = sample(d, 2000, 3);
    for (double c : {5.0, -5.0}) {
        auto bank = initial_training(m, d, grid, 10, 1, GprSettings{});
        const auto before = m.eval_count();
        const auto h = estimate_yield_hybrid(bank, s, cfg(), m, PerformanceSpec{c}, grid);
        EXPECT_EQ(m.eval_count(), before);
        EXPECT_EQ(h.estimate.critical_count, 0u);
        EXPECT_EQ(h.estimate.value, c > 0 ? 1.0 : 0.0);
    }
}

TEST(Hybrid, ToyAgreesWithMonteCarlo) {
    const ToyLinearModel m;
    const auto grid = FrequencyGrid::from_ghz(1.0, 2.0, 1);
    const auto d = TruncatedGaussian::symmetric(ParamVec::Zero(1), ParamVec::Ones(1), ParamVec::Constant(1, 10.0));
    const auto s = sample(d, 10'000, 8);
    const SafeDomainClassifier<ToyLinearModel> cls(m, PerformanceSpec{0.0}, grid);
    const auto mc = estimate_yield_mc(cls, s);
    auto bank = initial_training(m, d, grid, 10, 2, GprSettings{});
    const auto h = estimate_yield_hybrid(bank, s, cfg(), m, PerformanceSpec{0.0}, grid);
    EXPECT_EQ(h.accepted, mc.accepted);
    EXPECT_LT(h.estimate.true_evals, 200u);
}

TEST(Hybrid, PartitionAndRecords) {
    const WaveguideModel m(80.0);
    const auto grid = FrequencyGrid::from_ghz(6.5, 7.5, 11);
    const auto s = sample(benchmark(), 400, 4);
    auto bank = initial_training(m, benchmark(), grid, 10, 1, GprSettings{});
    const auto before = m.eval_count();
    const auto h = estimate_yield_hybrid(bank, s, cfg(), m, spec, grid);
    EXPECT_EQ(m.eval_count() - before, h.estimate.true_evals);
    std::size_t crit = 0, acc = 0, evals = 0;
    for (std::size_t i = 0; i < h.records.size(); ++i) {
        const auto& r = h.records[i];
        EXPECT_EQ(r.sample_id, i);
        EXPECT_EQ(r.accepted, h.accepted[i] != 0);
        crit += r.critical();
        acc += r.accepted;
        evals += r.true_evals;
        EXPECT_EQ(r.true_evals, r.n_critical());
    }
    EXPECT_EQ(crit, h.estimate.critical_count);
    EXPECT_EQ(static_cast<double>(acc) / 400.0, h.estimate.value);
    EXPECT_EQ(evals, h.estimate.true_evals);
    EXPECT_EQ(h.resolutions.size(), evals);
    EXPECT_EQ(h.insertions, evals);

    const SafeDomainClassifier<WaveguideModel> cls(m, spec, grid);
    const auto mc = estimate_yield_mc(cls, s);
    std::size_t disagree = 0;
    for (std::size_t i = 0; i < 400; ++i) disagree += h.accepted[i] != mc.accepted[i];
    EXPECT_LE(disagree, 4u);
}

TEST(Hybrid, CriticalSetGrowsWithGamma) {
    const WaveguideModel m(80.0);
    const auto grid = FrequencyGrid::from_ghz(6.5, 7.5, 11);
    const auto s = sample(benchmark(), 300, 6);
    const auto trained = initial_training(m, benchmark(), grid, 10, 1, GprSettings{});
    std::vector<HybridResult> runs;
    for (double g : {1.5, 2.0, 3.0, 5.0}) {
        auto bank = trained;
        runs.push_back(estimate_yield_hybrid(bank, s, cfg(g, false, true, false), m, spec, grid));
    }
    for (std::size_t k = 1; k < runs.size(); ++k) {
        EXPECT_GE(runs[k].estimate.true_evals, runs[k - 1].estimate.true_evals);
        for (std::size_t i = 0; i < 300; ++i)
            for (std::size_t j = 0; j < 11; ++j)
                if (is_crit(runs[k - 1].records[i].status[j])) EXPECT_TRUE(is_crit(runs[k].records[i].status[j]));
    }
}

TEST(Hybrid, ShortCircuitKeepsFlags) {
    const WaveguideModel m(80.0);
    const auto grid = FrequencyGrid::from_ghz(6.5, 7.5, 11);
    const auto s = sample(benchmark(), 300, 7);
    const auto trained = initial_training(m, benchmark(), grid, 10, 1, GprSettings{});
    auto b1 = trained, b2 = trained;
    const auto fast = estimate_yield_hybrid(b1, s, cfg(2.0, false, true, true), m, spec, grid);
    const auto full = estimate_yield_hybrid(b2, s, cfg(2.0, false, true, false), m, spec, grid);
    EXPECT_EQ(fast.accepted, full.accepted);
    EXPECT_LE(fast.estimate.true_evals, full.estimate.true_evals);
}

TEST(HybridEvaluator, TrainingCostAndDeterminism) {
    const WaveguideModel m(80.0);
    const auto grid = FrequencyGrid::from_ghz(6.5, 7.5, 11);
    const auto s = sample(benchmark(), 200, 9);
    HybridEvaluator<WaveguideModel> a(m, spec, grid, cfg(), GprSettings{});
    HybridEvaluator<WaveguideModel> b(m, spec, grid, cfg(), GprSettings{});
    EXPECT_THROW(a.run(s), InvalidInput);
    a.train(benchmark(), 5);
    b.train(benchmark(), 5);
    EXPECT_EQ(a.training_evals(), 110u);
    EXPECT_EQ(a.bank().n_models(), 22u);
    const auto ra = a.run(s);
    const auto rb = b.run(s);
    EXPECT_EQ(ra.accepted, rb.accepted);
    EXPECT_EQ(ra.estimate.true_evals, rb.estimate.true_evals);
    EXPECT_EQ(a.true_evals(), 110u + ra.estimate.true_evals);
}

TEST(Hybrid, RejectsMismatchedBank) {
    const WaveguideModel m(80.0);
    auto bank = initial_training(m, benchmark(), FrequencyGrid::from_ghz(6.5, 7.5, 5), 3, 1, GprSettings{});
    EXPECT_THROW(estimate_yield_hybrid(bank, sample(benchmark(), 5, 1), cfg(), m, spec,
                                       FrequencyGrid::from_ghz(6.5, 7.5, 11)),
                 InvalidInput);
    HybridConfig bad;
    bad.gamma = 1.0;
    EXPECT_THROW(bad.validate(), InvalidInput);
}
