// Library usage on the closed-form toy problem: Q(p) = p <= c with p ~ N(m, 1).
// Estimates the yield by plain MC and by GPR-Hybrid, then climbs with Newton.

#include "yieldopt/yieldopt.hpp"

#include <fmt/format.h>

using namespace yieldopt;

int main() {
    const ToyLinearModel model;
    const PerformanceSpec spec{0.0};
    const auto grid = FrequencyGrid::from_ghz(1.0, 2.0, 1); // the toy ignores frequency
    const auto dist =
        TruncatedGaussian::symmetric(ParamVec::Constant(1, 0.5), ParamVec::Ones(1), ParamVec::Constant(1, 10.0));
    const SampleSet s = sample(dist, 20'000, 42);

    const SafeDomainClassifier<ToyLinearModel> cls(model, spec, grid);
    const McResult mc = estimate_yield_mc(cls, s);

    HybridEvaluator<ToyLinearModel> hybrid(model, spec, grid, HybridConfig{}, GprSettings{});
    hybrid.train(dist, 7);
    const HybridResult hr = hybrid.run(s);

    fmt::print("exact   {:.4f}\n", toy_yield_closed_form(0.5, 1.0, 0.0).yield);
    fmt::print("mc      {:.4f} +- {:.4f}  ({} solves)\n", mc.estimate.value, mc.estimate.sigma, mc.estimate.true_evals);
    fmt::print("hybrid  {:.4f} +- {:.4f}  ({} solves incl. training)\n", hr.estimate.value, hr.estimate.sigma,
               hybrid.true_evals());

    NewtonConfig nc;
    nc.lower = ParamVec::Constant(1, -3.0);
    nc.upper = ParamVec::Constant(1, 3.0);
    const NewtonResult nr = maximize_yield(hybrid, dist, nc, 3);
    fmt::print("newton  mean {:.3f} -> {:.3f}, yield {:.4f} -> {:.4f}, stop {}\n", dist.mean()[0], nr.mean[0],
               nr.start.value, nr.final.value, to_string(nr.stop));
}
