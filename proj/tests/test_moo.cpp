#include "oracles.hpp"
#include "yieldopt/moo.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace yieldopt;

namespace {

std::vector<Individual> random_population(std::mt19937_64& rng, std::size_t n, bool with_violations) {
    std::uniform_int_distribution<int> grid(0, 9); // coarse grid forces ties
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Individual> pop(n);
    for (auto& ind : pop) {
        ind.x = ParamVec::Zero(1);
        ind.f = {static_cast<double>(grid(rng)), static_cast<double>(grid(rng))};
        if (with_violations && u(rng) < 0.3) ind.violation = 0.1 * grid(rng) + 0.05;
    }
    return pop;
}

} // namespace

TEST(Dominance, ConstraintRules) {
    Individual a, b;
    a.f = {1, 1};
    b.f = {0, 0};
    a.violation = 0.0;
    b.violation = 0.2;
    EXPECT_TRUE(constraint_dominates(a, b));
    EXPECT_FALSE(constraint_dominates(b, a));
    a.violation = 0.1;
    EXPECT_TRUE(constraint_dominates(a, b));
    a.violation = 0.2;
    EXPECT_FALSE(constraint_dominates(a, b));
    EXPECT_FALSE(constraint_dominates(b, a));
    a.violation = b.violation = 0.0;
    EXPECT_TRUE(constraint_dominates(b, a));
    EXPECT_FALSE(pareto_dominates({1, 1}, {1, 1}));
    EXPECT_TRUE(pareto_dominates({1, 0}, {1, 1}));
}

TEST(NonDominatedSort, MatchesBruteForce) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 200; ++t) {
        auto pop = random_population(rng, 5 + static_cast<std::size_t>(t % 60), t % 2 == 1);
        const auto ref = oracle::brute_force_ranks(pop);
        const auto fronts = non_dominated_sort(pop);
        std::size_t total = 0;
        for (std::size_t r = 0; r < fronts.size(); ++r) {
            total += fronts[r].size();
            for (std::size_t i : fronts[r]) EXPECT_EQ(pop[i].rank, static_cast<int>(r) + 1);
        }
        EXPECT_EQ(total, pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) EXPECT_EQ(pop[i].rank, ref[i]);
    }
}

TEST(Crowding, HandWorkedFront) {
    std::vector<Individual> pop(4);
    const double f1[] = {0.0, 1.0, 3.0, 4.0};
    const double f2[] = {4.0, 2.0, 1.0, 0.0};
    for (int i = 0; i < 4; ++i) pop[static_cast<std::size_t>(i)].f = {f1[i], f2[i]};
    crowding_distance(pop, {0, 1, 2, 3});
    EXPECT_EQ(pop[0].crowding, crowding_inf);
    EXPECT_EQ(pop[3].crowding, crowding_inf);
    EXPECT_DOUBLE_EQ(pop[1].crowding, 3.0 / 4.0 + 3.0 / 4.0);
    EXPECT_DOUBLE_EQ(pop[2].crowding, 3.0 / 4.0 + 2.0 / 4.0);

    std::vector<Individual> flat(3);
    for (auto& ind : flat) ind.f = {1.0, 1.0};
    crowding_distance(flat, {0, 1, 2});
    EXPECT_EQ(flat[1].crowding, 0.0);
    std::vector<Individual> two(2);
    two[0].f = {0, 1};
    two[1].f = {1, 0};
    crowding_distance(two, {0, 1});
    EXPECT_EQ(two[0].crowding, crowding_inf);
}

TEST(Operators, StayInsideBounds) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 3.0);
    for (int t = 0; t < 20000; ++t) {
        const double a = u(rng), b = u(rng);
        const double x1 = std::clamp(a, -1.0, 3.0), x2 = std::clamp(b, -1.0, 3.0);
        const auto [c1, c2] = detail::sbx_pair(x1, x2, -1.0, 3.0, 15.0, rng);
        EXPECT_GE(c1, -1.0);
        EXPECT_LE(c1, 3.0);
        EXPECT_GE(c2, -1.0);
        EXPECT_LE(c2, 3.0);
        const double m = detail::poly_mutate(x1, -1.0, 3.0, 20.0, rng);
        EXPECT_GE(m, -1.0);
        EXPECT_LE(m, 3.0);
    }
}

TEST(Nsga2, Zdt1Igd) {
    NsgaSettings s;
    s.pop_size = 100;
    s.n_offspring = 100;
    s.n_gen = 250;
    const auto r = evolve(zdt1_problem(30), s, 1);
    std::vector<std::vector<double>> approx;
    for (const auto& ind : r.front) approx.push_back(ind.f);
    const double igd = inverted_generational_distance(zdt1_reference_front(), approx);
    EXPECT_LT(igd, 0.01) << "front size " << approx.size();
    EXPECT_EQ(r.evaluations, 100u + 250u * 100u);
    EXPECT_EQ(r.history.size(), 251u);
}

TEST(Nsga2, DeterministicAndFrontIsClean) {
    NsgaSettings s;
    s.pop_size = 40;
    s.n_offspring = 20;
    s.n_gen = 30;
    MooProblem p = zdt1_problem(5);
    int batches = 0;
    p.end_batch = [&] { ++batches; };
    const auto a = evolve(p, s, 7);
    EXPECT_EQ(batches, 31);
    const auto b = evolve(zdt1_problem(5), s, 7);
    std::ostringstream sa, sb;
    write_pareto_csv(sa, a.front);
    write_pareto_csv(sb, b.front);
    EXPECT_EQ(sa.str(), sb.str());
    for (std::size_t i = 1; i < a.front.size(); ++i) EXPECT_LE(a.front[i - 1].f[0], a.front[i].f[0]);
    EXPECT_EQ(a.population.size(), 40u);
}

TEST(Nsga2, ConstraintSteersPopulation) {
    // minimize (x, 1 - x) subject to x >= 0.6
    MooProblem p;
    p.lower = ParamVec::Zero(1);
    p.upper = ParamVec::Ones(1);
    p.evaluate = [](const ParamVec& x) { return Evaluation{{x[0], 1.0 - x[0]}, std::max(0.0, 0.6 - x[0])}; };
    NsgaSettings s;
    s.pop_size = 30;
    s.n_offspring = 30;
    s.n_gen = 20;
    const auto r = evolve(p, s, 3);
    ASSERT_FALSE(r.front.empty());
    for (const auto& ind : r.front) EXPECT_GE(ind.x[0], 0.6);
    EXPECT_EQ(r.history.back().feasible, 30u);
}

TEST(Nsga2, FailedEvaluationGetsWorstValues) {
    MooProblem p = zdt1_problem(3);
    auto inner = p.evaluate;
    p.evaluate = [inner](const ParamVec& x) {
        if (x[0] > 0.9) throw NumericalError("boom");
        return inner(x);
    };
    NsgaSettings s;
    s.pop_size = 20;
    s.n_offspring = 10;
    s.n_gen = 5;
    const auto r = evolve(p, s, 2);
    for (const auto& ind : r.front) EXPECT_LE(ind.x[0], 0.9);
}

TEST(Igd, KnownValues) {
    const auto ref = zdt1_reference_front(11);
    EXPECT_NEAR(inverted_generational_distance(ref, ref), 0.0, 1e-15);
    EXPECT_NEAR(inverted_generational_distance({{0, 0}}, {{3, 4}}), 5.0, 1e-15);
    EXPECT_THROW(inverted_generational_distance({}, ref), InvalidInput);
}

TEST(MooProblem, Validation) {
    MooProblem p = zdt1_problem(3);
    p.upper[1] = 0.0;
    EXPECT_THROW(p.validate(), InvalidInput);
    NsgaSettings s;
    s.pop_size = 1;
    EXPECT_THROW(s.validate(), InvalidInput);
}
