#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hoc/errors.hpp"
#include "hoc/product_space.hpp"
#include "oracles.hpp"

using namespace hoc;

namespace {

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(ProductSpace, TwoRademacherCoordinatesGiveFourOutcomes) {
  auto s = rademacher_space(2);
  EXPECT_EQ(s->outcome_count(), 4u);
  EXPECT_EQ(s->dimension(), 2);
  double total = 0.0;
  for (double w : s->weights()) total += w;
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(ProductSpace, PointMassIsASingleOutcome) {
  auto s = build_space({FiniteDistribution({0.0}, {1.0})});
  EXPECT_EQ(s->outcome_count(), 1u);
  FunctionTable f(s, {7.5});
  EXPECT_DOUBLE_EQ(f.mean(), 7.5);
  EXPECT_DOUBLE_EQ(f.variance(), 0.0);
}

TEST(ProductSpace, RejectsProbabilitiesThatDoNotSumToOne) {
  EXPECT_THROW(FiniteDistribution({0.0, 1.0}, {0.5, 0.6}), ValidationError);
  EXPECT_THROW(FiniteDistribution({0.0, 1.0}, {1.2, -0.2}), ValidationError);
  EXPECT_THROW(FiniteDistribution({0.0, 0.0}, {0.5, 0.5}), ValidationError);
  EXPECT_THROW(FiniteDistribution({}, {}), ValidationError);
}

TEST(ProductSpace, OutcomeLimitIsEnforced) {
  Limits lim;
  lim.max_outcomes = 1 << 10;
  EXPECT_NO_THROW(rademacher_space(10, lim));
  EXPECT_THROW(rademacher_space(11, lim), BudgetError);
}

TEST(ProductSpace, FirstCoordinateVariesFastest) {
  auto s = rademacher_space(2);
  EXPECT_DOUBLE_EQ(s->value(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s->value(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(s->value(1, 1), -1.0);
  EXPECT_DOUBLE_EQ(s->value(2, 1), 1.0);
}

TEST(Polynomial, ParityTable) {
  auto s = rademacher_space(2);
  MultilinearPolynomial p(2);
  p.add_term({0, 1}, 1.0);
  EXPECT_EQ(vec(eval_polynomial(s, p).values()), (std::vector<double>{1, -1, -1, 1}));
}

TEST(Polynomial, ConstantTable) {
  auto s = rademacher_space(3);
  MultilinearPolynomial p(3);
  p.add_term(CoordSet{}, 3.0);
  const auto f = eval_polynomial(s, p);
  for (double v : f.values()) EXPECT_DOUBLE_EQ(v, 3.0);
}

TEST(Polynomial, LinearFormHasZeroMean) {
  auto s = rademacher_space(2);
  MultilinearPolynomial p(2);
  p.add_term({0}, 2.0);
  p.add_term({1}, -1.0);
  auto f = eval_polynomial(s, p);
  EXPECT_EQ(vec(f.values()), (std::vector<double>{-1, 3, -3, 1}));
  EXPECT_DOUBLE_EQ(f.mean(), 0.0);
}

TEST(CondExpectation, OddCoordinateIntegratesToZero) {
  auto s = rademacher_space(2);
  MultilinearPolynomial p(2);
  p.add_term({0, 1}, 1.0);
  auto e = cond_expectation(eval_polynomial(s, p), CoordSet::of({0}));
  for (double v : e.values()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(CondExpectation, SumLosesIntegratedCoordinate) {
  auto s = rademacher_space(2);
  MultilinearPolynomial p(2);
  p.add_term({0}, 1.0);
  p.add_term({1}, 1.0);
  auto e = cond_expectation(eval_polynomial(s, p), CoordSet::of({1}));
  EXPECT_EQ(vec(e.values()), vec(FunctionTable::coordinate(s, 0).values()));
}

TEST(CondExpectation, EmptySetIsIdentity) {
  std::mt19937_64 rng(11);
  auto os = oracle::random_space(rng, 3, 3);
  FunctionTable f(oracle::to_library(os), oracle::random_table(rng, os));
  EXPECT_EQ(vec(cond_expectation(f, CoordSet{}).values()), vec(f.values()));
}

TEST(CondExpectation, MatchesBruteForceOnRandomSpaces) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    auto os = oracle::random_space(rng, 3, 3);
    auto table = oracle::random_table(rng, os);
    FunctionTable f(oracle::to_library(os), table);
    const std::uint64_t all = (1u << os.n()) - 1;
    for (std::uint64_t S = 0; S <= all; ++S) {
      auto lib = cond_expectation(f, CoordSet(S));
      auto ref = oracle::conditional(os, table, all & ~S);
      EXPECT_LT(oracle::max_abs_diff(lib.values(), ref), 1e-12);
    }
  }
}

TEST(CondExpectation, TowerProperty) {
  std::mt19937_64 rng(13);
  auto os = oracle::random_space(rng, 4, 3);
  FunctionTable f(oracle::to_library(os), oracle::random_table(rng, os));
  auto a = cond_expectation(cond_expectation(f, CoordSet::of({0, 2})), CoordSet::of({1}));
  auto b = cond_expectation(f, CoordSet::of({0, 1, 2}));
  EXPECT_LT(oracle::max_abs_diff(a.values(), b.values()), 1e-12);
  EXPECT_NEAR(cond_expectation(f, CoordSet::full(4))[0], f.mean(), 1e-12);
}

TEST(LpNorm, Examples) {
  auto s1 = rademacher_space(1);
  EXPECT_DOUBLE_EQ(lp_norm(FunctionTable::coordinate(s1, 0), 2.0), 1.0);
  auto s2 = rademacher_space(2);
  for (double p : {1.0, 2.0, 3.5, 8.0}) EXPECT_NEAR(lp_norm(FunctionTable::constant(s2, 3.0), p), 3.0, 1e-14);
  MultilinearPolynomial q(2);
  q.add_term({0, 1}, 1.0);
  q.add_term(CoordSet{}, 1.0);
  EXPECT_NEAR(lp_norm(eval_polynomial(s2, q), 1.0), 1.0, 1e-15);
}

TEST(LpNorm, MonotoneInPAndMatchesOracle) {
  std::mt19937_64 rng(14);
  for (int rep = 0; rep < 20; ++rep) {
    auto os = oracle::random_space(rng, 3, 3);
    auto table = oracle::random_table(rng, os);
    FunctionTable f(oracle::to_library(os), table);
    double prev = 0.0;
    for (double p : {1.0, 1.5, 2.0, 3.0, 6.0, 10.0}) {
      const double v = lp_norm(f, p);
      EXPECT_NEAR(v, oracle::lp(os, table, p), 1e-12 * std::max(1.0, v));
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
    EXPECT_GE(lp_norm(f, std::numeric_limits<double>::infinity()), prev - 1e-12);
  }
}

TEST(LpNorm, RejectsPBelowOne) {
  auto s = rademacher_space(1);
  EXPECT_THROW(lp_norm(FunctionTable::coordinate(s, 0), 0.5), ValidationError);
}
