// Randomized invariants, each checked across many generated instances.

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hoc/bounds.hpp"
#include "hoc/diff_ops.hpp"
#include "hoc/efron_stein.hpp"
#include "hoc/hoeffding.hpp"
#include "hoc/montecarlo.hpp"
#include "hoc/smooth.hpp"
#include "oracles.hpp"

using namespace hoc;

namespace {

struct Instance {
  oracle::Space os;
  oracle::Table table;
  FunctionTable f;
};

Instance random_instance(std::mt19937_64& rng, int n, int max_support = 3, int min_support = 1) {
  auto os = oracle::random_space(rng, n, max_support, min_support);
  auto t = oracle::random_table(rng, os);
  FunctionTable f(oracle::to_library(os), t);
  return {os, t, f};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST(Properties, CondExpectationIsAProjectionAndCommutes) {
  std::mt19937_64 rng(71);
  for (int rep = 0; rep < 25; ++rep) {
    auto in = random_instance(rng, 4);
    const double s = std::max(1.0, in.f.sup_norm());
    for (std::uint64_t S = 0; S < 16; ++S) {
      auto once = cond_expectation(in.f, CoordSet(S));
      auto twice = cond_expectation(once, CoordSet(S));
      EXPECT_LT(oracle::max_abs_diff(once.values(), twice.values()), 1e-14 * s);
      const std::uint64_t T = (~S) & 0xF & (rng() & 0xF);
      auto st = cond_expectation(cond_expectation(in.f, CoordSet(T)), CoordSet(S));
      auto ts = cond_expectation(cond_expectation(in.f, CoordSet(S)), CoordSet(T));
      auto u = cond_expectation(in.f, CoordSet(S | T));
      EXPECT_LT(oracle::max_abs_diff(st.values(), u.values()), 1e-14 * s);
      EXPECT_LT(oracle::max_abs_diff(ts.values(), u.values()), 1e-14 * s);
    }
  }
}

TEST(Properties, PolynomialEvaluationIsLinear) {
  std::mt19937_64 rng(72);
  std::normal_distribution<double> g;
  auto s = rademacher_space(4);
  for (int rep = 0; rep < 10; ++rep) {
    MultilinearPolynomial p(4), q(4), sum(4);
    const double a = g(rng), b = g(rng);
    for (std::uint64_t S = 0; S < 16; ++S) {
      const double x = g(rng), y = g(rng);
      p.add_term(CoordSet(S), x);
      q.add_term(CoordSet(S), y);
      sum.add_term(CoordSet(S), a * x + b * y);
    }
    auto lhs = eval_polynomial(s, sum);
    auto rhs = a * eval_polynomial(s, p) + b * eval_polynomial(s, q);
    EXPECT_LT(oracle::max_abs_diff(lhs.values(), rhs.values()), 1e-12);
  }
}

TEST(Properties, DecompositionIsUnique) {
  std::mt19937_64 rng(73);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 10; ++rep) {
    auto os = oracle::random_space(rng, 4, 3, 2);
    auto space = oracle::to_library(os);
    // Explicitly degenerate pieces: products of centered one-coordinate functions.
    std::vector<FunctionTable> phi;
    for (int i = 0; i < os.n(); ++i) {
      std::vector<double> vals(os.atoms[i].size());
      for (auto& v : vals) v = g(rng);
      double m = 0.0;
      for (std::size_t k = 0; k < vals.size(); ++k) m += os.probs[i][k] * vals[k];
      for (auto& v : vals) v -= m;
      phi.push_back(FunctionTable::from_point_function(space, [&, i, vals](std::span<const double> x) {
        const auto& a = os.atoms[i];
        const auto k = std::find(a.begin(), a.end(), x[static_cast<std::size_t>(i)]) - a.begin();
        return vals[static_cast<std::size_t>(k)];
      }));
    }
    std::map<CoordSet, FunctionTable> parts;
    auto total = FunctionTable::constant(space, 0.0);
    for (std::uint64_t S = 1; S < 16; ++S) {
      if (rng() % 2) continue;
      auto h = FunctionTable::constant(space, g(rng));
      for (int i : CoordSet(S).indices()) h = h * phi[static_cast<std::size_t>(i)];
      parts.emplace(CoordSet(S), h);
      total += h;
    }
    auto dec = decompose(total);
    for (std::uint64_t S = 1; S < 16; ++S) {
      auto it = parts.find(CoordSet(S));
      auto got = dec.component(CoordSet(S));
      if (it == parts.end()) {
        EXPECT_LT(got.sup_norm(), 1e-10);
      } else {
        EXPECT_LT(oracle::max_abs_diff(got.values(), it->second.values()), 1e-10);
      }
    }
  }
}

TEST(Properties, ParsevalOnRademacherSpaces) {
  std::mt19937_64 rng(74);
  std::normal_distribution<double> g;
  auto s = rademacher_space(5);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> v(s->outcome_count());
    for (auto& x : v) x = g(rng);
    FunctionTable f(s, v);
    double sum = 0.0;
    const auto fw = fourier_walsh(f);
    for (const auto& [S, a] : fw.terms()) sum += a * a;
    EXPECT_NEAR(f.inner(f), sum, 1e-10);
  }
}

TEST(Properties, DegreeFilteringIsIdempotent) {
  std::mt19937_64 rng(75);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = random_instance(rng, 4, 3, 2);
    auto dec = decompose(in.f);
    for (int k = 1; k <= 4; ++k) {
      auto fk = degree_component(dec, k);
      const auto again = decompose(fk);
      for (const auto& [S, h] : again.components()) {
        if (S.size() != k) EXPECT_LT(h.sup_norm(), 1e-10 * std::max(1.0, in.f.sup_norm()));
      }
    }
  }
}

TEST(Properties, EntriesArePermutationInvariant) {
  std::mt19937_64 rng(76);
  for (int rep = 0; rep < 4; ++rep) {
    auto in = random_instance(rng, 3, 3, 2);
    for (auto kind : kAllKinds) {
      std::vector<int> idx{0, 1, 2};
      const auto base = difference_entry(in.f, kind, idx);
      while (std::next_permutation(idx.begin(), idx.end())) {
        EXPECT_LT(oracle::max_abs_diff(difference_entry(in.f, kind, idx).values(), base.values()), 1e-13)
            << to_string(kind);
      }
    }
  }
}

TEST(Properties, DiagonalCollapse) {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = random_instance(rng, 3);
    for (int i = 0; i < 3; ++i) {
      const std::vector<int> one{i}, two{i, i};
      auto h1 = difference_entry(in.f, OperatorKind::H, one);
      auto h2 = difference_entry(in.f, OperatorKind::H, two);
      EXPECT_LT(oracle::max_abs_diff(h2.values(), (0.5 * h1).values()), 1e-13);
      auto d1 = difference_entry(in.f, OperatorKind::DD, one);
      auto d2 = difference_entry(in.f, OperatorKind::DD, two);
      EXPECT_LT(oracle::max_abs_diff(d2.values(), d1.values()), 1e-13);
    }
  }
}

TEST(Properties, HoeffdingAnnihilation) {
  std::mt19937_64 rng(78);
  for (int rep = 0; rep < 6; ++rep) {
    auto in = random_instance(rng, 4, 3, 2);
    auto dec = decompose(in.f);
    for (int k = 1; k <= 3; ++k) {
      auto tail = FunctionTable::constant(in.f.space(), 0.0);
      for (int j = k; j <= 4; ++j) tail += degree_component(dec, j);
      for (const auto& J : sorted_tuples(4, k)) {
        for (auto kind : {OperatorKind::H, OperatorKind::V, OperatorKind::D_SMALL}) {
          auto a = difference_entry(in.f, kind, J);
          auto b = difference_entry(tail, kind, J);
          EXPECT_LT(oracle::max_abs_diff(a.values(), b.values()), 1e-10 * std::max(1.0, in.f.sup_norm()));
        }
      }
    }
  }
}

TEST(Properties, ResampledDominatedBySup) {
  std::mt19937_64 rng(79);
  for (int rep = 0; rep < 20; ++rep) {
    auto in = random_instance(rng, 4);
    const std::pair<OperatorKind, OperatorKind> pairs[] = {{OperatorKind::D_SMALL, OperatorKind::H},
                                                            {OperatorKind::D_PLUS, OperatorKind::H_PLUS},
                                                            {OperatorKind::D_MINUS, OperatorKind::H_MINUS}};
    for (const auto& [d, h] : pairs) {
      auto a = hs_field(in.f, d, 1);
      auto b = hs_field(in.f, h, 1);
      for (std::uint64_t o = 0; o < a.size(); ++o) EXPECT_LE(a[o] * a[o], 2.0 * b[o] * b[o] + 1e-12);
    }
  }
}

TEST(Properties, ConditionalVarianceLink) {
  std::mt19937_64 rng(80);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = random_instance(rng, 3);
    const auto& os = in.os;
    // V+(f) = sum_i E_bar (f - T_i f)_+^2, computed straight from the definition.
    oracle::Table vplus(in.table.size(), 0.0), vminus(in.table.size(), 0.0);
    for (std::size_t w = 0; w < in.table.size(); ++w) {
      const auto dw = os.digits(w);
      for (int i = 0; i < os.n(); ++i) {
        for (std::size_t k = 0; k < os.atoms[i].size(); ++k) {
          auto dv = dw;
          dv[i] = static_cast<int>(k);
          const double diff = in.table[w] - in.table[os.index(dv)];
          vplus[w] += os.probs[i][k] * std::pow(std::max(diff, 0.0), 2);
          vminus[w] += os.probs[i][k] * std::pow(std::max(-diff, 0.0), 2);
        }
      }
    }
    auto dp = hs_field(in.f, OperatorKind::D_PLUS, 1);
    auto dm = hs_field(in.f, OperatorKind::D_MINUS, 1);
    for (std::size_t w = 0; w < vplus.size(); ++w) {
      EXPECT_NEAR(vplus[w], 2.0 * dp[w] * dp[w], 1e-12 * std::max(1.0, vplus[w]));
      EXPECT_NEAR(vminus[w], 2.0 * dm[w] * dm[w], 1e-12 * std::max(1.0, vminus[w]));
    }
  }
}

TEST(Properties, OperatorAxioms) {
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = random_instance(rng, 3);
    const double a = u(rng), b = u(rng) - 2.5;
    auto g = a * in.f + b;
    for (auto kind : kAllKinds) {
      for (int i = 0; i < 3; ++i) {
        const std::vector<int> J{i};
        auto lhs = difference_entry(g, kind, J).abs();
        auto rhs = a * difference_entry(in.f, kind, J).abs();
        EXPECT_LT(oracle::max_abs_diff(lhs.values(), rhs.values()), 1e-12 * std::max(1.0, a * in.f.sup_norm()))
            << to_string(kind);
      }
    }
  }
}

TEST(Properties, HigherOrderBoundsHoldForDegenerateFunctions) {
  std::mt19937_64 rng(82);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = random_instance(rng, 4, 2, 2);
    auto dec = decompose(in.f);
    for (int d = 1; d <= 3; ++d) {
      auto f = FunctionTable::constant(in.f.space(), 0.0);
      for (int j = d; j <= 4; ++j) f += degree_component(dec, j);
      for (auto kind : {OperatorKind::V, OperatorKind::DD, OperatorKind::D_SMALL, OperatorKind::D_PLUS, OperatorKind::D_MINUS}) {
        auto r = higher_order_es(f, d, kind);
        EXPECT_GE(r.gap, -1e-10);
        EXPECT_FALSE(r.equality);
      }
    }
  }
}

TEST(Properties, EqualityCharacterization) {
  std::mt19937_64 rng(83);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = random_instance(rng, 3, 3, 2);
    auto dec = decompose(in.f);
    for (int d = 1; d <= 3; ++d) {
      auto pure = degree_component(dec, d);
      auto r = higher_order_es(pure, d, OperatorKind::V);
      EXPECT_TRUE(r.equality);
      EXPECT_LE(r.gap, 1e-9);
      if (d < 3) {
        auto perturbed = pure + 1e-3 * degree_component(dec, 3);
        auto q = higher_order_es(perturbed, d, OperatorKind::V);
        EXPECT_FALSE(q.equality);
        EXPECT_GT(q.gap, 1e-9);
      }
    }
  }
}

TEST(Properties, VarianceIdentityTermsCoincide) {
  std::mt19937_64 rng(84);
  for (int rep = 0; rep < 15; ++rep) {
    auto in = random_instance(rng, 4);
    auto v = variance_identity(in.f, OperatorKind::V);
    auto dd = variance_identity(in.f, OperatorKind::DD);
    auto ds = variance_identity(in.f, OperatorKind::D_SMALL);
    for (std::size_t k = 0; k < v.size(); ++k) {
      EXPECT_LT(rel(v[k], dd[k]), 1e-10);
      EXPECT_LT(rel(v[k], ds[k]), 1e-10);
    }
  }
}

TEST(Properties, ClassicalEfronSteinIsOrderOne) {
  std::mt19937_64 rng(85);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = random_instance(rng, 4);
    for (auto kind : {OperatorKind::V, OperatorKind::D_SMALL}) {
      auto a = efron_stein_check(in.f, kind);
      auto b = higher_order_es(in.f, 1, kind);
      EXPECT_EQ(a.bound, b.bound);
      EXPECT_EQ(a.variance, b.variance);
      EXPECT_GE(a.gap, -1e-12);
    }
  }
}

TEST(Properties, ChebyshevConsequenceOfCertificates) {
  std::mt19937_64 rng(86);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = random_instance(rng, 4, 2, 2);
    for (int d = 1; d <= 3; ++d) {
      auto f = degree_component(decompose(in.f), d);
      auto c = exp_moment_certificate(f, d);
      ASSERT_TRUE(c.issued);
      for (int j = 0; j <= 20; ++j) {
        const double t = f.sup_norm() * j / 20.0;
        const double bound = 2.0 * std::exp(-c.constant * std::pow(t / c.scale, 2.0 / d));
        EXPECT_LE(exact_tail(f, t), bound + 1e-12);
      }
    }
  }
}

TEST(Properties, CertificatesAreScaleCovariant) {
  std::mt19937_64 rng(87);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = random_instance(rng, 3, 3, 2);
    auto f = degree_component(decompose(in.f), 2);
    auto a = exp_moment_certificate(f, 2);
    const double alpha = 0.01 + 10.0 * (rng() % 1000) / 1000.0;
    auto b = exp_moment_certificate(alpha * f, 2);
    EXPECT_NEAR(b.scale, alpha * a.scale, 1e-12 * b.scale);
    EXPECT_EQ(a.issued, b.issued);
    EXPECT_EQ(a.constant, b.constant);
    EXPECT_NEAR(*a.exact_value, *b.exact_value, 1e-13);
    for (std::size_t k = 0; k < a.conditions.size(); ++k) {
      EXPECT_NEAR(a.conditions[k].value, b.conditions[k].value, 1e-12);
    }
  }
}

TEST(Properties, OpNormBelowHs) {
  std::mt19937_64 rng(88);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 3);
    MultilinearPolynomial p(n);
    for (std::uint64_t S = 1; S < (1u << n); ++S) p.add_term(CoordSet(S), g(rng));
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = g(rng);
    for (int k = 1; k <= 3; ++k) {
      auto A = poly_derivative_tensor(p, k, x);
      EXPECT_LE(tensor_op_norm(A).value, tensor_hs_norm(A) * (1 + 1e-10) + 1e-12);
    }
    auto H = poly_derivative_tensor(p, 2, x);
    OpNormOptions force;
    force.force_iteration = true;
    const double exact = tensor_op_norm(H).value;
    EXPECT_NEAR(tensor_op_norm(H, force).value, exact, 1e-8 * std::max(exact, 1e-12));
  }
}

TEST(Properties, DerivativeTensorsMatchFiniteDifferences) {
  std::mt19937_64 rng(89);
  std::normal_distribution<double> g;
  const int n = 4;
  MultilinearPolynomial p(n);
  for (std::uint64_t S = 1; S < (1u << n); ++S) p.add_term(CoordSet(S), g(rng));
  for (int point = 0; point < 20; ++point) {
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    for (int k = 1; k <= 3; ++k) {
      // Rounding grows like eps / h^k, so the third order needs a coarser step.
      const double h = k < 3 ? 1e-5 : 1e-3;
      auto T = poly_derivative_tensor(p, k, x);
      for (const auto& J : sorted_tuples(n, k)) {
        double fd = 0.0;
        for (int signs = 0; signs < (1 << k); ++signs) {
          auto y = x;
          double sgn = 1.0;
          for (int j = 0; j < k; ++j) {
            const double s = ((signs >> j) & 1) ? 1.0 : -1.0;
            y[static_cast<std::size_t>(J[static_cast<std::size_t>(j)])] += s * h;
            sgn *= s;
          }
          fd += sgn * p.evaluate(y);
        }
        fd /= std::pow(2.0 * h, k);
        EXPECT_NEAR(fd, T.at(J), 1e-4 * std::max(1.0, std::abs(T.at(J))));
      }
    }
  }
}

TEST(Properties, GaussianNormEstimateIsReproducible) {
  MultilinearPolynomial p(3);
  p.add_term({0, 1}, 0.5);
  p.add_term({0, 1, 2}, 0.7);
  auto a = gaussian_norm_estimate(p, 2, 3000, 99);
  auto b = gaussian_norm_estimate(p, 2, 3000, 99);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Properties, CertificatesAreMonotone) {
  std::mt19937_64 rng(90);
  std::uniform_real_distribution<double> u(0.0, 1.3);
  for (int rep = 0; rep < 50; ++rep) {
    SmoothNorms norms;
    norms.order = 3;
    for (int k = 1; k < 3; ++k) norms.op2.push_back(NormValue{u(rng), Provenance::SUPPLIED, 0.0, 0, 0});
    norms.op_inf = NormValue{u(rng), Provenance::SUPPLIED, 0.0, 0, 0};
    auto shrunk = norms;
    for (auto& v : shrunk.op2) v->value *= 0.9;
    shrunk.op_inf->value *= 0.9;
    if (lsi_certificate(norms, 1.0, 3, LsiVariant::OP_CONDITIONS).issued) {
      EXPECT_TRUE(lsi_certificate(shrunk, 1.0, 3, LsiVariant::OP_CONDITIONS).issued);
    }
    const std::vector<double> op2{u(rng) * 0.5, u(rng) * 0.5};
    const std::vector<double> op2s{op2[0] * 0.9, op2[1] * 0.9};
    const double sup = u(rng);
    if (sphere_certificate(4, 3, op2, sup).issued) EXPECT_TRUE(sphere_certificate(4, 3, op2s, 0.9 * sup).issued);
  }
}

TEST(Properties, MonteCarloConvergesToExactValues) {
  std::mt19937_64 rng(91);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = random_instance(rng, 4, 3, 2);
    auto f = degree_component(decompose(in.f), 2);
    auto c = exp_moment_certificate(f, 2);
    auto g = f * (1.0 / c.scale);
    // A larger constant makes the comparison informative.
    const double cc = 0.5;
    double exact = 0.0;
    for (std::uint64_t o = 0; o < g.size(); ++o) exact += in.f.space()->weights()[o] * std::exp(cc * std::abs(g[o]));
    auto mc = sample_exp_moment(SampleSource::product(g.space()), table_function(g), cc, 1.0, 100000, 1000 + rep);
    EXPECT_LE(std::abs(mc.value - exact), 4.0 * mc.std_error);
  }
}
