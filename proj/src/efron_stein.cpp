#include "hoc/efron_stein.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "hoc/detail/numeric.hpp"

namespace hoc {

namespace {

constexpr double kEqualityTolerance = 1e-9;

void require_es_kind(OperatorKind kind) {
  if (kind == OperatorKind::H || kind == OperatorKind::H_PLUS || kind == OperatorKind::H_MINUS) {
    throw ValidationError("Efron-Stein bounds are stated for V, DD, D_SMALL, D_PLUS and D_MINUS, not " +
                          std::string(to_string(kind)));
  }
}

bool is_signed_part(OperatorKind kind) { return kind == OperatorKind::D_PLUS || kind == OperatorKind::D_MINUS; }

double l2(const FunctionTable& f) { return std::sqrt(std::max(f.inner(f), 0.0)); }

bool matches_single_degree(const HoeffdingDecomposition& dec, const FunctionTable& f, int d) {
  auto rest = f - degree_component(dec, d);
  rest += -dec.mean();
  return l2(rest) <= kEqualityTolerance * l2(f);
}

double max_abs_diff(const FunctionTable& a, const FunctionTable& b) {
  double m = 0.0;
  for (std::uint64_t o = 0; o < a.size(); ++o) m = std::max(m, std::abs(a[o] - b[o]));
  return m;
}

}  // namespace

double tensor_energy(const FunctionTable& f, OperatorKind kind, int d) {
  const auto hs = hs_field(f, kind, d);
  const double energy = hs.inner(hs);
  return is_signed_part(kind) ? 2.0 * energy : energy;
}

ESReport higher_order_es(const FunctionTable& f, int d, OperatorKind kind) {
  require_es_kind(kind);
  const int n = f.space()->dimension();
  if (d < 1 || d > n) throw ValidationError("Efron-Stein order must lie in [1, n]");
  const auto dec = decompose(f);
  if (!is_degenerate_from(dec, d)) {
    throw PreconditionError("order-" + std::to_string(d) +
                            " Efron-Stein needs vanishing Hoeffding terms below degree " + std::to_string(d) +
                            ", but the lowest nonvanishing degree is " +
                            std::to_string(lowest_nonvanishing_degree(dec)));
  }
  ESReport r;
  r.kind = kind;
  r.order = d;
  r.variance = f.variance();
  r.bound = tensor_energy(f, kind, d) / detail::factorial(d);
  r.gap = r.bound - r.variance;
  r.equality = matches_single_degree(dec, f, d);
  return r;
}

ESReport efron_stein_check(const FunctionTable& f, OperatorKind kind) { return higher_order_es(f, 1, kind); }

std::vector<double> variance_identity(const FunctionTable& f, OperatorKind kind) {
  require_es_kind(kind);
  const auto dec = decompose(f);
  const int n = f.space()->dimension();
  std::vector<double> terms(static_cast<std::size_t>(n), 0.0);
  for (int k = 1; k <= n; ++k) {
    const auto fk = degree_component(dec, k);
    if (fk.sup_norm() == 0.0) continue;
    terms[static_cast<std::size_t>(k - 1)] = tensor_energy(fk, kind, k) / detail::factorial(k);
  }
  return terms;
}

std::vector<double> alternating_identity(const FunctionTable& f, OperatorKind kind) {
  require_es_kind(kind);
  const int n = f.space()->dimension();
  std::vector<double> terms(static_cast<std::size_t>(n), 0.0);
  for (int k = 1; k <= n; ++k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    terms[static_cast<std::size_t>(k - 1)] = sign * tensor_energy(f, kind, k) / detail::factorial(k);
  }
  return terms;
}

std::vector<IdentityCheck> verify_identities(const FunctionTable& input, double tolerance) {
  const double scale = input.sup_norm();
  const FunctionTable f = scale > 0.0 ? input * (1.0 / scale) : input;
  const int n = f.space()->dimension();
  std::vector<IdentityCheck> out;
  auto record = [&](std::string name, const std::function<double()>& residual) {
    IdentityCheck c{std::move(name), 0.0, tolerance, false};
    c.residual = residual();
    c.pass = c.residual <= tolerance;
    out.push_back(std::move(c));
  };

  const auto dec = decompose(f);
  record("hoeffding.reconstruction", [&] { return max_abs_diff(dec.reconstruct(), f); });
  record("hoeffding.degeneracy", [&] {
    double m = 0.0;
    for (const auto& [S, h] : dec.components()) {
      for (int i : S.indices()) m = std::max(m, cond_expectation(h, CoordSet{}.with(i)).sup_norm());
    }
    return m;
  });
  record("hoeffding.orthogonality", [&] {
    double m = 0.0;
    for (auto a = dec.components().begin(); a != dec.components().end(); ++a) {
      for (auto b = std::next(a); b != dec.components().end(); ++b) m = std::max(m, std::abs(a->second.inner(b->second)));
    }
    return m;
  });

  const OperatorKind es_kinds[] = {OperatorKind::V, OperatorKind::DD, OperatorKind::D_SMALL, OperatorKind::D_PLUS,
                                   OperatorKind::D_MINUS};
  for (int d = 1; d <= std::min(n, 2); ++d) {
    record("norm_equality.order" + std::to_string(d), [&] {
      std::vector<double> vals;
      for (auto kind : es_kinds) vals.push_back(tensor_energy(f, kind, d));
      const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
      return *hi - *lo;
    });
  }

  const double variance = f.variance();
  for (auto kind : {OperatorKind::V, OperatorKind::DD, OperatorKind::D_SMALL}) {
    record("variance_identity." + std::string(to_string(kind)), [&] {
      const auto c = variance_identity(f, kind);
      detail::CompensatedSum s;
      for (double x : c) s.add(x);
      return std::abs(s.value() - variance);
    });
  }
  for (auto kind : {OperatorKind::V, OperatorKind::DD, OperatorKind::D_SMALL, OperatorKind::D_PLUS}) {
    record("alternating_identity." + std::string(to_string(kind)), [&] {
      const auto t = alternating_identity(f, kind);
      detail::CompensatedSum s;
      for (double x : t) s.add(x);
      return std::abs(s.value() - variance);
    });
  }

  for (auto kind : es_kinds) {
    record("efron_stein." + std::string(to_string(kind)), [&] { return std::max(0.0, -efron_stein_check(f, kind).gap); });
  }
  const int low = lowest_nonvanishing_degree(dec);
  if (low >= 2) {
    for (auto kind : es_kinds) {
      record("higher_order_es.order" + std::to_string(low) + "." + std::string(to_string(kind)),
             [&] { return std::max(0.0, -higher_order_es(f, low, kind).gap); });
    }
  }

  for (int d = 2; d <= std::min(n, 3); ++d) {
    record("recursion.order" + std::to_string(d), [&] {
      const auto lower = hs_field(f, OperatorKind::H, d - 1);
      const auto lhs = hs_field(lower, OperatorKind::H, 1);
      const auto rhs = hs_field(f, OperatorKind::H, d);
      double m = 0.0;
      for (std::uint64_t o = 0; o < lhs.size(); ++o) m = std::max(m, lhs[o] - rhs[o]);
      return m;
    });
  }

  record("collapse.diagonal", [&] {
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
      const int single[] = {i};
      const int pair[] = {i, i};
      const auto h1 = difference_entry(f, OperatorKind::H, single);
      const auto h2 = difference_entry(f, OperatorKind::H, pair);
      m = std::max(m, max_abs_diff(h2, h1 * 0.5));
      m = std::max(m, max_abs_diff(difference_entry(f, OperatorKind::DD, pair),
                                   difference_entry(f, OperatorKind::DD, single)));
    }
    return m;
  });

  record("domination.d_by_h", [&] {
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
      const int single[] = {i};
      const std::pair<OperatorKind, OperatorKind> pairs[] = {{OperatorKind::D_SMALL, OperatorKind::H},
                                                             {OperatorKind::D_PLUS, OperatorKind::H_PLUS},
                                                             {OperatorKind::D_MINUS, OperatorKind::H_MINUS}};
      for (const auto& [dk, hk] : pairs) {
        const auto dv = difference_entry(f, dk, single);
        const auto hv = difference_entry(f, hk, single);
        for (std::uint64_t o = 0; o < dv.size(); ++o) m = std::max(m, dv[o] * dv[o] - 2.0 * hv[o] * hv[o]);
      }
    }
    return m;
  });

  record("annihilation", [&] {
    double m = 0.0;
    for (int k = 1; k <= std::min(n, 2); ++k) {
      auto tail = FunctionTable::constant(f.space(), 0.0);
      for (int j = k; j <= n; ++j) tail += degree_component(dec, j);
      for (const auto& t : sorted_tuples(n, k)) {
        m = std::max(m, max_abs_diff(difference_entry(f, OperatorKind::H, t), difference_entry(tail, OperatorKind::H, t)));
      }
    }
    return m;
  });

  return out;
}

}  // namespace hoc
