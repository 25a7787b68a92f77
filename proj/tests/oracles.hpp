#pragma once

// Slow reference implementations written straight from the definitions.
// They share nothing with the library beyond the outcome indexing
// (mixed radix, coordinate 0 fastest) and are only meant for tiny spaces.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "hoc/product_space.hpp"

namespace oracle {

struct Space {
  std::vector<std::vector<double>> atoms;
  std::vector<std::vector<double>> probs;

  int n() const { return static_cast<int>(atoms.size()); }

  std::size_t size() const {
    std::size_t s = 1;
    for (const auto& a : atoms) s *= a.size();
    return s;
  }

  std::vector<int> digits(std::size_t w) const {
    std::vector<int> d(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      d[i] = static_cast<int>(w % atoms[i].size());
      w /= atoms[i].size();
    }
    return d;
  }

  std::size_t index(const std::vector<int>& d) const {
    std::size_t w = 0;
    std::size_t stride = 1;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      w += static_cast<std::size_t>(d[i]) * stride;
      stride *= atoms[i].size();
    }
    return w;
  }

  double weight(const std::vector<int>& d) const {
    double p = 1.0;
    for (std::size_t i = 0; i < d.size(); ++i) p *= probs[i][static_cast<std::size_t>(d[i])];
    return p;
  }

  double weight_on(const std::vector<int>& d, std::uint64_t mask) const {
    double p = 1.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if ((mask >> i) & 1U) p *= probs[i][static_cast<std::size_t>(d[i])];
    }
    return p;
  }
};

using Table = std::vector<double>;

inline Space from(const hoc::ProductSpace& s) {
  Space o;
  for (const auto& c : s.coordinates()) {
    o.atoms.emplace_back(c.support().begin(), c.support().end());
    o.probs.emplace_back(c.probs().begin(), c.probs().end());
  }
  return o;
}

inline hoc::SpacePtr to_library(const Space& s) {
  std::vector<hoc::FiniteDistribution> d;
  for (int i = 0; i < s.n(); ++i) d.emplace_back(s.atoms[i], s.probs[i]);
  return hoc::build_space(std::move(d));
}

inline double expectation(const Space& s, const Table& f) {
  double acc = 0.0;
  for (std::size_t w = 0; w < f.size(); ++w) acc += s.weight(s.digits(w)) * f[w];
  return acc;
}

/// E[f | X_T] by summing over every outcome that agrees with w on T.
inline Table conditional(const Space& s, const Table& f, std::uint64_t keep) {
  Table out(f.size(), 0.0);
  const std::uint64_t all = (std::uint64_t{1} << s.n()) - 1;
  for (std::size_t w = 0; w < f.size(); ++w) {
    const auto dw = s.digits(w);
    double num = 0.0;
    for (std::size_t v = 0; v < f.size(); ++v) {
      const auto dv = s.digits(v);
      bool agree = true;
      for (int i = 0; i < s.n(); ++i) {
        if (((keep >> i) & 1U) && dv[i] != dw[i]) agree = false;
      }
      if (agree) num += s.weight_on(dv, all & ~keep) * f[v];
    }
    out[w] = num;
  }
  return out;
}

/// Component h_S = sum over T subset S of (-1)^{|S\T|} E[f | X_T].
inline Table hoeffding_component(const Space& s, const Table& f, std::uint64_t S) {
  Table h(f.size(), 0.0);
  for (std::uint64_t T = S;; T = (T - 1) & S) {
    const auto c = conditional(s, f, T);
    const double sign = (std::popcount(S & ~T) % 2) ? -1.0 : 1.0;
    for (std::size_t w = 0; w < f.size(); ++w) h[w] += sign * c[w];
    if (T == 0) break;
  }
  return h;
}

/// Alternating sum over the tuple J with the coordinates outside T replaced by ybar.
inline double delta(const Space& s, const Table& f, const std::vector<int>& w, const std::vector<int>& J,
                    const std::vector<int>& ybar) {
  const int d = static_cast<int>(J.size());
  double acc = 0.0;
  for (int T = 0; T < (1 << d); ++T) {
    auto v = w;
    int replaced = 0;
    for (int k = 0; k < d; ++k) {
      if (!((T >> k) & 1)) {
        v[static_cast<std::size_t>(J[static_cast<std::size_t>(k)])] = ybar[static_cast<std::size_t>(k)];
        ++replaced;
      }
    }
    acc += (replaced % 2 ? -1.0 : 1.0) * f[s.index(v)];
  }
  return acc;
}

inline void for_each_choice(const Space& s, const std::vector<int>& J, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> y(J.size(), 0);
  while (true) {
    fn(y);
    std::size_t k = 0;
    while (k < J.size()) {
      if (++y[k] < static_cast<int>(s.atoms[static_cast<std::size_t>(J[k])].size())) break;
      y[k] = 0;
      ++k;
    }
    if (k == J.size()) return;
  }
}

/// 2^{-d} sup over both the original and the replacement values on J.
inline Table sup_difference(const Space& s, const Table& f, const std::vector<int>& J, int part = 0) {
  const double scale = std::ldexp(1.0, -static_cast<int>(J.size()));
  Table out(f.size(), 0.0);
  for (std::size_t w = 0; w < f.size(); ++w) {
    auto base = s.digits(w);
    double best = 0.0;
    for_each_choice(s, J, [&](const std::vector<int>& x) {
      auto v = base;
      for (std::size_t k = 0; k < J.size(); ++k) v[static_cast<std::size_t>(J[k])] = x[k];
      for_each_choice(s, J, [&](const std::vector<int>& y) {
        const double d = delta(s, f, v, J, y);
        best = std::max(best, part == 0 ? std::abs(d) : std::max(part * d, 0.0));
      });
    });
    out[w] = scale * best;
  }
  return out;
}

/// sqrt(2^{-d} E_ybar g(Delta)^2) with g the identity or a signed part.
inline Table resampled_difference(const Space& s, const Table& f, const std::vector<int>& J, int part) {
  const double scale = std::ldexp(1.0, -static_cast<int>(J.size()));
  Table out(f.size(), 0.0);
  for (std::size_t w = 0; w < f.size(); ++w) {
    const auto base = s.digits(w);
    double acc = 0.0;
    for_each_choice(s, J, [&](const std::vector<int>& y) {
      double p = 1.0;
      for (std::size_t k = 0; k < J.size(); ++k) {
        p *= s.probs[static_cast<std::size_t>(J[k])][static_cast<std::size_t>(y[k])];
      }
      double d = delta(s, f, base, J, y);
      if (part > 0) d = std::max(d, 0.0);
      if (part < 0) d = std::max(-d, 0.0);
      acc += p * d * d;
    });
    out[w] = std::sqrt(scale * acc);
  }
  return out;
}

/// prod_{j in J} (Id - E_j) f.
inline Table recentered(const Space& s, Table f, const std::vector<int>& J) {
  const std::uint64_t all = (std::uint64_t{1} << s.n()) - 1;
  for (int j : J) {
    const auto e = conditional(s, f, all & ~(std::uint64_t{1} << j));
    for (std::size_t w = 0; w < f.size(); ++w) f[w] -= e[w];
  }
  return f;
}

/// sqrt(E_J (prod (Id - E_j) f)^2).
inline Table variance_difference(const Space& s, const Table& f, const std::vector<int>& J) {
  auto g = recentered(s, f, J);
  for (auto& v : g) v *= v;
  std::uint64_t mask = (std::uint64_t{1} << s.n()) - 1;
  for (int j : J) mask &= ~(std::uint64_t{1} << j);
  auto e = conditional(s, g, mask);
  for (auto& v : e) v = std::sqrt(std::max(v, 0.0));
  return e;
}

inline double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

inline void for_each_sorted_tuple(int n, int d, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> t(static_cast<std::size_t>(d));
  std::function<void(int, int)> rec = [&](int pos, int start) {
    if (pos == d) {
      fn(t);
      return;
    }
    for (int i = start; i < n; ++i) {
      t[static_cast<std::size_t>(pos)] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
}

/// Euclidean norm over all n^d index tuples with zero diagonal.
inline Table hs_field(const Space& s, int d, const std::function<Table(const std::vector<int>&)>& entry) {
  Table acc(s.size(), 0.0);
  for_each_sorted_tuple(s.n(), d, [&](const std::vector<int>& J) {
    const auto e = entry(J);
    for (std::size_t w = 0; w < acc.size(); ++w) acc[w] += e[w] * e[w];
  });
  for (auto& v : acc) v = std::sqrt(factorial(d) * v);
  return acc;
}

inline double lp(const Space& s, const Table& f, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (std::size_t w = 0; w < f.size(); ++w) acc += s.weight(s.digits(w)) * std::pow(std::abs(f[w]), p);
  return std::pow(acc, 1.0 / p);
}

inline Space random_space(std::mt19937_64& rng, int n, int max_support, int min_support = 1) {
  std::uniform_int_distribution<int> size(min_support, max_support);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::normal_distribution<double> g;
  Space s;
  for (int i = 0; i < n; ++i) {
    const int k = size(rng);
    std::vector<double> a;
    std::vector<double> p;
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
      a.push_back(j + 0.25 * g(rng));
      p.push_back(u(rng));
      total += p.back();
    }
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    p.resize(a.size());
    total = 0.0;
    for (double v : p) total += v;
    for (auto& v : p) v /= total;
    s.atoms.push_back(a);
    s.probs.push_back(p);
  }
  return s;
}

inline Table random_table(std::mt19937_64& rng, const Space& s) {
  std::normal_distribution<double> g;
  Table f(s.size());
  for (auto& v : f) v = g(rng);
  return f;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace oracle
