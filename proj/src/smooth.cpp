#include "hoc/smooth.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "hoc/detail/numeric.hpp"

namespace hoc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t power(int n, int d) {
  std::size_t r = 1;
  for (int s = 0; s < d; ++s) r *= static_cast<std::size_t>(n);
  return r;
}

double lsi_constant() { return 1.0 / (8.0 * std::numbers::e); }

Condition make_condition(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value <= threshold * (1.0 + 1e-12)};
}

void finish(Certificate& cert) {
  cert.issued = std::all_of(cert.conditions.begin(), cert.conditions.end(), [](const Condition& c) { return c.pass; });
}

std::string exponent_text(int d) {
  if (d == 1) return "^2";
  return d == 2 ? "" : "^{2/" + std::to_string(d) + "}";
}

const NormValue& require_norm(const std::optional<NormValue>& v, const std::string& name) {
  if (!v) throw ValidationError("missing norm value " + name);
  return *v;
}

double norm_value_for_tail(const std::vector<std::optional<NormValue>>& op2, int k) {
  const auto idx = static_cast<std::size_t>(k - 1);
  if (idx >= op2.size()) throw ValidationError("missing norm value op2[" + std::to_string(k) + "]");
  return require_norm(op2[idx], "op2[" + std::to_string(k) + "]").certified();
}

double shifted_power_iteration(const ConstantHypermatrix& B, double shift, const OpNormOptions& opt) {
  const int n = B.dimension();
  double best = -kInf;
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int r = 0; r < opt.restarts; ++r) {
    if (r == 0) {
      std::fill(v.begin(), v.end(), 1.0);
    } else {
      CounterRng rng(opt.seed, static_cast<std::uint64_t>(r));
      for (double& x : v) x = rng.normal();
    }
    double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm == 0.0) continue;
    for (double& x : v) x /= norm;
    double lambda = 0.0;
    for (int it = 0; it < opt.iterations; ++it) {
      auto w = B.contract(v, 1);
      double next_lambda = std::inner_product(w.begin(), w.end(), v.begin(), 0.0);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += shift * v[i];
      norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
      if (norm == 0.0) break;
      for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / norm;
      const bool converged = it > 0 && std::abs(next_lambda - lambda) <= opt.tolerance * std::max(1.0, std::abs(next_lambda));
      lambda = next_lambda;
      if (converged) break;
    }
    const auto w = B.contract(v, 1);
    lambda = std::inner_product(w.begin(), w.end(), v.begin(), 0.0);
    best = std::max(best, lambda);
  }
  return best;
}

}  // namespace

ConstantHypermatrix::ConstantHypermatrix(int n, int order, std::vector<double> entries)
    : n_(n), order_(order), entries_(std::move(entries)) {
  if (n < 1 || order < 1) throw ValidationError("hypermatrix needs n >= 1 and order >= 1");
  if (entries_.size() != power(n, order)) throw ValidationError("hypermatrix needs n^order entries");
  for (double e : entries_) {
    if (!std::isfinite(e)) throw ValidationError("hypermatrix entries must be finite");
  }
}

ConstantHypermatrix ConstantHypermatrix::zeros(int n, int order) {
  return {n, order, std::vector<double>(power(n, order), 0.0)};
}

std::size_t ConstantHypermatrix::offset(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != order_) throw ValidationError("index length does not match tensor order");
  std::size_t o = 0;
  for (int i : index) {
    if (i < 0 || i >= n_) throw ValidationError("tensor index out of range");
    o = o * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  }
  return o;
}

double ConstantHypermatrix::at(std::span<const int> index) const { return entries_[offset(index)]; }

void ConstantHypermatrix::set(std::span<const int> index, double value) { entries_[offset(index)] = value; }

bool ConstantHypermatrix::is_symmetric(double tol) const {
  std::vector<int> idx(static_cast<std::size_t>(order_));
  std::vector<int> perm;
  for (std::size_t o = 0; o < entries_.size(); ++o) {
    std::size_t rest = o;
    for (int s = order_ - 1; s >= 0; --s) {
      idx[static_cast<std::size_t>(s)] = static_cast<int>(rest % static_cast<std::size_t>(n_));
      rest /= static_cast<std::size_t>(n_);
    }
    // Adjacent transpositions generate the symmetric group.
    for (int s = 0; s + 1 < order_; ++s) {
      perm = idx;
      std::swap(perm[static_cast<std::size_t>(s)], perm[static_cast<std::size_t>(s + 1)]);
      if (std::abs(entries_[o] - at(perm)) > tol) return false;
    }
  }
  return true;
}

std::vector<double> ConstantHypermatrix::contract(std::span<const double> v, int free) const {
  if (static_cast<int>(v.size()) != n_) throw ValidationError("vector length does not match tensor dimension");
  if (free < 0 || free > order_) throw ValidationError("invalid number of free slots");
  std::vector<double> cur = entries_;
  for (int step = 0; step < order_ - free; ++step) {
    const std::size_t inner = cur.size() / static_cast<std::size_t>(n_);
    std::vector<double> next(inner, 0.0);
    for (int i = 0; i < n_; ++i) {
      const double vi = v[static_cast<std::size_t>(i)];
      if (vi == 0.0) continue;
      const double* row = cur.data() + static_cast<std::size_t>(i) * inner;
      for (std::size_t j = 0; j < inner; ++j) next[j] += vi * row[j];
    }
    cur = std::move(next);
  }
  return cur;
}

ConstantHypermatrix poly_derivative_tensor(const MultilinearPolynomial& p, int k, std::span<const double> x) {
  const int n = p.dimension();
  if (k < 1 || k > n) throw ValidationError("derivative order k = " + std::to_string(k) + " must lie in [1, n]");
  if (static_cast<int>(x.size()) != n) throw ValidationError("point dimension does not match the polynomial");
  auto A = ConstantHypermatrix::zeros(n, k);
  for (const auto& [I, a] : p.terms()) {
    if (I.size() < k) continue;
    const auto idx = I.indices();
    const int m = static_cast<int>(idx.size());
    // Every k-subset J of I contributes a * prod_{I \ J} x_j at all orderings of J.
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      if (std::popcount(mask) != k) continue;
      double coeff = a;
      std::vector<int> J;
      for (int s = 0; s < m; ++s) {
        if ((mask >> s) & 1U) {
          J.push_back(idx[static_cast<std::size_t>(s)]);
        } else {
          coeff *= x[static_cast<std::size_t>(idx[static_cast<std::size_t>(s)])];
        }
      }
      do {
        A.set(J, A.at(J) + coeff);
      } while (std::next_permutation(J.begin(), J.end()));
    }
  }
  return A;
}

double tensor_hs_norm(const ConstantHypermatrix& A) {
  double s = 0.0;
  for (double e : A.entries()) s += e * e;
  return std::sqrt(s);
}

double tensor_max_norm(const ConstantHypermatrix& A) {
  double m = 0.0;
  const int n = A.dimension();
  const int d = A.order();
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (std::size_t o = 0; o < A.entries().size(); ++o) {
    std::size_t rest = o;
    for (int s = d - 1; s >= 0; --s) {
      idx[static_cast<std::size_t>(s)] = static_cast<int>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
    }
    if (std::adjacent_find(idx.begin(), idx.end(), std::greater_equal<>()) != idx.end()) continue;
    m = std::max(m, std::abs(A.entries()[o]));
  }
  return m;
}

OpNormResult tensor_op_norm(const ConstantHypermatrix& A, const OpNormOptions& options) {
  if (!A.is_symmetric(1e-12 * std::max(1.0, tensor_max_norm(A)) + 1e-12)) {
    throw ValidationError("operator norm needs a symmetric hypermatrix");
  }
  const int n = A.dimension();
  const int d = A.order();
  const double hs = tensor_hs_norm(A);
  OpNormResult r;
  if (hs == 0.0) {
    r.exact = true;
    return r;
  }
  if (d == 1) {
    r.value = r.upper = hs;
    r.exact = true;
    return r;
  }
  if (d == 2 && !options.force_iteration) {
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) = A.entries()[static_cast<std::size_t>(i * n + j)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    r.value = r.upper = solver.eigenvalues().cwiseAbs().maxCoeff();
    r.exact = true;
    return r;
  }
  const double shift = (d - 1) * hs;
  std::vector<double> neg(A.entries().begin(), A.entries().end());
  for (double& e : neg) e = -e;
  const ConstantHypermatrix minus(n, d, std::move(neg));
  r.value = std::max(shifted_power_iteration(A, shift, options), shifted_power_iteration(minus, shift, options));
  r.value = std::max(r.value, 0.0);
  r.upper = hs;
  r.exact = false;
  return r;
}

double gaussian_hs_norm(const MultilinearPolynomial& p, int k) {
  if (k < 1) throw ValidationError("derivative order must be positive");
  // Monomials in independent standard Gaussians are orthonormal; each term alpha_I
  // contributes to C(|I|, k) sorted tuples, each counted k! times.
  detail::CompensatedSum s;
  for (const auto& [I, a] : p.terms()) s.add(detail::binomial(I.size(), k) * a * a);
  return std::sqrt(detail::factorial(k) * s.value());
}

MCEstimate gaussian_norm_estimate(const MultilinearPolynomial& p, int k, std::uint64_t N, std::uint64_t seed) {
  const int n = p.dimension();
  if (k < 1 || k > n) throw ValidationError("derivative order k must lie in [1, n]");
  const auto source = SampleSource::gaussian(n);
  OpNormOptions opt;
  opt.restarts = 8;
  auto squared = sample_mean(
      source,
      [&](std::span<const double> x) {
        const double v = tensor_op_norm(poly_derivative_tensor(p, k, x), opt).value;
        return v * v;
      },
      N, seed);
  MCEstimate est = squared;
  est.value = std::sqrt(std::max(squared.value, 0.0));
  est.std_error = est.value > 0.0 ? squared.std_error / (2.0 * est.value) : 0.0;
  return est;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::EXACT: return "EXACT";
    case Provenance::MONTE_CARLO: return "MONTE_CARLO";
    case Provenance::UPPER_BOUND: return "UPPER_BOUND";
    case Provenance::SUPPLIED: return "SUPPLIED";
  }
  return "?";
}

SmoothNorms smooth_norms_for_polynomial(const MultilinearPolynomial& p, int d, std::uint64_t N, std::uint64_t seed) {
  const int n = p.dimension();
  if (d < 1 || d > n) throw ValidationError("order d must lie in [1, n]");
  const int degree = p.degree();
  const std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
  auto constant_op = [&](int k) {
    const auto r = tensor_op_norm(poly_derivative_tensor(p, k, origin));
    return r.exact ? NormValue{r.value, Provenance::EXACT} : NormValue{r.upper, Provenance::UPPER_BOUND};
  };

  SmoothNorms norms;
  norms.order = d;
  for (int k = 1; k < d; ++k) {
    if (k == 1 || k > degree) {
      norms.op2.push_back(NormValue{gaussian_hs_norm(p, k), Provenance::EXACT});
    } else if (k == degree) {
      norms.op2.push_back(constant_op(k));
    } else if (k == 2) {
      const auto est = gaussian_norm_estimate(p, k, N, seed);
      norms.op2.push_back(NormValue{est.value, Provenance::MONTE_CARLO, est.std_error, est.samples, est.seed});
    } else {
      norms.op2.push_back(NormValue{gaussian_hs_norm(p, k), Provenance::UPPER_BOUND});
    }
  }
  if (degree <= d) {
    norms.op_inf = constant_op(d);
  } else {
    norms.op_inf = NormValue{kInf, Provenance::EXACT};
  }
  norms.hs2 = NormValue{gaussian_hs_norm(p, d), Provenance::EXACT};
  return norms;
}

Certificate lsi_certificate(const SmoothNorms& norms, double sigma2, int d, LsiVariant variant) {
  if (!(sigma2 > 0.0)) throw ValidationError("log-Sobolev constant sigma2 must be positive");
  if (d < 1) throw ValidationError("order d must be positive");
  Certificate cert;
  cert.statement = StatementKind::LSI;
  cert.order = d;
  cert.constant = lsi_constant();
  cert.values["sigma2"] = sigma2;
  cert.values["exponent_constant"] = cert.constant / sigma2;
  const double sigma = std::sqrt(sigma2);
  bool sampled = false;
  const auto& op_inf = require_norm(norms.op_inf, "op_inf");
  if (variant == LsiVariant::OP_CONDITIONS) {
    for (int k = 1; k < d; ++k) {
      const auto idx = static_cast<std::size_t>(k - 1);
      const std::string name = "op2.order" + std::to_string(k);
      if (idx >= norms.op2.size()) throw ValidationError("missing norm value " + name);
      const auto& v = require_norm(norms.op2[idx], name);
      sampled |= v.provenance == Provenance::MONTE_CARLO;
      cert.conditions.push_back(make_condition(name, v.certified(), std::min(1.0, std::pow(sigma, d - k))));
    }
  } else {
    const auto& hs = require_norm(norms.hs2, "hs2");
    sampled |= hs.provenance == Provenance::MONTE_CARLO;
    cert.conditions.push_back(make_condition("hs2.order" + std::to_string(d), hs.certified(), 1.0));
    cert.notes.push_back("assumes centered partial derivatives of orders 1..d-1 (attested, not verified)");
  }
  sampled |= op_inf.provenance == Provenance::MONTE_CARLO;
  cert.conditions.push_back(make_condition("op_inf.order" + std::to_string(d), op_inf.certified(), 1.0));
  if (sampled) cert.notes.push_back("Monte Carlo norm values enter the conditions as value + 3 std_error");
  cert.claim = "integral of exp((c/sigma2) |f|" + exponent_text(d) + ") dmu <= 2";
  finish(cert);
  return cert;
}

TailReport continuous_tail(const SmoothNorms& norms, double sigma2, int d, double t) {
  if (!(sigma2 > 0.0)) throw ValidationError("log-Sobolev constant sigma2 must be positive");
  if (!(t >= 0.0)) throw ValidationError("tail level t must be nonnegative");
  if (d < 1) throw ValidationError("order d must be positive");
  TailReport r;
  r.t = t;
  auto term = [&](double norm, int k) { return norm == 0.0 ? kInf : std::pow(t, 2.0 / k) / (sigma2 * std::pow(norm, 2.0 / k)); };
  if (t == 0.0) {
    r.eta = 0.0;
  } else {
    r.eta = term(require_norm(norms.op_inf, "op_inf").certified(), d);
    for (int k = 1; k < d; ++k) r.eta = std::min(r.eta, term(norm_value_for_tail(norms.op2, k), k));
  }
  const double de = d * std::numbers::e;
  r.bound = std::isinf(r.eta) ? 0.0 : std::exp(2.0 - r.eta / (de * de));
  r.probability_bound = std::min(1.0, r.bound);
  return r;
}

Certificate sphere_certificate(int n, int d, std::span<const double> op2, double sup_op) {
  if (n < 2) throw ValidationError("sphere dimension n must be at least 2");
  if (d < 1) throw ValidationError("order d must be positive");
  if (static_cast<int>(op2.size()) < d - 1) throw ValidationError("need op2 values for orders 1..d-1");
  Certificate cert;
  cert.statement = StatementKind::SPHERE;
  cert.order = d;
  cert.constant = lsi_constant();
  cert.values["n"] = n;
  cert.values["exponent_constant"] = (n - 1) * cert.constant;
  for (int k = 1; k < d; ++k) {
    cert.conditions.push_back(make_condition("op2.order" + std::to_string(k), op2[static_cast<std::size_t>(k - 1)],
                                             std::pow(static_cast<double>(n), -(d - k) / 2.0)));
  }
  cert.conditions.push_back(make_condition("sup_op.order" + std::to_string(d), sup_op, 1.0));
  cert.claim = "integral of exp((n-1) |f|" + exponent_text(d) + " / (8e)) dsigma <= 2";
  finish(cert);
  return cert;
}

}  // namespace hoc
