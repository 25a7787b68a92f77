#include "hoc/diff_ops.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "hoc/detail/numeric.hpp"
#include "hoc/detail/parallel.hpp"

namespace hoc {

namespace {

bool uses_resampling(OperatorKind kind) {
  return kind != OperatorKind::V && kind != OperatorKind::DD;
}

bool is_sup_kind(OperatorKind kind) {
  return kind == OperatorKind::H || kind == OperatorKind::H_PLUS || kind == OperatorKind::H_MINUS;
}

/// In place: v <- max over coordinate i of v (constant along i afterwards).
void maximize_coordinate(const ProductSpace& space, std::vector<double>& v, int i) {
  const std::uint64_t stride = space.stride(i);
  const std::size_t radix = space.radix(i);
  if (radix == 1) return;
  const std::uint64_t block = stride * radix;
  for (std::uint64_t base = 0; base < v.size(); base += block) {
    for (std::uint64_t off = 0; off < stride; ++off) {
      const std::uint64_t o = base + off;
      double m = v[o];
      for (std::size_t a = 1; a < radix; ++a) m = std::max(m, v[o + a * stride]);
      for (std::size_t a = 0; a < radix; ++a) v[o + a * stride] = m;
    }
  }
}

double part(OperatorKind kind, double delta) {
  switch (kind) {
    case OperatorKind::H_PLUS:
    case OperatorKind::D_PLUS:
      return std::max(delta, 0.0);
    case OperatorKind::H_MINUS:
    case OperatorKind::D_MINUS:
      return std::max(-delta, 0.0);
    default:
      return std::abs(delta);
  }
}

/// Resampling kinds. For every outcome w and every value ybar of the copies on J, the
/// iterated difference prod_{j in J}(Id - T_j) f equals sum_{U subset J} (-1)^{|U|}
/// f(w with coordinates U replaced by ybar), evaluated through index offsets.
FunctionTable resampling_entry(const FunctionTable& f, OperatorKind kind, const std::vector<int>& coords,
                               int order) {
  const auto& space = *f.space();
  const auto values = f.values();
  const std::size_t m = coords.size();
  const std::size_t subsets = std::size_t{1} << m;

  std::vector<std::int64_t> stride(m);
  std::vector<std::size_t> radix(m);
  for (std::size_t s = 0; s < m; ++s) {
    stride[s] = static_cast<std::int64_t>(space.stride(coords[s]));
    radix[s] = space.radix(coords[s]);
  }
  std::vector<double> sign(subsets);
  for (std::size_t u = 0; u < subsets; ++u) sign[u] = (std::popcount(u) % 2 == 0) ? 1.0 : -1.0;

  std::vector<double> raw(values.size());
  std::vector<std::size_t> x(m);
  std::vector<std::size_t> ybar(m);
  std::vector<std::int64_t> delta(m);
  std::vector<std::int64_t> offset(subsets);
  const bool sup = is_sup_kind(kind);

  for (std::uint64_t o = 0; o < values.size(); ++o) {
    for (std::size_t s = 0; s < m; ++s) x[s] = space.digit(o, coords[s]);
    std::fill(ybar.begin(), ybar.end(), 0);
    double acc = 0.0;
    while (true) {
      double weight = 1.0;
      for (std::size_t s = 0; s < m; ++s) {
        delta[s] = (static_cast<std::int64_t>(ybar[s]) - static_cast<std::int64_t>(x[s])) * stride[s];
        weight *= space.coordinate(coords[s]).prob(ybar[s]);
      }
      offset[0] = 0;
      double diff = values[o];
      for (std::size_t u = 1; u < subsets; ++u) {
        const auto low = static_cast<std::size_t>(std::countr_zero(u));
        offset[u] = offset[u & (u - 1)] + delta[low];
        diff += sign[u] * values[static_cast<std::uint64_t>(static_cast<std::int64_t>(o) + offset[u])];
      }
      const double g = part(kind, diff);
      if (sup) {
        acc = std::max(acc, g);
      } else {
        acc += weight * g * g;
      }
      std::size_t s = 0;
      for (; s < m; ++s) {
        if (++ybar[s] < radix[s]) break;
        ybar[s] = 0;
      }
      if (s == m) break;
    }
    raw[o] = acc;
  }

  const double scale = std::ldexp(1.0, -order);
  if (sup) {
    for (int c : coords) maximize_coordinate(space, raw, c);
    for (double& r : raw) r *= scale;
  } else {
    for (double& r : raw) r = std::sqrt(scale * r);
  }
  return {f.space(), std::move(raw)};
}

std::vector<int> distinct_coords(const ProductSpace& space, std::span<const int> index) {
  std::vector<int> coords(index.begin(), index.end());
  for (int i : coords) {
    if (i < 0 || i >= space.dimension()) throw ValidationError("tuple index " + std::to_string(i) + " out of range");
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  return coords;
}

void check_order(const ProductSpace& space, int d) {
  if (d < 1 || d > space.dimension()) {
    throw ValidationError("tensor order " + std::to_string(d) + " must lie in [1, n] with n = " +
                          std::to_string(space.dimension()));
  }
}

void check_budget(const ProductSpace& space, OperatorKind kind, int d) {
  const auto cost = tensor_cost(space, kind, d);
  if (cost > space.limits().max_tensor_evaluations) {
    throw BudgetError("order-" + std::to_string(d) + " " + std::string(to_string(kind)) + " tensor needs " +
                      std::to_string(cost) + " evaluations, above the budget of " +
                      std::to_string(space.limits().max_tensor_evaluations));
  }
}

/// Computes entries for all sorted tuples in batches and hands them to sink in tuple order.
template <typename Sink>
void for_each_entry(const FunctionTable& f, OperatorKind kind, int d, Sink&& sink) {
  const auto tuples = sorted_tuples(f.space()->dimension(), d);
  const std::size_t batch = std::max<std::size_t>(1, 4 * detail::thread_count());
  for (std::size_t start = 0; start < tuples.size(); start += batch) {
    const std::size_t count = std::min(batch, tuples.size() - start);
    std::vector<std::optional<FunctionTable>> out(count);
    detail::parallel_for(count, [&](std::size_t k) { out[k] = difference_entry(f, kind, tuples[start + k]); });
    for (std::size_t k = 0; k < count; ++k) sink(tuples[start + k], std::move(*out[k]));
  }
}

FunctionTable hs_from_squares(const SpacePtr& space, std::vector<double> squares, int d) {
  const double orderings = detail::factorial(d);
  for (double& s : squares) s = std::sqrt(orderings * s);
  return {space, std::move(squares)};
}

}  // namespace

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::H: return "H";
    case OperatorKind::H_PLUS: return "H_PLUS";
    case OperatorKind::H_MINUS: return "H_MINUS";
    case OperatorKind::V: return "V";
    case OperatorKind::DD: return "DD";
    case OperatorKind::D_SMALL: return "D_SMALL";
    case OperatorKind::D_PLUS: return "D_PLUS";
    case OperatorKind::D_MINUS: return "D_MINUS";
  }
  return "?";
}

OperatorKind parse_kind(std::string_view name) {
  for (auto kind : kAllKinds) {
    if (name == to_string(kind)) return kind;
  }
  if (name == "h") return OperatorKind::H;
  if (name == "h+") return OperatorKind::H_PLUS;
  if (name == "h-") return OperatorKind::H_MINUS;
  if (name == "v") return OperatorKind::V;
  if (name == "D") return OperatorKind::DD;
  if (name == "d") return OperatorKind::D_SMALL;
  if (name == "d+") return OperatorKind::D_PLUS;
  if (name == "d-") return OperatorKind::D_MINUS;
  throw ValidationError("unknown operator kind '" + std::string(name) + "'");
}

bool is_magnitude(OperatorKind kind) { return kind != OperatorKind::DD; }

std::vector<IndexTuple> sorted_tuples(int n, int d) {
  std::vector<IndexTuple> out;
  if (d < 0 || d > n) return out;
  IndexTuple t(static_cast<std::size_t>(d));
  for (int s = 0; s < d; ++s) t[static_cast<std::size_t>(s)] = s;
  while (true) {
    out.push_back(t);
    int s = d - 1;
    while (s >= 0 && t[static_cast<std::size_t>(s)] == n - d + s) --s;
    if (s < 0) break;
    ++t[static_cast<std::size_t>(s)];
    for (int r = s + 1; r < d; ++r) t[static_cast<std::size_t>(r)] = t[static_cast<std::size_t>(r - 1)] + 1;
  }
  return out;
}

std::uint64_t tensor_cost(const ProductSpace& space, OperatorKind kind, int d) {
  const int n = space.dimension();
  double total = 0.0;
  for (const auto& t : sorted_tuples(n, d)) {
    double per = static_cast<double>(space.outcome_count());
    if (uses_resampling(kind)) {
      for (int i : t) per *= static_cast<double>(space.radix(i));
      per *= std::ldexp(1.0, d);
    } else {
      double sweeps = 1.0;
      for (int i : t) sweeps += 2.0 * static_cast<double>(space.radix(i));
      per *= sweeps;
    }
    total += per;
  }
  return total >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(total);
}

HypermatrixField::HypermatrixField(SpacePtr space, OperatorKind kind, int order,
                                   std::map<IndexTuple, FunctionTable> entries)
    : space_(std::move(space)), kind_(kind), order_(order), entries_(std::move(entries)) {}

FunctionTable HypermatrixField::at(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != order_) throw ValidationError("index length does not match tensor order");
  IndexTuple key(index.begin(), index.end());
  std::sort(key.begin(), key.end());
  if (std::adjacent_find(key.begin(), key.end()) != key.end()) return FunctionTable::constant(space_, 0.0);
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ValidationError("tuple index out of range");
  return it->second;
}

FunctionTable difference_entry(const FunctionTable& f, OperatorKind kind, std::span<const int> index) {
  const auto& space = *f.space();
  if (index.empty()) throw ValidationError("difference operators need at least one index");
  const auto coords = distinct_coords(space, index);
  const int order = static_cast<int>(index.size());
  if (uses_resampling(kind)) return resampling_entry(f, kind, coords, order);

  CoordSet set;
  for (int c : coords) set = set.with(c);
  auto g = centered_difference(f, set);
  if (kind == OperatorKind::DD) return g;
  auto sq = cond_expectation(g * g, set);
  return sq.map([](double x) { return std::sqrt(std::max(x, 0.0)); });
}

HypermatrixField difference_tensor(const FunctionTable& f, OperatorKind kind, int d) {
  const auto& space = *f.space();
  check_order(space, d);
  check_budget(space, kind, d);
  std::map<IndexTuple, FunctionTable> entries;
  for_each_entry(f, kind, d, [&](const IndexTuple& t, FunctionTable e) { entries.emplace(t, std::move(e)); });
  return {f.space(), kind, d, std::move(entries)};
}

FunctionTable hs_field(const HypermatrixField& field) {
  std::vector<double> squares(field.space()->outcome_count(), 0.0);
  for (const auto& [t, e] : field.entries()) {
    const auto v = e.values();
    for (std::size_t o = 0; o < v.size(); ++o) squares[o] += v[o] * v[o];
  }
  return hs_from_squares(field.space(), std::move(squares), field.order());
}

FunctionTable hs_field(const FunctionTable& f, OperatorKind kind, int d) {
  const auto& space = *f.space();
  check_order(space, d);
  check_budget(space, kind, d);
  std::vector<double> squares(space.outcome_count(), 0.0);
  for_each_entry(f, kind, d, [&](const IndexTuple&, const FunctionTable& e) {
    const auto v = e.values();
    for (std::size_t o = 0; o < v.size(); ++o) squares[o] += v[o] * v[o];
  });
  return hs_from_squares(f.space(), std::move(squares), d);
}

double field_lp_norm(const HypermatrixField& field, double p) { return lp_norm(hs_field(field), p); }

double field_lp_norm(const FunctionTable& f, OperatorKind kind, int d, double p) {
  return lp_norm(hs_field(f, kind, d), p);
}

namespace {

void check_class(std::span<const FunctionTable> fs) {
  if (fs.empty()) throw ValidationError("function class must be nonempty");
  for (const auto& g : fs) {
    if (!g.space()->same_as(*fs.front().space())) throw ValidationError("function class mixes different spaces");
  }
}

FunctionTable sup_entry(std::span<const FunctionTable> fs, const IndexTuple& t) {
  auto best = difference_entry(fs.front(), OperatorKind::H, t);
  for (std::size_t k = 1; k < fs.size(); ++k) {
    const auto e = difference_entry(fs[k], OperatorKind::H, t);
    auto& v = best.mutable_values();
    const auto w = e.values();
    for (std::size_t o = 0; o < v.size(); ++o) v[o] = std::max(v[o], w[o]);
  }
  return best;
}

}  // namespace

HypermatrixField sup_class_tensor(std::span<const FunctionTable> fs, int d) {
  check_class(fs);
  const auto& space = *fs.front().space();
  check_order(space, d);
  check_budget(space, OperatorKind::H, d);
  std::map<IndexTuple, FunctionTable> entries;
  for (const auto& t : sorted_tuples(space.dimension(), d)) entries.emplace(t, sup_entry(fs, t));
  return {fs.front().space(), OperatorKind::H, d, std::move(entries)};
}

FunctionTable sup_class_hs_field(std::span<const FunctionTable> fs, int d) {
  check_class(fs);
  const auto& space = *fs.front().space();
  check_order(space, d);
  check_budget(space, OperatorKind::H, d);
  std::vector<double> squares(space.outcome_count(), 0.0);
  for (const auto& t : sorted_tuples(space.dimension(), d)) {
    const auto e = sup_entry(fs, t);
    const auto v = e.values();
    for (std::size_t o = 0; o < v.size(); ++o) squares[o] += v[o] * v[o];
  }
  return hs_from_squares(fs.front().space(), std::move(squares), d);
}

}  // namespace hoc
