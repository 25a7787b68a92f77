#include "hoc/hoeffding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hoc {

namespace {

constexpr double kDropTolerance = 1e-13;

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void split_coordinate(const ProductSpace& space, const std::vector<double>& in, int i, std::vector<double>& mean,
                      std::vector<double>& centered) {
  const std::uint64_t stride = space.stride(i);
  const std::size_t radix = space.radix(i);
  const auto probs = space.coordinate(i).probs();
  mean.resize(in.size());
  centered.resize(in.size());
  const std::uint64_t block = stride * radix;
  for (std::uint64_t base = 0; base < in.size(); base += block) {
    for (std::uint64_t off = 0; off < stride; ++off) {
      const std::uint64_t o = base + off;
      double s = 0.0;
      for (std::size_t a = 0; a < radix; ++a) s += probs[a] * in[o + a * stride];
      for (std::size_t a = 0; a < radix; ++a) {
        mean[o + a * stride] = s;
        centered[o + a * stride] = in[o + a * stride] - s;
      }
    }
  }
}

/// Depth-first over coordinates: at depth i a node holds prod_{j<i, j in S}(Id - E_j)
/// prod_{j<i, j notin S} E_j f. Nodes that vanish are pruned since both children of a
/// zero node are zero.
struct Decomposer {
  const SpacePtr& space;
  double threshold;
  std::uint64_t cell_budget;
  std::uint64_t cells = 0;
  std::map<CoordSet, FunctionTable> out;

  void run(std::vector<double> node, int depth, CoordSet S) {
    if (sup_abs(node) <= threshold) return;
    if (depth == space->dimension()) {
      cells += node.size();
      if (cells > cell_budget) {
        throw BudgetError("Hoeffding decomposition exceeds the stored-cell budget of " + std::to_string(cell_budget));
      }
      out.emplace(S, FunctionTable(space, std::move(node)));
      return;
    }
    if (space->radix(depth) == 1) {
      // Degenerate coordinate: Id - E_i vanishes identically.
      run(std::move(node), depth + 1, S);
      return;
    }
    std::vector<double> mean;
    std::vector<double> centered;
    split_coordinate(*space, node, depth, mean, centered);
    node.clear();
    node.shrink_to_fit();
    run(std::move(mean), depth + 1, S);
    run(std::move(centered), depth + 1, S.with(depth));
  }
};

}  // namespace

HoeffdingDecomposition::HoeffdingDecomposition(SpacePtr space, std::map<CoordSet, FunctionTable> components)
    : space_(std::move(space)), components_(std::move(components)) {}

FunctionTable HoeffdingDecomposition::component(CoordSet S) const {
  const auto it = components_.find(S);
  if (it != components_.end()) return it->second;
  return FunctionTable::constant(space_, 0.0);
}

double HoeffdingDecomposition::mean() const {
  const auto it = components_.find(CoordSet{});
  return it == components_.end() ? 0.0 : it->second[0];
}

FunctionTable HoeffdingDecomposition::reconstruct() const {
  auto total = FunctionTable::constant(space_, 0.0);
  for (const auto& [S, h] : components_) total += h;
  return total;
}

HoeffdingDecomposition decompose(const FunctionTable& f) {
  const auto& space = f.space();
  const int n = space->dimension();
  const auto& limits = space->limits();
  if (n > limits.max_hoeffding_coords) {
    throw BudgetError("Hoeffding decomposition over " + std::to_string(n) + " coordinates exceeds the budget of " +
                      std::to_string(limits.max_hoeffding_coords));
  }
  const double scale = f.sup_norm();
  Decomposer dec{space, kDropTolerance * scale, limits.max_decomposition_cells, 0, {}};
  if (scale > 0.0) dec.run(std::vector<double>(f.values().begin(), f.values().end()), 0, CoordSet{});
  return {space, std::move(dec.out)};
}

FunctionTable degree_component(const HoeffdingDecomposition& dec, int k) {
  const int n = dec.space()->dimension();
  if (k < 0 || k > n) throw ValidationError("Hoeffding degree " + std::to_string(k) + " out of range [0, n]");
  auto total = FunctionTable::constant(dec.space(), 0.0);
  for (const auto& [S, h] : dec.components()) {
    if (S.size() == k) total += h;
  }
  return total;
}

std::vector<double> degree_profile(const HoeffdingDecomposition& dec) {
  const int n = dec.space()->dimension();
  std::vector<double> profile(static_cast<std::size_t>(n) + 1, 0.0);
  // Components are orthogonal, so squared norms add up within each degree.
  for (const auto& [S, h] : dec.components()) profile[static_cast<std::size_t>(S.size())] += h.inner(h);
  return profile;
}

int lowest_nonvanishing_degree(const HoeffdingDecomposition& dec, double rel_tol) {
  double scale = 0.0;
  for (const auto& [S, h] : dec.components()) scale = std::max(scale, h.sup_norm());
  const auto f = dec.reconstruct();
  scale = std::max(scale, f.sup_norm());
  if (scale == 0.0) return 0;
  const int n = dec.space()->dimension();
  for (int k = 1; k <= n; ++k) {
    if (degree_component(dec, k).sup_norm() > rel_tol * scale) return k;
  }
  return 0;
}

bool is_degenerate_from(const HoeffdingDecomposition& dec, int d) {
  const int n = dec.space()->dimension();
  if (d < 1 || d > n) throw ValidationError("degeneracy order must lie in [1, n]");
  const int low = lowest_nonvanishing_degree(dec);
  return low == 0 || low >= d;
}

bool is_degenerate_from(const FunctionTable& f, int d) { return is_degenerate_from(decompose(f), d); }

MultilinearPolynomial fourier_walsh(const FunctionTable& f) {
  const auto& space = *f.space();
  if (!space.is_rademacher()) throw ValidationError("Fourier-Walsh expansion requires a Rademacher space");
  const int n = space.dimension();
  // In-place transform per coordinate: (v at x=a0, v at x=a1) -> (E_i v, E_i[x_i v]).
  // After all coordinates, slot with digit pattern I holds E f prod_{i in I} x_i.
  std::vector<double> v(f.values().begin(), f.values().end());
  for (int i = 0; i < n; ++i) {
    const std::uint64_t stride = space.stride(i);
    const auto& c = space.coordinate(i);
    for (std::uint64_t base = 0; base < v.size(); base += 2 * stride) {
      for (std::uint64_t off = 0; off < stride; ++off) {
        const double lo = v[base + off];
        const double hi = v[base + off + stride];
        v[base + off] = c.prob(0) * lo + c.prob(1) * hi;
        v[base + off + stride] = c.prob(0) * c.atom(0) * lo + c.prob(1) * c.atom(1) * hi;
      }
    }
  }
  MultilinearPolynomial p(n);
  const double cutoff = 1e-14 * f.sup_norm();
  for (std::uint64_t o = 0; o < v.size(); ++o) {
    if (std::abs(v[o]) > cutoff) p.add_term(CoordSet(o), v[o]);
  }
  return p;
}

}  // namespace hoc
