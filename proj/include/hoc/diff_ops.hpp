#pragma once

#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hoc/product_space.hpp"

namespace hoc {

/// Difference operators on functions of independent coordinates. With T_i resampling
/// coordinate i from an independent copy and E_i integrating it out:
///   H        1/2^d sup |prod (Id - T_i) f|          (sup over the coordinates and copies)
///   H_PLUS   same with the positive part, H_MINUS with the negative part
///   V        (E_I (prod (Id - E_i) f)^2)^{1/2}
///   DD       prod (Id - E_i) f                        (signed)
///   D_SMALL  (2^{-d} Ebar_I (prod (Id - T_i) f)^2)^{1/2}
///   D_PLUS / D_MINUS  as D_SMALL on the positive / negative part
enum class OperatorKind { H, H_PLUS, H_MINUS, V, DD, D_SMALL, D_PLUS, D_MINUS };

inline constexpr OperatorKind kAllKinds[] = {OperatorKind::H,  OperatorKind::H_PLUS,  OperatorKind::H_MINUS,
                                             OperatorKind::V,  OperatorKind::DD,      OperatorKind::D_SMALL,
                                             OperatorKind::D_PLUS, OperatorKind::D_MINUS};

std::string_view to_string(OperatorKind kind);
/// Accepts the enum names and the short CLI spellings (h, h+, h-, v, D, d, d+, d-).
OperatorKind parse_kind(std::string_view name);
/// True for every kind except DD, whose entries are signed functions.
bool is_magnitude(OperatorKind kind);

using IndexTuple = std::vector<int>;

/// Order-d hypermatrix whose entries are function tables. Only strictly increasing tuples
/// are stored; at() symmetrizes on read and returns zero on tuples with a repeated index.
class HypermatrixField {
 public:
  HypermatrixField(SpacePtr space, OperatorKind kind, int order, std::map<IndexTuple, FunctionTable> entries);

  const SpacePtr& space() const { return space_; }
  OperatorKind kind() const { return kind_; }
  int order() const { return order_; }
  const std::map<IndexTuple, FunctionTable>& entries() const { return entries_; }
  FunctionTable at(std::span<const int> index) const;

 private:
  SpacePtr space_;
  OperatorKind kind_;
  int order_;
  std::map<IndexTuple, FunctionTable> entries_;
};

/// One entry Gamma_{i_1...i_d} f for an arbitrary index tuple; repeated indices are
/// allowed and use the same resampled copy (T_i T_i = T_i), so e.g. h_{ii} = h_i / 2.
FunctionTable difference_entry(const FunctionTable& f, OperatorKind kind, std::span<const int> index);

HypermatrixField difference_tensor(const FunctionTable& f, OperatorKind kind, int d);

/// Pointwise (d! sum over sorted tuples of entry^2)^{1/2}, the Euclidean norm in R^{n^d}.
FunctionTable hs_field(const HypermatrixField& field);

/// Same as hs_field(difference_tensor(f, kind, d)) without storing the entries.
FunctionTable hs_field(const FunctionTable& f, OperatorKind kind, int d);

/// (E |F|_HS^p)^{1/p}.
double field_lp_norm(const HypermatrixField& field, double p);
double field_lp_norm(const FunctionTable& f, OperatorKind kind, int d, double p);

/// Entrywise pointwise maximum of the kind-H tensors over a finite class.
HypermatrixField sup_class_tensor(std::span<const FunctionTable> fs, int d);
FunctionTable sup_class_hs_field(std::span<const FunctionTable> fs, int d);

/// Number of function evaluations difference_tensor(f, kind, d) would spend.
std::uint64_t tensor_cost(const ProductSpace& space, OperatorKind kind, int d);

/// All strictly increasing d-tuples over {0..n-1} in lexicographic order.
std::vector<IndexTuple> sorted_tuples(int n, int d);

}  // namespace hoc
