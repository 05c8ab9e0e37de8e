#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "plyds/monomial_poly.h"

namespace plyds {

/// Which monomials make up a polynomial basis.
enum class BasisMode {
  /// [1, x∘1, x∘2, ..., x∘d]: pure coordinate powers only.
  kElementwise,
  /// Every monomial of total degree 1..d (graded, then lexicographic).
  kFull,
};

std::string ToString(BasisMode mode);
/// Parses "elementwise" or "full"; throws InputError otherwise.
BasisMode ParseBasisMode(const std::string& text);

/// Describes the basis vector b(x) of a Gram-form polynomial b(x)ᵀ B b(x).
///
/// Element-wise ordering is constant first (when present), then every
/// coordinate at power 1, then every coordinate at power 2, and so on. Gram
/// matrix indices everywhere in the library follow this ordering.
struct BasisSpec {
  int n{1};
  int degree{1};
  bool include_constant{true};
  BasisMode mode{BasisMode::kElementwise};

  /// Number of basis entries: degree·n + include_constant in element-wise
  /// mode.
  int size() const;

  /// The monomial for every entry, in basis order.
  std::vector<Monomial> Entries() const;

  /// Throws InputError for n < 1 or degree < 0.
  void Validate() const;

  bool operator==(const BasisSpec&) const = default;
};

/// Evaluates b(x). Throws InputError if x.size() != spec.n.
Eigen::VectorXd BasisVector(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const BasisSpec& spec);

/// Number of entries in the upper triangle of a side-`m` symmetric matrix.
constexpr int UpperTriangleSize(int m) { return m * (m + 1) / 2; }

/// Row-major position of (k, l), k <= l, inside the upper triangle.
constexpr int UpperTriangleIndex(int m, int k, int l) {
  return k * m - k * (k - 1) / 2 + (l - k);
}

/// Row-major upper-triangle entries of a symmetric matrix.
std::vector<double> FlattenUpper(const Eigen::MatrixXd& s);
/// Inverse of FlattenUpper; throws InputError on a length mismatch.
Eigen::MatrixXd UnflattenUpper(const std::vector<double>& upper, int m);

}  // namespace plyds
