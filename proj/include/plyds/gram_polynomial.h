#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "plyds/basis.h"
#include "plyds/monomial_poly.h"

namespace plyds {

/// A scalar polynomial in Gram form, b(x)ᵀ B b(x), with B symmetric.
///
/// The constructor stores (B + Bᵀ)/2, so the represented polynomial is the
/// same quadratic form as the matrix that was passed in.
class GramPolynomial {
 public:
  GramPolynomial(BasisSpec spec, const Eigen::MatrixXd& gram);

  static GramPolynomial Zero(const BasisSpec& spec);
  /// Builds from row-major upper-triangle entries.
  static GramPolynomial FromUpper(const BasisSpec& spec,
                                  const std::vector<double>& upper);

  const BasisSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  int size() const { return static_cast<int>(gram_.rows()); }
  double operator()(int k, int l) const { return gram_(k, l); }
  std::vector<double> Upper() const { return FlattenUpper(gram_); }

  /// b(x)ᵀ B b(x). Throws InputError on a dimension mismatch.
  double Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Exact monomial expansion of b(x)ᵀ B b(x).
  MonomialPoly Expand() const;

 private:
  BasisSpec spec_;
  Eigen::MatrixXd gram_;
};

/// For every monomial reachable as a product of two basis entries, the
/// unordered entry pairs (k, l), k <= l, whose product is that monomial.
/// Each pair appears under exactly one monomial.
using GramSupport = std::map<Monomial, std::vector<std::pair<int, int>>>;

GramSupport ComputeGramSupport(const BasisSpec& spec);

}  // namespace plyds
