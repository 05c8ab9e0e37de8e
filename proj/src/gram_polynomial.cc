#include "plyds/gram_polynomial.h"

#include "plyds/errors.h"

namespace plyds {

GramPolynomial::GramPolynomial(BasisSpec spec, const Eigen::MatrixXd& gram)
    : spec_(std::move(spec)) {
  spec_.Validate();
  const int m = spec_.size();
  if (gram.rows() != m || gram.cols() != m) {
    throw InputError("GramPolynomial: matrix is " +
                     std::to_string(gram.rows()) + "x" +
                     std::to_string(gram.cols()) + ", basis has " +
                     std::to_string(m) + " entries");
  }
  gram_ = 0.5 * (gram + gram.transpose());
}

GramPolynomial GramPolynomial::Zero(const BasisSpec& spec) {
  return GramPolynomial(spec, Eigen::MatrixXd::Zero(spec.size(), spec.size()));
}

GramPolynomial GramPolynomial::FromUpper(const BasisSpec& spec,
                                         const std::vector<double>& upper) {
  return GramPolynomial(spec, UnflattenUpper(upper, spec.size()));
}

double GramPolynomial::Evaluate(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd b = BasisVector(x, spec_);
  return b.dot(gram_ * b);
}

MonomialPoly GramPolynomial::Expand() const {
  const std::vector<Monomial> entries = spec_.Entries();
  const int m = size();
  MonomialPoly out(spec_.n);
  for (int k = 0; k < m; ++k) {
    out.AddTerm(entries[k] * entries[k], gram_(k, k));
    for (int l = k + 1; l < m; ++l) {
      out.AddTerm(entries[k] * entries[l], 2.0 * gram_(k, l));
    }
  }
  return out;
}

GramSupport ComputeGramSupport(const BasisSpec& spec) {
  const std::vector<Monomial> entries = spec.Entries();
  const int m = static_cast<int>(entries.size());
  GramSupport support;
  for (int k = 0; k < m; ++k) {
    for (int l = k; l < m; ++l) {
      support[entries[k] * entries[l]].emplace_back(k, l);
    }
  }
  return support;
}

}  // namespace plyds
