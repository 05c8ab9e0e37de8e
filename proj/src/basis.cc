#include "plyds/basis.h"

#include <algorithm>
#include <functional>

#include "plyds/errors.h"

namespace plyds {

std::string ToString(BasisMode mode) {
  return mode == BasisMode::kElementwise ? "elementwise" : "full";
}

BasisMode ParseBasisMode(const std::string& text) {
  if (text == "elementwise") return BasisMode::kElementwise;
  if (text == "full") return BasisMode::kFull;
  throw InputError("unknown basis mode '" + text + "' (elementwise|full)");
}

void BasisSpec::Validate() const {
  if (n < 1) throw InputError("BasisSpec: n must be >= 1");
  if (degree < 0) throw InputError("BasisSpec: degree must be >= 0");
}

namespace {

// All exponent vectors of total degree `d` in `n` variables, in
// lexicographically descending order (x1^2, x1*x2, x2^2, ...).
std::vector<Monomial> MonomialsOfDegree(int n, int d) {
  std::vector<Monomial> out;
  std::vector<int> powers(n, 0);
  std::function<void(int, int)> recurse = [&](int i, int remaining) {
    if (i == n - 1) {
      powers[i] = remaining;
      out.emplace_back(powers);
      return;
    }
    for (int p = remaining; p >= 0; --p) {
      powers[i] = p;
      recurse(i + 1, remaining - p);
    }
  };
  recurse(0, d);
  return out;
}

}  // namespace

int BasisSpec::size() const {
  if (mode == BasisMode::kElementwise) {
    return degree * n + (include_constant ? 1 : 0);
  }
  // C(n + d, d) monomials of degree <= d.
  long count = 1;
  for (int k = 1; k <= degree; ++k) count = count * (n + k) / k;
  return static_cast<int>(count) - (include_constant ? 0 : 1);
}

std::vector<Monomial> BasisSpec::Entries() const {
  Validate();
  std::vector<Monomial> out;
  out.reserve(size());
  if (include_constant) out.push_back(Monomial::Constant(n));
  for (int p = 1; p <= degree; ++p) {
    if (mode == BasisMode::kElementwise) {
      for (int i = 0; i < n; ++i) out.push_back(Monomial::Variable(n, i, p));
    } else {
      for (auto& m : MonomialsOfDegree(n, p)) out.push_back(std::move(m));
    }
  }
  return out;
}

Eigen::VectorXd BasisVector(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const BasisSpec& spec) {
  spec.Validate();
  if (x.size() != spec.n) {
    throw InputError("BasisVector: state has dimension " +
                     std::to_string(x.size()) + ", basis expects " +
                     std::to_string(spec.n));
  }
  Eigen::VectorXd b(spec.size());
  int k = 0;
  if (spec.include_constant) b[k++] = 1.0;
  if (spec.mode == BasisMode::kElementwise) {
    Eigen::VectorXd power = Eigen::VectorXd::Ones(spec.n);
    for (int p = 1; p <= spec.degree; ++p) {
      power = power.cwiseProduct(x);
      b.segment(k, spec.n) = power;
      k += spec.n;
    }
  } else {
    const std::vector<Monomial> entries = spec.Entries();
    for (; k < spec.size(); ++k) b[k] = entries[k].Evaluate(x);
  }
  return b;
}

std::vector<double> FlattenUpper(const Eigen::MatrixXd& s) {
  const int m = static_cast<int>(s.rows());
  std::vector<double> out;
  out.reserve(UpperTriangleSize(m));
  for (int k = 0; k < m; ++k) {
    for (int l = k; l < m; ++l) out.push_back(s(k, l));
  }
  return out;
}

Eigen::MatrixXd UnflattenUpper(const std::vector<double>& upper, int m) {
  if (static_cast<int>(upper.size()) != UpperTriangleSize(m)) {
    throw InputError("UnflattenUpper: expected " +
                     std::to_string(UpperTriangleSize(m)) + " entries, got " +
                     std::to_string(upper.size()));
  }
  Eigen::MatrixXd s(m, m);
  int idx = 0;
  for (int k = 0; k < m; ++k) {
    for (int l = k; l < m; ++l) {
      s(k, l) = upper[idx];
      s(l, k) = upper[idx];
      ++idx;
    }
  }
  return s;
}

}  // namespace plyds
