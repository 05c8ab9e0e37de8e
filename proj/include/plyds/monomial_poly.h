#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace plyds {

/// A monomial x_1^{e_1} ... x_n^{e_n}, identified by its exponent vector.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<int> powers);

  /// The constant monomial 1 in `n` variables.
  static Monomial Constant(int n);
  /// x_i^power, with `i` 0-based.
  static Monomial Variable(int n, int i, int power = 1);

  int n() const { return static_cast<int>(powers_.size()); }
  int degree() const { return degree_; }
  int power(int i) const { return powers_[i]; }
  const std::vector<int>& powers() const { return powers_; }

  Monomial operator*(const Monomial& other) const;
  double Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Human-readable form using 1-based names, e.g. "x1^2*x2"; "1" if constant.
  std::string ToString() const;

  bool operator==(const Monomial& other) const {
    return powers_ == other.powers_;
  }
  std::strong_ordering operator<=>(const Monomial& other) const {
    return powers_ <=> other.powers_;
  }

 private:
  std::vector<int> powers_;
  int degree_{0};
};

/// Sparse polynomial in `n` variables stored as monomial -> coefficient.
///
/// Coefficients whose magnitude falls below kZeroThreshold after any update
/// are erased, so the term map stays canonical after cancellations.
class MonomialPoly {
 public:
  static constexpr double kZeroThreshold = 1e-14;

  explicit MonomialPoly(int n) : n_(n) {}
  MonomialPoly(int n, std::initializer_list<std::pair<Monomial, double>> terms);

  int n() const { return n_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  int size() const { return static_cast<int>(terms_.size()); }
  int degree() const;

  /// Coefficient of `m`, zero when absent.
  double coefficient(const Monomial& m) const;

  /// Adds `c` to the coefficient of `m`.
  void AddTerm(const Monomial& m, double c);

  double Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Largest absolute coefficient, zero for the empty polynomial.
  double MaxAbsCoefficient() const;

  MonomialPoly& operator+=(const MonomialPoly& other);
  MonomialPoly& operator-=(const MonomialPoly& other);
  MonomialPoly& operator*=(double s);

  std::string ToString() const;

 private:
  int n_;
  std::map<Monomial, double> terms_;
};

MonomialPoly operator+(MonomialPoly a, const MonomialPoly& b);
MonomialPoly operator-(MonomialPoly a, const MonomialPoly& b);
MonomialPoly operator*(MonomialPoly a, double s);
MonomialPoly operator*(double s, MonomialPoly a);

/// Exact distributive product. Throws InputError when the variable counts
/// differ.
MonomialPoly Multiply(const MonomialPoly& p, const MonomialPoly& q);

/// Partial derivative with respect to x_j (0-based). Throws InputError when
/// `j` is out of range.
MonomialPoly Differentiate(const MonomialPoly& p, int j);

}  // namespace plyds
