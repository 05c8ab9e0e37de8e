#include "plyds/monomial_poly.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "plyds/errors.h"

namespace plyds {

Monomial::Monomial(std::vector<int> powers) : powers_(std::move(powers)) {
  for (int p : powers_) {
    if (p < 0) throw InputError("Monomial: negative exponent");
  }
  degree_ = std::accumulate(powers_.begin(), powers_.end(), 0);
}

Monomial Monomial::Constant(int n) { return Monomial(std::vector<int>(n, 0)); }

Monomial Monomial::Variable(int n, int i, int power) {
  if (i < 0 || i >= n) throw InputError("Monomial::Variable: index out of range");
  std::vector<int> powers(n, 0);
  powers[i] = power;
  return Monomial(std::move(powers));
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (n() != other.n()) {
    throw InputError("Monomial product: variable counts differ");
  }
  std::vector<int> powers(powers_);
  for (int i = 0; i < n(); ++i) powers[i] += other.powers_[i];
  return Monomial(std::move(powers));
}

double Monomial::Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double value = 1.0;
  for (int i = 0; i < n(); ++i) {
    for (int p = 0; p < powers_[i]; ++p) value *= x[i];
  }
  return value;
}

std::string Monomial::ToString() const {
  std::string out;
  for (int i = 0; i < n(); ++i) {
    if (powers_[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += "x" + std::to_string(i + 1);
    if (powers_[i] > 1) out += "^" + std::to_string(powers_[i]);
  }
  return out.empty() ? "1" : out;
}

MonomialPoly::MonomialPoly(
    int n, std::initializer_list<std::pair<Monomial, double>> terms)
    : n_(n) {
  for (const auto& [m, c] : terms) AddTerm(m, c);
}

int MonomialPoly::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double MonomialPoly::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void MonomialPoly::AddTerm(const Monomial& m, double c) {
  if (m.n() != n_) throw InputError("MonomialPoly: monomial has wrong arity");
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kZeroThreshold) terms_.erase(it);
}

double MonomialPoly::Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != n_) throw InputError("MonomialPoly::Evaluate: dimension mismatch");
  double value = 0.0;
  for (const auto& [m, c] : terms_) value += c * m.Evaluate(x);
  return value;
}

double MonomialPoly::MaxAbsCoefficient() const {
  double out = 0.0;
  for (const auto& [m, c] : terms_) out = std::max(out, std::abs(c));
  return out;
}

MonomialPoly& MonomialPoly::operator+=(const MonomialPoly& other) {
  if (other.n_ != n_) throw InputError("MonomialPoly: variable counts differ");
  for (const auto& [m, c] : other.terms_) AddTerm(m, c);
  return *this;
}

MonomialPoly& MonomialPoly::operator-=(const MonomialPoly& other) {
  if (other.n_ != n_) throw InputError("MonomialPoly: variable counts differ");
  for (const auto& [m, c] : other.terms_) AddTerm(m, -c);
  return *this;
}

MonomialPoly& MonomialPoly::operator*=(double s) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    if (std::abs(it->second) < kZeroThreshold) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

std::string MonomialPoly::ToString() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    os << c;
    if (m.degree() > 0) os << "*" << m.ToString();
    first = false;
  }
  return os.str();
}

MonomialPoly operator+(MonomialPoly a, const MonomialPoly& b) { return a += b; }
MonomialPoly operator-(MonomialPoly a, const MonomialPoly& b) { return a -= b; }
MonomialPoly operator*(MonomialPoly a, double s) { return a *= s; }
MonomialPoly operator*(double s, MonomialPoly a) { return a *= s; }

MonomialPoly Multiply(const MonomialPoly& p, const MonomialPoly& q) {
  if (p.n() != q.n()) throw InputError("Multiply: variable counts differ");
  MonomialPoly out(p.n());
  for (const auto& [mp, cp] : p.terms()) {
    for (const auto& [mq, cq] : q.terms()) out.AddTerm(mp * mq, cp * cq);
  }
  return out;
}

MonomialPoly Differentiate(const MonomialPoly& p, int j) {
  if (j < 0 || j >= p.n()) {
    throw InputError("Differentiate: coordinate index " + std::to_string(j) +
                     " out of range for n=" + std::to_string(p.n()));
  }
  MonomialPoly out(p.n());
  for (const auto& [m, c] : p.terms()) {
    const int e = m.power(j);
    if (e == 0) continue;
    std::vector<int> powers = m.powers();
    powers[j] -= 1;
    out.AddTerm(Monomial(std::move(powers)), c * e);
  }
  return out;
}

}  // namespace plyds
