#pragma once

// Test-side reference implementations. Nothing here calls into the library's
// polynomial code, so agreement with it is meaningful.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace oracle {

using Exps = std::vector<int>;
using Poly = std::map<Exps, double>;

inline void Add(Poly& p, const Exps& e, double c) {
  p[e] += c;
  if (std::abs(p[e]) < 1e-14) p.erase(e);
}

inline Poly Mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      Exps e(ea.size());
      for (size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      Add(out, e, ca * cb);
    }
  }
  return out;
}

inline Poly Diff(const Poly& p, int j) {
  Poly out;
  for (const auto& [e, c] : p) {
    if (e[j] == 0) continue;
    Exps d = e;
    --d[j];
    Add(out, d, c * e[j]);
  }
  return out;
}

inline double Eval(const Poly& p, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (const auto& [e, c] : p) {
    double t = c;
    for (size_t i = 0; i < e.size(); ++i) t *= std::pow(x[i], e[i]);
    s += t;
  }
  return s;
}

/// Exponents of the element-wise basis [1?, x∘1, ..., x∘d].
inline std::vector<Exps> ElementwiseBasis(int n, int d, bool constant) {
  std::vector<Exps> out;
  if (constant) out.emplace_back(n, 0);
  for (int p = 1; p <= d; ++p) {
    for (int i = 0; i < n; ++i) {
      Exps e(n, 0);
      e[i] = p;
      out.push_back(e);
    }
  }
  return out;
}

/// Exponents of every monomial of total degree 1..d (0..d with the
/// constant), graded, each degree in descending lexicographic order.
inline std::vector<Exps> FullBasis(int n, int d, bool constant) {
  std::vector<Exps> out;
  for (int deg = constant ? 0 : 1; deg <= d; ++deg) {
    std::vector<Exps> level;
    Exps e(n, 0);
    // Odometer over [0, d]^n, keeping vectors that sum to deg.
    while (true) {
      int sum = 0;
      for (int v : e) sum += v;
      if (sum == deg) level.push_back(e);
      int i = n - 1;
      while (i >= 0 && e[i] == d) e[i--] = 0;
      if (i < 0) break;
      ++e[i];
    }
    std::sort(level.begin(), level.end(), std::greater<Exps>());
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

/// Brute-force Σ_k Σ_l B_kl m_k m_l.
inline Poly Quadratic(const std::vector<Exps>& basis, const Eigen::MatrixXd& b) {
  Poly out;
  for (size_t k = 0; k < basis.size(); ++k) {
    for (size_t l = 0; l < basis.size(); ++l) {
      Exps e(basis[k].size());
      for (size_t i = 0; i < e.size(); ++i) e[i] = basis[k][i] + basis[l][i];
      Add(out, e, b(k, l));
    }
  }
  return out;
}

inline double MaxAbsDiff(const Poly& a, const Poly& b) {
  double m = 0.0;
  for (const auto& [e, c] : a) {
    auto it = b.find(e);
    m = std::max(m, std::abs(c - (it == b.end() ? 0.0 : it->second)));
  }
  for (const auto& [e, c] : b) {
    if (!a.count(e)) m = std::max(m, std::abs(c));
  }
  return m;
}

inline Eigen::MatrixXd RandomSymmetric(int m, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = u(rng);
  return 0.5 * (a + a.transpose());
}

inline Eigen::VectorXd RandomPoint(int n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = u(rng);
  return x;
}

/// Explicit Euler iterate count for ẋ = -x from |x0| down to radius.
inline long EulerStepsLinear(double x0, double dt, double radius) {
  long k = 0;
  double x = x0;
  while (std::abs(x) > radius) {
    x *= 1.0 - dt;
    ++k;
  }
  return k;
}

}  // namespace oracle
