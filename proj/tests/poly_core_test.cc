#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.h"
#include "plyds/basis.h"
#include "plyds/errors.h"
#include "plyds/gram_polynomial.h"
#include "plyds/monomial_poly.h"
#include "plyds/policy_model.h"

namespace plyds {
namespace {

oracle::Poly ToOracle(const MonomialPoly& p) {
  oracle::Poly out;
  for (const auto& [m, c] : p.terms()) out[m.powers()] = c;
  return out;
}

Monomial M(std::vector<int> e) { return Monomial(std::move(e)); }

TEST(BasisVector, ZeroStateWithConstant) {
  const Eigen::VectorXd b = BasisVector(Eigen::Vector2d(0, 0), BasisSpec{2, 1, true});
  ASSERT_EQ(b.size(), 3);
  EXPECT_EQ(b, Eigen::Vector3d(1, 0, 0));
}

TEST(BasisVector, OneDimensionalDegreeOne) {
  const Eigen::VectorXd b = BasisVector(Eigen::VectorXd::Constant(1, 2.5), BasisSpec{1, 1, true});
  ASSERT_EQ(b.size(), 2);
  EXPECT_EQ(b[0], 1.0);
  EXPECT_EQ(b[1], 2.5);
}

TEST(BasisVector, ElementwisePowersInConstantFirstOrder) {
  const Eigen::VectorXd b = BasisVector(Eigen::Vector2d(2, -1), BasisSpec{2, 3, true});
  Eigen::VectorXd want(7);
  want << 1, 2, -1, 4, 1, 8, -1;
  EXPECT_EQ(b, want);
}

TEST(BasisVector, ReducedBasisDropsConstant) {
  const Eigen::VectorXd b = BasisVector(Eigen::Vector2d(2, -1), BasisSpec{2, 2, false});
  Eigen::VectorXd want(4);
  want << 2, -1, 4, 1;
  EXPECT_EQ(b, want);
}

TEST(BasisVector, DimensionMismatchThrows) {
  EXPECT_THROW(BasisVector(Eigen::Vector3d(1, 2, 3), BasisSpec{2, 1, true}), InputError);
}

TEST(BasisSpec, SizesMatchEntryLists) {
  for (int n = 1; n <= 3; ++n) {
    for (int d = 1; d <= 4; ++d) {
      for (bool c : {true, false}) {
        const BasisSpec s{n, d, c};
        EXPECT_EQ(s.size(), d * n + (c ? 1 : 0));
        EXPECT_EQ(static_cast<int>(s.Entries().size()), s.size());
      }
    }
  }
}

TEST(BasisSpec, FullModeEnumeratesEveryMonomialOnce) {
  const BasisSpec s{3, 2, false, BasisMode::kFull};
  std::set<std::vector<int>> seen;
  for (const auto& m : s.Entries()) {
    EXPECT_GE(m.degree(), 1);
    EXPECT_LE(m.degree(), 2);
    EXPECT_TRUE(seen.insert(m.powers()).second);
  }
  // 3 linear + 6 quadratic monomials in three variables.
  EXPECT_EQ(seen.size(), 9u);
}

TEST(BasisMode, ParseRoundTrip) {
  EXPECT_EQ(ParseBasisMode(ToString(BasisMode::kFull)), BasisMode::kFull);
  EXPECT_EQ(ParseBasisMode("elementwise"), BasisMode::kElementwise);
  EXPECT_THROW(ParseBasisMode("diagonal"), InputError);
}

TEST(UpperTriangle, FlattenRoundTrip) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd s = oracle::RandomSymmetric(5, rng);
  const auto u = FlattenUpper(s);
  ASSERT_EQ(static_cast<int>(u.size()), UpperTriangleSize(5));
  EXPECT_EQ(u[UpperTriangleIndex(5, 1, 3)], s(1, 3));
  EXPECT_EQ(UnflattenUpper(u, 5), s);
  EXPECT_THROW(UnflattenUpper(u, 4), InputError);
}

TEST(GramPolynomial, EvaluatesNegativeIdentityField) {
  Eigen::Matrix2d b;
  b << 0, -0.5, -0.5, 0;
  const GramPolynomial p(BasisSpec{1, 1, true}, b);
  EXPECT_DOUBLE_EQ(p.Evaluate(Eigen::VectorXd::Constant(1, 3.0)), -3.0);
}

TEST(GramPolynomial, ReducedBasisVanishesAtOrigin) {
  std::mt19937_64 rng(11);
  const GramPolynomial p(BasisSpec{2, 3, false}, oracle::RandomSymmetric(6, rng));
  EXPECT_EQ(p.Evaluate(Eigen::Vector2d::Zero()), 0.0);
}

TEST(GramPolynomial, SymbolicOneDimensionalExpansion) {
  // b = [1, x]: bᵀ B b = p00 + 2 p01 x + p11 x².
  const double p00 = 0.7, p01 = -1.3, p11 = 2.1;
  Eigen::Matrix2d b;
  b << p00, p01, p01, p11;
  const MonomialPoly e = GramPolynomial(BasisSpec{1, 1, true}, b).Expand();
  EXPECT_DOUBLE_EQ(e.coefficient(M({0})), p00);
  EXPECT_DOUBLE_EQ(e.coefficient(M({1})), 2 * p01);
  EXPECT_DOUBLE_EQ(e.coefficient(M({2})), p11);
  EXPECT_EQ(e.size(), 3);
}

TEST(GramPolynomial, IdentityExpandsToOnePlusSquare) {
  const MonomialPoly e = GramPolynomial(BasisSpec{1, 1, true}, Eigen::Matrix2d::Identity()).Expand();
  EXPECT_EQ(e.size(), 2);
  EXPECT_EQ(e.coefficient(M({0})), 1.0);
  EXPECT_EQ(e.coefficient(M({2})), 1.0);
}

TEST(GramPolynomial, OffDiagonalOnlyGivesLinearTerm) {
  Eigen::Matrix2d b;
  b << 0, -0.5, -0.5, 0;
  const MonomialPoly e = GramPolynomial(BasisSpec{1, 1, true}, b).Expand();
  EXPECT_EQ(e.size(), 1);
  EXPECT_EQ(e.coefficient(M({1})), -1.0);
}

TEST(GramPolynomial, TwoDimensionalReducedMatchesBruteForce) {
  Eigen::Matrix2d b;
  b << 1, 0.5, 0.5, 2;
  const MonomialPoly e = GramPolynomial(BasisSpec{2, 1, false}, b).Expand();
  const oracle::Poly want = oracle::Quadratic(oracle::ElementwiseBasis(2, 1, false), b);
  EXPECT_EQ(oracle::MaxAbsDiff(ToOracle(e), want), 0.0);
  EXPECT_EQ(e.coefficient(M({2, 0})), 1.0);
  EXPECT_EQ(e.coefficient(M({1, 1})), 1.0);
  EXPECT_EQ(e.coefficient(M({0, 2})), 2.0);
}

TEST(GramPolynomial, RandomRoundTripAgainstExpansion) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dn(1, 3), dd(1, 4), dc(0, 1);
  for (int t = 0; t < 1000; ++t) {
    const BasisSpec s{dn(rng), dd(rng), dc(rng) == 1};
    const GramPolynomial p(s, oracle::RandomSymmetric(s.size(), rng));
    const Eigen::VectorXd x = oracle::RandomPoint(s.n, rng, -5, 5);
    const double direct = p.Evaluate(x);
    const double expanded = p.Expand().Evaluate(x);
    ASSERT_LE(std::abs(direct - expanded), 1e-9 * (1 + std::abs(direct))) << "trial " << t;
  }
}

TEST(GramPolynomial, ExpansionMatchesBruteForceOracle) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 3;
    const int d = 1 + (t / 3) % 4;
    const bool c = t % 2 == 0;
    const Eigen::MatrixXd b = oracle::RandomSymmetric(d * n + c, rng);
    const GramPolynomial p(BasisSpec{n, d, c}, b);
    ASSERT_LE(oracle::MaxAbsDiff(ToOracle(p.Expand()),
                                 oracle::Quadratic(oracle::ElementwiseBasis(n, d, c), b)),
              1e-12);
  }
}

TEST(GramPolynomial, SymmetrizationIsNeutral) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 200; ++t) {
    const BasisSpec s{2, 2, true};
    Eigen::MatrixXd a(s.size(), s.size());
    for (int i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
    const Eigen::VectorXd x = oracle::RandomPoint(2, rng, -2, 2);
    const Eigen::VectorXd b = BasisVector(x, s);
    const double raw = b.dot(a * b);
    const double sym = GramPolynomial(s, a).Evaluate(x);
    EXPECT_LE(std::abs(raw - sym), 1e-12 * (1 + std::abs(raw)));
  }
}

TEST(MonomialPoly, DifferentiateExamples) {
  const MonomialPoly a(2, {{M({2, 0}), 1.0}});
  const MonomialPoly da = Differentiate(a, 0);
  EXPECT_EQ(da.size(), 1);
  EXPECT_EQ(da.coefficient(M({1, 0})), 2.0);

  const MonomialPoly b(2, {{M({0, 3}), 4.0}});
  EXPECT_TRUE(Differentiate(b, 0).empty());

  const MonomialPoly c(2, {{M({2, 1}), 3.0}});
  const MonomialPoly dc = Differentiate(c, 1);
  EXPECT_EQ(dc.size(), 1);
  EXPECT_EQ(dc.coefficient(M({2, 0})), 3.0);
}

TEST(MonomialPoly, DifferentiateIndexOutOfRange) {
  const MonomialPoly a(2, {{M({1, 0}), 1.0}});
  EXPECT_THROW(Differentiate(a, 2), InputError);
  EXPECT_THROW(Differentiate(a, -1), InputError);
}

TEST(MonomialPoly, DerivativeMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 100; ++t) {
    const BasisSpec s{2, 3, true};
    const MonomialPoly p = GramPolynomial(s, oracle::RandomSymmetric(s.size(), rng)).Expand();
    const Eigen::VectorXd x = oracle::RandomPoint(2, rng, -1.5, 1.5);
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-5;
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const double fd = (p.Evaluate(xp) - p.Evaluate(xm)) / (2 * h);
      const double an = Differentiate(p, j).Evaluate(x);
      ASSERT_LE(std::abs(fd - an), 1e-6 * (1 + std::abs(an)));
    }
  }
}

TEST(MonomialPoly, DerivativeMatchesOracle) {
  std::mt19937_64 rng(10);
  const BasisSpec s{3, 2, true};
  const MonomialPoly p = GramPolynomial(s, oracle::RandomSymmetric(s.size(), rng)).Expand();
  for (int j = 0; j < 3; ++j) {
    EXPECT_LE(oracle::MaxAbsDiff(ToOracle(Differentiate(p, j)), oracle::Diff(ToOracle(p), j)),
              1e-13);
  }
}

TEST(MonomialPoly, MultiplyExamples) {
  const MonomialPoly two_x(1, {{M({1}), 2.0}});
  const MonomialPoly sq = Multiply(two_x, two_x);
  EXPECT_EQ(sq.size(), 1);
  EXPECT_EQ(sq.coefficient(M({2})), 4.0);

  const MonomialPoly one(1, {{M({0}), 1.0}});
  const MonomialPoly p(1, {{M({0}), 0.5}, {M({3}), -2.0}});
  EXPECT_EQ(Multiply(p, one).terms(), p.terms());

  const MonomialPoly a(2, {{M({1, 0}), 1.0}, {M({0, 1}), 1.0}});
  const MonomialPoly b(2, {{M({1, 0}), 1.0}, {M({0, 1}), -1.0}});
  const MonomialPoly ab = Multiply(a, b);
  EXPECT_EQ(ab.size(), 2);
  EXPECT_EQ(ab.coefficient(M({2, 0})), 1.0);
  EXPECT_EQ(ab.coefficient(M({0, 2})), -1.0);
  EXPECT_EQ(ab.coefficient(M({1, 1})), 0.0);
}

TEST(MonomialPoly, MultiplyDimensionMismatchThrows) {
  EXPECT_THROW(Multiply(MonomialPoly(1), MonomialPoly(2)), InputError);
}

TEST(MonomialPoly, MultiplyMatchesOracle) {
  std::mt19937_64 rng(12);
  const BasisSpec s{2, 2, true};
  const MonomialPoly p = GramPolynomial(s, oracle::RandomSymmetric(s.size(), rng)).Expand();
  const MonomialPoly q = GramPolynomial(s, oracle::RandomSymmetric(s.size(), rng)).Expand();
  EXPECT_LE(oracle::MaxAbsDiff(ToOracle(Multiply(p, q)), oracle::Mul(ToOracle(p), ToOracle(q))),
            1e-12);
}

TEST(MonomialPoly, CancellationKeepsMapCanonical) {
  MonomialPoly p(1, {{M({1}), 1.0}});
  p.AddTerm(M({1}), -1.0);
  EXPECT_TRUE(p.empty());
  p.AddTerm(M({2}), 1e-15);
  EXPECT_TRUE(p.empty());
}

TEST(GramSupport, OneDimensionalWithConstant) {
  const GramSupport s = ComputeGramSupport(BasisSpec{1, 1, true});
  ASSERT_EQ(s.size(), 3u);
  using Pairs = std::vector<std::pair<int, int>>;
  EXPECT_EQ(s.at(M({0})), (Pairs{{0, 0}}));
  EXPECT_EQ(s.at(M({1})), (Pairs{{0, 1}}));
  EXPECT_EQ(s.at(M({2})), (Pairs{{1, 1}}));
}

TEST(GramSupport, ReducedDegreeTwo) {
  const GramSupport s = ComputeGramSupport(BasisSpec{1, 2, false});
  using Pairs = std::vector<std::pair<int, int>>;
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.at(M({2})), (Pairs{{0, 0}}));
  EXPECT_EQ(s.at(M({3})), (Pairs{{0, 1}}));
  EXPECT_EQ(s.at(M({4})), (Pairs{{1, 1}}));
}

TEST(GramSupport, CrossTermHasSinglePair) {
  const GramSupport s = ComputeGramSupport(BasisSpec{2, 1, true});
  using Pairs = std::vector<std::pair<int, int>>;
  EXPECT_EQ(s.at(M({1, 1})), (Pairs{{1, 2}}));
}

TEST(GramSupport, PairsPartitionTheUpperTriangle) {
  for (BasisMode mode : {BasisMode::kElementwise, BasisMode::kFull}) {
    for (int n = 1; n <= 3; ++n) {
      for (int d = 1; d <= 3; ++d) {
        for (bool c : {true, false}) {
          const BasisSpec spec{n, d, c, mode};
          const auto entries = spec.Entries();
          std::set<std::pair<int, int>> seen;
          for (const auto& [m, pairs] : ComputeGramSupport(spec)) {
            for (const auto& kl : pairs) {
              EXPECT_LE(kl.first, kl.second);
              EXPECT_EQ(entries[kl.first] * entries[kl.second], m);
              EXPECT_TRUE(seen.insert(kl).second);
            }
          }
          const int l = spec.size();
          EXPECT_EQ(static_cast<int>(seen.size()), l * (l + 1) / 2);
        }
      }
    }
  }
}

TEST(PolicyModel, VelocityIsRelativeToTarget) {
  Eigen::Matrix2d b;
  b << 0, -0.5, -0.5, 0;
  const PolicyModel m(1, 1, BasisMode::kElementwise, Eigen::VectorXd::Constant(1, 2.0),
                      {GramPolynomial(BasisSpec{1, 1, true}, b)});
  EXPECT_DOUBLE_EQ(m.Velocity(Eigen::VectorXd::Constant(1, 5.0))[0], -3.0);
  EXPECT_DOUBLE_EQ(m.FieldAt(Eigen::VectorXd::Constant(1, 3.0))[0], -3.0);
  EXPECT_THROW(m.Velocity(Eigen::Vector2d(1, 1)), InputError);
}

}  // namespace
}  // namespace plyds
