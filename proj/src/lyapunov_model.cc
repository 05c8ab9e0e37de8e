#include "plyds/lyapunov_model.h"

#include "plyds/errors.h"

namespace plyds {

std::string ToString(LpfMode mode) {
  return mode == LpfMode::kVector ? "vector" : "scalar";
}

LpfMode ParseLpfMode(const std::string& text) {
  if (text == "vector") return LpfMode::kVector;
  if (text == "scalar") return LpfMode::kScalar;
  throw InputError("unknown lpf mode '" + text + "' (vector|scalar)");
}

LyapunovModel::LyapunovModel(int n, int beta, BasisMode mode, LpfMode lpf_mode,
                             std::vector<GramPolynomial> blocks)
    : n_(n),
      beta_(beta),
      mode_(mode),
      lpf_mode_(lpf_mode),
      blocks_(std::move(blocks)) {
  if (n_ < 1) throw InputError("LyapunovModel: n must be >= 1");
  if (beta_ < 1) throw InputError("LyapunovModel: beta must be >= 1");
  const int expected = lpf_mode_ == LpfMode::kVector ? n_ : 1;
  if (num_blocks() != expected) {
    throw InputError("LyapunovModel: expected " + std::to_string(expected) +
                     " Gram blocks, got " + std::to_string(num_blocks()));
  }
  for (const auto& block : blocks_) {
    if (!(block.spec() == basis())) {
      throw InputError("LyapunovModel: block basis does not match (n, beta, mode)");
    }
  }
}

LyapunovModel LyapunovModel::Identity(int n, int beta, BasisMode mode,
                                      LpfMode lpf_mode) {
  const BasisSpec spec = Basis(n, beta, mode);
  const int count = lpf_mode == LpfMode::kVector ? n : 1;
  std::vector<GramPolynomial> blocks(
      count,
      GramPolynomial(spec, Eigen::MatrixXd::Identity(spec.size(), spec.size())));
  return LyapunovModel(n, beta, mode, lpf_mode, std::move(blocks));
}

Eigen::VectorXd LpfValue(const LyapunovModel& lpf,
                         const Eigen::Ref<const Eigen::VectorXd>& e) {
  const Eigen::VectorXd b = BasisVector(e, lpf.basis());
  Eigen::VectorXd out(lpf.num_blocks());
  for (int i = 0; i < lpf.num_blocks(); ++i) {
    out[i] = b.dot(lpf.block(i).gram() * b);
  }
  return out;
}

std::vector<MonomialPoly> LpfTimeDerivativePolys(const LyapunovModel& lpf,
                                                 const PolicyModel& policy) {
  if (lpf.n() != policy.n()) {
    throw InputError("LpfTimeDerivative: policy and LPF dimensions differ");
  }
  const std::vector<MonomialPoly> field = policy.ExpandRows();
  std::vector<MonomialPoly> out;
  for (const auto& block : lpf.blocks()) {
    const MonomialPoly v = block.Expand();
    MonomialPoly vdot(lpf.n());
    for (int j = 0; j < lpf.n(); ++j) {
      vdot += Multiply(Differentiate(v, j), field[j]);
    }
    out.push_back(std::move(vdot));
  }
  return out;
}

Eigen::VectorXd LpfTimeDerivative(const LyapunovModel& lpf,
                                  const PolicyModel& policy,
                                  const Eigen::Ref<const Eigen::VectorXd>& e) {
  if (e.size() != lpf.n()) throw InputError("LpfTimeDerivative: dimension mismatch");
  const auto polys = LpfTimeDerivativePolys(lpf, policy);
  Eigen::VectorXd out(polys.size());
  for (size_t i = 0; i < polys.size(); ++i) out[i] = polys[i].Evaluate(e);
  return out;
}

LyapunovModel AggregateLpf(const LyapunovModel& lpf) {
  if (lpf.lpf_mode() != LpfMode::kVector) {
    throw InputError("AggregateLpf: model is already in scalar mode");
  }
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(lpf.basis().size(), lpf.basis().size());
  for (const auto& block : lpf.blocks()) sum += block.gram();
  return LyapunovModel(lpf.n(), lpf.beta(), lpf.mode(), LpfMode::kScalar,
                       {GramPolynomial(lpf.basis(), sum)});
}

}  // namespace plyds
