#include "plyds/model_io.h"

#include <fstream>

#include "plyds/errors.h"

namespace plyds {

namespace {

nlohmann::json Blocks(const std::vector<GramPolynomial>& blocks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& b : blocks) out.push_back(b.Upper());
  return out;
}

std::vector<GramPolynomial> ReadBlocks(const nlohmann::json& j, const BasisSpec& spec,
                                       size_t expected, const char* field) {
  if (!j.is_array() || j.size() != expected) {
    throw ParseError(std::string("model field '") + field + "' must hold " +
                     std::to_string(expected) + " blocks");
  }
  std::vector<GramPolynomial> out;
  for (const auto& b : j) {
    const auto upper = b.get<std::vector<double>>();
    if (static_cast<int>(upper.size()) != UpperTriangleSize(spec.size())) {
      throw ParseError(std::string("model field '") + field + "' has a block of length " +
                       std::to_string(upper.size()) + ", expected " +
                       std::to_string(UpperTriangleSize(spec.size())));
    }
    out.push_back(GramPolynomial::FromUpper(spec, upper));
  }
  return out;
}

}  // namespace

nlohmann::json ModelToJson(const ModelBundle& m) {
  const PolicyModel& p = m.policy;
  nlohmann::json j;
  j["schema"] = kModelSchema;
  j["version"] = m.version;
  j["n"] = p.n();
  j["alpha"] = p.alpha();
  j["beta"] = m.lpf.beta();
  j["basis_mode"] = ToString(p.mode());
  j["lpf_mode"] = ToString(m.lpf.lpf_mode());
  j["target"] = std::vector<double>(p.target().data(), p.target().data() + p.n());
  j["P"] = Blocks(p.rows());
  j["Q"] = Blocks(m.lpf.blocks());
  j["G"] = Blocks(m.certificate.g_blocks);
  j["eps_decrease"] = m.certificate.eps_decrease;
  j["eps_pd"] = m.certificate.eps_pd;
  j["certificate"] = m.certificate.report.ToJson();
  j["config"] = m.config;
  j["metrics"] = m.metrics;
  return j;
}

ModelBundle ModelFromJson(const nlohmann::json& j) {
  try {
    if (j.value("schema", std::string()) != kModelSchema) {
      throw ParseError(std::string("model schema must be ") + kModelSchema);
    }
    const int n = j.at("n").get<int>();
    const int alpha = j.at("alpha").get<int>();
    const int beta = j.at("beta").get<int>();
    if (n < 1 || alpha < 1 || beta < 1) throw ParseError("model has n, alpha or beta < 1");
    const BasisMode mode = ParseBasisMode(j.at("basis_mode").get<std::string>());
    const LpfMode lpf_mode = ParseLpfMode(j.at("lpf_mode").get<std::string>());
    const auto target = j.at("target").get<std::vector<double>>();
    if (static_cast<int>(target.size()) != n) throw ParseError("model target length differs from n");
    const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(target.data(), n);
    const size_t blocks = lpf_mode == LpfMode::kVector ? n : 1;
    PolicyModel policy(n, alpha, mode, t,
                       ReadBlocks(j.at("P"), PolicyModel::Basis(n, alpha, mode), n, "P"));
    LyapunovModel lpf(n, beta, mode, lpf_mode,
                      ReadBlocks(j.at("Q"), LyapunovModel::Basis(n, beta, mode), blocks, "Q"));
    StabilityCertificate cert;
    cert.g_blocks = ReadBlocks(j.at("G"), BasisSpec{n, alpha + beta, false, mode}, blocks, "G");
    cert.eps_decrease = j.at("eps_decrease").get<double>();
    cert.eps_pd = j.value("eps_pd", kDefaultEpsPd);
    ModelBundle out{std::move(policy), std::move(lpf), std::move(cert)};
    out.config = j.value("config", nlohmann::json::object());
    out.metrics = j.value("metrics", nlohmann::json::object());
    out.version = j.value("version", std::string());
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model field: ") + e.what());
  } catch (const InputError& e) {
    throw ParseError(std::string("inconsistent model: ") + e.what());
  }
}

void SaveModel(const ModelBundle& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write model", path);
  out << ModelToJson(model).dump(2) << "\n";
}

ModelBundle LoadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model", path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), path);
  }
  try {
    return ModelFromJson(j);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), path);
  }
}

}  // namespace plyds
