#pragma once

#include <string>

#include <json.hpp>

#include "plyds/certificate.h"
#include "plyds/lyapunov_model.h"
#include "plyds/policy_model.h"

namespace plyds {

inline constexpr const char* kModelSchema = "plyds-model/1";
inline constexpr const char* kVersion = "0.1.0";

/// A learned policy with its Lyapunov candidate and certificate, plus the
/// resolved configuration and training metrics that produced it.
struct ModelBundle {
  PolicyModel policy;
  LyapunovModel lpf;
  StabilityCertificate certificate;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json metrics = nlohmann::json::object();
  std::string version{kVersion};
};

nlohmann::json ModelToJson(const ModelBundle& model);
/// Throws ParseError for a wrong schema tag or inconsistent sizes.
ModelBundle ModelFromJson(const nlohmann::json& j);

void SaveModel(const ModelBundle& model, const std::string& path);
ModelBundle LoadModel(const std::string& path);

}  // namespace plyds
