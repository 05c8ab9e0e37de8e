#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace plyds {

/// A planar figure: field arrows, rollout polylines and demonstration
/// overlays, each drawn with its own CSS class ("field", "rollout", "demo").
struct SvgScene {
  Eigen::Vector2d lo{-1.0, -1.0};
  Eigen::Vector2d hi{1.0, 1.0};
  std::vector<Eigen::Vector2d> arrow_origins;
  std::vector<Eigen::Vector2d> arrow_vectors;
  std::vector<Eigen::MatrixXd> rollouts;  // rows are (x1, x2)
  std::vector<Eigen::MatrixXd> demos;
  std::vector<Eigen::Vector2d> targets;
  std::string title;
  /// Written inside an XML comment, e.g. serialized provenance.
  std::string comment;
  int width_px{640};
};

/// Self-contained SVG document; arrows are normalized to a fixed fraction of
/// the grid spacing so the field direction stays readable at any speed.
std::string RenderSvg(const SvgScene& scene);

void WriteSvg(const SvgScene& scene, const std::string& path);

}  // namespace plyds
