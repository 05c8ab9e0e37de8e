#include "plyds/svg_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "plyds/errors.h"

namespace plyds {

namespace {

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '-':
        // "--" is not allowed inside XML comments.
        out += (!out.empty() && out.back() == '-') ? " -" : "-";
        break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string RenderSvg(const SvgScene& sc) {
  const Eigen::Vector2d span = sc.hi - sc.lo;
  if (!(span.array() > 0.0).all()) throw InputError("RenderSvg: empty plot box");
  const double w = sc.width_px;
  const double h = std::round(w * span.y() / span.x());
  auto px = [&](const Eigen::Vector2d& p) {
    return Eigen::Vector2d((p.x() - sc.lo.x()) / span.x() * w,
                           h - (p.y() - sc.lo.y()) / span.y() * h);
  };
  auto polyline = [&](const Eigen::MatrixXd& pts, const char* cls) {
    std::ostringstream s;
    s << "<polyline class=\"" << cls << "\" points=\"";
    // Thin long rollouts to at most ~2000 vertices.
    const long stride = std::max<long>(1, pts.rows() / 2000);
    for (long k = 0; k < pts.rows(); k += stride) {
      const Eigen::Vector2d q = px(Eigen::Vector2d(pts(k, 0), pts(k, 1)));
      s << Fmt(q.x()) << "," << Fmt(q.y()) << " ";
    }
    const Eigen::Vector2d q = px(Eigen::Vector2d(pts(pts.rows() - 1, 0), pts(pts.rows() - 1, 1)));
    s << Fmt(q.x()) << "," << Fmt(q.y()) << "\"/>\n";
    return s.str();
  };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!sc.comment.empty()) out << "<!-- " << Escape(sc.comment) << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Fmt(w) << "\" height=\""
      << Fmt(h) << "\" viewBox=\"0 0 " << Fmt(w) << " " << Fmt(h) << "\">\n";
  out << "<style>\n"
         ".field{stroke:#888;stroke-width:1;fill:none}\n"
         ".rollout{stroke:#c0392b;stroke-width:1.2;fill:none}\n"
         ".demo{stroke:#1f4e9c;stroke-width:2;fill:none;stroke-dasharray:5 3}\n"
         ".target{fill:#000}\n"
         "text{font-family:sans-serif;font-size:13px}\n"
         "</style>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  if (!sc.title.empty()) out << "<text x=\"8\" y=\"18\">" << Escape(sc.title) << "</text>\n";

  if (!sc.arrow_origins.empty()) {
    const double cell = w / std::max(2.0, std::sqrt(static_cast<double>(sc.arrow_origins.size())));
    const double len = 0.4 * cell;
    out << "<g class=\"field\">\n";
    for (size_t i = 0; i < sc.arrow_origins.size(); ++i) {
      const Eigen::Vector2d a = px(sc.arrow_origins[i]);
      Eigen::Vector2d d(sc.arrow_vectors[i].x() / span.x(), -sc.arrow_vectors[i].y() / span.y());
      if (d.norm() == 0.0) continue;
      d = d.normalized() * len;
      const Eigen::Vector2d b = a + d;
      const Eigen::Vector2d side(-d.y(), d.x());
      const Eigen::Vector2d l = b - 0.3 * d + 0.15 * side;
      const Eigen::Vector2d r = b - 0.3 * d - 0.15 * side;
      out << "<path class=\"field\" d=\"M" << Fmt(a.x()) << " " << Fmt(a.y()) << " L"
          << Fmt(b.x()) << " " << Fmt(b.y()) << " M" << Fmt(l.x()) << " " << Fmt(l.y())
          << " L" << Fmt(b.x()) << " " << Fmt(b.y()) << " L" << Fmt(r.x()) << " "
          << Fmt(r.y()) << "\"/>\n";
    }
    out << "</g>\n";
  }
  for (const auto& r : sc.rollouts) {
    if (r.rows() > 0) out << polyline(r, "rollout");
  }
  for (const auto& d : sc.demos) {
    if (d.rows() > 0) out << polyline(d, "demo");
  }
  for (const auto& t : sc.targets) {
    const Eigen::Vector2d q = px(t);
    out << "<circle class=\"target\" cx=\"" << Fmt(q.x()) << "\" cy=\"" << Fmt(q.y())
        << "\" r=\"4\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void WriteSvg(const SvgScene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << RenderSvg(scene);
}

}  // namespace plyds
