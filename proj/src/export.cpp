#include "cantor/export.hpp"

#include <cstdio>
#include <sstream>

namespace cantor {

std::string ratio_csv(const std::vector<RatioReport>& rows) {
  std::ostringstream out;
  out << "depth,max_ratio_num,max_ratio_den,bound,float_approx\n";
  for (const auto& r : rows)
    out << r.depth << ',' << r.max_ratio.get_num().get_str(10) << ','
        << r.max_ratio.get_den().get_str(10) << ',' << to_string(r.closed_form_bound) << ','
        << approx_string(r.max_ratio) << '\n';
  return out.str();
}

std::string entropy_csv(const std::vector<EntropyRow>& rows) {
  std::ostringstream out;
  out << "eps,n,count,estimate\n";
  for (const auto& r : rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", r.estimate);
    out << to_string(r.eps) << ',' << r.n << ',' << r.count << ',' << buf << '\n';
  }
  return out.str();
}

std::string scheme_svg(const EmbeddingScheme& scheme, std::size_t levels) {
  const double width = 1000, row = 40, margin = 20;
  const std::size_t first = scheme.first_level();
  const std::size_t last = std::min(scheme.depth(), first + levels - 1);

  double lo = 0, hi = 1;
  bool seeded = false;
  for (const auto& c : scheme.level(first).cells) {
    double a = to_approx(c.A.lo), b = to_approx(c.A.hi);
    if (!seeded || a < lo) lo = a;
    if (!seeded || b > hi) hi = b;
    seeded = true;
  }
  auto X = [&](const Scalar& v) { return margin + (to_approx(v) - lo) / (hi - lo) * width; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width + 2 * margin << "\" height=\""
      << (last - first + 1) * row + 2 * margin + 20 << "\">\n";
  out << "<!-- approximate: endpoints rounded to double precision -->\n";
  out << "<text x=\"" << margin << "\" y=\"14\" font-size=\"12\">approximate rendering, levels "
      << first << ".." << last << "</text>\n";
  char buf[256];
  for (std::size_t n = first; n <= last; ++n) {
    double y = margin + 20 + (n - first) * row;
    for (const auto& c : scheme.level(n).cells) {
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.4f\" y=\"%.1f\" width=\"%.6f\" height=\"%.1f\" fill=\"none\" "
                    "stroke=\"#888\" stroke-width=\"0.5\"/>\n",
                    X(c.A.lo), y, X(c.A.hi) - X(c.A.lo), row * 0.6);
      out << buf;
      if (!c.D) continue;
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.4f\" y=\"%.1f\" width=\"%.6f\" height=\"%.1f\" fill=\"#246\"/>\n",
                    X(c.D->lo), y + row * 0.15, X(c.D->hi) - X(c.D->lo), row * 0.3);
      out << buf;
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string level_dot(const CoverSequence& seq, std::size_t n) {
  const CycleLevel& lvl = seq.levels.at(n);
  std::ostringstream out;
  out << "digraph level_" << n << " {\n";
  for (std::size_t v = 0; v < lvl.vertex_count(); ++v) {
    out << "  " << lvl.name(v);
    if (n > 0) out << " [label=\"" << lvl.name(v) << "\\n-> " << seq.levels[n - 1].name(seq.homs[n - 1][v]) << "\"]";
    out << ";\n";
  }
  for (auto [a, b] : lvl.graph().edges) out << "  " << lvl.name(a) << " -> " << lvl.name(b) << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace cantor
