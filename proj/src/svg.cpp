#include "mfpca/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "mfpca/error.hpp"

namespace mfpca {

namespace {
constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 150, kTop = 36, kBottom = 44;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}
}  // namespace

void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::vector<double>& x,
                      const std::vector<SvgSeries>& series) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "svg", "chart has no x values");
  double ylo = std::numeric_limits<double>::infinity();
  double yhi = -ylo;
  for (const auto& s : series) {
    if (s.y.size() != x.size()) throw Error(ErrorCode::ShapeMismatch, "svg", "series '" + s.name + "' length");
    for (double v : s.y) {
      if (std::isfinite(v)) {
        ylo = std::min(ylo, v);
        yhi = std::max(yhi, v);
      }
    }
  }
  if (!std::isfinite(ylo)) ylo = 0.0, yhi = 1.0;
  if (yhi - ylo < 1e-12) ylo -= 0.5, yhi += 0.5;
  const auto [xlo_it, xhi_it] = std::minmax_element(x.begin(), x.end());
  const double xlo = *xlo_it;
  const double xhi = *xhi_it > xlo ? *xhi_it : xlo + 1.0;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double v) { return kTop + (yhi - v) / (yhi - ylo) * ph; };

  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "svg", "cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"14\">" << escape(title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 24 << "\">" << num(xlo) << "</text>\n";
  out << "<text x=\"" << kLeft + pw << "\" y=\"" << kHeight - 24 << "\" text-anchor=\"end\">" << num(xhi)
      << "</text>\n";
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 8 << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">" << num(yhi)
      << "</text>\n";
  out << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + ph << "\" text-anchor=\"end\">" << num(ylo)
      << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kColours[k % (sizeof(kColours) / sizeof(kColours[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"";
    if (s.dashed) out << " stroke-dasharray=\"5,3\"";
    out << " points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::isfinite(s.y[i])) out << num(px(x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(k + 1);
    out << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw + 30
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "")
        << "/>\n";
    out << "<text x=\"" << kLeft + pw + 34 << "\" y=\"" << ly << "\">" << escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace mfpca
