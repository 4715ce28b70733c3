#include "iofts/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "iofts/errors.hpp"

namespace iofts {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void writeSvgChart(const std::string& path, const std::string& title,
                   const std::vector<SvgSeries>& series, const std::string& xLabel,
                   const std::string& yLabel) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (size_t k = 0; k < s.x.size(); ++k) {
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
    }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double W = 860, H = 520, L = 70, R = 20, T = 40, B = 50;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::ofstream out(path);
  if (!out) throw StructuralError("cannot write SVG: " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << " " << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";

  for (int g = 0; g <= 5; ++g) {
    const double yv = ymin + g * (ymax - ymin) / 5;
    out << "<line x1='" << L << "' y1='" << py(yv) << "' x2='" << W - R << "' y2='" << py(yv)
        << "' stroke='#dddddd'/>\n";
    out << "<text x='" << L - 6 << "' y='" << py(yv) + 4
        << "' text-anchor='end' font-size='11'>" << yv << "</text>\n";
    const double xv = xmin + g * (xmax - xmin) / 5;
    out << "<text x='" << px(xv) << "' y='" << H - B + 18
        << "' text-anchor='middle' font-size='11'>" << xv << "</text>\n";
  }
  out << "<line x1='" << L << "' y1='" << py(ymin) << "' x2='" << W - R << "' y2='" << py(ymin)
      << "' stroke='black'/>\n";
  out << "<line x1='" << L << "' y1='" << py(ymin) << "' x2='" << L << "' y2='" << T
      << "' stroke='black'/>\n";
  out << "<text x='" << W / 2 << "' y='" << H - 12 << "' text-anchor='middle' font-size='12'>"
      << xLabel << "</text>\n";
  if (!yLabel.empty())
    out << "<text x='16' y='" << H / 2 << "' font-size='12' transform='rotate(-90 16 "
        << H / 2 << ")' text-anchor='middle'>" << yLabel << "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 6];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.4' points='";
    for (size_t k = 0; k < series[s].x.size(); ++k)
      out << px(series[s].x[k]) << "," << py(series[s].y[k]) << " ";
    out << "'/>\n";
    out << "<text x='" << W - R - 8 << "' y='" << T + 16 * (s + 1)
        << "' text-anchor='end' font-size='12' fill='" << color << "'>" << series[s].name
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace iofts
