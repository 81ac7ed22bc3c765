#include "dimple/plot.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dimple {

namespace {

struct Series {
  std::string algorithm;
  int fixed_value;
  std::vector<std::pair<double, double>> points;  // (x, mean r_bl)
};

const char* kPalette[] = {"#c0392b", "#2c3e50", "#2980b9", "#27ae60",
                          "#8e44ad", "#d35400", "#16a085", "#7f8c8d"};

}  // namespace

void write_svg_plot(const std::vector<SummaryRow>& rows, char axis,
                    const std::string& path) {
  if (axis != 'n' && axis != 'L')
    throw std::invalid_argument("write_svg_plot: axis must be 'n' or 'L'");
  std::vector<Series> series;
  for (const auto& r : rows) {
    if (!r.mean_r_bl) continue;
    const int x = axis == 'n' ? r.n : r.L;
    const int fixed = axis == 'n' ? r.L : r.n;
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) {
      return s.algorithm == r.algorithm && s.fixed_value == fixed;
    });
    if (it == series.end()) {
      series.push_back(Series{r.algorithm, fixed, {}});
      it = series.end() - 1;
    }
    it->points.emplace_back(double(x), *r.mean_r_bl);
  }
  if (series.empty())
    throw std::runtime_error("write_svg_plot: no plottable rows");
  for (auto& s : series) std::sort(s.points.begin(), s.points.end());

  double xmin = 1e300, xmax = -1e300, ymax = 0.0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  if (xmax <= xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.05;

  const double width = 640, height = 420;
  const double ml = 70, mr = 170, mt = 30, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return mt + ph - y / ymax * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = ymax * t / 4.0;
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << sy(yv) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(yv)
        << "</text>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << sy(yv) << "\" x2=\"" << ml + pw
        << "\" y2=\"" << sy(yv) << "\" stroke=\"#dddddd\"/>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << format_double(xv)
        << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << axis << "</text>\n";
  svg << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">mean R_BL</text>\n";

  int palette_at = 0;
  std::map<int, std::string> fixed_color;
  double legend_y = mt + 10;
  for (const auto& s : series) {
    if (!fixed_color.count(s.fixed_value)) {
      fixed_color[s.fixed_value] =
          kPalette[palette_at++ % (sizeof(kPalette) / sizeof(kPalette[0]))];
    }
    const std::string& color = fixed_color[s.fixed_value];
    const bool dashed = s.algorithm != "tensor";
    if (s.points.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\"";
      if (dashed) svg << " stroke-dasharray=\"6 4\"";
      svg << " points=\"";
      for (const auto& [x, y] : s.points) svg << sx(x) << ',' << sy(y) << ' ';
      svg << "\"/>\n";
    }
    for (const auto& [x, y] : s.points)
      svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y)
          << "\" r=\"3\" fill=\"" << color << "\" data-x=\"" << format_double(x)
          << "\" data-y=\"" << format_double(y) << "\"/>\n";
    svg << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << legend_y << "\" x2=\""
        << ml + pw + 40 << "\" y2=\"" << legend_y << "\" stroke=\"" << color
        << "\" stroke-width=\"1.6\"" << (dashed ? " stroke-dasharray=\"6 4\"" : "")
        << "/>\n";
    svg << "<text x=\"" << ml + pw + 46 << "\" y=\"" << legend_y + 4
        << "\" font-size=\"11\">" << s.algorithm << ", " << (axis == 'n' ? 'L' : 'n')
        << "=" << s.fixed_value << "</text>\n";
    legend_y += 18;
  }
  svg << "</svg>\n";

  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_svg_plot: cannot open " + path);
  os << svg.str();
}

std::vector<std::pair<double, double>> scrape_svg_points(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("scrape_svg_points: cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();
  std::vector<std::pair<double, double>> out;
  std::size_t at = 0;
  while ((at = text.find("data-x=\"", at)) != std::string::npos) {
    at += 8;
    const std::size_t xe = text.find('"', at);
    const double x = std::stod(text.substr(at, xe - at));
    std::size_t ys = text.find("data-y=\"", xe);
    ys += 8;
    const std::size_t ye = text.find('"', ys);
    const double y = std::stod(text.substr(ys, ye - ys));
    out.emplace_back(x, y);
    at = ye;
  }
  return out;
}

}  // namespace dimple
