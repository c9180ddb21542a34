#include "calibra/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "calibra/csvio.hpp"

namespace calibra {

namespace {

constexpr int kPanelW = 320;
constexpr int kPanelH = 300;
constexpr int kMarginL = 52;
constexpr int kMarginB = 46;
constexpr int kMarginT = 34;
constexpr int kMarginR = 12;

struct Panel {
  std::ostringstream& os;
  double x0, y0;  // top-left corner in page coordinates
  double xmin, xmax, ymin, ymax;

  double px(double x) const {
    return x0 + kMarginL +
           (x - xmin) / (xmax - xmin) * (kPanelW - kMarginL - kMarginR);
  }
  double py(double y) const {
    return y0 + kMarginT +
           (ymax - y) / (ymax - ymin) * (kPanelH - kMarginT - kMarginB);
  }

  void frame(const std::string& label) const {
    os << "<rect x='" << x0 + kMarginL << "' y='" << y0 + kMarginT
       << "' width='" << kPanelW - kMarginL - kMarginR << "' height='"
       << kPanelH - kMarginT - kMarginB
       << "' fill='none' stroke='#444' stroke-width='1'/>\n";
    os << "<text x='" << x0 + kPanelW / 2.0 << "' y='" << y0 + kMarginT - 10
       << "' text-anchor='middle' font-size='12' font-family='sans-serif'>"
       << label << "</text>\n";
  }
  void hline(double y, const std::string& style) const {
    os << "<line x1='" << px(xmin) << "' x2='" << px(xmax) << "' y1='" << py(y)
       << "' y2='" << py(y) << "' " << style << "/>\n";
  }
  void point_ci(double x, double y, double lo, double hi,
                const std::string& color) const {
    os << "<line x1='" << px(x) << "' x2='" << px(x) << "' y1='" << py(lo)
       << "' y2='" << py(hi) << "' stroke='" << color
       << "' stroke-width='1.4'/>\n";
    os << "<circle cx='" << px(x) << "' cy='" << py(y)
       << "' r='3.2' fill='" << color << "'/>\n";
  }
  void y_axis_ticks() const {
    for (double t = 0.0; t <= 1.0001; t += 0.25) {
      if (t < ymin - 1e-9 || t > ymax + 1e-9) continue;
      os << "<line x1='" << px(xmin) - 4 << "' x2='" << px(xmin) << "' y1='"
         << py(t) << "' y2='" << py(t) << "' stroke='#444'/>\n";
      os << "<text x='" << px(xmin) - 7 << "' y='" << py(t) + 3.5
         << "' text-anchor='end' font-size='10' font-family='sans-serif'>" << t
         << "</text>\n";
    }
  }
  void x_label(const std::string& s) const {
    os << "<text x='" << x0 + kPanelW / 2.0 << "' y='" << y0 + kPanelH - 8
       << "' text-anchor='middle' font-size='11' font-family='sans-serif'>"
       << s << "</text>\n";
  }
  void y_label(const std::string& s) const {
    os << "<text x='" << x0 + 13 << "' y='" << y0 + kPanelH / 2.0
       << "' text-anchor='middle' font-size='11' font-family='sans-serif' "
          "transform='rotate(-90 "
       << x0 + 13 << " " << y0 + kPanelH / 2.0 << ")'>" << s << "</text>\n";
  }
};

std::string svg_open(int w, int h, const std::string& title) {
  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
     << h << "' viewBox='0 0 " << w << " " << h << "'>\n";
  os << "<text x='" << w / 2.0
     << "' y='16' text-anchor='middle' font-size='13' "
        "font-family='sans-serif' font-weight='bold'>"
     << title << "</text>\n";
  return os.str();
}

}  // namespace

std::string render_calibration_svg(const std::vector<SummaryRow>& rows,
                                   double prior_p1, const std::string& title) {
  std::vector<std::string> analyses;
  for (const auto& r : rows) {
    if (std::find(analyses.begin(), analyses.end(), r.analysis_id) ==
        analyses.end()) {
      analyses.push_back(r.analysis_id);
    }
  }
  const int w = kPanelW * std::max<int>(1, analyses.size());
  const int h = kPanelH + 24;
  std::ostringstream os;
  os << svg_open(w, h, title);
  os << "<!-- data: analysis_id,effect_id,n,mean,ci_lo,ci_hi,prior -->\n";
  for (const auto& r : rows) {
    os << "<!-- data: " << r.analysis_id << "," << r.effect_id << "," << r.n
       << "," << format_double(r.mean_post_p1) << ","
       << format_double(r.ci_lo) << "," << format_double(r.ci_hi) << ","
       << format_double(r.prior_p1) << " -->\n";
  }
  for (size_t a = 0; a < analyses.size(); ++a) {
    std::vector<const SummaryRow*> sub;
    for (const auto& r : rows) {
      if (r.analysis_id == analyses[a]) sub.push_back(&r);
    }
    Panel p{os, static_cast<double>(kPanelW * a), 24.0,
            0.5, sub.size() + 0.5, 0.0, 1.0};
    p.frame(analyses[a]);
    p.y_axis_ticks();
    p.hline(prior_p1,
            "stroke='#888' stroke-width='1' stroke-dasharray='5,4'");
    for (size_t e = 0; e < sub.size(); ++e) {
      p.point_ci(e + 1.0, sub[e]->mean_post_p1, sub[e]->ci_lo, sub[e]->ci_hi,
                 "#1f6fb4");
      os << "<text x='" << p.px(e + 1.0) << "' y='"
         << p.py(0.0) + 14
         << "' text-anchor='middle' font-size='10' font-family='sans-serif'>"
         << sub[e]->effect_id << "</text>\n";
    }
    p.x_label("effect");
    if (a == 0) p.y_label("mean posterior P(H1)");
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_sweep_svg(const std::vector<SweepBin>& bins,
                             const std::vector<SweepFit>& fits,
                             double prior_p1, double sweep_from,
                             double sweep_to, const std::string& title) {
  std::vector<std::pair<std::string, std::string>> panels;
  for (const auto& b : bins) {
    const auto key = std::make_pair(b.analysis_id, b.effect_id);
    if (std::find(panels.begin(), panels.end(), key) == panels.end()) {
      panels.push_back(key);
    }
  }
  const int w = kPanelW * std::max<int>(1, panels.size());
  const int h = kPanelH + 24;
  std::ostringstream os;
  os << svg_open(w, h, title);
  os << "<!-- data: analysis_id,effect_id,bin_center,mean,ci_lo,ci_hi,n -->\n";
  for (const auto& b : bins) {
    os << "<!-- data: " << b.analysis_id << "," << b.effect_id << ","
       << format_double(b.center) << "," << format_double(b.mean) << ","
       << format_double(b.ci_lo) << "," << format_double(b.ci_hi) << "," << b.n
       << " -->\n";
  }
  for (size_t pi = 0; pi < panels.size(); ++pi) {
    Panel p{os, static_cast<double>(kPanelW * pi), 24.0,
            sweep_from, sweep_to, 0.0, 1.0};
    p.frame(panels[pi].first + " : " + panels[pi].second);
    p.y_axis_ticks();
    p.hline(prior_p1,
            "stroke='#888' stroke-width='1' stroke-dasharray='5,4'");
    for (const auto& b : bins) {
      if (b.analysis_id != panels[pi].first || b.effect_id != panels[pi].second)
        continue;
      p.point_ci(b.center, b.mean, b.ci_lo, b.ci_hi, "#1f6fb4");
    }
    for (const auto& f : fits) {
      if (f.analysis_id != panels[pi].first || f.effect_id != panels[pi].second)
        continue;
      os << "<polyline fill='none' stroke='#c0392b' stroke-width='1.6' "
            "points='";
      for (int i = 0; i <= 60; ++i) {
        const double x = sweep_from + (sweep_to - sweep_from) * i / 60.0;
        const double y = 1.0 / (1.0 + std::exp(-(f.intercept + f.slope * x)));
        os << p.px(x) << "," << p.py(y) << " ";
      }
      os << "'/>\n";
    }
    p.x_label("true item slope SD");
    if (pi == 0) p.y_label("posterior P(H1)");
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_curve_svg(const ErrorRateCurve& curve, double alpha_level,
                             const std::string& title) {
  std::vector<std::pair<std::string, std::string>> panels;
  double xmin = 0.0, xmax = 0.0;
  bool have_x = false;
  for (const auto& p : curve) {
    const auto key = std::make_pair(p.analysis_id, p.effect_id);
    if (std::find(panels.begin(), panels.end(), key) == panels.end()) {
      panels.push_back(key);
    }
    if (!std::isnan(p.sd_true)) {
      if (!have_x) {
        xmin = xmax = p.sd_true;
        have_x = true;
      }
      xmin = std::min(xmin, p.sd_true);
      xmax = std::max(xmax, p.sd_true);
    }
  }
  if (!have_x || xmax == xmin) {
    xmin = -0.5;
    xmax = 0.5;
  }
  const int w = kPanelW * std::max<int>(1, panels.size());
  const int h = kPanelH + 24;
  std::ostringstream os;
  os << svg_open(w, h, title);
  os << "<!-- data: analysis_id,effect_id,sd_true,rate,ci_lo,ci_hi -->\n";
  for (const auto& p : curve) {
    os << "<!-- data: " << p.analysis_id << "," << p.effect_id << ","
       << format_double(p.sd_true) << ","
       << format_double(p.n_sims > 0
                            ? static_cast<double>(p.n_reject) / p.n_sims
                            : 0.0)
       << "," << format_double(p.ci_lo) << "," << format_double(p.ci_hi)
       << " -->\n";
  }
  double ymax = alpha_level * 2;
  for (const auto& p : curve) ymax = std::max(ymax, p.ci_hi * 1.1);
  ymax = std::min(1.0, ymax);
  for (size_t pi = 0; pi < panels.size(); ++pi) {
    Panel pan{os, static_cast<double>(kPanelW * pi), 24.0, xmin, xmax, 0.0,
              ymax};
    pan.frame(panels[pi].first + " : " + panels[pi].second);
    pan.hline(alpha_level,
              "stroke='#888' stroke-width='1' stroke-dasharray='5,4'");
    for (double t = 0.0; t <= ymax + 1e-9; t += ymax > 0.4 ? 0.2 : 0.05) {
      os << "<text x='" << pan.px(xmin) - 7 << "' y='" << pan.py(t) + 3.5
         << "' text-anchor='end' font-size='10' font-family='sans-serif'>" << t
         << "</text>\n";
    }
    for (const auto& p : curve) {
      if (p.analysis_id != panels[pi].first || p.effect_id != panels[pi].second)
        continue;
      const double x = std::isnan(p.sd_true) ? 0.0 : p.sd_true;
      const double rate =
          p.n_sims > 0 ? static_cast<double>(p.n_reject) / p.n_sims : 0.0;
      pan.point_ci(x, rate, p.ci_lo, p.ci_hi, "#1f6fb4");
    }
    pan.x_label("true SD");
    if (pi == 0) pan.y_label("rejection rate");
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace calibra
