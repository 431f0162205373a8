#include "tunnelsim/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "tunnelsim/error.hpp"
#include "tunnelsim/fit.hpp"
#include "tunnelsim/sweep.hpp"
#include "tunnelsim/version.hpp"

namespace tunnelsim {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

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

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

struct Series {
  std::string name;
  std::vector<double> x, y, err;
  std::string color;
  bool markers = true;
  bool line = true;
  bool dashed = false;
};

class Panel {
 public:
  Panel(double x0, double y0, double w, double h) : x0_(x0), y0_(y0), w_(w), h_(h) {}

  std::string title, xlabel, ylabel;
  bool log_x = false;
  std::vector<Series> series;
  std::optional<double> zero_line;

  std::string render() const {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        const double e = s.err.empty() ? 0.0 : s.err[i];
        ymin = std::min(ymin, s.y[i] - e);
        ymax = std::max(ymax, s.y[i] + e);
      }
    }
    if (zero_line) {
      ymin = std::min(ymin, *zero_line);
      ymax = std::max(ymax, *zero_line);
    }
    if (!(xmax > xmin)) { xmin -= 0.5; xmax += 0.5; }
    if (!(ymax > ymin)) { ymin -= 0.5; ymax += 0.5; }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double lx0 = log_x ? std::log10(xmin) : xmin;
    const double lx1 = log_x ? std::log10(xmax) : xmax;

    const double L = x0_ + 60, R = x0_ + w_ - 15, T = y0_ + 30, B = y0_ + h_ - 45;
    auto px = [&](double x) { return L + ((log_x ? std::log10(x) : x) - lx0) / (lx1 - lx0) * (R - L); };
    auto py = [&](double y) { return B - (y - ymin) / (ymax - ymin) * (B - T); };

    std::ostringstream o;
    o << "<g>\n";
    o << "<rect x='" << num(L) << "' y='" << num(T) << "' width='" << num(R - L) << "' height='"
      << num(B - T) << "' fill='none' stroke='black'/>\n";
    o << "<text x='" << num((L + R) / 2) << "' y='" << num(y0_ + 18)
      << "' text-anchor='middle' font-size='14'>" << escape(title) << "</text>\n";
    o << "<text x='" << num((L + R) / 2) << "' y='" << num(B + 36)
      << "' text-anchor='middle' font-size='12'>" << escape(xlabel) << "</text>\n";
    o << "<text x='" << num(x0_ + 14) << "' y='" << num((T + B) / 2)
      << "' text-anchor='middle' font-size='12' transform='rotate(-90 " << num(x0_ + 14) << ' '
      << num((T + B) / 2) << ")'>" << escape(ylabel) << "</text>\n";

    // Ticks.
    std::vector<double> xt;
    if (log_x) {
      for (int e = int(std::floor(lx0)); e <= int(std::ceil(lx1)); ++e) {
        for (int m : {1, 2, 5}) {
          const double v = m * std::pow(10.0, e);
          if (v >= xmin * 0.999 && v <= xmax * 1.001) xt.push_back(v);
        }
      }
    } else {
      for (int i = 0; i <= 4; ++i) xt.push_back(xmin + (xmax - xmin) * i / 4.0);
    }
    for (double v : xt) {
      o << "<line x1='" << num(px(v)) << "' y1='" << num(B) << "' x2='" << num(px(v)) << "' y2='"
        << num(B + 5) << "' stroke='black'/>\n";
      o << "<text x='" << num(px(v)) << "' y='" << num(B + 18)
        << "' text-anchor='middle' font-size='10'>" << label(v) << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
      const double v = ymin + (ymax - ymin) * i / 4.0;
      o << "<line x1='" << num(L - 5) << "' y1='" << num(py(v)) << "' x2='" << num(L) << "' y2='"
        << num(py(v)) << "' stroke='black'/>\n";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", v);
      o << "<text x='" << num(L - 8) << "' y='" << num(py(v) + 3)
        << "' text-anchor='end' font-size='10'>" << buf << "</text>\n";
    }
    if (zero_line) {
      o << "<line x1='" << num(L) << "' y1='" << num(py(*zero_line)) << "' x2='" << num(R)
        << "' y2='" << num(py(*zero_line)) << "' stroke='gray' stroke-dasharray='2,2'/>\n";
    }

    int legend_row = 0;
    for (const auto& s : series) {
      if (s.line && s.x.size() > 1) {
        o << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5'"
          << (s.dashed ? " stroke-dasharray='6,3'" : "") << " points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) o << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
        o << "'/>\n";
      }
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!s.err.empty()) {
          o << "<line x1='" << num(px(s.x[i])) << "' y1='" << num(py(s.y[i] - s.err[i]))
            << "' x2='" << num(px(s.x[i])) << "' y2='" << num(py(s.y[i] + s.err[i])) << "' stroke='"
            << s.color << "'/>\n";
        }
        if (s.markers) {
          o << "<circle cx='" << num(px(s.x[i])) << "' cy='" << num(py(s.y[i]))
            << "' r='2.5' fill='" << s.color << "'/>\n";
        }
      }
      const double ly = T + 14 + 14 * legend_row++;
      o << "<line x1='" << num(R - 150) << "' y1='" << num(ly - 4) << "' x2='" << num(R - 130)
        << "' y2='" << num(ly - 4) << "' stroke='" << s.color << "' stroke-width='2'"
        << (s.dashed ? " stroke-dasharray='6,3'" : "") << "/>\n";
      o << "<text x='" << num(R - 125) << "' y='" << num(ly) << "' font-size='10'>" << escape(s.name)
        << "</text>\n";
    }
    o << "</g>\n";
    return o.str();
  }

 private:
  double x0_, y0_, w_, h_;
};

struct Table {
  std::map<PointKey, double> gpe;
  std::map<PointKey, EnsembleStatistics> bve;
};

Table tabulate(const std::vector<TransmissionResult>& rows) {
  Table t;
  std::map<PointKey, std::vector<TransmissionResult>> b;
  for (const auto& r : rows) {
    if (r.source == Source::kGpe) {
      t.gpe[r.point] = r.T;
    } else {
      b[r.point].push_back(r);
    }
  }
  for (auto& [p, v] : b) {
    if (v.size() >= 2) {
      t.bve[p] = aggregate(v);
    } else {
      EnsembleStatistics s;
      s.point = p;
      s.mean = v[0].T;
      s.count = 1;
      t.bve[p] = s;
    }
  }
  return t;
}

std::string document(double w, double h, const std::vector<Panel>& panels, int figure,
                     const PlotProvenance& prov, std::size_t rows) {
  std::ostringstream o;
  o << "<?xml version='1.0' encoding='UTF-8'?>\n";
  o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(w) << "' height='" << num(h)
    << "' viewBox='0 0 " << num(w) << ' ' << num(h) << "' font-family='sans-serif'>\n";
  o << "<!-- tunnelsim " << kVersion << " figure " << figure << " -->\n";
  o << "<!-- source: " << escape(prov.source) << " (" << rows << " rows) -->\n";
  if (!prov.spec_hash.empty()) o << "<!-- spec_hash: " << prov.spec_hash << " -->\n";
  o << "<!-- error bars: 3 x standard error over BVE realizations -->\n";
  o << "<rect width='100%' height='100%' fill='white'/>\n";
  for (const auto& p : panels) o << p.render();
  o << "</svg>\n";
  return o.str();
}

Series fit_curve(const FitResult& f, double lo, double hi, bool log_x, std::string name, std::string color) {
  Series s;
  s.name = std::move(name);
  s.color = std::move(color);
  s.markers = false;
  s.dashed = true;
  for (int i = 0; i <= 200; ++i) {
    const double u = i / 200.0;
    const double x = log_x ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u;
    s.x.push_back(x);
    s.y.push_back(f.evaluate(x));
  }
  return s;
}

std::string as_label(double a) { return "a_s=" + label(a) + " a0"; }

// Width series at the most common V0/E for each a_s.
std::map<double, std::vector<PointKey>> width_series(const Table& t) {
  std::map<std::pair<double, double>, std::vector<PointKey>> groups;
  for (const auto& [p, _] : t.gpe) groups[{p.a_s_a0, p.V0_over_E}].push_back(p);
  std::map<double, std::vector<PointKey>> out;
  for (auto& [key, pts] : groups) {
    std::set<double> widths;
    for (const auto& p : pts) widths.insert(p.sigma_b_lz);
    if (widths.size() < 2) continue;
    auto& slot = out[key.first];
    if (pts.size() > slot.size()) slot = pts;
  }
  for (auto& [_, pts] : out) {
    std::ranges::sort(pts, [](const PointKey& a, const PointKey& b) { return a.sigma_b_lz < b.sigma_b_lz; });
  }
  return out;
}

std::map<double, std::vector<PointKey>> height_series(const Table& t) {
  std::map<std::pair<double, double>, std::vector<PointKey>> groups;
  for (const auto& [p, _] : t.gpe) groups[{p.a_s_a0, p.sigma_b_lz}].push_back(p);
  std::map<double, std::vector<PointKey>> out;
  for (auto& [key, pts] : groups) {
    std::set<double> heights;
    for (const auto& p : pts) heights.insert(p.V0_over_E);
    if (heights.size() < 2) continue;
    auto& slot = out[key.first];
    if (pts.size() > slot.size()) slot = pts;
  }
  for (auto& [_, pts] : out) {
    std::ranges::sort(pts, [](const PointKey& a, const PointKey& b) { return a.V0_over_E < b.V0_over_E; });
  }
  return out;
}

Series gpe_series(const Table& t, const std::vector<PointKey>& pts, double (*x)(const PointKey&, double),
                  double sc, std::string name, std::string color) {
  Series s;
  s.name = std::move(name);
  s.color = std::move(color);
  for (const auto& p : pts) {
    s.x.push_back(x(p, sc));
    s.y.push_back(t.gpe.at(p));
  }
  return s;
}

Series bve_series(const Table& t, const std::vector<PointKey>& pts, double (*x)(const PointKey&, double),
                  double sc, bool delta, std::string name, std::string color) {
  Series s;
  s.name = std::move(name);
  s.color = std::move(color);
  s.line = false;
  for (const auto& p : pts) {
    const auto it = t.bve.find(p);
    if (it == t.bve.end()) continue;
    s.x.push_back(x(p, sc));
    s.y.push_back(delta ? t.gpe.at(p) - it->second.mean : it->second.mean);
    s.err.push_back(it->second.error_bar);
  }
  return s;
}

double width_x(const PointKey& p, double sc) { return p.sigma_b_lz / sc; }
double height_x(const PointKey& p, double) { return p.V0_over_E; }
double as_x(const PointKey& p, double) { return p.a_s_a0; }

std::string figure3(const Table& t, double sc, const PlotProvenance& prov, std::size_t n) {
  const auto ws = width_series(t);
  if (ws.empty()) throw SchemaError("figure 3 needs a width series (several sigma_b at fixed V0/E)");
  Panel p(0, 0, 640, 440);
  p.title = "Transmission against barrier width";
  p.xlabel = "sigma_b / sigma_c";
  p.ylabel = "T";
  p.log_x = true;
  int c = 0;
  for (const auto& [a, pts] : ws) {
    const std::string col = kPalette[c++ % 7];
    p.series.push_back(gpe_series(t, pts, width_x, sc, "GPE " + as_label(a), col));
    Series b = bve_series(t, pts, width_x, sc, false, "BVE " + as_label(a), col);
    if (!b.x.empty()) p.series.push_back(b);
    if (a == 0.0 && pts.size() >= 4) {
      const Series& g = p.series[p.series.size() - (b.x.empty() ? 1 : 2)];
      try {
        const FitResult f = fit_exponential(g.x, g.y);
        p.series.push_back(fit_curve(f, g.x.front(), g.x.back(), true,
                                     "fit A exp(-lx)+B, l=" + label(f.params[1]), "#000000"));
      } catch (const FitError&) {
      }
    }
  }
  return document(640, 440, {p}, 3, prov, n);
}

std::string figure4(const Table& t, const PlotProvenance& prov, std::size_t n) {
  std::set<double> heights, scatter;
  double sigma = 0.0;
  {
    const auto hs = height_series(t);
    if (hs.size() < 2) throw SchemaError("figure 4 needs height series for several a_s");
    sigma = hs.begin()->second.front().sigma_b_lz;
    for (const auto& [a, pts] : hs) {
      scatter.insert(a);
      for (const auto& p : pts) heights.insert(p.V0_over_E);
    }
  }
  const std::vector<double> hv(heights.begin(), heights.end());
  const std::vector<double> av(scatter.begin(), scatter.end());

  std::ostringstream map;
  const double L = 70, T = 40, W = 380, H = 360;
  map << "<g>\n<text x='" << num(L + W / 2) << "' y='22' text-anchor='middle' font-size='14'>"
      << "T_GPE over (V0/E, a_s), sigma_b = " << label(sigma) << " l_z</text>\n";
  const double cw = W / hv.size(), ch = H / av.size();
  for (std::size_t i = 0; i < hv.size(); ++i) {
    for (std::size_t j = 0; j < av.size(); ++j) {
      const auto it = t.gpe.find({av[j], hv[i], sigma});
      if (it == t.gpe.end()) continue;
      const double v = std::clamp(it->second, 0.0, 1.0);
      const int r = int(255 * v), b = int(255 * (1 - v));
      char col[16];
      std::snprintf(col, sizeof col, "#%02x40%02x", r, b);
      map << "<rect x='" << num(L + i * cw) << "' y='" << num(T + H - (j + 1) * ch) << "' width='"
          << num(cw + 0.5) << "' height='" << num(ch + 0.5) << "' fill='" << col << "'/>\n";
    }
  }
  map << "<rect x='" << num(L) << "' y='" << num(T) << "' width='" << num(W) << "' height='" << num(H)
      << "' fill='none' stroke='black'/>\n";
  for (std::size_t i = 0; i < hv.size(); i += std::max<std::size_t>(1, hv.size() / 5)) {
    map << "<text x='" << num(L + (i + 0.5) * cw) << "' y='" << num(T + H + 16)
        << "' text-anchor='middle' font-size='10'>" << label(hv[i]) << "</text>\n";
  }
  for (std::size_t j = 0; j < av.size(); j += std::max<std::size_t>(1, av.size() / 6)) {
    map << "<text x='" << num(L - 6) << "' y='" << num(T + H - (j + 0.5) * ch + 3)
        << "' text-anchor='end' font-size='10'>" << label(av[j]) << "</text>\n";
  }
  map << "<text x='" << num(L + W / 2) << "' y='" << num(T + H + 34)
      << "' text-anchor='middle' font-size='12'>V0/E</text>\n";
  map << "<text x='20' y='" << num(T + H / 2) << "' text-anchor='middle' font-size='12' transform='rotate(-90 20 "
      << num(T + H / 2) << ")'>a_s (a0)</text>\n</g>\n";

  Panel p(480, 0, 480, 440);
  p.title = "Cross sections";
  p.xlabel = "a_s (a0)";
  p.ylabel = "T";
  int c = 0;
  for (double target : {0.9, 1.0, 1.1}) {
    const auto near = std::ranges::min_element(hv, {}, [&](double h) { return std::abs(h - target); });
    if (near == hv.end() || std::abs(*near - target) > 1e-6) continue;
    std::vector<PointKey> pts;
    for (double a : av) {
      if (t.gpe.contains({a, *near, sigma})) pts.push_back({a, *near, sigma});
    }
    const std::string col = kPalette[c++ % 7];
    p.series.push_back(gpe_series(t, pts, as_x, 1.0, "GPE V0/E=" + label(*near), col));
    Series b = bve_series(t, pts, as_x, 1.0, false, "BVE V0/E=" + label(*near), col);
    if (!b.x.empty()) p.series.push_back(b);
  }
  if (p.series.empty()) throw SchemaError("figure 4 needs V0/E = 0.9, 1.0 or 1.1 in the table");

  const std::string doc = document(960, 440, {p}, 4, prov, n);
  const auto pos = doc.find("<g>");
  return doc.substr(0, pos) + map.str() + doc.substr(pos);
}

std::string figure5(const Table& t, double sc, const PlotProvenance& prov, std::size_t n) {
  const auto ws = width_series(t);
  if (ws.empty()) throw SchemaError("figure 5 needs width series");
  std::vector<double> as;
  for (const auto& [a, _] : ws) as.push_back(a);
  if (as.size() > 3) {
    std::vector<double> pick;
    for (double want : {-0.5, 0.0, 0.5}) {
      if (ws.contains(want)) pick.push_back(want);
    }
    if (pick.size() == 3) as = pick;
    else as.resize(3);
  }
  std::vector<Panel> panels;
  const char* letters = "abcdef";
  for (std::size_t i = 0; i < as.size(); ++i) {
    const auto& pts = ws.at(as[i]);
    Panel top(320.0 * i, 0, 320, 320);
    top.title = std::string("(") + letters[i] + ") T, " + as_label(as[i]);
    top.xlabel = "sigma_b / sigma_c";
    top.ylabel = "T";
    top.log_x = true;
    top.series.push_back(gpe_series(t, pts, width_x, sc, "GPE", kPalette[0]));
    Series b = bve_series(t, pts, width_x, sc, false, "BVE", kPalette[1]);
    if (!b.x.empty()) top.series.push_back(b);
    panels.push_back(top);

    Panel bottom(320.0 * i, 320, 320, 320);
    bottom.title = std::string("(") + letters[i + 3] + ") Delta T, " + as_label(as[i]);
    bottom.xlabel = "sigma_b / sigma_c";
    bottom.ylabel = "Delta T";
    bottom.log_x = true;
    bottom.zero_line = 0.0;
    Series d = bve_series(t, pts, width_x, sc, true, "T_GPE - T_BVE", kPalette[2]);
    d.line = true;
    if (d.x.empty()) throw SchemaError("figure 5 needs BVE rows for the Delta T panels");
    bottom.series.push_back(d);
    panels.push_back(bottom);
  }
  return document(320.0 * as.size(), 640, panels, 5, prov, n);
}

std::string figure6(const Table& t, const PlotProvenance& prov, std::size_t n) {
  const auto hs = height_series(t);
  const auto it = hs.find(0.0);
  if (it == hs.end()) throw SchemaError("figure 6 needs a height series at a_s = 0");
  const auto& pts = it->second;
  Panel p(0, 0, 640, 440);
  p.title = "Transmission against barrier height, a_s = 0";
  p.xlabel = "V0/E";
  p.ylabel = "T";
  Series g = gpe_series(t, pts, height_x, 1.0, "GPE", kPalette[0]);
  g.line = false;
  Series b = bve_series(t, pts, height_x, 1.0, false, "BVE", kPalette[1]);
  p.series.push_back(g);
  if (!b.x.empty()) p.series.push_back(b);
  const double lo = g.x.front(), hi = g.x.back();
  try {
    const FitResult f = fit_tanh(g.x, g.y);
    p.series.push_back(fit_curve(f, lo, hi, false, "GPE tanh fit b=" + label(f.params[1]), kPalette[0]));
  } catch (const FitError&) {
  }
  if (b.x.size() >= 4) {
    try {
      const FitResult f = fit_tanh(b.x, b.y);
      p.series.push_back(fit_curve(f, lo, hi, false, "BVE tanh fit b=" + label(f.params[1]), kPalette[1]));
    } catch (const FitError&) {
    }
  }
  return document(640, 440, {p}, 6, prov, n);
}

}  // namespace

std::string render_figure(int figure, const std::vector<TransmissionResult>& rows,
                          double sigma_c_ref, const PlotProvenance& provenance) {
  if (rows.empty()) throw SchemaError("result table is empty");
  const Table t = tabulate(rows);
  switch (figure) {
    case 3: return figure3(t, sigma_c_ref, provenance, rows.size());
    case 4: return figure4(t, provenance, rows.size());
    case 5: return figure5(t, sigma_c_ref, provenance, rows.size());
    case 6: return figure6(t, provenance, rows.size());
    default: throw ConfigError("--figure must be 3, 4, 5 or 6");
  }
}

}  // namespace tunnelsim
