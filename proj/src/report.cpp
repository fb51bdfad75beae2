#include "suflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "suflow/errors.hpp"

namespace suflow {

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string series_csv(const std::vector<SeriesRow>& rows) {
  std::string out = kSeriesHeader;
  out += '\n';
  for (const SeriesRow& r : rows) {
    out += std::to_string(r.step) + ',' + format17(r.t) + ',' + format17(r.E) + ',' +
           format17(r.E_alpha) + ',' + format17(r.dissipation) + ',' + format17(r.sup_e) + ',' +
           format17(r.degree_real) + ',' + std::to_string(r.degree_int) + ',' +
           format17(r.tau_norm) + '\n';
  }
  return out;
}

std::vector<SeriesRow> parse_series_csv(const std::string& text) {
  std::stringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSeriesHeader)
    throw ConfigError("CSV header does not match the series schema");
  std::vector<SeriesRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 9) throw ConfigError("CSV line " + std::to_string(lineno) + ": expected 9 fields");
    try {
      SeriesRow r;
      r.step = std::stoll(f[0]);
      r.t = std::stod(f[1]);
      r.E = std::stod(f[2]);
      r.E_alpha = std::stod(f[3]);
      r.dissipation = std::stod(f[4]);
      r.sup_e = std::stod(f[5]);
      r.degree_real = std::stod(f[6]);
      r.degree_int = std::stol(f[7]);
      r.tau_norm = std::stod(f[8]);
      rows.push_back(r);
    } catch (const std::exception&) {
      throw ConfigError("CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<')
      o += "&lt;";
    else if (c == '>')
      o += "&gt;";
    else if (c == '&')
      o += "&amp;";
    else if (c == '"')
      o += "&quot;";
    else
      o += c;
  }
  return o;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
constexpr std::size_t kMaxPoints = 4000;

}  // namespace

std::string svg_plot(const PlotSpec& spec) {
  std::size_t total = 0;
  for (const PlotSeries& s : spec.series) {
    if (s.x.size() != s.y.size()) throw DomainError("plot series x/y size mismatch");
    total += s.x.size();
  }
  if (total == 0) throw DomainError("cannot plot an empty series");
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const PlotSeries& s : spec.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (x0 > x1) throw DomainError("no finite points to plot");
  if (x1 - x0 <= 0.0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 <= 0.0) {
    const double pad = std::max(0.5, std::abs(y0) * 0.05);
    y0 -= pad;
    y1 += pad;
  }
  const double W = 720, H = 440, ml = 80, mr = 160, mt = 40, mb = 60;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (ty(v) - y0) / (y1 - y0) * (H - mt - mb); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
    << escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
    << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto axis_val = [](double v, bool log) { return short_num(log ? std::pow(10.0, v) : v); };
  o << "<text x=\"" << ml << "\" y=\"" << H - mb + 18 << "\" font-size=\"11\">"
    << axis_val(x0, spec.log_x) << "</text>\n";
  o << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 18
    << "\" text-anchor=\"end\" font-size=\"11\">" << axis_val(x1, spec.log_x) << "</text>\n";
  o << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb << "\" text-anchor=\"end\" font-size=\"11\">"
    << axis_val(y0, spec.log_y) << "</text>\n";
  o << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10
    << "\" text-anchor=\"end\" font-size=\"11\">" << axis_val(y1, spec.log_y) << "</text>\n";
  o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 16
    << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(spec.x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << (mt + H - mb) / 2 << "\" font-size=\"13\" transform=\"rotate(-90 18 "
    << (mt + H - mb) / 2 << ")\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const PlotSeries& s = spec.series[si];
    const char* color = kColors[si % 6];
    std::vector<std::size_t> keep;
    const std::size_t stride = std::max<std::size_t>(1, (s.x.size() + kMaxPoints - 1) / kMaxPoints);
    for (std::size_t i = 0; i < s.x.size(); i += stride) keep.push_back(i);
    if (!s.x.empty() && keep.back() != s.x.size() - 1) keep.push_back(s.x.size() - 1);
    std::string pts, data;
    std::size_t drawn = 0;
    double lx = 0, ly = 0;
    for (std::size_t i : keep) {
      if (!usable(s.x[i], s.y[i])) continue;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      pts += buf;
      data += format17(s.x[i]) + ',' + format17(s.y[i]) + ' ';
      lx = px(s.x[i]);
      ly = py(s.y[i]);
      ++drawn;
    }
    if (!pts.empty()) {
      pts.pop_back();
      data.pop_back();
    }
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
      << "\" data-label=\"" << escape(s.label) << "\" data-values=\"" << data << "\"/>\n";
    if (drawn == 1)
      o << "<circle cx=\"" << lx << "\" cy=\"" << ly << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    o << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 16 + 18 * si << "\" font-size=\"12\" fill=\""
      << color << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string energy_plot(const std::vector<SeriesRow>& rows) {
  if (rows.empty()) throw DomainError("cannot plot an empty series");
  PlotSpec p;
  p.title = "Energies along the flow";
  p.x_label = "t";
  p.y_label = "energy";
  PlotSeries e{"E", {}, {}}, ea{"E_alpha", {}, {}};
  for (const SeriesRow& r : rows) {
    e.x.push_back(r.t);
    e.y.push_back(r.E);
    ea.x.push_back(r.t);
    ea.y.push_back(r.E_alpha);
  }
  p.series = {e, ea};
  return svg_plot(p);
}

std::string psi_plot(const std::vector<double>& radii, const std::vector<double>& psi_values) {
  PlotSpec p;
  p.title = "Monotonicity quantity";
  p.x_label = "rho";
  p.y_label = "Psi";
  p.log_x = p.log_y = true;
  p.series = {{"Psi", radii, psi_values}};
  return svg_plot(p);
}

std::string limit_energy_plot(const std::vector<double>& alphas, const std::vector<double>& energies) {
  PlotSpec p;
  p.title = "Limit energy per alpha";
  p.x_label = "alpha";
  p.y_label = "E";
  p.series = {{"E", alphas, energies}};
  return svg_plot(p);
}

std::string tree_plot(const BubbleTree& tree) {
  const double W = 720, H = 120 + 90.0 * 8;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"30\" text-anchor=\"middle\" font-size=\"14\">body E="
    << short_num(tree.body_energy) << " residual=" << short_num(tree.identity_residual)
    << "</text>\n";
  o << "<circle cx=\"" << W / 2 << "\" cy=\"60\" r=\"12\" fill=\"#888\"/>\n";
  std::vector<double> xs(tree.nodes.size()), ys(tree.nodes.size());
  std::vector<int> per_depth(10, 0), slot(tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) slot[i] = per_depth[tree.nodes[i].depth]++;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const int d = tree.nodes[i].depth;
    xs[i] = W * (slot[i] + 1.0) / (per_depth[d] + 1.0);
    ys[i] = 60 + 90.0 * d;
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const int p = tree.nodes[i].parent;
    const double px = p < 0 ? W / 2 : xs[p], py = p < 0 ? 60 : ys[p];
    o << "<line x1=\"" << px << "\" y1=\"" << py << "\" x2=\"" << xs[i] << "\" y2=\"" << ys[i]
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << (px + xs[i]) / 2 + 6 << "\" y=\"" << (py + ys[i]) / 2
      << "\" font-size=\"11\">neck " << short_num(tree.nodes[i].neck_energy) << "</text>\n";
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    o << "<circle cx=\"" << xs[i] << "\" cy=\"" << ys[i] << "\" r=\"14\" fill=\"#1f77b4\"/>\n";
    o << "<text x=\"" << xs[i] << "\" y=\"" << ys[i] + 30 << "\" text-anchor=\"middle\" font-size=\"11\">E="
      << short_num(tree.nodes[i].bubble_energy) << " lambda=" << short_num(tree.nodes[i].lambda)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

nlohmann::json to_json(const BubbleTree& tree) {
  nlohmann::json j;
  j["total_energy_in"] = tree.total_energy_in;
  j["body_energy"] = tree.body_energy;
  j["identity_residual"] = tree.identity_residual;
  j["epsilon_1"] = tree.epsilon_1;
  j["C_R"] = tree.C_R;
  j["nodes"] = nlohmann::json::array();
  for (const BubbleNode& b : tree.nodes) {
    nlohmann::json n;
    n["center"] = {b.center[0], b.center[1]};
    n["lambda"] = b.lambda;
    n["lambda_cut"] = b.lambda_cut;
    n["bubble_energy"] = b.bubble_energy;
    n["neck_inner"] = b.neck_inner;
    n["neck_outer"] = b.neck_outer;
    n["neck_energy"] = b.neck_energy;
    n["parent"] = b.parent;
    n["depth"] = b.depth;
    n["children"] = b.children;
    n["p"] = b.p;
    n["q"] = b.q;
    n["chart_center_density"] = b.chart.center_density();
    j["nodes"].push_back(n);
  }
  return j;
}

nlohmann::json to_json(const ConcentrationReport& r) {
  nlohmann::json j;
  j["t"] = r.t;
  j["epsilon_0"] = r.epsilon_0;
  j["scales"] = r.scales;
  j["flagged_count"] = r.flagged.size();
  j["centers"] = r.centers;
  nlohmann::json flags = nlohmann::json::array();
  for (const ConcentrationFlag& f : r.flagged) {
    if (std::find(r.centers.begin(), r.centers.end(), f.node) == r.centers.end()) continue;
    nlohmann::json x;
    x["node"] = f.node;
    x["ball_energies"] = f.ball_energies;
    x["psi"] = f.psi;
    x["psi_confirms"] = f.psi_confirms;
    flags.push_back(x);
  }
  j["center_flags"] = flags;
  return j;
}

nlohmann::json to_json(const EnergyReport& r) {
  nlohmann::json j;
  j["E"] = r.E;
  j["E_alpha"] = r.E_alpha;
  j["sup_e"] = r.sup_e;
  j["tau_norm"] = r.tau_norm;
  if (r.has_degree) {
    j["degree_real"] = r.degree_real;
    j["degree_int"] = r.degree_int;
  }
  j["E0"] = r.E0;
  return j;
}

}  // namespace suflow
