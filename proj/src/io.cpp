#include "magflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "magflow/errors.hpp"

namespace magflow {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

std::string fmt(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Bounds {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  void add(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  bool empty() const { return x0 > x1; }
};

constexpr double kWidth = 640, kHeight = 480, kMargin = 50;

}  // namespace

std::string trajectory_csv(const std::vector<LoopState>& states, const std::vector<StateDiagnostics>& diagnostics,
                           const std::string& source) {
  if (states.size() != diagnostics.size()) throw Error(ErrorKind::IoError, "states and diagnostics differ in length");
  std::string out = "source,t,node";
  const int q = states.empty() ? 0 : states.front().dim();
  for (int c = 0; c < q; ++c) out += ",x" + std::to_string(c);
  out += ",e,kappa,residual,h\n";
  for (std::size_t i = 0; i < states.size(); ++i) {
    const LoopState& s = states[i];
    const StateDiagnostics& d = diagnostics[i];
    for (int j = 0; j < s.nodes(); ++j) {
      out += source;
      out += ',';
      append_number(out, s.t);
      out += ',' + std::to_string(j);
      for (int c = 0; c < q; ++c) {
        out += ',';
        append_number(out, s.positions(c, j));
      }
      for (double v : {d.e(j), d.kappa(j), d.residual(j), d.h(j)}) {
        out += ',';
        append_number(out, v);
      }
      out += '\n';
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<LoopState>& states,
                          const std::vector<StateDiagnostics>& diagnostics, const std::string& source) {
  write_text(path, trajectory_csv(states, diagnostics, source));
}

CsvTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::IoError, "empty trajectory file " + path.string());
  const int columns = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  const int q = columns - 7;
  if (q < 1) throw Error(ErrorKind::IoError, "malformed trajectory header in " + path.string());

  struct Row {
    double t;
    std::vector<double> x;
    double e, kappa, residual, h;
  };
  CsvTrajectory out;
  std::vector<std::vector<Row>> groups;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (static_cast<int>(fields.size()) != columns) throw Error(ErrorKind::IoError, "ragged row in " + path.string());
    out.source = fields[0];
    Row r;
    r.t = std::stod(fields[1]);
    for (int c = 0; c < q; ++c) r.x.push_back(std::stod(fields[3 + c]));
    r.e = std::stod(fields[3 + q]);
    r.kappa = std::stod(fields[4 + q]);
    r.residual = std::stod(fields[5 + q]);
    r.h = std::stod(fields[6 + q]);
    const int node = std::stoi(fields[2]);
    if (node == 0) groups.emplace_back();
    if (groups.empty()) throw Error(ErrorKind::IoError, "trajectory rows must start at node 0");
    groups.back().push_back(std::move(r));
  }
  for (const auto& g : groups) {
    const int n = static_cast<int>(g.size());
    LoopState s{Eigen::MatrixXd(q, n), g.front().t, Eigen::VectorXd::Zero(q)};
    StateDiagnostics d;
    d.t = s.t;
    d.e.resize(n);
    d.kappa.resize(n);
    d.residual.resize(n);
    d.h.resize(n);
    for (int j = 0; j < n; ++j) {
      for (int c = 0; c < q; ++c) s.positions(c, j) = g[j].x[c];
      d.e(j) = g[j].e;
      d.kappa(j) = g[j].kappa;
      d.residual(j) = g[j].residual;
      d.h(j) = g[j].h;
    }
    d.e_sup = d.e.maxCoeff();
    d.kappa_sup = d.kappa.maxCoeff();
    d.residual_sup = d.residual.maxCoeff();
    d.h_sup = d.h.maxCoeff();
    out.states.push_back(std::move(s));
    out.diagnostics.push_back(std::move(d));
  }
  return out;
}

std::string loop_svg(const std::vector<LoopState>& states, const ManifoldModel& model, const std::string& title) {
  std::vector<std::size_t> picks;
  if (!states.empty()) {
    picks = {0, states.size() / 2, states.size() - 1};
    picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  }
  const bool wrap_coords = model.is_flat_quotient();
  const bool interval = model.kind() == ModelKind::Line;
  // Planar image of node j of a state, cabinet projection for R^3.
  auto image = [&](const LoopState& s, int j) {
    Vec x = s.node(j);
    if (wrap_coords) x = wrap(model, x);
    if (interval) return std::pair<double, double>(j, x(0));
    if (x.size() == 2) return std::pair<double, double>(x(0), x(1));
    if (x.size() == 1) return std::pair<double, double>(j, x(0));
    const double a = 0.35;
    return std::pair<double, double>(x(0) - a * x(1), x(2) - a * x(1));
  };
  Bounds b;
  for (std::size_t p : picks)
    for (int j = 0; j < states[p].nodes(); ++j) {
      const auto [u, v] = image(states[p], j);
      b.add(u, v);
    }
  if (b.empty()) b.add(0, 0);
  const double span = std::max({b.x1 - b.x0, b.y1 - b.y0, 1e-12});
  const double scale = std::min(kWidth, kHeight) - 2 * kMargin;
  auto X = [&](double u) { return kMargin + (u - b.x0) / span * scale; };
  auto Y = [&](double v) { return kHeight - kMargin - (v - b.y0) / span * scale; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kMargin << "\" y=\"25\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const LoopState& s = states[picks[k]];
    const char* color = kPalette[k % 6];
    std::ostringstream path;
    bool pen_down = false;
    const int n = s.nodes();
    const int segments = interval ? n - 1 : n;
    Vec prev = wrap_coords ? wrap(model, s.node(0)) : s.node(0);
    for (int i = 0; i <= segments; ++i) {
      const int j = i % n;
      const Vec cur = wrap_coords ? wrap(model, s.node(j)) : s.node(j);
      // Segments that cross the boundary of the fundamental domain are not drawn.
      const bool jump = wrap_coords && i > 0 && (cur - prev).cwiseAbs().maxCoeff() > kPi;
      const auto [u, v] = image(s, j);
      path << (pen_down && !jump ? " L " : " M ") << fmt(X(u), 6) << ' ' << fmt(Y(v), 6);
      pen_down = true;
      prev = cur;
    }
    os << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << kWidth - 150 << "\" y=\"" << 50 + 18 * k << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
       << color << "\">t = " << fmt(s.t) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string timeseries_svg(const std::vector<SvgSeries>& series, const std::string& title) {
  Bounds b;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.t.size(); ++i)
      if (s.values[i] > 0 && std::isfinite(s.values[i])) b.add(s.t[i], std::log10(s.values[i]));
  if (b.empty()) b.add(0, 0);
  const double w = std::max(b.x1 - b.x0, 1e-12);
  const double h = std::max(b.y1 - b.y0, 1e-12);
  auto X = [&](double t) { return kMargin + (t - b.x0) / w * (kWidth - 2 * kMargin); };
  auto Y = [&](double v) { return kHeight - kMargin - (v - b.y0) / h * (kHeight - 2 * kMargin); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kMargin << "\" y=\"25\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
     << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\"" << kHeight - kMargin
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 20
     << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">t = " << fmt(b.x1) << "</text>\n";
  os << "<text x=\"5\" y=\"" << kMargin << "\" font-family=\"sans-serif\" font-size=\"12\">1e" << fmt(b.y1, 3)
     << "</text>\n";
  os << "<text x=\"5\" y=\"" << kHeight - kMargin << "\" font-family=\"sans-serif\" font-size=\"12\">1e"
     << fmt(b.y0, 3) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.t.size(); ++i)
      if (s.values[i] > 0 && std::isfinite(s.values[i]))
        pts << fmt(X(s.t[i]), 6) << ',' << fmt(Y(std::log10(s.values[i])), 6) << ' ';
    os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << kPalette[k % 6]
       << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << kWidth - 180 << "\" y=\"" << 50 + 18 * k << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
       << kPalette[k % 6] << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace magflow
