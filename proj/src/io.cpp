#include "yr/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef YR_GIT_REV
#define YR_GIT_REV "unknown"
#endif

namespace yr {

std::string sha256_hex(const std::string &bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char *hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string build_stamp() { return std::string("git ") + YR_GIT_REV + ", " + __VERSION__; }

// ---------------------------------------------------------------------------

RunReport::RunReport(std::string command, std::filesystem::path out_dir, Json config)
    : command_(std::move(command)), out_dir_(std::move(out_dir)), config_(std::move(config)),
      start_(std::chrono::steady_clock::now()) {
  std::filesystem::create_directories(out_dir_);
}

void RunReport::add_check(std::string name, bool pass, double value, double threshold, std::string detail) {
  checks_.push_back({std::move(name), pass, value, threshold, std::move(detail)});
}

void RunReport::add_flag(const std::string &flag) {
  if (std::find(flags_.begin(), flags_.end(), flag) == flags_.end()) {
    flags_.push_back(flag);
  }
}

void RunReport::write_file(const std::string &name, const std::string &content) {
  const std::filesystem::path p = out_dir_ / name;
  std::ofstream os(p, std::ios::binary);
  if (!os) {
    throw std::runtime_error("cannot write " + p.string());
  }
  os << content;
  if (!os) {
    throw std::runtime_error("write failed for " + p.string());
  }
  manifest_.emplace_back(name, sha256_hex(content));
}

bool RunReport::all_pass() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const Check &c) { return c.pass; });
}

Json RunReport::to_json(bool with_timing) const {
  Json j;
  j["command"] = command_;
  j["config"] = config_;
  j["build"] = build_stamp();
  Json checks = Json::array();
  for (const Check &c : checks_) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold},
                      {"detail", c.detail}});
  }
  j["checks"] = checks;
  j["all_pass"] = all_pass();
  std::vector<std::string> flags = flags_;
  std::sort(flags.begin(), flags.end());
  j["flags"] = flags;
  Json manifest = Json::array();
  auto files = manifest_;
  std::sort(files.begin(), files.end());
  for (const auto &[name, hash] : files) {
    manifest.push_back({{"file", name}, {"sha256", hash}});
  }
  j["manifest"] = manifest;
  j["results"] = results_;
  if (with_timing) {
    j["timing"] = {{"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()}};
  }
  return j;
}

void RunReport::finish() {
  const std::filesystem::path p = out_dir_ / "report.json";
  std::ofstream os(p, std::ios::binary);
  os << to_json().dump(2) << '\n';
  if (!os) {
    throw std::runtime_error("cannot write " + p.string());
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return buf;
}

std::string escape_xml(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

} // namespace

std::string svg_loglog(const std::string &title, const std::string &xlabel, const std::string &ylabel,
                       const std::vector<PlotSeries> &series) {
  constexpr double W = 640, H = 420, L = 70, R = 160, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const PlotSeries &s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (s.x[i] > 0.0 && s.y[i] > 0.0) {
        x0 = std::min(x0, std::log10(s.x[i]));
        x1 = std::max(x1, std::log10(s.x[i]));
        y0 = std::min(y0, std::log10(s.y[i]));
        y1 = std::max(y1, std::log10(s.y[i]));
      }
    }
  }
  if (!(x0 <= x1)) {
    x0 = y0 = 0.0;
    x1 = y1 = 1.0;
  }
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const auto px = [&](double lx) { return L + (lx - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double ly) { return H - B - (ly - y0) / (y1 - y0) * (H - T - B); };
  static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = static_cast<int>(std::ceil(x0)); k <= static_cast<int>(std::floor(x1)); ++k) {
    os << "<line x1=\"" << fmt(px(k), 6) << "\" y1=\"" << H - B << "\" x2=\"" << fmt(px(k), 6) << "\" y2=\"" << H - B + 5
       << "\" stroke=\"black\"/><text x=\"" << fmt(px(k), 6) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">1e"
       << k << "</text>\n";
  }
  for (int k = static_cast<int>(std::ceil(y0)); k <= static_cast<int>(std::floor(y1)); ++k) {
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << fmt(py(k), 6) << "\" x2=\"" << L << "\" y2=\"" << fmt(py(k), 6)
       << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << fmt(py(k) + 4, 6) << "\" text-anchor=\"end\">1e" << k
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << escape_xml(xlabel)
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\">" << escape_xml(ylabel) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char *c = colors[s % 8];
    std::string pts;
    for (std::size_t i = 0; i < std::min(series[s].x.size(), series[s].y.size()); ++i) {
      if (series[s].x[i] > 0.0 && series[s].y[i] > 0.0) {
        const double X = px(std::log10(series[s].x[i])), Y = py(std::log10(series[s].y[i]));
        pts += fmt(X, 6) + "," + fmt(Y, 6) + " ";
        os << "<circle cx=\"" << fmt(X, 6) << "\" cy=\"" << fmt(Y, 6) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
      }
    }
    os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << c << "\"/>\n";
    const double ly = T + 16 + 18 * static_cast<double>(s);
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly << "\" stroke=\""
       << c << "\"/><text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\">" << escape_xml(series[s].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------

void write_field_csv(std::ostream &os, const AveragedField &a) {
  const SpaceGrid &sg = a.space_grid();
  os << 't';
  if (sg.dim == 1) {
    os << ",x";
  } else {
    for (int k = 1; k <= sg.dim; ++k) {
      os << ",x_" << k;
    }
  }
  for (int k = 1; k <= a.out_dim(); ++k) {
    os << ",a_" << k;
  }
  os << '\n';
  const TimeGrid &tg = a.time_grid();
  for (int i = 0; i < tg.n_nodes(); ++i) {
    const std::string t = format_double(tg.node(i));
    for (int j = 0; j < sg.n_nodes(); ++j) {
      os << t;
      const Eigen::VectorXd x = sg.node(j);
      for (int k = 0; k < sg.dim; ++k) {
        os << ',' << format_double(x[k]);
      }
      const Eigen::VectorXd v = a.at_node(i, j);
      for (int k = 0; k < a.out_dim(); ++k) {
        os << ',' << format_double(v[k]);
      }
      os << '\n';
    }
  }
}

Json field_sidecar(const AveragedField &a, const Json &provenance) {
  return {{"time_grid", to_json(a.time_grid())},
          {"space_grid", to_json(a.space_grid())},
          {"out_dim", a.out_dim()},
          {"kind", to_string(a.kind())},
          {"interpolation", to_string(a.interpolation())},
          {"flags", a.flags},
          {"provenance", provenance}};
}

std::string path_csv(const SampledPath &p) {
  std::ostringstream os;
  write_path_csv(os, p);
  return os.str();
}

std::string flow_csv(const FlowMap &f) {
  std::ostringstream os;
  write_flow_csv(os, f);
  return os.str();
}

Json to_json(const LinearFit &f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"slope_stderr", f.slope_stderr}};
}

Json to_json(const FieldHolderEstimate &e) {
  return {{"gamma", e.gamma},       {"eta", e.eta},   {"lambda", e.lambda},           {"radii", e.radii},
          {"seminorm", e.seminorm}, {"norm", e.norm}, {"base", e.base},               {"weighted", e.weighted},
          {"time_exponent", e.time_exponent},         {"time_exponent_r2", e.time_exponent_r2}};
}

Json to_json(const MomentExponent &m) {
  return {{"scales", std::vector<double>(m.scales.data(), m.scales.data() + m.scales.size())},
          {"lp_norms", std::vector<double>(m.lp_norms.data(), m.lp_norms.data() + m.lp_norms.size())},
          {"slope", m.slope},
          {"r2", m.r2},
          {"slope_stderr", m.slope_stderr},
          {"band", {m.band_low, m.band_high}},
          {"n_samples", m.n_samples}};
}

Json to_json(const ConditionReport &r) {
  Json conds = Json::object();
  for (const ConditionResult &c : r.results) {
    conds[c.name] = {{"holds", c.holds}, {"lhs", c.lhs}, {"threshold", c.threshold}, {"margin", c.margin}};
  }
  return {{"hurst", r.input.hurst},
          {"delta", r.input.delta},
          {"alpha", r.input.alpha},
          {"nu", r.nu},
          {"nu_from_fbm", !r.input.nu.has_value()},
          {"n", r.input.n},
          {"epsilon", r.input.epsilon},
          {"gamma_window", {r.gamma_low, 1.0}},
          {"conditions", conds}};
}

Json to_json(const UniquenessProbe &p) {
  Json pairwise = Json::array();
  for (Eigen::Index i = 0; i < p.pairwise.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(p.pairwise.cols()));
    for (Eigen::Index j = 0; j < p.pairwise.cols(); ++j) {
      row[static_cast<std::size_t>(j)] = p.pairwise(i, j);
    }
    pairwise.push_back(row);
  }
  std::vector<std::string> labels;
  for (const Candidate &c : p.candidates) {
    labels.push_back(c.label);
  }
  return {{"verdict", to_string(p.verdict)}, {"pairwise", pairwise}, {"tol", p.tol}, {"flags", p.flags},
          {"candidates", labels}};
}

Json to_json(const TimeGrid &g) { return {{"horizon", g.horizon}, {"n_steps", g.n_steps}}; }

Json to_json(const SpaceGrid &g) { return {{"dim", g.dim}, {"half_width", g.half_width}, {"n_cells", g.n_cells}}; }

} // namespace yr
