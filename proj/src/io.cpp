#include "lgcps/io.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lgcps/error.hpp"
#include "lgcps/grf.hpp"

namespace lgcps {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_number(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec == std::errc() && res.ptr == end) return true;
  // from_chars rejects spellings such as "inf"; fall back to strtod.
  char* stop = nullptr;
  out = std::strtod(begin, &stop);
  return stop == end;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) fields.push_back(cur);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

Window read_window_sidecar(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open window sidecar " + path.string());
  json j;
  try {
    in >> j;
    return Window(j.at("xmin").get<double>(), j.at("xmax").get<double>(),
                  j.at("ymin").get<double>(), j.at("ymax").get<double>());
  } catch (const json::exception& e) {
    throw IoError("malformed window sidecar " + path.string() + ": " + e.what());
  }
}

}  // namespace

fs::path window_sidecar_path(const fs::path& csv_path) {
  fs::path p = csv_path;
  p.replace_extension(".window.json");
  return p;
}

PointPattern read_pattern_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pattern file " + path.string());
  return parse_pattern_csv(in, path.string(), window_sidecar_path(path));
}

PointPattern parse_pattern_csv(std::istream& in, const std::string& source_name,
                               const fs::path& sidecar) {
  std::optional<Window> window;
  std::vector<std::pair<std::size_t, Point>> rows;
  std::vector<std::string> problems;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      std::istringstream is(t.substr(1));
      std::string key;
      is >> key;
      if (key == "window") {
        double b[4];
        if (!(is >> b[0] >> b[1] >> b[2] >> b[3])) {
          problems.push_back("line " + std::to_string(lineno) + ": malformed window header");
          continue;
        }
        try {
          window = Window(b[0], b[1], b[2], b[3]);
        } catch (const Error& e) {
          problems.push_back("line " + std::to_string(lineno) + ": " + e.what());
        }
      }
      continue;
    }
    const auto fields = split_commas(t);
    if (!header_seen && fields.size() == 2 && trim(fields[0]) == "x" && trim(fields[1]) == "y") {
      header_seen = true;
      continue;
    }
    Point p;
    if (fields.size() != 2 || !parse_number(fields[0], p.x) || !parse_number(fields[1], p.y) ||
        !std::isfinite(p.x) || !std::isfinite(p.y)) {
      problems.push_back("line " + std::to_string(lineno) + ": malformed row '" + t + "'");
      continue;
    }
    rows.emplace_back(lineno, p);
  }
  if (!window && !sidecar.empty() && fs::exists(sidecar)) window = read_window_sidecar(sidecar);
  if (!window) problems.push_back("no window given (header '# window ...' or sidecar)");
  if (window) {
    for (const auto& [ln, p] : rows)
      if (!window->contains(p))
        problems.push_back("line " + std::to_string(ln) + ": point outside window");
  }
  if (!problems.empty()) {
    std::ostringstream os;
    os << source_name << ": " << problems.size() << " problem(s)";
    for (const auto& msg : problems) os << "\n  " << msg;
    throw InvalidArgument(os.str());
  }
  std::vector<Point> pts;
  pts.reserve(rows.size());
  for (const auto& r : rows) pts.push_back(r.second);
  return PointPattern(*window, std::move(pts));
}

void write_pattern_csv(const PointPattern& pattern, std::ostream& out) {
  const Window& w = pattern.window();
  out << "# window " << format_double(w.xmin()) << ' ' << format_double(w.xmax()) << ' '
      << format_double(w.ymin()) << ' ' << format_double(w.ymax()) << '\n';
  out << "x,y\n";
  for (const Point& p : pattern.points())
    out << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

void write_pattern_csv(const PointPattern& pattern, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_pattern_csv(pattern, out);
  if (!out) throw IoError("write failed for " + path.string());
}

void write_field_csv(const GridField& field, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (int iy = 0; iy < field.ny(); ++iy) {
    for (int ix = 0; ix < field.nx(); ++ix) {
      if (ix) out << ',';
      out << format_double(field.value(ix, iy));
    }
    out << '\n';
  }
}

void write_params_csv(const std::vector<ModelParams>& draws, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "mu,sigma2,s,gamma,R\n";
  for (const auto& d : draws) {
    const auto a = d.to_array();
    for (std::size_t j = 0; j < 5; ++j) out << (j ? "," : "") << format_double(a[j]);
    out << '\n';
  }
}

std::vector<ModelParams> read_params_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  std::vector<ModelParams> draws;
  std::vector<std::string> problems;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.rfind("mu,", 0) == 0) continue;
    const auto fields = split_commas(t);
    std::array<double, 5> v{};
    bool ok = fields.size() == 5;
    for (std::size_t j = 0; ok && j < 5; ++j) ok = parse_number(fields[j], v[j]);
    if (!ok) {
      problems.push_back("line " + std::to_string(lineno));
      continue;
    }
    draws.push_back(ModelParams::from_array(v));
  }
  if (!problems.empty()) {
    std::string msg = path.string() + ": malformed rows:";
    for (const auto& p : problems) msg += " " + p;
    throw InvalidArgument(msg);
  }
  return draws;
}

PriorSpec parse_prior_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("prior JSON does not parse: ") + e.what());
  }
  if (j.is_string()) return prior_preset(j.get<std::string>());
  if (j.contains("preset")) return prior_preset(j.at("preset").get<std::string>());
  PriorSpec prior;
  try {
    for (std::size_t k = 0; k < 5; ++k) {
      const std::string name(kParamNames[k]);
      if (!j.contains(name)) throw InvalidArgument("prior JSON lacks parameter '" + name + "'");
      const json& e = j.at(name);
      Marginal m;
      m.family = family_from_name(e.at("family").get<std::string>());
      const auto params = e.at("params").get<std::vector<double>>();
      if (params.size() != 2) throw InvalidArgument("prior '" + name + "' needs two params");
      m.a = params[0];
      m.b = params[1];
      constexpr double inf = std::numeric_limits<double>::infinity();
      switch (m.family) {
        case Family::Uniform: m.lo = m.a; m.hi = m.b; break;
        case Family::Normal: m.lo = -inf; m.hi = inf; break;
        case Family::Gamma: m.lo = 0.0; m.hi = inf; break;
        case Family::Beta: m.lo = 0.0; m.hi = 1.0; break;
      }
      if (e.contains("truncation")) {
        const json& t = e.at("truncation");
        if (!t.is_array() || t.size() != 2)
          throw InvalidArgument("prior '" + name + "' truncation needs [lo, hi]");
        double bounds[2];
        for (std::size_t b = 0; b < 2; ++b) {
          if (t[b].is_number()) {
            bounds[b] = t[b].get<double>();
          } else if (!t[b].is_string() || !parse_number(t[b].get<std::string>(), bounds[b])) {
            throw InvalidArgument("prior '" + name + "' has a non-numeric truncation bound");
          }
        }
        m.lo = bounds[0];
        m.hi = bounds[1];
      }
      prior.marginals[k] = m;
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed prior JSON: ") + e.what());
  }
  prior.validate();
  return prior;
}

std::string prior_to_json(const PriorSpec& prior) {
  json j = json::object();
  for (std::size_t k = 0; k < 5; ++k) {
    const Marginal& m = prior.marginals[k];
    json lohi = json::array();
    lohi.push_back(std::isfinite(m.lo) ? json(m.lo) : json(format_double(m.lo)));
    lohi.push_back(std::isfinite(m.hi) ? json(m.hi) : json(format_double(m.hi)));
    j[std::string(kParamNames[k])] = {
        {"family", std::string(family_name(m.family))},
        {"params", {m.a, m.b}},
        {"truncation", lohi},
    };
  }
  return j.dump(2);
}

}  // namespace lgcps
