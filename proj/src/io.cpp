#include "patchsim/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace patchsim::io {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const RealTrajectory& traj,
                          std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  const StateLayout layout(traj.n_patches);
  out << 't';
  for (const auto& name : layout.column_names()) out << ',' << name;
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_double(traj.times[k]);
    for (double v : traj.states[k]) out << ',' << format_double(v);
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text, std::size_t line_no) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw FormatError("line " + std::to_string(line_no) + ": '" + text + "' is not a number");
  }
  return v;
}

// n with n*n + n == columns, or throws.
std::size_t patches_from_columns(std::size_t columns) {
  for (std::size_t n = 1; n * n + n <= columns; ++n) {
    if (n * n + n == columns) return n;
  }
  throw FormatError("column count " + std::to_string(columns) + " does not match any patch count");
}

}  // namespace

CsvTrajectory read_trajectory_csv(std::istream& in) {
  CsvTrajectory out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      out.comments.push_back(line.size() > 2 ? line.substr(2) : std::string());
      continue;
    }
    auto fields = split_commas(line);
    if (!have_header) {
      if (fields.empty() || fields.front() != "t") {
        throw FormatError("line " + std::to_string(line_no) + ": header must start with 't'");
      }
      out.columns.assign(fields.begin() + 1, fields.end());
      const std::size_t n = patches_from_columns(out.columns.size());
      if (out.columns != StateLayout(n).column_names()) {
        throw FormatError("line " + std::to_string(line_no) + ": unexpected column names");
      }
      out.data.n_patches = n;
      width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != width) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                        " fields, got " + std::to_string(fields.size()));
    }
    const double t = parse_number(fields[0], line_no);
    if (!out.data.times.empty() && !(t > out.data.times.back())) {
      throw FormatError("line " + std::to_string(line_no) + ": times must be strictly increasing");
    }
    FlatState row;
    row.reserve(width - 1);
    for (std::size_t c = 1; c < width; ++c) row.push_back(parse_number(fields[c], line_no));
    out.data.times.push_back(t);
    out.data.states.push_back(std::move(row));
  }
  if (!have_header) throw FormatError("missing CSV header");
  return out;
}

CsvTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return read_trajectory_csv(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

namespace {

Json matrix_to_json(const SquareMatrix<double>& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json counts_to_json(const SquareMatrix<std::uint64_t>& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

SquareMatrix<double> matrix_from_json(const Json& j, std::size_t n, const char* name) {
  if (!j.is_array() || j.size() != n) {
    throw FormatError(std::string("rates.") + name + " must be a " + std::to_string(n) + "x" +
                      std::to_string(n) + " array");
  }
  SquareMatrix<double> m(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || row.size() != n) {
      throw FormatError(std::string("rates.") + name + " row " + std::to_string(r) +
                        " must have " + std::to_string(n) + " entries");
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (!row[c].is_number()) {
        throw FormatError(std::string("rates.") + name + "[" + std::to_string(r) + "][" +
                          std::to_string(c) + "] is not a number");
      }
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

Json point_to_json(geometry::Point p) { return Json::array({p.x, p.y}); }

}  // namespace

Json to_json(const RateParameters& rates) {
  Json j;
  j["alpha"] = rates.alpha;
  j["beta"] = matrix_to_json(rates.beta);
  j["gamma"] = matrix_to_json(rates.gamma);
  return j;
}

RateParameters rates_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("rates must be an object");
  for (const char* key : {"alpha", "beta", "gamma"}) {
    if (!j.contains(key)) throw FormatError(std::string("rates.") + key + " is missing");
  }
  const Json& alpha = j["alpha"];
  if (!alpha.is_array() || alpha.empty()) throw FormatError("rates.alpha must be a nonempty array");
  RateParameters rates;
  for (const auto& v : alpha) {
    if (!v.is_number()) throw FormatError("rates.alpha entries must be numbers");
    rates.alpha.push_back(v.get<double>());
  }
  const std::size_t n = rates.alpha.size();
  rates.beta = matrix_from_json(j["beta"], n, "beta");
  rates.gamma = matrix_from_json(j["gamma"], n, "gamma");
  try {
    rates.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid rates: ") + e.what());
  }
  return rates;
}

Json to_json(const geometry::WorldMap& map) {
  Json j;
  j["width"] = map.width;
  j["height"] = map.height;
  Json sources = Json::array();
  for (const auto& s : map.water_sources) sources.push_back(point_to_json(s));
  j["water_sources"] = std::move(sources);
  j["route"] = {{"lower", point_to_json(map.base_route.lower)},
                {"upper", point_to_json(map.base_route.upper)},
                {"period_s", map.base_route.period_s}};
  j["peer_range"] = map.peer_range;
  j["radio_range"] = map.radio_range;
  j["contact_lockout_s"] = map.contact_lockout_s;
  return j;
}

Json to_json(const geometry::MovementParams& p) {
  static constexpr const char* kNames[] = {"grazing", "graze_walking", "fast_moving"};
  Json j;
  for (std::size_t m = 0; m < p.modes.size(); ++m) {
    j[kNames[m]] = {{"speed", p.modes[m].speed}, {"turn_interval_s", p.modes[m].turn_interval_s}};
  }
  Json sw = Json::array();
  for (const auto& row : p.switching) sw.push_back(Json(row));
  j["switching"] = std::move(sw);
  j["thirst_speed"] = p.thirst_speed;
  j["decision_step_s"] = p.decision_step_s;
  if (p.thirst_time_of_day_s) {
    j["thirst_time_of_day_s"] = *p.thirst_time_of_day_s;
  } else {
    j["thirst_time_of_day_s"] = "random";
  }
  return j;
}

Json to_json(const geometry::CalibrationResult& r) {
  Json j;
  j["radio_range"] = r.radio_range;
  j["sim_duration_days"] = r.sim_duration_days;
  j["seed"] = r.seed;
  j["rng"] = std::string(kRngAlgorithm);
  j["no_events"] = r.no_events;
  j["rates"] = to_json(r.rates);
  j["counts"] = {{"base", r.counts.base},
                 {"peer", counts_to_json(r.counts.peer)},
                 {"migration", counts_to_json(r.counts.migration)}};
  return j;
}

RateParameters load_rates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open rates file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  const Json* rates = &doc;
  if (doc.is_object() && doc.contains("calibration")) rates = &doc["calibration"];
  if (rates->is_object() && rates->contains("rates")) rates = &(*rates)["rates"];
  try {
    return rates_from_json(*rates);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace patchsim::io
