#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spinamp/automaton.hpp"
#include "spinamp/errors.hpp"
#include "spinamp/noise.hpp"
#include "spinamp/spectrum.hpp"
#include "spinamp/version.hpp"

namespace spinamp::io {

using json = nlohmann::json;  // std::map-backed objects: keys come out sorted

// ---------------------------------------------------------------- CSV

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

inline double parse_double(const std::string& s, const std::string& field) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw parse_error(field, "not a number: '" + s + "'");
  return v;
}

inline std::uint64_t parse_uint(const std::string& s, const std::string& field) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw parse_error(field, "not an unsigned integer: '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& field) {
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw parse_error(field, "not an integer: '" + s + "'");
  return v;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_escape(cells[i]);
  os << '\n';
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw parse_error(name, "missing CSV column");
  }
};

// Comma-separated, double-quote escaping, LF or CRLF line ends.
inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  auto end_row = [&] {
    row.push_back(cell);
    cell.clear();
    if (t.header.empty()) t.header = std::move(row);
    else t.rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  for (int ch; (ch = is.get()) != EOF;) {
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          cell += '"';
          is.get();
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    any = true;
    if (c == '"') quoted = true;
    else if (c == ',') row.push_back(std::exchange(cell, {}));
    else if (c == '\n') end_row();
    else if (c != '\r') cell += c;
  }
  if (quoted) throw parse_error("", "unterminated quoted CSV cell");
  if (any) end_row();
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    if (t.rows[i].size() != t.header.size())
      throw parse_error("row " + std::to_string(i + 1), "expected " + std::to_string(t.header.size()) + " cells");
  return t;
}

// ---------------------------------------------------------------- traces

inline RunTrace read_trace_csv(std::istream& is) {
  const CsvTable t = read_csv(is);
  const std::vector<std::string> expected{"phase", "species", "flips", "up_count", "magnetization"};
  if (t.header != expected) throw parse_error("header", "not a run trace");
  RunTrace trace;
  for (const auto& r : t.rows) {
    PhaseRecord rec;
    rec.phase = static_cast<int>(parse_uint(r[0], "phase"));
    if (r[1] != "A" && r[1] != "B") throw parse_error("species", "expected A or B, got '" + r[1] + "'");
    rec.species = r[1] == "A" ? Species::A : Species::B;
    rec.flips = parse_uint(r[2], "flips");
    rec.up_count = parse_uint(r[3], "up_count");
    rec.magnetization = parse_int(r[4], "magnetization");
    trace.records.push_back(rec);
  }
  return trace;
}

// ---------------------------------------------------------------- experiment CSV

struct ExperimentRow {
  std::uint64_t size = 0;
  int layers = 0;
  double eps0 = 0.0;
  double eps1 = 0.0;
  std::string rule_set;
  int diffusion_steps = 0;
  int trials = 0;
  double mean_signal = 0.0;
  double std_err = 0.0;
  std::optional<double> contrast;

  friend bool operator==(const ExperimentRow&, const ExperimentRow&) = default;
};

inline const std::vector<std::string>& experiment_columns() {
  static const std::vector<std::string> cols{"size",  "L",      "eps0",        "eps1",    "rule_set",
                                             "diffusion_steps", "trials", "mean_signal", "std_err", "contrast"};
  return cols;
}

inline ExperimentRow experiment_row(const ExperimentResult& r) {
  return {r.sites,
          r.config.layers,
          r.config.noise.eps0,
          r.config.noise.eps1,
          r.config.rule_set().label(),
          r.config.diffusion_steps,
          r.config.trials,
          r.signal.mean,
          r.signal.std_err,
          r.contrast};
}

inline void write_experiment_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  write_csv_row(os, experiment_columns());
  for (const auto& r : rows)
    write_csv_row(os, {std::to_string(r.size), std::to_string(r.layers), format_double(r.eps0), format_double(r.eps1),
                       r.rule_set, std::to_string(r.diffusion_steps), std::to_string(r.trials),
                       format_double(r.mean_signal), format_double(r.std_err),
                       r.contrast ? format_double(*r.contrast) : std::string{}});
}

inline std::vector<ExperimentRow> read_experiment_csv(std::istream& is) {
  const CsvTable t = read_csv(is);
  if (t.header != experiment_columns()) throw parse_error("header", "not an experiment table");
  std::vector<ExperimentRow> out;
  for (const auto& c : t.rows) {
    ExperimentRow r;
    r.size = parse_uint(c[0], "size");
    r.layers = static_cast<int>(parse_uint(c[1], "L"));
    r.eps0 = parse_double(c[2], "eps0");
    r.eps1 = parse_double(c[3], "eps1");
    r.rule_set = c[4];
    r.diffusion_steps = static_cast<int>(parse_uint(c[5], "diffusion_steps"));
    r.trials = static_cast<int>(parse_uint(c[6], "trials"));
    r.mean_signal = parse_double(c[7], "mean_signal");
    r.std_err = parse_double(c[8], "std_err");
    if (!c[9].empty()) r.contrast = parse_double(c[9], "contrast");
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------- JSON helpers

namespace detail {

template <class T>
T get(const json& j, const std::string& key, const std::string& path) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!j.contains(key)) throw parse_error(field, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw parse_error(field, "wrong type (found " + std::string(j.at(key).type_name()) + ")");
  }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& path) {
  return j.contains(key) && !j.at(key).is_null() ? get<T>(j, key, path) : fallback;
}

// A scalar or a non-empty list of scalars.
template <class T>
std::vector<T> get_list(const json& j, const std::string& key, std::vector<T> fallback, const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const std::string field = path.empty() ? key : path + "." + key;
  const json& v = j.at(key);
  try {
    if (!v.is_array()) return {v.get<T>()};
    if (v.empty()) throw parse_error(field, "empty list");
    return v.get<std::vector<T>>();
  } catch (const json::exception&) {
    throw parse_error(field, "wrong type (found " + std::string(v.type_name()) + ")");
  }
}

}  // namespace detail

inline SeedChoice seed_choice_from_json(const json& v, const std::string& field) {
  if (v.is_number_integer()) {
    if (v.get<int>() == 1) return SeedChoice::plus;
    if (v.get<int>() == -1) return SeedChoice::minus;
  } else if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "+1" || s == "1" || s == "plus") return SeedChoice::plus;
    if (s == "-1" || s == "minus") return SeedChoice::minus;
    if (s == "both") return SeedChoice::both;
  }
  throw parse_error(field, "expected +1, -1 or \"both\"");
}

inline json to_json(const ExperimentConfig& c) {
  return {{"layers", c.layers},
          {"phases", c.phases},
          {"seed_value", to_string(c.seed_value)},
          {"eps0", c.noise.eps0},
          {"eps1", c.noise.eps1},
          {"spurious", c.noise.spurious},
          {"rng_seed", c.noise.rng_seed},
          {"plus_one_rule", c.plus_one_rule},
          {"rule_set", c.rule_set().label()},
          {"diffusion_steps", c.diffusion_steps},
          {"exchange_probability", c.exchange_probability},
          {"geometry", c.geometry},
          {"trials", c.trials},
          {"boundary", to_string(c.boundary)},
          {"scan", c.scan == ScanMode::full ? "full" : "incremental"},
          {"max_sites", c.max_sites}};
}

inline ExperimentConfig experiment_config_from_json(const json& j, const std::string& path = "config") {
  using detail::get;
  ExperimentConfig c;
  c.layers = get<int>(j, "layers", path);
  c.phases = get<int>(j, "phases", path);
  if (!j.contains("seed_value")) throw parse_error(path + ".seed_value", "missing");
  c.seed_value = seed_choice_from_json(j.at("seed_value"), path + ".seed_value");
  c.noise.eps0 = get<double>(j, "eps0", path);
  c.noise.eps1 = get<double>(j, "eps1", path);
  c.noise.spurious = get<double>(j, "spurious", path);
  c.noise.rng_seed = get<std::uint64_t>(j, "rng_seed", path);
  c.plus_one_rule = get<bool>(j, "plus_one_rule", path);
  c.diffusion_steps = get<int>(j, "diffusion_steps", path);
  c.exchange_probability = get<double>(j, "exchange_probability", path);
  c.geometry = get<std::string>(j, "geometry", path);
  c.trials = get<int>(j, "trials", path);
  try {
    c.boundary = boundary_mode_from_string(get<std::string>(j, "boundary", path));
  } catch (const domain_error& e) {
    throw parse_error(path + ".boundary", e.what());
  }
  const auto scan = get<std::string>(j, "scan", path);
  if (scan != "full" && scan != "incremental") throw parse_error(path + ".scan", "expected full or incremental");
  c.scan = scan == "full" ? ScanMode::full : ScanMode::incremental;
  c.max_sites = get<std::uint64_t>(j, "max_sites", path);
  return c;
}

inline json stats_to_json(const SampleStats& s) {
  return {{"mean", s.mean}, {"std_err", s.std_err}, {"min", s.min}, {"max", s.max}};
}

inline SampleStats stats_from_json(const json& j, const std::string& path) {
  return {detail::get<double>(j, "mean", path), detail::get<double>(j, "std_err", path), detail::get<double>(j, "min", path),
          detail::get<double>(j, "max", path)};
}

inline json to_json(const ExperimentResult& r) {
  json j{{"config", to_json(r.config)},
         {"sites", r.sites},
         {"up_plus", r.up_plus},
         {"up_minus", r.up_minus},
         {"signal", stats_to_json(r.signal)},
         {"contrast", r.contrast ? json(*r.contrast) : json(nullptr)},
         {"contrast_std_err", r.contrast_std_err ? json(*r.contrast_std_err) : json(nullptr)},
         {"layer_profile", r.layer_profile},
         {"error_histogram",
          {{"corner", r.error_histogram[0]},
           {"edge", r.error_histogram[1]},
           {"face", r.error_histogram[2]},
           {"interior", r.error_histogram[3]}}}};
  return j;
}

inline ExperimentResult experiment_result_from_json(const json& j, const std::string& path = "result") {
  using detail::get;
  ExperimentResult r;
  if (!j.contains("config")) throw parse_error(path + ".config", "missing");
  r.config = experiment_config_from_json(j.at("config"), path + ".config");
  r.sites = get<std::uint64_t>(j, "sites", path);
  r.up_plus = get<std::vector<std::uint64_t>>(j, "up_plus", path);
  r.up_minus = get<std::vector<std::uint64_t>>(j, "up_minus", path);
  if (!j.contains("signal")) throw parse_error(path + ".signal", "missing");
  r.signal = stats_from_json(j.at("signal"), path + ".signal");
  if (j.contains("contrast") && !j.at("contrast").is_null()) r.contrast = get<double>(j, "contrast", path);
  if (j.contains("contrast_std_err") && !j.at("contrast_std_err").is_null())
    r.contrast_std_err = get<double>(j, "contrast_std_err", path);
  r.layer_profile = get<std::vector<double>>(j, "layer_profile", path);
  if (!j.contains("error_histogram")) throw parse_error(path + ".error_histogram", "missing");
  const json& h = j.at("error_histogram");
  const std::string hp = path + ".error_histogram";
  r.error_histogram = {get<double>(h, "corner", hp), get<double>(h, "edge", hp), get<double>(h, "face", hp),
                       get<double>(h, "interior", hp)};
  return r;
}

// ---------------------------------------------------------------- sweep config

inline constexpr int schema_version = 1;

// A Monte Carlo sweep: the cartesian product of lattice sizes, eps0, eps1
// and diffusion steps. Sizes are site counts, rounded up to whole layers.
struct SweepConfig {
  std::vector<std::uint64_t> sizes;  // either sizes or layers is used
  std::vector<int> layers;
  std::optional<int> phases;  // default: layers - 1
  SeedChoice seed_value = SeedChoice::both;
  std::vector<double> eps0{0.1};
  std::optional<double> polarization;  // overrides eps0 when present
  PolarizationConvention convention = PolarizationConvention::population;
  std::vector<double> eps1{0.01};
  double spurious = 0.0;
  bool plus_one_rule = false;
  std::vector<int> diffusion_steps{0};
  double exchange_probability = 0.5;
  std::string geometry = "rhombo60";
  int trials = 20;
  BoundaryMode boundary = BoundaryMode::embedded;
  std::uint64_t rng_seed = 1;
  std::uint64_t max_sites = default_max_sites;

  std::vector<ExperimentConfig> expand() const {
    std::vector<int> ls = layers;
    for (auto n : sizes) ls.push_back(layers_for_site_count(n));
    std::vector<double> e0s = eps0;
    if (polarization) e0s = {eps0_for_polarization(*polarization, convention)};
    std::vector<ExperimentConfig> out;
    for (int l : ls)
      for (double e0 : e0s)
        for (double e1 : eps1)
          for (int d : diffusion_steps) {
            ExperimentConfig c;
            c.layers = l;
            c.phases = phases.value_or(l - 1);
            c.seed_value = seed_value;
            c.noise = {e0, e1, spurious, rng_seed};
            c.plus_one_rule = plus_one_rule;
            c.diffusion_steps = d;
            c.exchange_probability = exchange_probability;
            c.geometry = geometry;
            c.trials = trials;
            c.boundary = boundary;
            c.max_sites = max_sites;
            out.push_back(c);
          }
    return out;
  }
};

inline SweepConfig sweep_config_from_json(const json& j) {
  using detail::get_list;
  using detail::get_or;
  if (!j.is_object()) throw parse_error("", "configuration must be a JSON object");
  static const std::vector<std::string> known{"schema_version", "sizes", "layers", "phases", "seed_value", "eps0",
                                              "polarization", "polarization_convention", "eps1", "spurious",
                                              "plus_one_rule", "diffusion_steps", "exchange_probability", "geometry",
                                              "trials", "boundary", "rng_seed", "max_sites"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw parse_error(key, "unknown key");

  const int version = detail::get<int>(j, "schema_version", "");
  if (version != schema_version)
    throw parse_error("schema_version", "unsupported version " + std::to_string(version));

  SweepConfig c;
  c.sizes = get_list<std::uint64_t>(j, "sizes", {}, "");
  c.layers = get_list<int>(j, "layers", {}, "");
  if (c.sizes.empty() == c.layers.empty()) throw parse_error("sizes", "give exactly one of sizes or layers");
  for (auto n : c.sizes)
    if (n == 0) throw parse_error("sizes", "sizes must be positive");
  for (int l : c.layers)
    if (l < 1) throw parse_error("layers", "layers must be at least 1");
  if (j.contains("phases") && !j.at("phases").is_null()) c.phases = detail::get<int>(j, "phases", "");
  if (j.contains("seed_value")) c.seed_value = seed_choice_from_json(j.at("seed_value"), "seed_value");
  c.eps0 = get_list<double>(j, "eps0", c.eps0, "");
  if (j.contains("polarization") && !j.at("polarization").is_null()) {
    if (j.contains("eps0")) throw parse_error("polarization", "give either eps0 or polarization, not both");
    c.polarization = detail::get<double>(j, "polarization", "");
  }
  try {
    c.convention = polarization_convention_from_string(
        get_or<std::string>(j, "polarization_convention", to_string(c.convention), ""));
    if (c.polarization) eps0_for_polarization(*c.polarization, c.convention);
  } catch (const domain_error& e) {
    throw parse_error(c.polarization ? "polarization" : "polarization_convention", e.what());
  }
  c.eps1 = get_list<double>(j, "eps1", c.eps1, "");
  c.spurious = get_or<double>(j, "spurious", c.spurious, "");
  c.plus_one_rule = get_or<bool>(j, "plus_one_rule", c.plus_one_rule, "");
  c.diffusion_steps = get_list<int>(j, "diffusion_steps", c.diffusion_steps, "");
  c.exchange_probability = get_or<double>(j, "exchange_probability", c.exchange_probability, "");
  c.geometry = get_or<std::string>(j, "geometry", c.geometry, "");
  c.trials = get_or<int>(j, "trials", c.trials, "");
  try {
    c.boundary = boundary_mode_from_string(get_or<std::string>(j, "boundary", to_string(c.boundary), ""));
  } catch (const domain_error& e) {
    throw parse_error("boundary", e.what());
  }
  c.rng_seed = get_or<std::uint64_t>(j, "rng_seed", c.rng_seed, "");
  c.max_sites = get_or<std::uint64_t>(j, "max_sites", c.max_sites, "");

  auto in_unit = [](const std::vector<double>& xs, const char* field) {
    for (double x : xs)
      if (!(x >= 0.0 && x <= 1.0)) throw parse_error(field, "probabilities must lie in [0, 1]");
  };
  in_unit(c.eps0, "eps0");
  in_unit(c.eps1, "eps1");
  in_unit({c.spurious}, "spurious");
  in_unit({c.exchange_probability}, "exchange_probability");
  if (c.trials < 1) throw parse_error("trials", "must be at least 1");
  for (int d : c.diffusion_steps)
    if (d < 0) throw parse_error("diffusion_steps", "must be non-negative");
  if (c.geometry != "cubic" && c.geometry != "rhombo60") throw parse_error("geometry", "expected cubic or rhombo60");
  if (c.phases && *c.phases < 0) throw parse_error("phases", "must be non-negative");
  return c;
}

// Every field written out, defaults included.
inline json to_json(const SweepConfig& c) {
  json j{{"schema_version", schema_version},
         {"seed_value", to_string(c.seed_value)},
         {"polarization_convention", to_string(c.convention)},
         {"eps1", c.eps1},
         {"spurious", c.spurious},
         {"plus_one_rule", c.plus_one_rule},
         {"diffusion_steps", c.diffusion_steps},
         {"exchange_probability", c.exchange_probability},
         {"geometry", c.geometry},
         {"trials", c.trials},
         {"boundary", to_string(c.boundary)},
         {"rng_seed", c.rng_seed},
         {"max_sites", c.max_sites},
         {"phases", c.phases ? json(*c.phases) : json(nullptr)}};
  if (c.sizes.empty()) j["layers"] = c.layers;
  else j["sizes"] = c.sizes;
  if (c.polarization) j["polarization"] = *c.polarization;
  else j["eps0"] = c.eps0;
  return j;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw parse_error("", path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- spectra

inline json to_json(const StickSpectrum& s) {
  json sticks = json::array();
  for (const auto& st : s.sticks) sticks.push_back({{"frequency_hz", st.frequency_hz}, {"weight", st.weight}});
  json fields = json::object();
  for (const auto& [field, list] : s.by_field) {
    json l = json::array();
    for (const auto& st : list) l.push_back({{"frequency_hz", st.frequency_hz}, {"weight", st.weight}});
    fields[std::to_string(field)] = l;
  }
  return {{"sticks", sticks},
          {"by_field", fields},
          {"partners", s.partners},
          {"exhaustive", s.exhaustive},
          {"samples", s.samples}};
}

inline StickSpectrum stick_spectrum_from_json(const json& j, const std::string& path = "spectrum") {
  using detail::get;
  auto read_list = [](const json& l, const std::string& p) {
    if (!l.is_array()) throw parse_error(p, "expected a list of sticks");
    std::vector<Stick> out;
    for (const auto& e : l) out.push_back({get<double>(e, "frequency_hz", p), get<double>(e, "weight", p)});
    return out;
  };
  StickSpectrum s;
  if (!j.contains("sticks")) throw parse_error(path + ".sticks", "missing");
  s.sticks = read_list(j.at("sticks"), path + ".sticks");
  if (j.contains("by_field"))
    for (const auto& [key, list] : j.at("by_field").items()) {
      int field = 0;
      const auto r = std::from_chars(key.data(), key.data() + key.size(), field);
      if (r.ec != std::errc{} || r.ptr != key.data() + key.size()) throw parse_error(path + ".by_field", "bad field '" + key + "'");
      s.by_field[field] = read_list(list, path + ".by_field." + key);
    }
  s.partners = get<std::size_t>(j, "partners", path);
  s.exhaustive = get<bool>(j, "exhaustive", path);
  s.samples = get<std::uint64_t>(j, "samples", path);
  return s;
}

inline void write_curve_csv(std::ostream& os, const BroadenedCurve& c) {
  write_csv_row(os, {"frequency_hz", "intensity"});
  for (std::size_t i = 0; i < c.intensity.size(); ++i)
    write_csv_row(os, {format_double(c.grid.at(i)), format_double(c.intensity[i])});
}

inline BroadenedCurve read_curve_csv(std::istream& is) {
  const CsvTable t = read_csv(is);
  if (t.header != std::vector<std::string>{"frequency_hz", "intensity"}) throw parse_error("header", "not a spectrum curve");
  if (t.rows.size() < 2) throw parse_error("", "a curve needs at least two points");
  BroadenedCurve c;
  c.grid = {parse_double(t.rows.front()[0], "frequency_hz"), parse_double(t.rows.back()[0], "frequency_hz"), t.rows.size()};
  for (const auto& r : t.rows) c.intensity.push_back(parse_double(r[1], "intensity"));
  return c;
}

// ---------------------------------------------------------------- files and manifests

inline std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now()) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Writes through a callback; stream failures become io_error.
template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  writer(out);
  out.flush();
  if (!out) throw io_error("failed writing " + path.string());
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

struct RunManifest {
  std::string command;
  json config;
  std::vector<std::uint64_t> seeds;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;

  json to_json() const {
    return {{"tool", "spinamp"},
            {"version", version},
            {"command", command},
            {"config", config},
            {"seeds", seeds},
            {"started_at", started_at},
            {"finished_at", finished_at},
            {"outputs", outputs}};
  }

  static RunManifest from_json(const json& j) {
    using detail::get;
    RunManifest m;
    m.command = get<std::string>(j, "command", "manifest");
    if (!j.contains("config")) throw parse_error("manifest.config", "missing");
    m.config = j.at("config");
    m.seeds = get<std::vector<std::uint64_t>>(j, "seeds", "manifest");
    m.started_at = get<std::string>(j, "started_at", "manifest");
    m.finished_at = get<std::string>(j, "finished_at", "manifest");
    m.outputs = get<std::vector<std::string>>(j, "outputs", "manifest");
    return m;
  }
};

}  // namespace spinamp::io
