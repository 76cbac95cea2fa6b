#pragma once

// JSON and CSV formats for topologies, catalogs, fits, probe results,
// recommendations, scenarios and experiment reports. JSON objects are read
// strictly: unknown keys are rejected.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chprobe/error.hpp"
#include "chprobe/experiment.hpp"
#include "chprobe/link_model.hpp"
#include "chprobe/probe.hpp"
#include "chprobe/recommender.hpp"
#include "chprobe/transponder.hpp"

namespace chprobe::io {

using json = nlohmann::ordered_json;

// Reads keys from one JSON object and rejects the ones nobody asked for.
class ObjectReader {
public:
  ObjectReader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ParseError(context_ + ": expected a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ParseError(context_ + ": missing field '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ParseError(context_ + ": field '" + key + "' must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  long long integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ParseError(context_ + ": field '" + key + "' must be an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long fallback) { return has(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ParseError(context_ + ": field '" + key + "' must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ParseError(context_ + ": field '" + key + "' must be a boolean");
    return v.get<bool>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ParseError(context_ + ": unknown field '" + it.key() + "'");
  }

  const std::string& context() const { return context_; }

private:
  const json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json_file(const std::string& path) { return parse_json_text(read_file(path), path); }

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path + "'");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Shortest representation that round-trips through strtod.
inline std::string fmt(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// ---- link model -----------------------------------------------------------

inline json to_json(const FiberSpan& s) {
  json j;
  j["length_km"] = s.length_km;
  j["attenuation_db_per_km"] = s.attenuation_db_per_km;
  j["gamma_per_w_km"] = s.gamma_per_w_km;
  j["beta2_ps2_per_km"] = s.beta2_ps2_per_km;
  j["amp_gain_db"] = s.amp_gain_db;
  j["amp_noise_figure_db"] = s.amp_noise_figure_db;
  if (s.extra_nli_psd_w_per_hz != 0.0) j["extra_nli_psd_w_per_hz"] = s.extra_nli_psd_w_per_hz;
  return j;
}

inline FiberSpan span_from_json(const json& j, const std::string& context) {
  ObjectReader r(j, context);
  FiberSpan s;
  s.length_km = r.number("length_km");
  s.attenuation_db_per_km = r.number("attenuation_db_per_km");
  s.gamma_per_w_km = r.number("gamma_per_w_km");
  s.beta2_ps2_per_km = r.number("beta2_ps2_per_km");
  s.amp_gain_db = r.number("amp_gain_db");
  s.amp_noise_figure_db = r.number("amp_noise_figure_db");
  s.extra_nli_psd_w_per_hz = r.number("extra_nli_psd_w_per_hz", 0.0);
  r.finish();
  return s;
}

inline json to_json(const SpectrumSlot& s) {
  return json{{"center_freq_thz", s.center_freq_thz}, {"width_ghz", s.width_ghz}};
}

inline SpectrumSlot slot_from_json(const json& j, const std::string& context) {
  ObjectReader r(j, context);
  SpectrumSlot s{r.number("center_freq_thz"), r.number("width_ghz")};
  r.finish();
  validate(s);
  return s;
}

struct Topology {
  std::map<std::string, FiberSpan> spans;
  std::map<std::string, SpectrumSlot> slots;
  std::vector<Lightpath> lightpaths;
  std::map<std::string, std::string> lightpath_slot;  // optional default slot per lightpath
  double min_noise_figure_db = kMinPhysicalNoiseFigureDb;

  const Lightpath& lightpath(const std::string& id) const {
    for (const auto& p : lightpaths)
      if (p.id == id) return p;
    throw ConfigError("unknown lightpath '" + id + "'");
  }
  const SpectrumSlot& slot(const std::string& id) const {
    auto it = slots.find(id);
    if (it == slots.end()) throw ConfigError("unknown slot '" + id + "'");
    return it->second;
  }
};

// {"spans": {id: FiberSpan}, "slots": {id: SpectrumSlot},
//  "lightpaths": [{"id", "spans": [id | {"span": id, "count": n}], "add_drop_loss_db",
//                  "loopback_count", "slot"?}], "min_noise_figure_db"?}
inline Topology topology_from_json(const json& j) {
  ObjectReader r(j, "topology");
  Topology t;
  t.min_noise_figure_db = r.number("min_noise_figure_db", kMinPhysicalNoiseFigureDb);
  const json& spans = r.at("spans");
  if (!spans.is_object()) throw ParseError("topology: 'spans' must be an object keyed by span id");
  for (auto it = spans.begin(); it != spans.end(); ++it) {
    FiberSpan s = span_from_json(it.value(), "span '" + it.key() + "'");
    validate(s, t.min_noise_figure_db);
    t.spans.emplace(it.key(), s);
  }
  if (r.has("slots")) {
    const json& slots = r.at("slots");
    if (!slots.is_object()) throw ParseError("topology: 'slots' must be an object keyed by slot id");
    for (auto it = slots.begin(); it != slots.end(); ++it)
      t.slots.emplace(it.key(), slot_from_json(it.value(), "slot '" + it.key() + "'"));
  }
  const json& paths = r.at("lightpaths");
  if (!paths.is_array()) throw ParseError("topology: 'lightpaths' must be an array");
  for (const auto& pj : paths) {
    ObjectReader pr(pj, "lightpath");
    Lightpath p;
    p.id = pr.string("id");
    const json& seq = pr.at("spans");
    if (!seq.is_array()) throw ParseError("lightpath '" + p.id + "': 'spans' must be an array");
    for (const auto& ref : seq) {
      std::string id;
      long long count = 1;
      if (ref.is_string()) {
        id = ref.get<std::string>();
      } else {
        ObjectReader rr(ref, "lightpath '" + p.id + "' span reference");
        id = rr.string("span");
        count = rr.integer("count", 1);
        rr.finish();
        if (count < 1) throw ParseError("lightpath '" + p.id + "': span count must be positive");
      }
      auto it = t.spans.find(id);
      if (it == t.spans.end()) throw ParseError("lightpath '" + p.id + "': unknown span '" + id + "'");
      p.spans.insert(p.spans.end(), static_cast<std::size_t>(count), it->second);
    }
    p.add_drop_loss_db = pr.number("add_drop_loss_db", 0.0);
    p.loopback_count = static_cast<int>(pr.integer("loopback_count", 0));
    if (pr.has("slot")) {
      const std::string slot = pr.string("slot");
      if (!t.slots.count(slot)) throw ParseError("lightpath '" + p.id + "': unknown slot '" + slot + "'");
      t.lightpath_slot[p.id] = slot;
    }
    pr.finish();
    validate(p, t.min_noise_figure_db);
    t.lightpaths.push_back(std::move(p));
  }
  r.finish();
  return t;
}

namespace detail {

template <typename T, typename Make>
std::string intern(std::vector<std::pair<std::string, T>>& pool, const T& value, Make make_id) {
  for (const auto& [id, v] : pool)
    if (v == value) return id;
  pool.emplace_back(make_id(pool.size()), value);
  return pool.back().first;
}

}  // namespace detail

// Lightpaths with run-length encoded span references; identical spans and
// slots are shared. `slots[i]` (optional) becomes the lightpath's default slot.
inline json topology_to_json(const std::vector<Lightpath>& paths, const std::vector<SpectrumSlot>& slots = {}) {
  std::vector<std::pair<std::string, FiberSpan>> span_pool;
  std::vector<std::pair<std::string, SpectrumSlot>> slot_pool;
  json lps = json::array();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    json seq = json::array();
    for (std::size_t k = 0; k < p.spans.size();) {
      std::size_t n = 1;
      while (k + n < p.spans.size() && p.spans[k + n] == p.spans[k]) ++n;
      const std::string id =
          detail::intern(span_pool, p.spans[k], [](std::size_t idx) { return "span" + std::to_string(idx); });
      if (n == 1) seq.push_back(id);
      else seq.push_back(json{{"span", id}, {"count", n}});
      k += n;
    }
    json lp;
    lp["id"] = p.id;
    lp["spans"] = seq;
    lp["add_drop_loss_db"] = p.add_drop_loss_db;
    lp["loopback_count"] = p.loopback_count;
    if (i < slots.size())
      lp["slot"] = detail::intern(slot_pool, slots[i], [](std::size_t idx) { return "slot" + std::to_string(idx); });
    lps.push_back(lp);
  }
  json j;
  j["spans"] = json::object();
  for (const auto& [id, s] : span_pool) j["spans"][id] = to_json(s);
  if (!slot_pool.empty()) {
    j["slots"] = json::object();
    for (const auto& [id, s] : slot_pool) j["slots"][id] = to_json(s);
  }
  j["lightpaths"] = lps;
  return j;
}

// ---- transponder ----------------------------------------------------------

inline json to_json(const TransponderConfig& c) {
  return json{{"name", c.name},
              {"bits_per_symbol", c.bits_per_symbol},
              {"symbol_rate_gbd", c.symbol_rate_gbd},
              {"line_rate_gbps", c.line_rate_gbps}};
}

inline TransponderConfig config_from_reader(ObjectReader& r) {
  TransponderConfig c;
  c.name = r.string("name");
  c.bits_per_symbol = r.number("bits_per_symbol");
  c.symbol_rate_gbd = r.number("symbol_rate_gbd");
  c.line_rate_gbps = r.number("line_rate_gbps");
  return c;
}

inline TransponderConfig config_from_json(const json& j) {
  ObjectReader r(j, "transponder config");
  TransponderConfig c = config_from_reader(r);
  r.finish();
  validate(c);
  return c;
}

inline json to_json(const ModFormatSpec& s) {
  json j = to_json(s.config);
  j["required_gsnr_typical_db"] = s.required_gsnr_typical_db;
  j["required_gsnr_worst_db"] = s.required_gsnr_worst_db;
  return j;
}

struct CatalogRule {
  double impl_penalty_db = 1.0;
  double fec_ber = kDefaultFecBerThreshold;
  double worst_case_delta_db = kDefaultWorstCaseDeltaDb;
};

inline ModFormatSpec spec_from_json(const json& j, const CatalogRule& rule) {
  ObjectReader r(j, "catalog entry");
  ModFormatSpec s;
  s.config = config_from_reader(r);
  validate(s.config);
  const bool has_typ = r.has("required_gsnr_typical_db");
  const bool has_worst = r.has("required_gsnr_worst_db");
  if (has_typ) {
    s.required_gsnr_typical_db = r.number("required_gsnr_typical_db");
    s.required_gsnr_worst_db =
        has_worst ? r.number("required_gsnr_worst_db") : s.required_gsnr_typical_db + rule.worst_case_delta_db;
  } else {
    if (has_worst) throw ParseError("catalog entry '" + s.config.name + "': worst-case value without typical");
    s = spec_from_fec_limit(s.config, rule.impl_penalty_db, rule.fec_ber, rule.worst_case_delta_db);
  }
  r.finish();
  validate(s);
  return s;
}

// Either a plain array of entries, or {"impl_penalty_db"?, "fec_ber"?,
// "worst_case_delta_db"?, "formats": [...]}. Entries without thresholds take
// them from the FEC-limit rule.
inline std::vector<ModFormatSpec> catalog_from_json(const json& j) {
  CatalogRule rule;
  const json* formats = &j;
  std::optional<ObjectReader> r;
  if (j.is_object()) {
    r.emplace(j, "catalog");
    rule.impl_penalty_db = r->number("impl_penalty_db", rule.impl_penalty_db);
    rule.fec_ber = r->number("fec_ber", rule.fec_ber);
    rule.worst_case_delta_db = r->number("worst_case_delta_db", rule.worst_case_delta_db);
    formats = &r->at("formats");
  }
  if (!formats->is_array()) throw ParseError("catalog: expected an array of formats");
  std::vector<ModFormatSpec> out;
  for (const auto& e : *formats) out.push_back(spec_from_json(e, rule));
  if (r) r->finish();
  if (out.empty()) throw ConfigError("empty configuration catalog");
  validate_catalog(out);
  return out;
}

inline json catalog_to_json(const std::vector<ModFormatSpec>& catalog) {
  json arr = json::array();
  for (const auto& s : catalog) arr.push_back(to_json(s));
  return arr;
}

inline json to_json(const QuadraticFit& f) {
  return json{{"a", f.a},
              {"b", f.b},
              {"c", f.c},
              {"osnr_min_db", f.osnr_min_db},
              {"osnr_max_db", f.osnr_max_db},
              {"residual_rms_db", f.residual_rms_db}};
}

inline QuadraticFit fit_from_json(const json& j) {
  ObjectReader r(j, "fit");
  QuadraticFit f;
  f.a = r.number("a");
  f.b = r.number("b");
  f.c = r.number("c");
  f.osnr_min_db = r.number("osnr_min_db");
  f.osnr_max_db = r.number("osnr_max_db");
  f.residual_rms_db = r.number("residual_rms_db", 0.0);
  r.finish();
  if (!(f.osnr_max_db > f.osnr_min_db)) throw ParseError("fit: empty valid range");
  if (!f.is_monotonic()) throw FitError("fit is not monotonic on its valid range");
  return f;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_number(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError(where + ": malformed sample value '" + s + "'");
  }
  if (used != s.size()) throw ParseError(where + ": malformed sample value '" + s + "'");
  return v;
}

}  // namespace detail

// CSV with header `osnr_db,q_db`.
inline std::vector<QOverOsnrSample> samples_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("B2B CSV is empty");
  const auto header = detail::split_csv_line(line);
  if (header != std::vector<std::string>{"osnr_db", "q_db"})
    throw ParseError("malformed sample header: expected 'osnr_db,q_db'");
  std::vector<QOverOsnrSample> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = "line " + std::to_string(lineno);
    if (cells.size() != 2) throw ParseError(where + ": malformed sample (expected 2 columns)");
    out.push_back({detail::parse_number(cells[0], where), detail::parse_number(cells[1], where)});
  }
  return out;
}

inline std::string samples_to_csv(const std::vector<QOverOsnrSample>& samples) {
  std::string out = "osnr_db,q_db\n";
  for (const auto& s : samples) out += fmt(s.osnr_db) + "," + fmt(s.q_db) + "\n";
  return out;
}

// ---- probe results --------------------------------------------------------

inline json to_json(const ProbeResult& r) {
  json j;
  j["probe"] = to_json(r.probe);
  j["slot"] = to_json(r.slot);
  j["measured_q_db"] = r.measured_q_db;
  j["estimated_gosnr_db"] = r.estimated_gosnr_db;
  j["estimated_gsnr_db"] = r.estimated_gsnr_db;
  j["seed"] = r.seed;
  return j;
}

inline ProbeResult probe_result_from_json(const json& j) {
  ObjectReader r(j, "probe result");
  ProbeResult p;
  p.probe = config_from_json(r.at("probe"));
  p.slot = slot_from_json(r.at("slot"), "probe result slot");
  p.measured_q_db = r.number("measured_q_db");
  p.estimated_gosnr_db = r.number("estimated_gosnr_db");
  p.estimated_gsnr_db = r.number("estimated_gsnr_db");
  const json& seed = r.at("seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) throw ParseError("probe result: bad seed");
  p.seed = seed.get<std::uint64_t>();
  r.finish();
  if (std::abs(p.estimated_gsnr_db - normalize_to_gsnr(p.estimated_gosnr_db, p.probe.symbol_rate_gbd)) > 1e-9)
    throw ParseError("probe result: GSNR is inconsistent with GOSNR and symbol rate");
  return p;
}

inline std::string probe_csv_header() {
  return "path,probe,bits_per_symbol,symbol_rate_gbd,line_rate_gbps,center_freq_thz,width_ghz,seed,"
         "measured_q_db,estimated_gosnr_db,estimated_gsnr_db,true_gsnr_db\n";
}

inline std::string probe_csv_row(const std::string& path, const ProbeResult& r, std::optional<double> truth) {
  return path + "," + r.probe.name + "," + fmt(r.probe.bits_per_symbol) + "," + fmt(r.probe.symbol_rate_gbd) + "," +
         fmt(r.probe.line_rate_gbps) + "," + fmt(r.slot.center_freq_thz) + "," + fmt(r.slot.width_ghz) + "," +
         std::to_string(r.seed) + "," + fmt(r.measured_q_db) + "," + fmt(r.estimated_gosnr_db) + "," +
         fmt(r.estimated_gsnr_db) + "," + (truth ? fmt(*truth) : std::string{}) + "\n";
}

// ---- recommender ----------------------------------------------------------

inline json to_json(const MarginEntry& e) {
  json j;
  j["config"] = e.spec.config.name;
  j["line_rate_gbps"] = e.spec.config.line_rate_gbps;
  j["bits_per_symbol"] = e.spec.config.bits_per_symbol;
  j["symbol_rate_gbd"] = e.spec.config.symbol_rate_gbd;
  j["required_gsnr_typical_db"] = e.spec.required_gsnr_typical_db;
  j["estimated_gsnr_db"] = e.estimated_gsnr_db;
  j["margin_db"] = e.margin_db;
  j["predicted_feasible"] = e.predicted_feasible;
  j["actual_feasible"] = e.actual_feasible ? json(*e.actual_feasible) : json(nullptr);
  j["classification"] = std::string(to_string(e.classification));
  return j;
}

inline json to_json(const Recommendation& rec) {
  json j;
  j["operating_margin_db"] = rec.operating_margin_db;
  j["chosen"] = rec.chosen ? to_json(*rec.chosen) : json(nullptr);
  json ranking = json::array();
  for (const auto& e : rec.ranking) ranking.push_back(to_json(e));
  j["ranking"] = ranking;
  return j;
}

inline std::string margin_csv_header() {
  return "path,seed,config,margin_db,predicted,actual,classification\n";
}

inline std::string margin_csv_row(const std::string& path, std::optional<std::uint64_t> seed, const MarginEntry& e) {
  return path + "," + (seed ? std::to_string(*seed) : std::string{}) + "," + e.spec.config.name + "," +
         fmt(e.margin_db) + "," + (e.predicted_feasible ? "true" : "false") + "," +
         (e.actual_feasible ? (*e.actual_feasible ? "true" : "false") : "") + "," +
         std::string(to_string(e.classification)) + "\n";
}

// Human-readable margin table in ranking order.
inline std::string margin_table(const Recommendation& rec) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s %9s %9s %9s %9s  %s\n", "config", "rate_G", "bits", "GBd", "margin_dB",
                "predicted");
  out += buf;
  for (const auto& e : rec.ranking) {
    std::snprintf(buf, sizeof buf, "%-24s %9g %9.1f %9g %9.3f  %s\n", e.spec.config.name.c_str(),
                  e.spec.config.line_rate_gbps, e.spec.config.bits_per_symbol, e.spec.config.symbol_rate_gbd,
                  e.margin_db, e.predicted_feasible ? "feasible" : "infeasible");
    out += buf;
  }
  return out;
}

// ---- scenario -------------------------------------------------------------

inline std::string to_string(ThresholdSource s) { return s == ThresholdSource::Typical ? "typical" : "worst-case"; }
inline std::string to_string(Extrapolation e) { return e == Extrapolation::Reject ? "reject" : "clamp"; }

inline json scenario_to_json(const Scenario& sc) {
  std::vector<Lightpath> lps;
  std::vector<SpectrumSlot> slots;
  for (const auto& p : sc.paths) {
    lps.push_back(p.path);
    slots.push_back(p.slot);
  }
  json topo = topology_to_json(lps, slots);
  json paths = json::array();
  for (std::size_t i = 0; i < sc.paths.size(); ++i) {
    const auto& p = sc.paths[i];
    paths.push_back(json{{"label", p.label},
                         {"lightpath", p.path.id},
                         {"slot", topo["lightpaths"][i]["slot"]},
                         {"nominal_length_km", p.nominal_length_km},
                         {"synthetic", p.synthetic}});
  }
  json probes = json::array();
  for (const auto& p : sc.probes) probes.push_back(to_json(p));
  json j;
  j["topology"] = topo;
  j["paths"] = paths;
  j["probes"] = probes;
  j["catalog"] = catalog_to_json(sc.catalog);
  j["launch_psd_w_per_hz"] = sc.launch_psd_w_per_hz;
  j["q_noise_sigma_db"] = sc.q_noise_sigma_db;
  j["seeds"] = sc.seeds;
  j["reference_probe"] = sc.reference_probe;
  j["characterized_penalty_db"] = sc.characterized_penalty_db;
  j["probe_module_offset_db"] = sc.probe_module_offset_db;
  j["b2b"] = json{{"osnr_min_db", sc.b2b.osnr_min_db}, {"osnr_max_db", sc.b2b.osnr_max_db}, {"step_db", sc.b2b.step_db}};
  j["operating_margin_db"] = sc.operating_margin_db;
  j["threshold"] = to_string(sc.threshold);
  j["extrapolation"] = to_string(sc.extrapolation);
  return j;
}

inline Scenario scenario_from_json(const json& j) {
  ObjectReader r(j, "scenario");
  Scenario sc;
  const Topology topo = topology_from_json(r.at("topology"));
  const json& paths = r.at("paths");
  if (!paths.is_array()) throw ParseError("scenario: 'paths' must be an array");
  for (const auto& pj : paths) {
    ObjectReader pr(pj, "scenario path");
    ScenarioPath sp;
    sp.label = pr.string("label");
    sp.path = topo.lightpath(pr.string("lightpath"));
    if (pr.has("slot")) {
      sp.slot = topo.slot(pr.string("slot"));
    } else {
      auto it = topo.lightpath_slot.find(sp.path.id);
      if (it == topo.lightpath_slot.end()) throw ParseError("scenario path '" + sp.label + "' has no slot");
      sp.slot = topo.slot(it->second);
    }
    sp.nominal_length_km = pr.number("nominal_length_km", sp.path.total_length_km());
    sp.synthetic = pr.boolean("synthetic", false);
    pr.finish();
    sc.paths.push_back(std::move(sp));
  }
  const json& probes = r.at("probes");
  if (!probes.is_array()) throw ParseError("scenario: 'probes' must be an array");
  for (const auto& p : probes) sc.probes.push_back(config_from_json(p));
  sc.characterized_penalty_db = r.number("characterized_penalty_db", sc.characterized_penalty_db);
  if (r.has("catalog")) {
    json cat = r.at("catalog");
    sc.catalog = catalog_from_json(cat);
  } else {
    sc.catalog = defaults::catalog(sc.characterized_penalty_db);
  }
  sc.launch_psd_w_per_hz = r.number("launch_psd_w_per_hz");
  sc.q_noise_sigma_db = r.number("q_noise_sigma_db", sc.q_noise_sigma_db);
  const json& seeds = r.at("seeds");
  if (seeds.is_array()) {
    for (const auto& s : seeds) {
      if (!s.is_number_unsigned()) throw ParseError("scenario: seeds must be non-negative integers");
      sc.seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    ObjectReader sr(seeds, "scenario seeds");
    const long long first = sr.integer("first", 0);
    const long long count = sr.integer("count");
    sr.finish();
    if (first < 0 || count < 1) throw ParseError("scenario seeds: need first >= 0 and count >= 1");
    for (long long s = 0; s < count; ++s) sc.seeds.push_back(static_cast<std::uint64_t>(first + s));
  }
  sc.reference_probe = r.string("reference_probe", sc.reference_probe);
  sc.probe_module_offset_db = r.number("probe_module_offset_db", sc.probe_module_offset_db);
  if (r.has("b2b")) {
    ObjectReader br(r.at("b2b"), "scenario b2b");
    sc.b2b.osnr_min_db = br.number("osnr_min_db", sc.b2b.osnr_min_db);
    sc.b2b.osnr_max_db = br.number("osnr_max_db", sc.b2b.osnr_max_db);
    sc.b2b.step_db = br.number("step_db", sc.b2b.step_db);
    br.finish();
  }
  sc.operating_margin_db = r.number("operating_margin_db", sc.operating_margin_db);
  const std::string th = r.string("threshold", "typical");
  if (th == "typical") sc.threshold = ThresholdSource::Typical;
  else if (th == "worst-case") sc.threshold = ThresholdSource::WorstCase;
  else throw ParseError("scenario: threshold must be 'typical' or 'worst-case'");
  const std::string ex = r.string("extrapolation", "reject");
  if (ex == "reject") sc.extrapolation = Extrapolation::Reject;
  else if (ex == "clamp") sc.extrapolation = Extrapolation::Clamp;
  else throw ParseError("scenario: extrapolation must be 'reject' or 'clamp'");
  r.finish();
  validate(sc);
  return sc;
}

// ---- experiment report ----------------------------------------------------

inline json report_to_json(const ExperimentReport& rep) {
  json j;
  j["reference_probe"] = rep.reference_probe;
  j["launch_psd_w_per_hz"] = rep.launch_psd_w_per_hz;
  j["q_noise_sigma_db"] = rep.q_noise_sigma_db;
  j["operating_margin_db"] = rep.operating_margin_db;
  json chars = json::array();
  for (const auto& c : rep.characterizations) {
    json cj = to_json(c.fit);
    cj["probe"] = c.probe.name;
    cj["osnr_residual_bound_db"] = c.residual_bound_db;
    chars.push_back(cj);
  }
  j["characterizations"] = chars;

  json paths = json::array();
  for (const auto& p : rep.paths) {
    json pj;
    pj["label"] = p.label;
    pj["nominal_length_km"] = p.nominal_length_km;
    pj["total_length_km"] = p.total_length_km;
    pj["span_count"] = p.span_count;
    pj["synthetic"] = p.synthetic;
    pj["slot"] = to_json(p.slot);
    pj["error"] = p.error ? json(*p.error) : json(nullptr);
    json probes = json::array();
    std::vector<std::string> names;
    for (const auto& r : p.runs)
      if (std::find(names.begin(), names.end(), r.result.probe.name) == names.end())
        names.push_back(r.result.probe.name);
    for (const auto& n : names) {
      const auto runs = p.runs_of(n);
      std::vector<double> est, err;
      for (const auto* r : runs) {
        est.push_back(r->result.estimated_gsnr_db);
        err.push_back(r->error_db());
      }
      double max_abs = 0.0;
      for (double e : err) max_abs = std::max(max_abs, std::abs(e));
      probes.push_back(json{{"probe", n},
                            {"true_gsnr_db", runs.front()->true_gsnr_db},
                            {"mean_estimated_gsnr_db", chprobe::detail::mean_of(est)},
                            {"sigma_estimated_gsnr_db", chprobe::detail::sample_sigma(est)},
                            {"mean_error_db", chprobe::detail::mean_of(err)},
                            {"max_abs_error_db", max_abs},
                            {"runs", runs.size()}});
    }
    pj["probes"] = probes;
    json truth = json::array();
    ClassificationCounts counts;
    for (const auto& sm : p.margins)
      for (const auto& e : sm.entries) counts.add(e.classification);
    for (std::size_t i = 0; i < p.truth.size(); ++i) {
      const auto& t = p.truth[i];
      std::vector<double> m;
      std::size_t fp = 0;
      for (const auto& sm : p.margins) {
        m.push_back(sm.entries[i].margin_db);
        if (sm.entries[i].classification == Classification::FalsePositive) ++fp;
      }
      truth.push_back(json{{"config", t.spec.config.name},
                           {"launch_psd_w_per_hz", t.launch_psd_w_per_hz},
                           {"true_gsnr_db", t.true_gsnr_db},
                           {"actual_feasible", t.actual_feasible},
                           {"mean_margin_db", chprobe::detail::mean_of(m)},
                           {"false_positives", fp}});
    }
    pj["catalog"] = truth;
    pj["classification_counts"] = json{{"true_positive", counts.true_positive},
                                       {"false_positive", counts.false_positive},
                                       {"true_negative", counts.true_negative},
                                       {"false_negative", counts.false_negative}};
    paths.push_back(pj);
  }
  j["paths"] = paths;

  json dev = json::array();
  for (const auto& d : rep.deviations)
    dev.push_back(json{{"path", d.path}, {"probe", d.probe}, {"mean_db", d.mean_db}, {"sigma_db", d.sigma_db},
                       {"count", d.count}});
  j["deviations"] = dev;
  const auto& s = rep.summary;
  j["summary"] = json{{"reference_max_abs_error_db", s.reference_max_abs_error_db},
                      {"reference_within_0p7_fraction", s.reference_within_0p7_fraction},
                      {"true_positive", s.counts.true_positive},
                      {"false_positive", s.counts.false_positive},
                      {"true_negative", s.counts.true_negative},
                      {"false_negative", s.counts.false_negative},
                      {"failed_paths", s.failed_paths}};
  return j;
}

inline std::string report_probes_csv(const ExperimentReport& rep) {
  std::string out = probe_csv_header();
  for (const auto& p : rep.paths)
    for (const auto& r : p.runs) out += probe_csv_row(p.label, r.result, r.true_gsnr_db);
  return out;
}

inline std::string report_margins_csv(const ExperimentReport& rep) {
  std::string out = margin_csv_header();
  for (const auto& p : rep.paths)
    for (const auto& sm : p.margins)
      for (const auto& e : sm.entries) out += margin_csv_row(p.label, sm.seed, e);
  return out;
}

inline std::string figure2_csv(const std::vector<Figure2Row>& rows) {
  std::string out = "path_length_km,config_name,margin_db,actual_feasible\n";
  for (const auto& r : rows)
    out += fmt(r.path_length_km) + "," + r.config + "," + fmt(r.margin_db) + "," +
           (r.actual_feasible ? "true" : "false") + "\n";
  return out;
}

}  // namespace chprobe::io
