#pragma once

// Scenario files: JSON in, a validated HistoriesProblem out. Validation does
// not stop at the first problem; it collects every issue with the JSON path
// it came from so the CLI can report them together.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "decohist/histories.hpp"
#include "decohist/sweep.hpp"

namespace decohist {

inline constexpr const char* artifact_version = "decohist 1.0.0";

struct ValidationIssue {
  std::string path;
  std::string message;
};

/// An endpoint-grid axis for the class-operator table: n points from lo to hi.
struct AxisRange {
  double lo = 0.0, hi = 0.0;
  int n = 1;
  double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

struct ClassOpTable {
  AxisRange x_in{-1.0, 1.0, 5}, x_out{-1.0, 1.0, 5}, X_in{0.0, 0.0, 1}, X_out{-1.0, 1.0, 3};
};

/// A designated lattice continuum-limit check (free particle).
struct LatticeCheck {
  bool present = false;
  int n_slices = 64;
  int alpha = 0;
  Endpoints ep;
};

struct Scenario {
  std::string name = "scenario";
  HistoriesProblem problem;
  std::optional<SweepSpec> sweep;
  ClassOpTable classop;
  int oracle_samples = 20;
  LatticeCheck lattice;
  std::uint64_t seed = 20260101ULL;
  std::string output;
  nlohmann::json source;  // as parsed, for hashing
};

/// 64-bit FNV-1a of the canonical (key-sorted, compact) JSON text.
inline std::uint64_t scenario_hash(const nlohmann::json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

namespace detail {

class Reader {
public:
  std::vector<ValidationIssue> issues;

  void fail(const std::string& path, const std::string& msg) { issues.push_back({path, msg}); }

  const nlohmann::json* object(const nlohmann::json& j, const std::string& key, const std::string& path,
                               bool required) {
    if (!j.contains(key)) {
      if (required) fail(path + "/" + key, "missing section");
      return nullptr;
    }
    if (!j[key].is_object()) {
      fail(path + "/" + key, "must be an object");
      return nullptr;
    }
    return &j[key];
  }

  void only(const nlohmann::json& j, const std::string& path, std::set<std::string> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!allowed.count(it.key())) fail(path + "/" + it.key(), "unknown field");
  }

  double number(const nlohmann::json& j, const std::string& key, const std::string& path,
                std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
      if (!fallback) fail(path + "/" + key, "missing number");
      return fallback.value_or(0.0);
    }
    if (!j[key].is_number()) {
      fail(path + "/" + key, "must be a number");
      return fallback.value_or(0.0);
    }
    return j[key].get<double>();
  }

  int integer(const nlohmann::json& j, const std::string& key, const std::string& path,
              std::optional<int> fallback = std::nullopt) {
    if (!j.contains(key)) {
      if (!fallback) fail(path + "/" + key, "missing integer");
      return fallback.value_or(0);
    }
    if (!j[key].is_number_integer()) {
      fail(path + "/" + key, "must be an integer");
      return fallback.value_or(0);
    }
    return j[key].get<int>();
  }

  std::string text(const nlohmann::json& j, const std::string& key, const std::string& path,
                   std::optional<std::string> fallback = std::nullopt) {
    if (!j.contains(key)) {
      if (!fallback) fail(path + "/" + key, "missing string");
      return fallback.value_or("");
    }
    if (!j[key].is_string()) {
      fail(path + "/" + key, "must be a string");
      return fallback.value_or("");
    }
    return j[key].get<std::string>();
  }

  AxisRange axis(const nlohmann::json& j, const std::string& key, const std::string& path, AxisRange fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j[key];
    if (v.is_number()) return {v.get<double>(), v.get<double>(), 1};
    if (v.is_array() && v.size() == 3 && v[0].is_number() && v[1].is_number() && v[2].is_number_integer() &&
        v[2].get<int>() >= 1)
      return {v[0].get<double>(), v[1].get<double>(), v[2].get<int>()};
    fail(path + "/" + key, "must be a number or [lo, hi, n] with integer n >= 1");
    return fallback;
  }

  /// Run a library validator and file its message under `path`.
  template <class F>
  void check(const std::string& path, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }
};

}  // namespace detail

struct ParseResult {
  Scenario scenario;
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

inline ParseResult parse_scenario(const nlohmann::json& j) {
  ParseResult out;
  Scenario& sc = out.scenario;
  detail::Reader rd;
  if (!j.is_object()) {
    out.issues.push_back({"", "scenario must be a JSON object"});
    return out;
  }
  sc.source = j;
  rd.only(j, "", {"name", "system", "coarse_graining", "particle", "pointer", "grid", "sweep", "classop",
                  "oracle", "seed", "output"});
  sc.name = rd.text(j, "name", "", std::string("scenario"));
  sc.output = rd.text(j, "output", "", "out/" + sc.name);
  if (j.contains("seed")) {
    if (j["seed"].is_number_unsigned()) sc.seed = j["seed"].get<std::uint64_t>();
    else rd.fail("/seed", "must be a non-negative integer");
  }

  HistoriesProblem& pb = sc.problem;
  if (const auto* s = rd.object(j, "system", "", true)) {
    rd.only(*s, "/system", {"kind", "m", "M", "g", "omega", "T", "hbar"});
    const std::string kind = rd.text(*s, "kind", "/system");
    if (kind == "free") pb.params.kind = SystemKind::free;
    else if (kind == "oscillator") pb.params.kind = SystemKind::oscillator;
    else if (!kind.empty()) rd.fail("/system/kind", "must be \"free\" or \"oscillator\"");
    pb.params.m = rd.number(*s, "m", "/system");
    pb.params.M = rd.number(*s, "M", "/system");
    pb.params.g = rd.number(*s, "g", "/system");
    pb.params.T = rd.number(*s, "T", "/system");
    pb.params.hbar = rd.number(*s, "hbar", "/system");
    pb.params.omega = rd.number(*s, "omega", "/system",
                                pb.params.kind == SystemKind::free ? std::optional<double>(0.0) : std::nullopt);
    rd.check("/system", [&] { pb.params.validate(); });
  }
  if (const auto* c = rd.object(j, "coarse_graining", "", true)) {
    rd.only(*c, "/coarse_graining", {"delta", "xbar0", "alpha_min", "alpha_max"});
    pb.cg.delta = rd.number(*c, "delta", "/coarse_graining");
    pb.cg.xbar0 = rd.number(*c, "xbar0", "/coarse_graining", 0.0);
    const bool has_lo = c->contains("alpha_min"), has_hi = c->contains("alpha_max");
    if (has_lo != has_hi) rd.fail("/coarse_graining", "give both alpha_min and alpha_max, or neither");
    pb.auto_branches = !(has_lo && has_hi);
    if (!pb.auto_branches) {
      pb.cg.alpha_min = rd.integer(*c, "alpha_min", "/coarse_graining");
      pb.cg.alpha_max = rd.integer(*c, "alpha_max", "/coarse_graining");
    }
    rd.check("/coarse_graining", [&] { pb.cg.validate(); });
  }
  if (const auto* q = rd.object(j, "particle", "", true)) {
    rd.only(*q, "/particle", {"x0", "d", "p0"});
    pb.particle.center = rd.number(*q, "x0", "/particle");
    pb.particle.width = rd.number(*q, "d", "/particle");
    pb.particle.momentum = rd.number(*q, "p0", "/particle", 0.0);
    rd.check("/particle", [&] { pb.particle.validate(); });
  }
  if (const auto* q = rd.object(j, "pointer", "", true)) {
    const std::string kind = rd.text(*q, "kind", "/pointer", std::string("gaussian"));
    if (kind == "sharp") {
      rd.only(*q, "/pointer", {"kind", "X0"});
      pb.pointer = PointerState::sharp_at(rd.number(*q, "X0", "/pointer"));
    } else if (kind == "gaussian") {
      rd.only(*q, "/pointer", {"kind", "X0", "D"});
      pb.pointer = PointerState::gaussian(rd.number(*q, "X0", "/pointer"), rd.number(*q, "D", "/pointer"));
    } else {
      rd.fail("/pointer/kind", "must be \"gaussian\" or \"sharp\"");
    }
    rd.check("/pointer", [&] { pb.pointer.validate(); });
  }
  if (const auto* g = rd.object(j, "grid", "", false)) {
    rd.only(*g, "/grid", {"nx", "nX", "sigmas", "x_center", "X_center", "Lx", "LX"});
    pb.grid.nx = rd.integer(*g, "nx", "/grid", 96);
    pb.grid.nX = rd.integer(*g, "nX", "/grid", 96);
    pb.grid.sigmas = rd.number(*g, "sigmas", "/grid", 7.0);
    pb.grid.automatic = !(g->contains("Lx") || g->contains("LX"));
    if (!pb.grid.automatic) {
      GridSpec& m = pb.grid.manual;
      m.nx = pb.grid.nx;
      m.nX = pb.grid.nX;
      m.x_center = rd.number(*g, "x_center", "/grid", 0.0);
      m.X_center = rd.number(*g, "X_center", "/grid", 0.0);
      m.Lx = rd.number(*g, "Lx", "/grid");
      m.LX = rd.number(*g, "LX", "/grid");
    }
  }
  if (rd.issues.empty()) rd.check("/grid", [&] { pb.validate(); });

  if (const auto* s = rd.object(j, "sweep", "", false)) {
    rd.only(*s, "/sweep", {"axis", "factors"});
    SweepSpec sw;
    const std::string axis = rd.text(*s, "axis", "/sweep", std::string("hbar"));
    if (axis == "hbar") sw.axis = SweepAxis::hbar;
    else if (axis == "delta") sw.axis = SweepAxis::delta;
    else rd.fail("/sweep/axis", "must be \"hbar\" or \"delta\"");
    if (s->contains("factors")) {
      const auto& f = (*s)["factors"];
      sw.factors.clear();
      if (!f.is_array()) rd.fail("/sweep/factors", "must be an array of numbers");
      else
        for (const auto& v : f) {
          if (v.is_number()) sw.factors.push_back(v.get<double>());
          else rd.fail("/sweep/factors", "must be an array of numbers");
        }
    }
    sw.base = pb;
    if (rd.issues.empty()) rd.check("/sweep", [&] { sw.validate(); });
    sc.sweep = sw;
  }
  if (const auto* c = rd.object(j, "classop", "", false)) {
    rd.only(*c, "/classop", {"x_in", "x_out", "X_in", "X_out"});
    sc.classop.x_in = rd.axis(*c, "x_in", "/classop", sc.classop.x_in);
    sc.classop.x_out = rd.axis(*c, "x_out", "/classop", sc.classop.x_out);
    sc.classop.X_in = rd.axis(*c, "X_in", "/classop", sc.classop.X_in);
    sc.classop.X_out = rd.axis(*c, "X_out", "/classop", sc.classop.X_out);
  }
  if (const auto* o = rd.object(j, "oracle", "", false)) {
    rd.only(*o, "/oracle", {"samples", "lattice"});
    sc.oracle_samples = rd.integer(*o, "samples", "/oracle", 20);
    if (sc.oracle_samples < 1) rd.fail("/oracle/samples", "must be >= 1");
    if (const auto* l = rd.object(*o, "lattice", "/oracle", false)) {
      rd.only(*l, "/oracle/lattice", {"n_slices", "alpha", "endpoints"});
      LatticeCheck& lc = sc.lattice;
      lc.present = true;
      lc.n_slices = rd.integer(*l, "n_slices", "/oracle/lattice", 64);
      lc.alpha = rd.integer(*l, "alpha", "/oracle/lattice", 0);
      if (lc.n_slices < 2 || lc.n_slices > 64) rd.fail("/oracle/lattice/n_slices", "must be in [2, 64]");
      if (pb.params.kind != SystemKind::free) rd.fail("/oracle/lattice", "the lattice oracle is free-particle only");
      const auto* e = l->contains("endpoints") ? &(*l)["endpoints"] : nullptr;
      if (!e || !e->is_array() || e->size() != 4 || !std::all_of(e->begin(), e->end(), [](const auto& v) { return v.is_number(); }))
        rd.fail("/oracle/lattice/endpoints", "must be [x_in, x_out, X_in, X_out]");
      else
        lc.ep = {(*e)[0].get<double>(), (*e)[1].get<double>(), (*e)[2].get<double>(), (*e)[3].get<double>()};
    }
  }
  out.issues = std::move(rd.issues);
  return out;
}

inline ParseResult load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.issues.push_back({"", "cannot open " + path});
    return r;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    ParseResult r;
    r.issues.push_back({"", std::string("JSON parse error: ") + e.what()});
    return r;
  }
  return parse_scenario(j);
}

inline nlohmann::json issues_json(const std::vector<ValidationIssue>& issues) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& i : issues) arr.push_back({{"path", i.path}, {"message", i.message}});
  return {{"ok", issues.empty()}, {"errors", arr}};
}

}  // namespace decohist
