#include "leelab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "leelab/error.hpp"

namespace leelab {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  fail(ErrorCode::config_error, "config field " + where + ": " + what);
}

// Walks one JSON object, remembering which keys were read so that the rest
// can be rejected as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) config_fail(display(), "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) && !node_.at(key).is_null();
  }

  const json& at(const std::string& key) { return node_.at(key); }
  std::string field(const std::string& key) const { return path_ + "/" + key; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number()) config_fail(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) config_fail(field(key), "must be finite");
    return x;
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number_unsigned()) config_fail(field(key), "expected a non-negative integer");
    return v.get<std::size_t>();
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number_integer()) config_fail(field(key), "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) config_fail(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_string()) config_fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!seen_.count(key)) config_fail(field(key), "unknown key");
  }

 private:
  std::string display() const { return path_.empty() ? "/" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

GridSpec read_grid(ObjectReader& parent, const std::string& key, GridSpec fallback) {
  if (!parent.has(key)) return fallback;
  ObjectReader r(parent.at(key), parent.field(key));
  GridSpec g;
  g.lo = r.number("min", fallback.lo);
  g.hi = r.number("max", fallback.hi);
  g.count = r.count("count", fallback.count);
  const std::string spacing = r.string("spacing", fallback.log ? "log" : "linear");
  if (spacing != "log" && spacing != "linear")
    config_fail(r.field("spacing"), "expected \"log\" or \"linear\"");
  g.log = spacing == "log";
  r.finish();
  if (g.count == 0) config_fail(r.field("count"), "must be at least 1");
  if (g.count > 1 && !(g.lo < g.hi)) config_fail(r.field("max"), "must exceed min");
  if (g.log && !(g.lo > 0)) config_fail(r.field("min"), "log spacing needs min > 0");
  return g;
}

json grid_json(const GridSpec& g) {
  return {{"min", g.lo}, {"max", g.hi}, {"count", g.count}, {"spacing", g.log ? "log" : "linear"}};
}

// Re-raise a validation failure from a core type against the config field.
template <class F>
void revalidate(const std::string& where, F&& check) {
  try {
    check();
  } catch (const Error& e) {
    config_fail(where, e.what());
  }
}

}  // namespace

std::vector<double> GridSpec::points() const {
  if (count == 1) return {lo};
  return log ? logspace(lo, hi, count) : linspace(lo, hi, count);
}

bool OutputConfig::csv() const {
  for (const auto& f : formats)
    if (f == "csv") return true;
  return false;
}

void RunConfig::validate() const {
  revalidate("/manifold", [&] { manifold.validate(); });
  revalidate("/model", [&] { model.validate(); });
  if (!(truncation.lambda_cutoff >= 0))
    config_fail("/truncation/lambda_cutoff", "must be non-negative");
  if (truncation.mode_ceiling == 0) config_fail("/truncation/mode_ceiling", "must be positive");
  if (truncation.sector_ceiling == 0)
    config_fail("/truncation/sector_ceiling", "must be positive");
  if (scan.pair_count == 0) config_fail("/scan/pair_count", "must be positive");
  if (scan.e_grid && scan.e_grid->hi >= model.n * model.mass + model.mu_p)
    config_fail("/scan/E_grid/max", "must lie below the threshold n m + mu_p");
  for (const auto& f : output.formats)
    if (f != "json" && f != "csv") config_fail("/output/formats", "unknown format \"" + f + "\"");
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    char msg[64];
    std::snprintf(msg, sizeof msg, "config syntax error at line %zu, column %zu: ", line, column);
    fail(ErrorCode::config_error, msg + std::string(e.what()));
  }

  RunConfig c;
  ObjectReader root(doc, "");

  if (root.has("manifold")) {
    ObjectReader r(root.at("manifold"), "/manifold");
    const std::string kind = r.string("kind", "torus");
    double imp[2] = {0.0, 0.0};
    if (r.has("impurity")) {
      const auto& v = r.at("impurity");
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        config_fail(r.field("impurity"), "expected two numbers");
      imp[0] = v[0].get<double>();
      imp[1] = v[1].get<double>();
    }
    const double two_pi = 2.0 * 3.14159265358979323846;
    if (kind == "torus") {
      const double L1 = r.number("L1", two_pi), L2 = r.number("L2", two_pi);
      if (r.has("radius")) config_fail(r.field("radius"), "not used by a torus");
      revalidate("/manifold", [&] { c.manifold = ManifoldSpec::torus(L1, L2, imp[0], imp[1]); });
    } else if (kind == "sphere") {
      const double radius = r.number("radius", 1.0);
      if (r.has("L1")) config_fail(r.field("L1"), "not used by a sphere");
      if (r.has("L2")) config_fail(r.field("L2"), "not used by a sphere");
      revalidate("/manifold", [&] { c.manifold = ManifoldSpec::sphere(radius, imp[0], imp[1]); });
    } else {
      config_fail(r.field("kind"), "expected \"torus\" or \"sphere\"");
    }
    r.finish();
  }

  if (root.has("model")) {
    ObjectReader r(root.at("model"), "/model");
    c.model.mass = r.number("m", c.model.mass);
    c.model.mu_p = r.number("mu_p", c.model.mu_p);
    c.model.coupling = r.number("lambda", c.model.coupling);
    c.model.n = r.integer("n", c.model.n);
    r.finish();
  }

  if (root.has("truncation")) {
    ObjectReader r(root.at("truncation"), "/truncation");
    auto& t = c.truncation;
    t.lambda_cutoff = r.number("lambda_cutoff", t.lambda_cutoff);
    t.mode_ceiling = r.count("mode_ceiling", t.mode_ceiling);
    t.dense_ceiling = r.count("dense_ceiling", t.dense_ceiling);
    t.sector_ceiling = r.count("sector_ceiling", t.sector_ceiling);
    t.prune_uncoupled = r.boolean("prune_uncoupled", t.prune_uncoupled);
    r.finish();
  }

  if (root.has("scan")) {
    ObjectReader r(root.at("scan"), "/scan");
    auto& s = c.scan;
    if (r.has("E_grid")) s.e_grid = read_grid(r, "E_grid", {0.0, 0.0, 50, false});
    s.lambda_k = read_grid(r, "lambda_k", s.lambda_k);
    s.cutoff_sweep = read_grid(r, "cutoff_sweep", s.cutoff_sweep);
    s.heat_t = read_grid(r, "heat_t", s.heat_t);
    if (r.has("lightfront_E")) s.lightfront_e = read_grid(r, "lightfront_E", {0.0, 0.0, 10, false});
    s.pair_count = r.count("pair_count", s.pair_count);
    r.finish();
  }

  if (root.has("output")) {
    ObjectReader r(root.at("output"), "/output");
    c.output.directory = r.string("directory", "");
    if (r.has("formats")) {
      const auto& v = r.at("formats");
      if (!v.is_array()) config_fail(r.field("formats"), "expected an array of strings");
      c.output.formats.clear();
      for (const auto& f : v) {
        if (!f.is_string()) config_fail(r.field("formats"), "expected an array of strings");
        c.output.formats.push_back(f.get<std::string>());
      }
    }
    r.finish();
  }

  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::config_error, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json to_json(const RunConfig& c) {
  json j;
  const bool torus = c.manifold.kind == ManifoldKind::torus;
  j["manifold"] = {{"kind", torus ? "torus" : "sphere"},
                   {"impurity", {c.manifold.impurity[0], c.manifold.impurity[1]}}};
  if (torus) {
    j["manifold"]["L1"] = c.manifold.L1;
    j["manifold"]["L2"] = c.manifold.L2;
  } else {
    j["manifold"]["radius"] = c.manifold.radius;
  }
  j["model"] = {{"m", c.model.mass},
                {"mu_p", c.model.mu_p},
                {"lambda", c.model.coupling},
                {"n", c.model.n}};
  j["truncation"] = {{"lambda_cutoff", c.truncation.lambda_cutoff},
                     {"mode_ceiling", c.truncation.mode_ceiling},
                     {"dense_ceiling", c.truncation.dense_ceiling},
                     {"sector_ceiling", c.truncation.sector_ceiling},
                     {"prune_uncoupled", c.truncation.prune_uncoupled}};
  json scan = {{"lambda_k", grid_json(c.scan.lambda_k)},
               {"cutoff_sweep", grid_json(c.scan.cutoff_sweep)},
               {"heat_t", grid_json(c.scan.heat_t)},
               {"pair_count", c.scan.pair_count}};
  scan["E_grid"] = c.scan.e_grid ? grid_json(*c.scan.e_grid) : json(nullptr);
  scan["lightfront_E"] = c.scan.lightfront_e ? grid_json(*c.scan.lightfront_e) : json(nullptr);
  j["scan"] = scan;
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  return j;
}

std::string content_hash(const json& key) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : key.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace leelab
