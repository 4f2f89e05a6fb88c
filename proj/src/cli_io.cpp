#include "stickygraph/cli_io.hpp"

#include <algorithm>
#include <boost/crc.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "stickygraph/kernel.hpp"

namespace stickygraph {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---- strict reader ----

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "(root)" : path_, "must be an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  double number(const std::string& k, double def) {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_number()) throw ConfigError(key(k), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key(k), "must be finite");
    return d;
  }

  double number(const std::string& k) {
    if (!has(k)) throw ConfigError(key(k), "is required");
    return number(k, 0.0);
  }

  long long integer(const std::string& k, long long def) {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_number_integer()) throw ConfigError(key(k), "must be an integer");
    return v.get<long long>();
  }

  std::string string(const std::string& k, const std::string& def) {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_string()) throw ConfigError(key(k), "must be a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(key(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ShapeTerm parse_term(const json& j, const std::string& path) {
  Reader r(j, path);
  if (!r.has("kind")) throw ConfigError(r.key("kind"), "is required");
  const std::string kind = r.string("kind", "");
  ShapeTerm t;
  try {
    t.kind = shape_kind_from_string(kind);
  } catch (const ParameterError&) {
    throw ConfigError(r.key("kind"), "unknown shape '" + kind + "' (zero, linear, spline_bump, compact_bump)");
  }
  switch (t.kind) {
    case ShapeTerm::Kind::zero:
      break;
    case ShapeTerm::Kind::linear:
      t.a = r.number("slope", 0);
      t.b = r.number("offset", 0);
      break;
    case ShapeTerm::Kind::spline_bump:
      t.a = r.number("lo");
      t.b = r.number("hi");
      t.height = r.number("height", 1);
      if (!(t.b > t.a)) throw ConfigError(r.key("hi"), "must exceed lo");
      break;
    case ShapeTerm::Kind::compact_bump:
      t.a = r.number("center");
      t.b = r.number("radius");
      t.height = r.number("height", 1);
      if (!(t.b > 0)) throw ConfigError(r.key("radius"), "must be positive");
      break;
  }
  r.finish();
  return t;
}

Shape parse_shape(const json& j, const std::string& path) {
  std::vector<ShapeTerm> terms;
  if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) terms.push_back(parse_term(j[k], path + "[" + std::to_string(k) + "]"));
  } else {
    terms.push_back(parse_term(j, path));
  }
  return Shape(std::move(terms));
}

json shape_to_json(const Shape& s) {
  json arr = json::array();
  for (const auto& t : s.terms()) {
    json o{{"kind", to_string(t.kind)}};
    switch (t.kind) {
      case ShapeTerm::Kind::zero:
        break;
      case ShapeTerm::Kind::linear:
        o["slope"] = t.a;
        o["offset"] = t.b;
        break;
      case ShapeTerm::Kind::spline_bump:
        o["lo"] = t.a;
        o["hi"] = t.b;
        o["height"] = t.height;
        break;
      case ShapeTerm::Kind::compact_bump:
        o["center"] = t.a;
        o["radius"] = t.b;
        o["height"] = t.height;
        break;
    }
    arr.push_back(o);
  }
  return arr;
}

Side parse_side(Reader& r, const std::string& k, Side def) {
  const std::string s = r.string(k, def == Side::left ? "left" : "right");
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  throw ConfigError(r.key(k), "must be \"left\" or \"right\"");
}

std::string side_str(Side s) { return s == Side::left ? "left" : "right"; }

// ---- JSON text with 17 significant digits ----

void emit(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(std::size_t(indent * (depth + 1)), ' '), end_pad(std::size_t(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(k).dump() + ": ";
        emit(v, out, indent, depth + 1);
      }
      out += "\n" + end_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Numeric arrays on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      out += flat ? "[" : "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += flat ? ", " : ",\n";
        if (!flat) out += pad;
        emit(j[k], out, indent, depth + 1);
      }
      out += flat ? "]" : "\n" + end_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string json_text(const json& j) {
  std::string out;
  emit(j, out, 2, 0);
  out += "\n";
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError(p.string(), "cannot open for writing");
  f << text;
  if (!f) throw IoError(p.string(), "write failed");
}

std::string now_iso() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json stickiness_json(const StickinessReport& r) {
  json j{{"side", side_str(r.side)},
         {"interior_limit", r.interior_limit},
         {"exterior_value", r.exterior_value},
         {"jump", r.jump},
         {"error_estimate", r.error_estimate},
         {"threshold", r.threshold},
         {"verdict", r.verdict == StickinessReport::Verdict::sticky ? "sticky" : "continuous"}};
  if (r.clean_region) {
    const auto& c = *r.clean_region;
    j["clean_region"] = {{"x_lo", c.x_lo}, {"x_hi", c.x_hi}, {"y_lo", c.y_lo}, {"y_hi", c.y_hi},
                         {"fill", c.fill == Fill::full ? "full" : "empty"}};
  }
  return j;
}

json fit_json(const ExponentFit& f) {
  json pts = json::array();
  for (const auto& [x, y] : f.points) pts.push_back({x, y});
  return {{"exponent", f.exponent},        {"coefficient", f.coefficient}, {"r_squared", f.r_squared},
          {"window", {f.window.lo, f.window.hi}}, {"n_points", f.n_points},      {"points", pts}};
}

json snapshot_json(const ProfileSnapshot& s) { return {{"x", s.x}, {"u", s.u}}; }

PlotSeries series_of(const std::string& label, const ProfileSnapshot& s) { return {label, s.x, s.u}; }

void add_fit_series(Plot& p, const std::string& side, const ExponentFit& f) {
  PlotSeries pts{side + " data", {}, {}}, line{side + " fit", {}, {}};
  for (const auto& [x, y] : f.points) {
    pts.x.push_back(x);
    pts.y.push_back(y);
  }
  if (!f.points.empty()) {
    for (double x : {f.points.front().first, f.points.back().first}) {
      line.x.push_back(x);
      line.y.push_back(f.coefficient * std::pow(x, f.exponent));
    }
  }
  p.series.push_back(pts);
  p.series.push_back(line);
  if (!p.annotation.empty()) p.annotation += "; ";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s slope %.4f", side.c_str(), f.exponent);
  p.annotation += buf;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // Keep it a JSON float (1e+20 and 2.5 are fine; 3 becomes 3.0).
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

// ---- config ----

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("(document)", std::string("malformed JSON: ") + e.what());
  }
  Reader r(j, "");
  RunConfig rc;
  ExperimentConfig& c = rc.experiment;

  if (!r.has("s")) throw ConfigError("s", "is required");
  const double s = r.number("s");
  if (!(s > 0 && s < 1)) throw ConfigError("s", "must lie in the open interval (0,1)");
  if (r.has("alpha")) {
    const double alpha = r.number("alpha");
    if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha", "must lie in the open interval (0,1)");
    c.params = FracParams(s, alpha);
  } else {
    c.params = FracParams(s);
  }

  if (r.has("grid")) {
    Reader g(r.raw("grid"), "grid");
    const long long n = g.integer("n", c.grid.n);
    if (n < 17 || n > 4097) throw ConfigError("grid.n", "must lie in [17, 4097]");
    c.grid.n = Index(n);
    c.grid.ratio = g.number("ratio", c.grid.ratio);
    if (!(c.grid.ratio > 0 && c.grid.ratio <= 1)) throw ConfigError("grid.ratio", "must lie in (0, 1]");
    g.finish();
  }
  if (r.has("quad")) {
    Reader q(r.raw("quad"), "quad");
    c.quad.r_pair = q.number("r_pair", c.quad.r_pair);
    if (!(c.quad.r_pair > 0 && c.quad.r_pair < 1)) throw ConfigError("quad.r_pair", "must lie in (0, 1)");
    c.r_tail = q.number("R_tail", c.r_tail);
    if (!(c.r_tail > 2)) throw ConfigError("quad.R_tail", "must exceed 2");
    const long long nn = q.integer("n_near", c.quad.n_near), nm = q.integer("n_mid", c.quad.n_mid);
    if (nn < 2 || nn > 64) throw ConfigError("quad.n_near", "must lie in [2, 64]");
    if (nm < 2 || nm > 64) throw ConfigError("quad.n_mid", "must lie in [2, 64]");
    c.quad.n_near = int(nn);
    c.quad.n_mid = int(nm);
    q.finish();
  }
  if (r.has("exterior")) {
    Reader e(r.raw("exterior"), "exterior");
    if (e.has("v")) c.v = parse_shape(e.raw("v"), "exterior.v");
    if (e.has("phi")) c.phi = parse_shape(e.raw("phi"), "exterior.phi");
    c.d = e.number("d", c.d);
    if (!(c.d > 0)) throw ConfigError("exterior.d", "must be positive");
    e.finish();
  }
  if (r.has("t_values")) {
    const json& t = r.raw("t_values");
    if (!t.is_array() || t.empty()) throw ConfigError("t_values", "must be a non-empty array");
    c.t_values.clear();
    for (std::size_t k = 0; k < t.size(); ++k) {
      const std::string key = "t_values[" + std::to_string(k) + "]";
      if (!t[k].is_number()) throw ConfigError(key, "must be a number");
      const double v = t[k].get<double>();
      if (!(v >= 0) || !std::isfinite(v)) throw ConfigError(key, "must be nonnegative");
      if (k > 0 && !(v > c.t_values.back())) throw ConfigError("t_values", "ascending required");
      c.t_values.push_back(v);
    }
  }
  c.out_dir = r.string("out_dir", c.out_dir);
  if (c.out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
  const long long seed = r.integer("seed", 0);
  if (seed < 0) throw ConfigError("seed", "must be nonnegative");
  c.seed = std::uint64_t(seed);

  if (r.has("solve")) {
    Reader so(r.raw("solve"), "solve");
    c.solve.tol = so.number("tol", c.solve.tol);
    if (!(c.solve.tol > 0)) throw ConfigError("solve.tol", "must be positive");
    const long long mi = so.integer("max_iter", c.solve.max_iter);
    if (mi < 1) throw ConfigError("solve.max_iter", "must be at least 1");
    c.solve.max_iter = int(mi);
    so.finish();
  }
  if (r.has("fit")) {
    Reader f(r.raw("fit"), "fit");
    rc.window.lo = f.number("lo", rc.window.lo);
    rc.window.hi = f.number("hi", rc.window.hi);
    if (!(rc.window.lo > 0 && rc.window.hi > rc.window.lo)) throw ConfigError("fit.hi", "need 0 < lo < hi");
    const std::string ref = f.string("reference", "interior_trace");
    if (ref == "interior_trace") {
      rc.window.reference = FitWindow::Reference::interior_trace;
    } else if (ref == "exterior_datum") {
      rc.window.reference = FitWindow::Reference::exterior_datum;
    } else {
      throw ConfigError("fit.reference", "must be \"interior_trace\" or \"exterior_datum\"");
    }
    f.finish();
  }
  if (r.has("tuning")) {
    Reader t(r.raw("tuning"), "tuning");
    FlatWallTuning tu;
    if (!t.has("probe")) throw ConfigError("tuning.probe", "is required");
    tu.probe = parse_shape(t.raw("probe"), "tuning.probe");
    tu.side = parse_side(t, "side", Side::left);
    tu.a0 = t.number("a0", tu.a0);
    tu.a1 = t.number("a1", tu.a1);
    if (tu.a0 == tu.a1) throw ConfigError("tuning.a1", "must differ from a0");
    const long long mi = t.integer("max_iter", tu.max_iter);
    if (mi < 0) throw ConfigError("tuning.max_iter", "must be nonnegative");
    tu.max_iter = int(mi);
    tu.fit_lo = t.number("fit_lo", tu.fit_lo);
    tu.fit_hi = t.number("fit_hi", tu.fit_hi);
    if (!(tu.fit_lo > 0 && tu.fit_hi > tu.fit_lo && tu.fit_hi < 0.5)) {
      throw ConfigError("tuning.fit_hi", "need 0 < fit_lo < fit_hi < 0.5");
    }
    t.finish();
    rc.tuning = tu;
  }
  if (r.has("linearization")) {
    Reader l(r.raw("linearization"), "linearization");
    rc.linearization.slope = l.number("slope", 0);
    if (l.has("eps")) {
      const json& e = l.raw("eps");
      if (!e.is_array() || e.empty()) throw ConfigError("linearization.eps", "must be a non-empty array");
      rc.linearization.eps.clear();
      for (std::size_t k = 0; k < e.size(); ++k) {
        if (!e[k].is_number() || !(e[k].get<double>() > 0)) {
          throw ConfigError("linearization.eps[" + std::to_string(k) + "]", "must be a positive number");
        }
        const double v = e[k].get<double>();
        if (k > 0 && !(v < rc.linearization.eps.back())) throw ConfigError("linearization.eps", "descending required");
        rc.linearization.eps.push_back(v);
      }
    }
    l.finish();
  }
  if (r.has("barrier")) {
    Reader b(r.raw("barrier"), "barrier");
    BarrierParams& bp = rc.barrier;
    rc.barrier_given = true;
    bp.ell_bar = b.number("ell_bar", bp.ell_bar);
    bp.ell_tilde = b.number("ell_tilde", bp.ell_tilde);
    bp.lambda = b.number("lambda", bp.lambda);
    bp.L = b.number("L", bp.L);
    bp.a = b.number("a", bp.a);
    bp.b = b.number("b", bp.b);
    bp.c = b.number("c", bp.c);
    bp.eps = b.number("eps", bp.eps);
    bp.alpha = b.number("alpha", bp.alpha);
    bp.mu_probe = b.number("mu_probe", bp.lambda / 16);
    const long long pr = b.integer("probes", rc.barrier_probes);
    if (pr < 8 || pr > 64) throw ConfigError("barrier.probes", "must lie in [8, 64]");
    rc.barrier_probes = int(pr);
    b.finish();
    try {
      bp.validate(c.params);
    } catch (const ParameterError& e) {
      throw ConfigError("barrier", e.what());
    }
  }
  if (r.has("boundary_eq")) {
    Reader b(r.raw("boundary_eq"), "boundary_eq");
    rc.boundary_eq.side = parse_side(b, "side", Side::left);
    const long long k = b.integer("approach_nodes", rc.boundary_eq.approach_nodes);
    if (k < 2 || k > 64) throw ConfigError("boundary_eq.approach_nodes", "must lie in [2, 64]");
    rc.boundary_eq.approach_nodes = int(k);
    rc.boundary_eq.tol = b.number("tol", rc.boundary_eq.tol);
    if (!(rc.boundary_eq.tol > 0)) throw ConfigError("boundary_eq.tol", "must be positive");
    b.finish();
  }
  r.finish();

  try {
    c.validate();
  } catch (const ParameterError& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.find("phi") != std::string::npos ? "exterior.phi" : "exterior", msg);
  }
  return rc;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("(file)", "cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const RunConfig& rc) {
  const ExperimentConfig& c = rc.experiment;
  json j{{"s", c.params.s},
         {"alpha", c.params.alpha},
         {"grid", {{"n", c.grid.n}, {"ratio", c.grid.ratio}}},
         {"quad", {{"r_pair", c.quad.r_pair}, {"R_tail", c.r_tail}, {"n_near", c.quad.n_near}, {"n_mid", c.quad.n_mid}}},
         {"exterior", {{"v", shape_to_json(c.v)}, {"phi", shape_to_json(c.phi)}, {"d", c.d}}},
         {"t_values", c.t_values},
         {"out_dir", c.out_dir},
         {"seed", c.seed},
         {"solve", {{"tol", c.solve.tol}, {"max_iter", c.solve.max_iter}}},
         {"fit",
          {{"lo", rc.window.lo},
           {"hi", rc.window.hi},
           {"reference", rc.window.reference == FitWindow::Reference::interior_trace ? "interior_trace"
                                                                                      : "exterior_datum"}}},
         {"linearization", {{"slope", rc.linearization.slope}, {"eps", rc.linearization.eps}}},
         {"boundary_eq",
          {{"side", side_str(rc.boundary_eq.side)},
           {"approach_nodes", rc.boundary_eq.approach_nodes},
           {"tol", rc.boundary_eq.tol}}}};
  const BarrierParams& b = rc.barrier;
  if (rc.barrier_given) j["barrier"] = {{"ell_bar", b.ell_bar}, {"ell_tilde", b.ell_tilde}, {"lambda", b.lambda}, {"L", b.L},
                  {"a", b.a},             {"b", b.b},                 {"c", b.c},           {"eps", b.eps},
                  {"alpha", b.alpha},     {"mu_probe", b.mu_probe},   {"probes", rc.barrier_probes}};
  if (rc.tuning) {
    const auto& t = *rc.tuning;
    j["tuning"] = {{"probe", shape_to_json(t.probe)}, {"side", side_str(t.side)}, {"a0", t.a0},        {"a1", t.a1},
                   {"max_iter", t.max_iter},          {"fit_lo", t.fit_lo},       {"fit_hi", t.fit_hi}};
  }
  return j;
}

std::string serialize_config(const RunConfig& c) { return json_text(config_to_json(c)); }

// ---- report documents ----

ReportDoc to_doc(const GenericityReport& r) {
  ReportDoc d;
  d.name = "genericity";
  json rows = json::array();
  CsvTable t{"genericity", {"t", "jump_left", "jump_right", "residual_inf", "iterations"}, {}};
  Plot prof{"genericity_profile", "solutions for each t", false, false, {}, ""};
  for (const auto& row : r.rows) {
    json jr{{"t", row.t},
            {"residual_inf", row.residual_inf},
            {"iterations", row.iterations},
            {"converged", row.converged},
            {"profile", snapshot_json(row.profile)}};
    if (row.converged) {
      jr["left"] = stickiness_json(row.left);
      jr["right"] = stickiness_json(row.right);
    }
    rows.push_back(jr);
    t.rows.push_back({row.t, row.left.jump, row.right.jump, row.residual_inf, double(row.iterations)});
    char label[32];
    std::snprintf(label, sizeof label, "t=%g", row.t);
    prof.series.push_back(series_of(label, row.profile));
  }
  d.body = {{"experiment", "genericity"}, {"rows", rows}, {"failures", r.failures}, {"aborted", r.aborted},
            {"passed", r.passed()}};
  d.tables.push_back(t);
  if (!prof.series.empty()) d.plots.push_back(prof);
  return d;
}

ReportDoc to_doc(const AlternativeReport& r) {
  ReportDoc d;
  d.name = "alternative";
  auto side_json = [](const SideClassification& c) {
    json j{{"side", side_str(c.side)}, {"branch", to_string(c.branch)}, {"limit", stickiness_json(c.limit)},
           {"target", c.target}, {"note", c.note}};
    if (c.fit) j["fit"] = fit_json(*c.fit);
    return j;
  };
  json hist = json::array();
  CsvTable tune{"alternative_tuning", {"amplitude", "leading_coefficient"}, {}};
  for (const auto& [a, A] : r.tuning_history) {
    hist.push_back({a, A});
    tune.rows.push_back({a, A});
  }
  d.body = {{"experiment", "alternative"},
            {"s", r.s},
            {"leading_coefficient", r.leading_coefficient},
            {"tuning_history", hist},
            {"residual_inf", r.residual_inf},
            {"left", side_json(r.left)},
            {"right", side_json(r.right)},
            {"profile", snapshot_json(r.profile)}};
  d.body["amplitude"] = r.amplitude ? json(*r.amplitude) : json(nullptr);
  CsvTable sides{"alternative", {"side", "branch", "jump", "threshold", "exponent", "target"}, {}};
  Plot loglog{"alternative_loglog", "boundary exponent fit", true, true, {}, ""};
  Plot inverse{"alternative_inverse", "inverse-graph exponent fit", true, true, {}, ""};
  for (const auto* c : {&r.left, &r.right}) {
    sides.rows.push_back({c->side == Side::left ? 0.0 : 1.0, double(int(c->branch)), c->limit.jump, c->limit.threshold,
                          c->fit ? c->fit->exponent : std::nan(""), c->target});
    if (!c->fit) continue;
    add_fit_series(c->branch == SideClassification::Branch::sticky ? inverse : loglog, side_str(c->side), *c->fit);
  }
  d.tables.push_back(sides);
  if (!tune.rows.empty()) d.tables.push_back(tune);
  if (!r.profile.x.empty()) d.plots.push_back({"alternative_profile", "solution", false, false, {series_of("u", r.profile)}, ""});
  if (!loglog.series.empty()) d.plots.push_back(loglog);
  if (!inverse.series.empty()) d.plots.push_back(inverse);
  return d;
}

ReportDoc to_doc(const BarrierReport& r) {
  ReportDoc d;
  d.name = "barrier";
  json probes = json::array();
  CsvTable t{"barrier", {"x1", "column", "bruteforce"}, {}};
  PlotSeries s{"column formula", {}, {}};
  for (const auto& p : r.probes) {
    json jp{{"x1", p.x1}, {"column", p.column}};
    jp["bruteforce"] = p.bruteforce ? json(*p.bruteforce) : json(nullptr);
    probes.push_back(jp);
    t.rows.push_back({p.x1, p.column, p.bruteforce ? *p.bruteforce : std::nan("")});
    s.x.push_back(p.x1);
    s.y.push_back(p.column);
  }
  d.body = {{"experiment", "barrier"},        {"probes", probes},         {"max_value", r.max_value},
            {"crossover", r.crossover},       {"max_bruteforce_gap", r.max_bruteforce_gap},
            {"all_nonpositive", r.all_nonpositive}};
  d.tables.push_back(t);
  if (!s.x.empty()) d.plots.push_back({"barrier_probes", "curvature at the probes", true, false, {s}, ""});
  return d;
}

ReportDoc to_doc(const LinearizationReport& r) {
  ReportDoc d;
  d.name = "linearization";
  json rows = json::array();
  CsvTable t{"linearization", {"eps", "sup_distance", "residual_inf", "iterations"}, {}};
  PlotSeries s{"sup distance", {}, {}};
  for (const auto& row : r.rows) {
    rows.push_back({{"eps", row.eps},
                    {"sup_distance", row.sup_distance},
                    {"residual_inf", row.residual_inf},
                    {"iterations", row.iterations}});
    t.rows.push_back({row.eps, row.sup_distance, row.residual_inf, double(row.iterations)});
    s.x.push_back(row.eps);
    s.y.push_back(row.sup_distance);
  }
  d.body = {{"experiment", "linearization"}, {"slope", r.slope},          {"sigma", r.sigma},
            {"rows", rows},                  {"limit", snapshot_json(r.limit)}, {"decreasing", r.decreasing}};
  d.tables.push_back(t);
  if (!s.x.empty()) d.plots.push_back({"linearization", "sup distance against eps", true, true, {s}, ""});
  return d;
}

ReportDoc to_doc(const BoundaryEqReport& r) {
  ReportDoc d;
  d.name = "boundary_eq";
  json ap = json::array();
  CsvTable t{"boundary_eq", {"distance", "abs_curvature"}, {}};
  PlotSeries s{"|H|", {}, {}};
  for (const auto& [dist, h] : r.approach) {
    ap.push_back({dist, h});
    t.rows.push_back({dist, h});
    if (h > 0) {
      s.x.push_back(dist);
      s.y.push_back(h);
    }
  }
  d.body = {{"experiment", "boundary_eq"}, {"side", side_str(r.side)}, {"sticky", r.sticky},
            {"approach", ap},              {"limit_point_value", r.limit_point_value},
            {"max_abs", r.max_abs},        {"tol", r.tol},          {"passed", r.passed()}};
  d.tables.push_back(t);
  if (s.x.size() >= 2) d.plots.push_back({"boundary_eq", "|H| along the approach", true, true, {s}, ""});
  return d;
}

// ---- files ----

std::string csv_text(const CsvTable& t) {
  std::string out;
  for (std::size_t k = 0; k < t.header.size(); ++k) out += (k ? "," : "") + t.header[k];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ",";
      out += std::isfinite(row[k]) ? format_double(row[k]) : "nan";
    }
    out += "\n";
  }
  return out;
}

std::string file_checksum(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError(p.string(), "cannot read");
  boost::crc_32_type crc;
  char buf[65536];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) crc.process_bytes(buf, std::size_t(f.gcount()));
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", crc.checksum());
  return hex;
}

std::string render_svg(const Plot& p) {
  const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  auto tx = [&](double v, bool lg) { return lg ? std::log10(v) : v; };
  const bool lx = p.logx, ly = p.logy;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : p.series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if ((lx && !(s.x[k] > 0)) || (ly && !(s.y[k] > 0)) || !std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, tx(s.x[k], lx));
      x1 = std::max(x1, tx(s.x[k], lx));
      y0 = std::min(y0, tx(s.y[k], ly));
      y1 = std::max(y1, tx(s.y[k], ly));
    }
  }
  if (x0 > x1) x0 = 0, x1 = 1;
  if (y0 > y1) y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return ml + (tx(v, lx) - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (tx(v, ly) - y0) / (y1 - y0) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream o;
  o.precision(6);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << p.title << "</text>\n"
    << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double v, bool lg) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", lg ? std::pow(10.0, v) : v);
    return std::string(b);
  };
  o << "<g font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<text x=\"" << ml << "\" y=\"" << H - mb + 16 << "\">" << label(x0, lx) << "</text>\n"
    << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"end\">" << label(x1, lx) << "</text>\n"
    << "<text x=\"" << ml - 4 << "\" y=\"" << H - mb << "\" text-anchor=\"end\">" << label(y0, ly) << "</text>\n"
    << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\">" << label(y1, ly) << "</text>\n";
  if (!p.annotation.empty()) o << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 16 << "\">" << p.annotation << "</text>\n";
  o << "</g>\n";
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    const char* col = colors[k % 6];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((lx && !(s.x[i] > 0)) || (ly && !(s.y[i] > 0)) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    o << "\"/>\n<text x=\"" << W - mr - 6 << "\" y=\"" << mt + 16 + 14 * double(k)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << col << "\">" << s.label
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<fs::path> emit_plot_data(const ReportDoc& doc, const fs::path& out_dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), "cannot create: " + ec.message());
  for (const auto& p : doc.plots) {
    if (p.series.empty()) continue;
    const fs::path svg = out_dir / (p.name + ".svg");
    write_file(svg, render_svg(p));
    out.push_back(svg);
    CsvTable t{p.name + "_series", {"series", "x", "y"}, {}};
    for (std::size_t k = 0; k < p.series.size(); ++k) {
      for (std::size_t i = 0; i < p.series[k].x.size(); ++i) t.rows.push_back({double(k), p.series[k].x[i], p.series[k].y[i]});
    }
    const fs::path csv = out_dir / (t.name + ".csv");
    write_file(csv, csv_text(t));
    out.push_back(csv);
  }
  return out;
}

std::vector<fs::path> write_report(const ReportDoc& doc, const fs::path& out_dir, const WriteOptions& opts) {
  const fs::path manifest = out_dir / "manifest.json";
  if (fs::exists(manifest) && !opts.force) {
    throw IoError(out_dir.string(), "refusing to overwrite an existing report (pass --force)");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), "cannot create: " + ec.message());
  const std::string started = now_iso();

  std::vector<fs::path> files;
  const fs::path main = out_dir / (doc.name + ".json");
  write_file(main, json_text(doc.body));
  files.push_back(main);
  for (const auto& t : doc.tables) {
    const fs::path p = out_dir / (t.name + ".csv");
    write_file(p, csv_text(t));
    files.push_back(p);
  }
  const auto plots = emit_plot_data(doc, out_dir);
  files.insert(files.end(), plots.begin(), plots.end());

  json m{{"artifact", "stickygraph"}, {"version", kVersion}, {"report", doc.name},
         {"started", started},        {"finished", now_iso()}};
  m["config"] = opts.config_echo ? *opts.config_echo : json(nullptr);
  json list = json::array();
  for (const auto& f : files) {
    list.push_back({{"path", f.filename().string()}, {"crc32", file_checksum(f)}, {"bytes", fs::file_size(f)}});
  }
  m["files"] = list;
  m["notes"] = plots.empty() ? json::array({"no plottable series"}) : json::array();
  write_file(manifest, json_text(m));
  files.push_back(manifest);
  return files;
}

// ---- CLI ----

namespace {

struct Failure {};

bool selftest(std::ostream& os) {
  int failed = 0;
  auto check = [&](const std::string& name, auto&& fn) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      os << "  (" << e.what() << ")\n";
    }
    os << (ok ? "ok   " : "FAIL ") << name << "\n";
    failed += ok ? 0 : 1;
  };
  const FracParams p(0.5);
  check("F is odd and F(0) = 0", [&] {
    return cap_f(0.0, p) == 0.0 && std::abs(cap_f(0.7, p) + cap_f(-0.7, p)) < 1e-15;
  });
  check("halfplane has zero curvature", [&] {
    const Vec x = Vec::LinSpaced(41, -2, 2);
    const GraphProfile g({Piece::interpolating(x, 0.5 * x)}, ExteriorModel::linear(0.5, 0), ExteriorModel::linear(0.5, 0));
    return std::abs(nmc_graph(g, {0.3, 0.15}, p).value) < 1e-8;
  });
  check("flat data give the flat solution", [&] {
    SlabProblem pb;
    pb.interior_grid = slab_grid(17, 0.7);
    const auto r = solve(pb);
    return r.converged && r.u.cwiseAbs().maxCoeff() < 1e-9;
  });
  check("config round trip", [&] {
    const auto c = parse_config(R"({"s": 0.5, "t_values": [0, 0.5]})");
    return serialize_config(parse_config(serialize_config(c))) == serialize_config(c);
  });
  check("barrier gate rejects L < c / eps^(1/s)", [&] {
    BarrierParams bp;
    bp.L = 100;
    try {
      bp.validate(p);
    } catch (const ParameterError&) {
      return true;
    }
    return false;
  });
  return failed == 0;
}

fs::path output_dir(const std::string& flag, const RunConfig& rc) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("STICKYGRAPH_OUT"); env && *env) return env;
  return rc.experiment.out_dir;
}

bool band(const SideClassification& c, double width) {
  return c.fit && std::abs(c.fit->exponent - c.target) <= width;
}

GraphProfile data_profile(const ExperimentConfig& c, double t) {
  ExteriorData ext;
  ext.v = c.v;
  ext.phi = c.phi;
  ext.t = t;
  const double R = c.r_tail;
  const Vec x = Vec::LinSpaced(4001, -R, R);
  double slope = 0, offset = 0;
  for (const auto& term : c.v.terms()) {
    if (term.kind == ShapeTerm::Kind::linear) {
      slope += term.a;
      offset += term.b;
    }
  }
  return GraphProfile({Piece::function(x, [ext](double y) { return ext.value(y); },
                                       [ext](double y) { return ext.slope(y); })},
                      ExteriorModel::linear(slope, offset), ExteriorModel::linear(slope, offset));
}

}  // namespace

int main_dispatch(int argc, const char* const* argv) {
  CLI::App app{"stickygraph: nonlocal minimal graphs in a slab"};
  app.require_subcommand(1);
  std::string config_path, out_flag;
  bool force = false;
  double at_x = 0.5;
  std::optional<double> at_t;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("-c,--config", config_path, "JSON configuration file");
    if (needs_config) opt->required();
    sub->add_option("-o,--out", out_flag, "output directory (overrides STICKYGRAPH_OUT and out_dir)");
    sub->add_flag("-f,--force", force, "overwrite an existing report");
  };
  auto* s_solve = app.add_subcommand("solve", "solve the slab problem at the last t value");
  common(s_solve, true);
  auto* s_gen = app.add_subcommand("genericity", "t sweep: jumps at both walls");
  common(s_gen, true);
  auto* s_alt = app.add_subcommand("alternative", "classify both walls (optionally after flat-wall tuning)");
  common(s_alt, true);
  auto* s_bar = app.add_subcommand("barrier", "sign of the curvature of the corner barrier");
  common(s_bar, false);
  auto* s_lin = app.add_subcommand("linearize", "distance to the sigma-harmonic limit along eps");
  common(s_lin, true);
  auto* s_beq = app.add_subcommand("boundary-eq", "curvature along the approach to a wall");
  common(s_beq, true);
  auto* s_curv = app.add_subcommand("curvature", "curvature of the exterior data graph at a point");
  common(s_curv, true);
  s_curv->add_option("-x,--x", at_x, "abscissa");
  s_curv->add_option("-t,--t", at_t, "t value (default: last of t_values)");
  auto* s_self = app.add_subcommand("selftest", "quick consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (s_self->parsed()) return selftest(std::cout) ? 0 : 1;

  RunConfig rc;
  try {
    if (!config_path.empty()) {
      rc = load_config(config_path);
    } else {
      rc = parse_config(R"({"s": 0.5})");
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const fs::path out = output_dir(out_flag, rc);
  WriteOptions wo;
  wo.force = force;
  wo.config_echo = config_to_json(rc);
  const ExperimentConfig& c = rc.experiment;

  try {
    // Refuse early so that a long run is not wasted.
    if (!force && fs::exists(out / "manifest.json") && !s_curv->parsed()) {
      throw IoError(out.string(), "refusing to overwrite an existing report (pass --force)");
    }
    bool ok = true;
    if (s_solve->parsed()) {
      const double t = c.t_values.back();
      const auto prob = c.problem(t);
      const DiscreteSystem sys(prob);
      const auto s = solve(sys, sys.initial_guess(), c.solve);
      ReportDoc d;
      d.name = "solve";
      const auto snap = snapshot(sys, s.u);
      d.body = {{"experiment", "solve"},         {"t", t},
                {"converged", s.converged},      {"iterations", s.iterations},
                {"residual_inf", s.residual_inf}, {"history", s.history},
                {"steps", s.steps},              {"profile", snapshot_json(snap)}};
      if (s.converged) {
        d.body["left"] = stickiness_json(boundary_limit(s.solution, Side::left));
        d.body["right"] = stickiness_json(boundary_limit(s.solution, Side::right));
      }
      CsvTable tab{"solve", {"x", "u"}, {}};
      for (std::size_t k = 0; k < snap.x.size(); ++k) tab.rows.push_back({snap.x[k], snap.u[k]});
      d.tables.push_back(tab);
      d.plots.push_back({"solve_profile", "solution", false, false, {series_of("u", snap)}, ""});
      write_report(d, out, wo);
      ok = s.converged;
      std::cout << "solve: " << (s.converged ? "converged" : "NOT converged") << " in " << s.iterations
                << " iterations, residual " << s.residual_inf << "\n";
    } else if (s_gen->parsed()) {
      const auto r = run_genericity(c);
      write_report(to_doc(r), out, wo);
      for (const auto& row : r.rows) {
        std::cout << "t=" << row.t << " jump_left=" << row.left.jump << " jump_right=" << row.right.jump << "\n";
      }
      for (const auto& f : r.failures) std::cout << "FAIL " << f << "\n";
      ok = r.passed();
    } else if (s_alt->parsed()) {
      const auto r = run_alternative(c, rc.tuning, rc.window);
      write_report(to_doc(r), out, wo);
      for (const auto* sc : {&r.left, &r.right}) {
        const double width = sc->branch == SideClassification::Branch::sticky ? 0.2 : 0.15;
        const bool in = band(*sc, width);
        std::cout << side_str(sc->side) << ": " << to_string(sc->branch);
        if (sc->fit) std::cout << " exponent " << sc->fit->exponent << " (target " << sc->target << ")";
        std::cout << (in ? "" : " OUT OF BAND") << "\n";
        ok = ok && sc->branch != SideClassification::Branch::inconclusive && in;
      }
    } else if (s_bar->parsed()) {
      const auto r = run_barrier_check(c.params, rc.barrier, rc.barrier_probes, 2);
      write_report(to_doc(r), out, wo);
      std::cout << "barrier: max value " << r.max_value << ", crossover " << r.crossover << "\n";
      ok = r.all_nonpositive;
    } else if (s_lin->parsed()) {
      ExperimentConfig lc = c;
      const auto r = run_linearization(lc, rc.linearization.slope, rc.linearization.eps);
      write_report(to_doc(r), out, wo);
      for (const auto& row : r.rows) std::cout << "eps=" << row.eps << " sup_distance=" << row.sup_distance << "\n";
      ok = r.decreasing;
    } else if (s_beq->parsed()) {
      const auto r = run_boundary_equation(c, rc.boundary_eq);
      write_report(to_doc(r), out, wo);
      std::cout << "boundary equation: max |H| " << r.max_abs << " (tol " << r.tol << ")\n";
      ok = r.passed();
    } else if (s_curv->parsed()) {
      const double t = at_t ? *at_t : c.t_values.back();
      const auto g = data_profile(c, t);
      const Point pt{at_x, g.value(at_x)};
      const double col = nmc_graph(g, pt, c.params, c.quad).value;
      const Indicator in = [&g](double a, double b) { return b < g.value(a); };
      ExteriorData ext;
      ext.v = c.v;
      ext.phi = c.phi;
      ext.t = t;
      RadialPanels rad;
      rad.tangent_angle = std::atan(ext.slope(at_x));
      // Finer than the defaults: thin far bumps and large curvature at the point.
      rad.rho0 = 1e-4;
      rad.growth = 1.03;
      rad.theta_tol = 1e-8;
      const double bf = nmc_bruteforce2d(in, pt, c.params, rad);
      std::cout << json_text({{"x", at_x}, {"u", pt.x2}, {"t", t}, {"column", col}, {"bruteforce", bf}});
    }
    return ok ? 0 : 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace stickygraph
