#pragma once

// JSON-configured experiments behind the `chern run` command.

#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chern/chern.hpp"

namespace chern {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Scalar outcomes of one run, in insertion order; feeds sweep rows.
struct RunSummary {
  std::vector<std::pair<std::string, double>> metrics;

  void set(const std::string& key, double v) {
    for (auto& [k, x] : metrics) {
      if (k == key) {
        x = v;
        return;
      }
    }
    metrics.emplace_back(key, v);
  }
  std::optional<double> get(const std::string& key) const {
    for (const auto& [k, x] : metrics) {
      if (k == key) return x;
    }
    return std::nullopt;
  }
};

struct RunContext {
  fs::path config_dir;
  fs::path out;
  bool plot = false;
  int jobs = 1;
};

namespace detail {

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigurationError(std::string("field '") + key + "' has the wrong type");
  }
}

inline double positive(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigurationError(std::string("missing field '") + key + "'");
  const double v = field_or<double>(j, key, 0.0);
  if (!(v > 0.0)) throw ConfigurationError(std::string("field '") + key + "' must be positive");
  return v;
}

inline std::vector<double> number_list(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigurationError(std::string("'") + key + "' must be a list");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigurationError(std::string("'") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline DiscreteField load_field(const RunContext& ctx, const std::string& rel) {
  const fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : ctx.config_dir / rel;
  std::ifstream in(p);
  if (!in) throw ConfigurationError("cannot open field file '" + p.string() + "'");
  return read_field(in);
}

/// Radial polynomial Σ cₖ r^k.
inline SpatialFunction polynomial(std::vector<double> c) {
  return SpatialFunction::radial([c = std::move(c)](double r) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + *it;
    return acc;
  });
}

inline SpatialFunction exact_profile(const std::string& name) {
  if (name == "poincare") return SpatialFunction::radial(poincare_profile);
  if (name == "ball") return SpatialFunction::radial(ball_profile);
  throw ConfigurationError("unknown exact profile '" + name + "'");
}

}  // namespace detail

/// A scalar field spec: number | {"polynomial": [...]} | {"bump": {...}} |
/// {"plateau": {...}} | {"file": path} | "poincare" | "ball".
inline SpatialFunction parse_function(const json& j, const RunContext& ctx, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return detail::exact_profile(j.get<std::string>());
  if (!j.is_object() || j.size() != 1) throw ConfigurationError(std::string("bad spec for ") + what);
  const auto& [key, v] = *j.items().begin();
  if (key == "polynomial") {
    if (!v.is_array() || v.empty()) throw ConfigurationError("polynomial needs coefficients");
    return detail::polynomial(v.get<std::vector<double>>());
  }
  if (key == "bump") {
    return bump_curvature(detail::field_or(v, "base", -1.0), detail::field_or(v, "height", 0.0),
                          detail::positive(v, "radius"));
  }
  if (key == "plateau") return plateau_curvature(detail::field_or(v, "kappa", 0.0), detail::positive(v, "radius"));
  if (key == "file") return SpatialFunction(detail::load_field(ctx, v.get<std::string>()));
  throw ConfigurationError(std::string("unknown spec '") + key + "' for " + what);
}

inline Grid parse_grid(const json& cfg, int n) {
  if (!cfg.contains("grid") || !cfg["grid"].is_object()) throw ConfigurationError("missing 'grid' object");
  const json& g = cfg["grid"];
  const GridKind kind = grid_kind_from_string(detail::field_or<std::string>(g, "kind", "radial"));
  const double R = detail::positive(g, "R");
  if (kind == GridKind::tensor2d) {
    if (n != 1) throw ConfigurationError("tensor2d grids are limited to n = 1");
    return Grid::tensor2d(detail::positive(g, "h"), R);
  }
  if (g.contains("nodes")) return Grid::radial_with_nodes(n, detail::field_or<std::size_t>(g, "nodes", 0), R);
  return Grid::radial(n, detail::positive(g, "h"), R);
}

inline CurvatureProblem parse_problem(const json& cfg, const RunContext& ctx) {
  const int n = detail::field_or(cfg, "n", 1);
  const ModelKind model = model_kind_from_string(detail::field_or<std::string>(cfg, "model", "flat"));
  CurvatureProblem p;
  p.metric = model_metric(model, n);
  p.S = model_scalar(model, n);
  if (cfg.contains("S") && !(cfg["S"].is_string() && cfg["S"] == "model")) p.S = parse_function(cfg["S"], ctx, "S");
  p.K = cfg.contains("K") ? parse_function(cfg["K"], ctx, "K") : SpatialFunction(-1.0);
  if (cfg.contains("bounds")) {
    const json& b = cfg["bounds"];
    for (const char* key : {"a", "b", "C1", "C2"}) {
      if (!b.contains(key)) continue;
      const double v = detail::positive(b, key);
      if (std::string(key) == "a") p.bounds.a = v;
      if (std::string(key) == "b") p.bounds.b = v;
      if (std::string(key) == "C1") p.bounds.C1 = v;
      if (std::string(key) == "C2") p.bounds.C2 = v;
    }
    p.bounds.D = detail::field_or(b, "D", 0.0);
  }
  return p;
}

inline SolveOptions parse_solver(const json& cfg) {
  SolveOptions o;
  if (!cfg.contains("solver")) return o;
  const json& s = cfg["solver"];
  o.tol = detail::field_or(s, "tol", o.tol);
  o.max_iterations = detail::field_or(s, "max_iterations", o.max_iterations);
  o.linear_tol = detail::field_or(s, "linear_tol", o.linear_tol);
  o.method = linear_method_from_string(detail::field_or<std::string>(s, "method", "direct"));
  if (!(o.tol > 0 && o.linear_tol > 0) || o.max_iterations < 1) throw ConfigurationError("solver settings out of range");
  return o;
}

inline BoundaryPolicy parse_boundary(const json& cfg, const RunContext& ctx) {
  if (!cfg.contains("boundary")) return BoundaryPolicy::midpoint();
  const json& b = cfg["boundary"];
  if (b.is_string() && b == "midpoint") return BoundaryPolicy::midpoint();
  if (b.is_string() && b == "range_midpoint") return BoundaryPolicy::range_midpoint();
  if (b.is_string() && b == "exact") {
    if (!cfg.contains("exact")) throw ConfigurationError("boundary 'exact' needs an 'exact' profile");
    return BoundaryPolicy::prescribed(parse_function(cfg["exact"], ctx, "exact"));
  }
  return BoundaryPolicy::prescribed(parse_function(b, ctx, "boundary"));
}

namespace detail {

inline void write_file(const fs::path& p, const std::function<void(std::ostream&)>& fn) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  fn(os);
}

inline std::vector<ReportRow> level_rows(const IterationTrace& t) {
  std::vector<ReportRow> rows;
  for (const auto& l : t.levels) {
    rows.push_back({"level", -l.sandwich_violation, 0,
                    {{"level", l.level},
                     {"radius", l.radius},
                     {"iterations", l.iterations},
                     {"lambda", l.lambda},
                     {"residual", l.residual},
                     {"worst_scaled_increment", l.worst_scaled_increment},
                     {"probe_difference", l.probe_difference}}});
  }
  return rows;
}

inline void write_solution(const RunContext& ctx, const DiscreteField& u, const IterationTrace& trace,
                           const std::vector<ReportRow>& rows, const std::vector<NamedColumn>& extra = {},
                           std::vector<Series> plot = {}) {
  write_file(ctx.out / "result.csv", [&](std::ostream& os) { write_field(os, u, extra); });
  write_file(ctx.out / "trace.csv", [&](std::ostream& os) { write_trace(os, trace); });
  write_file(ctx.out / "report.csv", [&](std::ostream& os) { write_report(os, rows); });
  if (ctx.plot) {
    if (plot.empty()) plot.push_back(radial_series(u, "u"));
    write_file(ctx.out / "plot.svg", [&](std::ostream& os) { write_svg(os, "radial profile", plot); });
  }
}

// Barrier pair on one grid from the "barriers" block.
inline Barriers parse_barriers(const json& cfg, const CurvatureProblem& p, const Grid& g, const RunContext& ctx,
                               std::vector<ReportRow>& rows) {
  const json b = cfg.value("barriers", json::object());
  const double offset = field_or(b, "offset", 0.1);
  const json lower = b.value("lower", json("constant"));
  const json upper = b.value("upper", json("bump"));
  DiscreteField lo(g), up(g);
  if (lower.is_number()) {
    lo = DiscreteField(g, lower.get<double>());
  } else if (lower == "constant") {
    lo = DiscreteField(g, lower_constant(p, g).value);
  } else if (lower == "exact") {
    if (!cfg.contains("exact")) throw ConfigurationError("lower 'exact' needs an 'exact' profile");
    lo = parse_function(cfg["exact"], ctx, "exact").sample(g).map([offset](double v) { return v - offset; });
  } else {
    throw ConfigurationError("unknown lower barrier spec");
  }
  if (upper.is_number()) {
    up = DiscreteField(g, upper.get<double>());
  } else if (upper == "bump" || upper == "bump_sign_changing") {
    const UpperBump ub =
        construct_upper_bump(p, g, upper == "bump" ? UpperVariant::theorem : UpperVariant::sign_changing);
    rows.push_back(report_row(ub.report));
    up = ub.u_plus;
  } else if (upper == "boundary_max") {
    if (!cfg.contains("exact")) throw ConfigurationError("upper 'boundary_max' needs an 'exact' profile");
    const DiscreteField ex = parse_function(cfg["exact"], ctx, "exact").sample(g);
    double top = -HUGE_VAL;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.boundary(i)) top = std::max(top, ex[i]);
    }
    up = DiscreteField(g, top);
  } else {
    throw ConfigurationError("unknown upper barrier spec");
  }
  BarrierReport lr = verify_subsolution(lo, p);
  lr.params.emplace_back("min_value", min_value(lo));
  rows.insert(rows.begin(), report_row(lr));
  if (!lr.passed()) throw BarrierConstructionError("lower barrier fails the subsolution check");
  if (!(upper.is_string() && upper.get<std::string>().rfind("bump", 0) == 0)) {
    BarrierReport ur = verify_supersolution(up, p);
    rows.push_back(report_row(ur));
    if (!ur.passed()) throw BarrierConstructionError("upper barrier fails the supersolution check");
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.active(i) && lo[i] > up[i]) throw BarrierConstructionError("barriers are not ordered");
  }
  return {lo, up};
}

inline ExhaustionOptions parse_exhaustion(const json& cfg, const RunContext& ctx) {
  ExhaustionOptions o;
  o.probe_radius = positive(cfg, "probe_radius");
  o.probe_tol = field_or(cfg, "probe_tol", o.probe_tol);
  o.stop_when_stable = field_or(cfg, "stop_when_stable", false);
  o.boundary = parse_boundary(cfg, ctx);
  o.solve = parse_solver(cfg);
  return o;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments

inline RunSummary run_forward(const json& cfg, const RunContext& ctx) {
  const CurvatureProblem p = parse_problem(cfg, ctx);
  const Grid g = parse_grid(cfg, p.n());
  if (!cfg.contains("u")) throw ConfigurationError("forward needs a conformal factor 'u'");
  const DiscreteField u = parse_function(cfg["u"], ctx, "u").sample(g);
  const DiscreteField S = forward_chern_scalar(u, p);
  RunSummary sum;
  std::vector<NamedColumn> extra;
  if (cfg.contains("expected")) {
    const DiscreteField want = parse_function(cfg["expected"], ctx, "expected").sample(g);
    const DiscreteField err = combine(S, want, [](double a, double b) { return std::abs(a - b); });
    extra = {{"expected", want}, {"error", err}};
    sum.set("max_error", max_value(err, NodeSet::interior));
  }
  sum.set("max_value", max_value(S, NodeSet::interior));
  sum.set("min_value", min_value(S, NodeSet::interior));
  detail::write_solution(ctx, S, {}, {{"forward", 0.0, 0, sum.metrics}}, extra);
  return sum;
}

inline RunSummary run_solve(const json& cfg, const RunContext& ctx) {
  const CurvatureProblem p = parse_problem(cfg, ctx);
  const Grid g = parse_grid(cfg, p.n());
  std::vector<ReportRow> rows;
  const Barriers b = detail::parse_barriers(cfg, p, g, ctx, rows);
  const DomainSolution s = solve_on_domain(p, b, parse_boundary(cfg, ctx), parse_solver(cfg));
  RunSummary sum;
  std::vector<NamedColumn> extra;
  std::vector<Series> plot{radial_series(s.u, "u")};
  if (cfg.contains("exact")) {
    const DiscreteField ex = parse_function(cfg["exact"], ctx, "exact").sample(g);
    const DiscreteField err = combine(s.u, ex, [](double a, double e) { return std::abs(a - e); });
    extra = {{"exact", ex}, {"error", err}};
    plot.push_back(radial_series(ex, "exact"));
    sum.set("max_error", max_value(err));
  }
  sum.set("iterations", s.trace.levels.back().iterations);
  sum.set("lambda", s.lambda);
  sum.set("residual", s.residual);
  sum.set("u_at_0", s.u[g.center()]);
  auto lvl = detail::level_rows(s.trace);
  rows.insert(rows.end(), lvl.begin(), lvl.end());
  rows.push_back({"solve", -s.trace.worst_sandwich_violation(), 0, sum.metrics});
  detail::write_solution(ctx, s.u, s.trace, rows, extra, plot);
  return sum;
}

inline RunSummary run_barriers(const json& cfg, const RunContext& ctx) {
  const CurvatureProblem p = parse_problem(cfg, ctx);
  const Grid g = parse_grid(cfg, p.n());
  check_declared_bounds(p, g, detail::field_or(cfg, "require_nonpositive_K", true));
  std::vector<ReportRow> rows;
  const Barriers b = detail::parse_barriers(cfg, p, g, ctx, rows);
  RunSummary sum;
  sum.set("lower_min", min_value(b.lower));
  sum.set("upper_max", max_value(b.upper));
  sum.set("gap_min", min_value(b.upper - b.lower));
  detail::write_solution(ctx, b.upper, {}, rows, {{"lower", b.lower}},
                         {radial_series(b.upper, "upper"), radial_series(b.lower, "lower")});
  return sum;
}

inline RunSummary run_exhaust(const json& cfg, const RunContext& ctx) {
  CurvatureProblem p = parse_problem(cfg, ctx);
  const Grid fine = parse_grid(cfg, p.n());
  const DomainExhaustion ex(fine, detail::number_list(cfg, "radii"));
  ExhaustionOptions opt = detail::parse_exhaustion(cfg, ctx);
  const std::string variant = detail::field_or<std::string>(cfg, "variant", "standard");
  RunSummary sum;
  std::vector<ReportRow> rows;
  ExhaustionResult res;
  if (variant == "standard") {
    const Barriers b = detail::parse_barriers(cfg, p, fine, ctx, rows);
    res = exhaustion_solve(p, ex, fixed_barriers(b), opt);
  } else if (variant == "unbounded_scalar") {
    const json lb = cfg.value("local_bound", json::object());
    const UnboundedScalarRun run = unbounded_scalar_exhaustion(p, ex, opt, detail::positive(lb, "region"),
                                                               detail::positive(lb, "outer"));
    for (const auto& r : run.reports) rows.push_back(report_row(r));
    double sup = -HUGE_VAL;
    for (double s : run.region_sup) sup = std::max(sup, s);
    rows.push_back({"local_bound", run.local.bound - sup, run.local_bound_holds ? 0u : 1u,
                    {{"C_loc", run.local.C_loc}, {"bound", run.local.bound}, {"sup_region", sup},
                     {"epsilon", run.epsilon}, {"lower", run.lower}}});
    sum.set("epsilon", run.epsilon);
    sum.set("local_bound", run.local.bound);
    sum.set("sup_region", sup);
    res = run.result;
  } else if (variant == "sign_changing") {
    const json sc = cfg.value("sign_changing", json::object());
    const double rho = detail::positive(sc, "radius");
    const SignChangingRun run = sign_changing_exhaustion(
        p, [rho](double kappa) { return plateau_curvature(kappa, rho); }, detail::positive(sc, "factor"), ex, opt);
    rows.push_back(report_row(run.lower_report));
    rows.push_back(report_row(run.upper.report));
    sum.set("epsilon", run.epsilon);
    sum.set("kappa", run.kappa);
    if (!run.result) throw BarrierConstructionError(run.failure);
    res = *run.result;
  } else {
    throw ConfigurationError("unknown exhaustion variant '" + variant + "'");
  }
  auto lvl = detail::level_rows(res.trace);
  rows.insert(rows.end(), lvl.begin(), lvl.end());
  sum.set("levels", static_cast<double>(res.levels.size()));
  sum.set("last_probe_difference", res.probe_differences.back());
  sum.set("stabilized", res.stabilized ? 1.0 : 0.0);
  sum.set("u_at_0", res.solution[res.solution.grid().center()]);
  std::vector<Series> plot;
  for (std::size_t k = 0; k < res.levels.size(); ++k) {
    plot.push_back(radial_series(res.levels[k], "R=" + fmt(res.levels[k].grid().radius())));
  }
  detail::write_solution(ctx, res.solution, res.trace, rows, {}, plot);
  return sum;
}

inline RunSummary run_unique(const json& cfg, const RunContext& ctx) {
  const CurvatureProblem p = parse_problem(cfg, ctx);
  const Grid fine = parse_grid(cfg, p.n());
  const DomainExhaustion ex(fine, detail::number_list(cfg, "radii"));
  const ExhaustionOptions opt = detail::parse_exhaustion(cfg, ctx);
  const UniquenessResult r = widened_uniqueness(p, ex, opt);
  RunSummary sum;
  sum.set("sup_difference", r.sup_difference);
  IterationTrace trace = r.first.trace;
  trace.append(r.second.trace);
  const DiscreteField diff = combine(r.first.probe, r.second.probe, [](double a, double b) { return std::abs(a - b); });
  detail::write_solution(ctx, r.first.probe, trace, {{"uniqueness", -r.sup_difference, 0, sum.metrics}},
                         {{"second", r.second.probe}, {"difference", diff}});
  return sum;
}

inline RunSummary run_nonexist(const json& cfg, const RunContext& ctx) {
  const CurvatureProblem p = parse_problem(cfg, ctx);
  if (p.metric.name != "flat") throw ConfigurationError("nonexistence runs use the flat base");
  const double h = detail::positive(cfg.value("grid", json::object()), "h");
  SolveOptions opt = parse_solver(cfg);
  if (!cfg.contains("solver") || !cfg["solver"].contains("max_iterations")) opt.max_iterations = 20000;
  const DivergenceTrace t = nonexistence_experiment(p.n(), p.K, p.S, detail::number_list(cfg, "radii"), h, opt);
  RunSummary sum;
  sum.set("u_at_0_final", t.rows.back().u_at_0);
  if (t.rows.size() > 1) sum.set("decrement_final", t.rows.back().decrement);
  sum.set("nonexistence_consistent", t.verdict == "nonexistence-consistent" ? 1.0 : 0.0);
  std::vector<ReportRow> rows{{"divergence:" + t.verdict, 0.0, 0, sum.metrics}};
  const json cert = cfg.value("certificate", json::object());
  {
    CurvatureProblem cp = p;
    cp.bounds.D = detail::field_or(cert, "D", p.bounds.D);
    const CertificateReport c = contradiction_certificate(t.solutions.back(), cp, detail::field_or(cert, "a", 0.25));
    rows.push_back({"certificate", c.min_L, c.flagged ? 0u : 1u,
                    {{"a", c.a},
                     {"gradient_identity_error", c.gradient_identity_error},
                     {"laplacian_identity_error", c.laplacian_identity_error},
                     {"sup_K_outside", c.sup_K_outside}}});
  }
  auto lvl = detail::level_rows(t.trace);
  rows.insert(rows.end(), lvl.begin(), lvl.end());
  std::vector<Series> plot;
  for (const auto& u : t.solutions) plot.push_back(radial_series(u, "R=" + fmt(u.grid().radius())));
  detail::write_solution(ctx, t.solutions.back(), t.trace, rows, {}, plot);
  detail::write_file(ctx.out / "divergence.csv", [&](std::ostream& os) { write_divergence(os, t); });
  return sum;
}

inline RunSummary run_compare(const json& cfg, const RunContext& ctx) {
  const json c = cfg.value("comparison", json::object());
  ComparisonParams p;
  p.n = detail::field_or(cfg, "n", 1);
  p.C1 = detail::field_or(c, "C1", 1.0);
  p.C2 = detail::field_or(c, "C2", 1.0);
  p.alpha = detail::field_or(c, "alpha", 2.0);
  p.beta = detail::field_or(c, "beta", 1.0);
  const auto count = detail::field_or<std::size_t>(c, "count", 50);
  if (count < 1) throw ConfigurationError("comparison needs at least one radius");
  const std::vector<double> radii =
      log_spaced(detail::field_or(c, "r_min", 0.1), detail::field_or(c, "r_max", 100.0), count);
  const ComparisonReport r = comparison_check(p, radii);
  RunSummary sum;
  sum.set("passed", r.passed ? 1.0 : 0.0);
  sum.set("h_prime0", r.h_prime0);
  sum.set("worst_ode_defect", r.worst_ode_defect);
  sum.set("worst_phi_increment", r.worst_phi_increment);

  Series flat{"flat", {}, {}}, bound{"bound", {}, {}};
  detail::write_file(ctx.out / "result.csv", [&](std::ostream& os) {
    os << "r,flat,bound,dominated\n";
    for (const auto& row : r.rows) {
      os << fmt(row.r) << ',' << fmt(row.flat) << ',' << fmt(row.bound) << ',' << (row.dominated ? 1 : 0) << '\n';
      flat.x.push_back(std::log10(row.r));
      flat.y.push_back(std::log10(row.flat));
      bound.x.push_back(std::log10(row.r));
      bound.y.push_back(std::log10(row.bound));
    }
  });
  detail::write_file(ctx.out / "trace.csv", [&](std::ostream& os) { write_trace(os, {}); });
  detail::write_file(ctx.out / "report.csv", [&](std::ostream& os) {
    write_report(os, {{"comparison", r.worst_ode_defect, r.passed ? 0u : 1u, sum.metrics}});
  });
  if (ctx.plot) {
    detail::write_file(ctx.out / "plot.svg", [&](std::ostream& os) { write_svg(os, "log10 comparison", {flat, bound}); });
  }
  return sum;
}

inline RunSummary run_experiment(const json& cfg, const RunContext& ctx);

namespace detail {

inline json apply_axis(json child, const std::string& axis, double v) {
  if (axis == "h") {
    child["grid"]["h"] = v;
  } else if (axis == "R") {
    child["grid"]["R"] = v;
  } else if (axis == "n") {
    child["n"] = static_cast<int>(std::llround(v));
  } else if (axis == "a" || axis == "b") {
    child["bounds"][axis] = v;
    // nonexistence runs read b as the level of K ≡ −b²
    if (axis == "b" && child.value("experiment", "") == "nonexist") child["K"] = -v * v;
  } else {
    throw ConfigurationError("sweep axis must be one of h, R, a, b, n");
  }
  return child;
}

inline std::string axis_dir(const std::string& axis, std::size_t k) { return axis + "_" + std::to_string(k); }

}  // namespace detail

struct SweepRow {
  double value = 0.0;
  int exit_code = 0;
  std::string error;
  RunSummary summary;
};

/// Runs the child config once per axis value, up to `jobs` at a time; rows
/// come back in axis order.
inline RunSummary run_sweep(const json& cfg, const RunContext& ctx, int& exit_code) {
  const json sw = cfg.value("sweep", json::object());
  const std::string axis = detail::field_or<std::string>(sw, "axis", "");
  const std::vector<double> values = detail::number_list(sw, "values");
  if (values.empty()) throw ConfigurationError("sweep axis '" + axis + "' has no values");
  if (!sw.contains("child") || !sw["child"].is_object()) throw ConfigurationError("sweep needs a 'child' config");
  if (sw["child"].value("experiment", "") == "sweep") throw ConfigurationError("nested sweeps are not supported");
  (void)detail::apply_axis(sw["child"], axis, values.front());

  std::vector<SweepRow> rows(values.size());
  auto run_one = [&](std::size_t k) {
    SweepRow row;
    row.value = values[k];
    RunContext child = ctx;
    child.out = ctx.out / detail::axis_dir(axis, k);
    child.jobs = 1;
    try {
      fs::create_directories(child.out);
      row.summary = run_experiment(detail::apply_axis(sw["child"], axis, values[k]), child);
    } catch (const Error& e) {
      row.exit_code = e.exit_code();
      row.error = e.category() + std::string(": ") + e.what();
    } catch (const std::exception& e) {
      row.exit_code = 1;
      row.error = e.what();
    }
    return row;
  };
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, ctx.jobs));
  for (std::size_t start = 0; start < values.size(); start += jobs) {
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t k = start; k < std::min(values.size(), start + jobs); ++k) {
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_one, k));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) rows[start + k] = batch[k].get();
  }

  std::vector<std::string> keys;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.summary.metrics) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
  }
  RunSummary sum;
  int ok = 0;
  detail::write_file(ctx.out / "sweep.csv", [&](std::ostream& os) {
    os << axis << ",exit_code";
    for (const auto& k : keys) os << ',' << k;
    if (axis == "h") os << ",order";
    os << ",error\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const SweepRow& r = rows[i];
      ok += r.exit_code == 0 ? 1 : 0;
      os << fmt(r.value) << ',' << r.exit_code;
      for (const auto& k : keys) os << ',' << (r.summary.get(k) ? fmt(*r.summary.get(k)) : "");
      if (axis == "h") {
        os << ',';
        if (i > 0 && r.exit_code == 0 && rows[i - 1].exit_code == 0 && r.summary.get("max_error") &&
            rows[i - 1].summary.get("max_error")) {
          const double order = std::log2(*rows[i - 1].summary.get("max_error") / *r.summary.get("max_error")) /
                               std::log2(rows[i - 1].value / r.value);
          os << fmt(order);
          sum.set("order_" + std::to_string(i), order);
        }
      }
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << ',' << msg << '\n';
    }
  });
  sum.set("succeeded", ok);
  sum.set("failed", static_cast<double>(rows.size()) - ok);
  exit_code = ok > 0 ? 0 : rows.front().exit_code;
  return sum;
}

inline RunSummary run_experiment(const json& cfg, const RunContext& ctx) {
  if (!cfg.is_object()) throw ConfigurationError("config must be a JSON object");
  const std::string kind = detail::field_or<std::string>(cfg, "experiment", "");
  if (kind == "forward") return run_forward(cfg, ctx);
  if (kind == "solve") return run_solve(cfg, ctx);
  if (kind == "exhaust") return run_exhaust(cfg, ctx);
  if (kind == "barriers") return run_barriers(cfg, ctx);
  if (kind == "unique") return run_unique(cfg, ctx);
  if (kind == "nonexist") return run_nonexist(cfg, ctx);
  if (kind == "compare") return run_compare(cfg, ctx);
  if (kind == "sweep") {
    int code = 0;
    RunSummary s = run_sweep(cfg, ctx, code);
    if (code != 0) throw ConfigurationError("every sweep child failed");
    return s;
  }
  throw ConfigurationError("unknown experiment kind '" + kind + "'");
}

struct RunOutcome {
  int exit_code = 0;
  std::string message;  // "ERR:<code>:<detail>" on failure
  RunSummary summary;
};

/// Parses the config file and runs it; never throws.
inline RunOutcome run_config_file(const fs::path& path, RunContext ctx) {
  RunOutcome out;
  auto fail = [&](int code, const std::string& detail) {
    out.exit_code = code;
    std::string d = detail;
    std::replace(d.begin(), d.end(), '\n', ' ');
    out.message = "ERR:" + std::to_string(code) + ":" + d;
    return out;
  };
  std::ifstream in(path);
  if (!in) return fail(4, "config: cannot open '" + path.string() + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    return fail(4, std::string("parse: ") + e.what());
  }
  ctx.config_dir = path.parent_path();
  if (ctx.out.empty()) ctx.out = cfg.value("output", std::string("out"));
  try {
    fs::create_directories(ctx.out);
    out.summary = run_experiment(cfg, ctx);
  } catch (const Error& e) {
    return fail(e.exit_code(), std::string(e.category()) + ": " + e.what());
  } catch (const json::exception& e) {
    return fail(4, std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    return fail(1, std::string("internal: ") + e.what());
  }
  return out;
}

}  // namespace chern
