#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vicsek/besov.hpp"
#include "vicsek/energy.hpp"
#include "vicsek/energy_measure.hpp"
#include "vicsek/hausdorff.hpp"
#include "vicsek/io.hpp"
#include "vicsek/measure.hpp"
#include "vicsek/test_functions.hpp"
#include "vicsek/structural_checks.hpp"

namespace fs = std::filesystem;
using namespace vicsek;

namespace {

constexpr int kOk = 0, kFailed = 1, kUsage = 2;

struct ConfigError : InvalidArgument {
  ConfigError(const std::string& field, const std::string& what) : InvalidArgument("config field '" + field + "': " + what) {}
};

Extended parse_extended(const Json& j, const std::string& field) {
  const std::string s = j.get<std::string>();
  if (s == "finite") return Extended::finite;
  if (s == "+inf") return Extended::plus_infinity;
  if (s == "-inf") return Extended::minus_infinity;
  throw ConfigError(field, "expected \"finite\", \"+inf\" or \"-inf\"");
}

struct Config {
  Json raw;
  std::uint64_t hash = 0;
  RatioGenerator gen = RatioGenerator::constant(3);
  Exponent p;
  double beta_star = 1.0;
  std::size_t N = 4, m = 6;
  std::vector<double> betas, epsilons;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  bool exact = true;
  Tail tail = Tail::plateau;
  std::size_t bins = 20;
  int quadrature = 32;
  std::size_t cell_level = 2;
  std::size_t resistance_level = 1;
  std::size_t window_lo = 1, window_hi = 1;
  // hausdorff
  int a = 3, b = 5;
  double theta = 1.0;
  std::size_t prefix_length = 1000;
  Regime regime;
  fs::path out = "out";
};

template <class T>
T field(const Json& j, const std::string& name, const T& dflt) {
  if (!j.contains(name)) return dflt;
  try {
    return j.at(name).get<T>();
  } catch (const std::exception& e) {
    throw ConfigError(name, e.what());
  }
}

RatioGenerator parse_ratios(const Json& j) {
  try {
    if (j.is_array()) return RatioGenerator::explicit_list(j.get<std::vector<int>>());
    if (!j.is_object()) throw ConfigError("ratios", "expected a list or a generator object");
    const std::string g = j.at("generator").get<std::string>();
    if (g == "constant") return RatioGenerator::constant(j.at("l").get<int>());
    if (g == "alternating") return RatioGenerator::alternating(j.at("a").get<int>(), j.at("b").get<int>());
    if (g == "example_sequence") return RatioGenerator::example_sequence(j.at("a").get<int>(), j.at("b").get<int>());
    if (g == "blocks") return RatioGenerator::blocks(j.at("a").get<int>(), j.at("b").get<int>());
    throw ConfigError("ratios.generator", "unknown generator '" + g + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("ratios", e.what());
  }
}

Config parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  static const std::set<std::string> known = {"ratios", "p", "beta_star", "depth", "vertex_level", "betas", "epsilons",
                                              "seeds", "mode", "tail", "bins", "quadrature", "cell_level",
                                              "resistance_level", "window", "hausdorff", "output"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(it.key(), "unknown field");
  Config c;
  c.raw = j;
  if (j.contains("ratios")) c.gen = parse_ratios(j.at("ratios"));
  try {
    if (j.contains("p")) c.p = j.at("p").is_string() ? Exponent::parse(j.at("p").get<std::string>()) : Exponent::from_double(j.at("p").get<double>());
  } catch (const std::exception& e) {
    throw ConfigError("p", e.what());
  }
  if (c.p.num() <= c.p.den()) throw ConfigError("p", "must be > 1");
  if (j.contains("beta_star")) {
    const Json& b = j.at("beta_star");
    if (b.is_string()) {
      if (b.get<std::string>() != "self_similar") throw ConfigError("beta_star", "expected a number or \"self_similar\"");
      const auto alpha = c.gen.alphabet();
      if (alpha.size() != 1) throw ConfigError("beta_star", "self_similar preset needs a single ratio");
      c.beta_star = 1 + (alpha_of(*alpha.begin()) - 1) / c.p.value();
    } else {
      c.beta_star = field<double>(j, "beta_star", 1.0);
    }
  }
  if (!(c.beta_star > 0)) throw ConfigError("beta_star", "must be > 0");
  c.N = field<std::size_t>(j, "depth", 4);
  // without the p = 2 recursion the ball sums are quadratic in #V_m
  const bool quadratic = !(c.p.is_integer() && c.p.integer() == 2);
  c.m = field<std::size_t>(j, "vertex_level", c.N + (quadratic ? 1 : 2));
  if (c.m < c.N) throw ConfigError("vertex_level", "must be >= depth");
  c.betas = field<std::vector<double>>(j, "betas", {0.8 * c.beta_star, c.beta_star, 1.2 * c.beta_star});
  for (double b : c.betas)
    if (!(b >= 0)) throw ConfigError("betas", "entries must be >= 0");
  c.epsilons = field<std::vector<double>>(j, "epsilons", {0.2, 0.1, 0.05, 0.02, 0.01});
  for (double e : c.epsilons)
    if (!(e > 0 && e < c.beta_star)) throw ConfigError("epsilons", "entries must lie in (0, beta_star)");
  c.seeds = field<std::vector<std::uint64_t>>(j, "seeds", c.seeds);
  const std::string mode = field<std::string>(j, "mode", "rational");
  if (mode != "rational" && mode != "float") throw ConfigError("mode", "expected \"rational\" or \"float\"");
  c.exact = mode == "rational";
  const std::string tail = field<std::string>(j, "tail", "plateau");
  if (tail != "plateau" && tail != "none") throw ConfigError("tail", "expected \"plateau\" or \"none\"");
  c.tail = tail == "plateau" ? Tail::plateau : Tail::none;
  c.bins = field<std::size_t>(j, "bins", 20);
  if (c.bins == 0) throw ConfigError("bins", "must be positive");
  c.quadrature = field<int>(j, "quadrature", 32);
  if (c.quadrature < 1) throw ConfigError("quadrature", "must be positive");
  c.cell_level = field<std::size_t>(j, "cell_level", std::min<std::size_t>(c.N, 2));
  if (c.cell_level > c.N) throw ConfigError("cell_level", "must be <= depth");
  c.resistance_level = field<std::size_t>(j, "resistance_level", std::min<std::size_t>(c.N, 1));
  if (c.resistance_level > c.N) throw ConfigError("resistance_level", "must be <= depth");
  const auto win = field<std::vector<std::size_t>>(j, "window", {std::max<std::size_t>(c.N, 3) - 2, std::max<std::size_t>(c.N, 1)});
  if (win.size() != 2 || win[0] < 1 || win[0] > win[1] || (j.contains("window") && win[1] > c.N))
    throw ConfigError("window", "expected [lo, hi] with 1 <= lo <= hi <= depth");
  c.window_lo = win[0];
  c.window_hi = win[1];
  if (j.contains("hausdorff")) {
    const Json& hj = j.at("hausdorff");
    c.a = field<int>(hj, "a", c.a);
    c.b = field<int>(hj, "b", c.b);
    c.theta = field<double>(hj, "theta", c.theta);
    c.prefix_length = field<std::size_t>(hj, "prefix_length", c.prefix_length);
    if (hj.contains("liminf_eta")) c.regime.liminf_eta = parse_extended(hj.at("liminf_eta"), "hausdorff.liminf_eta");
    if (hj.contains("limsup_eta")) c.regime.limsup_eta = parse_extended(hj.at("limsup_eta"), "hausdorff.limsup_eta");
  }
  c.out = field<std::string>(j, "output", "out");
  Json hashed = j;
  hashed.erase("output");
  c.hash = config_hash(hashed);
  return c;
}

// Pair visits of the indexed ball sums at the coarsest scale.
constexpr std::uint64_t kPairBudget = std::uint64_t(1) << 31;

void check_ball_budget(const Hierarchy& h, const Exponent& p, std::size_t m) {
  if (p.is_integer() && p.integer() == 2) return;
  const std::uint64_t v = h.level(m).vertex_count();
  if (v > kPairBudget / v)
    throw ResourceError("ball energies at vertex_level " + std::to_string(m) + " visit about #V_m^2 = " +
                            std::to_string(v) + "^2 pairs for p != 2, budget is " + std::to_string(kPairBudget) +
                            "; lower vertex_level",
                        std::to_string(v) + "^2");
}

struct TestFunction {
  std::string name;
  AffineFunction u;
};

class Context {
 public:
  explicit Context(Config c) : cfg(std::move(c)) {}

  Config cfg;

  // Levels 0..n; the ratio sequence reaches m when it can, so that profiles
  // and tails see the same l_k.
  const Hierarchy& hierarchy(std::size_t n) {
    if (!h_ || h_->max_level() < n) {
      // explicit lists may stop short of m; commands that need m fail there
      const std::size_t depth = std::max(n, std::min(cfg.m, cfg.gen.length()));
      const RatioSequence rs(cfg.gen, depth, cfg.p, cfg.beta_star);
      h_ = std::make_unique<Hierarchy>(rs, n);
      fns_.clear();
    }
    return *h_;
  }

  // u* and one random affine function per seed; values drawn on V_{n0} with
  // n0 chosen by the same generator.
  const std::vector<TestFunction>& functions(std::size_t n) {
    const Hierarchy& h = hierarchy(n);
    if (!fns_.empty()) return fns_;
    auto mode = [&](AffineFunction u) { return cfg.exact ? u : AffineFunction::from_values(u.base_level(), u.values()); };
    fns_.push_back({"diag_ramp", mode(diag_ramp(h))});
    for (std::uint64_t s : cfg.seeds) {
      SplitMix64 rng(s);
      const std::size_t n0 = rng.below(std::min<std::size_t>(cfg.N, 2) + 1);
      fns_.push_back({"seed" + std::to_string(s), mode(random_affine(h, n0, rng))});
    }
    return fns_;
  }

  fs::path path(const std::string& name) const { return cfg.out / name; }

 private:
  std::unique_ptr<Hierarchy> h_;
  std::vector<TestFunction> fns_;
};

// ---------------------------------------------------------------- commands

int cmd_build(Context& ctx) {
  const Hierarchy& h = ctx.hierarchy(ctx.cfg.N);
  Json j;
  j["config_hash"] = hex64(ctx.cfg.hash);
  j["ratios"] = h.ratios().ratios();
  j["generator"] = h.ratios().generator().describe();
  j["levels"] = Json::array();
  for (std::size_t n = 0; n <= ctx.cfg.N; ++n) {
    const VicsekLevel& g = h.level(n);
    j["levels"].push_back({{"n", n}, {"scale", g.scale()}, {"cells", g.cell_count()}, {"vertices", g.vertex_count()},
                           {"edges", g.edge_count()}});
  }
  const VicsekLevel& g = h.level(ctx.cfg.N);
  if (g.vertex_count() <= 200000) {
    Json v = Json::array(), e = Json::array();
    for (VertexId x = 0; x < g.vertex_count(); ++x) v.push_back({g.x(x), g.y(x)});
    for (const Edge& ed : g.edges()) e.push_back({ed.tail, ed.head});
    j["coordinates"] = "scaled: sqrt(2) L_N times the point";
    j["vertices"] = std::move(v);
    j["edges"] = std::move(e);
  }
  write_json(ctx.path("build.json"), j);
  return kOk;
}

int cmd_measure(Context& ctx) {
  const Hierarchy& h = ctx.hierarchy(ctx.cfg.N);
  const RatioSequence& rs = h.ratios();
  {
    CsvWriter w(ctx.path("measure_scales.csv"), {"n", "l_n", "rho", "psi", "phi", "phi_exact"}, ctx.cfg.hash);
    for (const ScaleValues& s : scale_table(rs, ctx.cfg.N))
      w.row({std::to_string(s.n), std::to_string(rs.ratio(s.n)), to_string(s.rho), to_string(s.psi), fmt(s.phi),
             s.phi_exact ? to_string(*s.phi_exact) : ""});
  }
  const ScalingLaw law = scaling_law(rs.alphabet().empty() ? std::set<int>{1} : rs.alphabet());
  CsvWriter w(ctx.path("measure_doubling.csv"),
              {"center", "n", "radius", "depth", "lower", "upper", "psi", "lower_over_psi", "upper_over_psi"}, ctx.cfg.hash);
  const std::size_t depth = rs.depth();
  for (int corner : {0, 1}) {
    const LatticePoint c{kCorner[corner][0], kCorner[corner][1], 0};
    for (std::size_t n = 0; n <= ctx.cfg.N; ++n) {
      const std::size_t d = std::min(depth, n + 2);
      const Rational r = Rational(2) / rs.scale(n);
      const BallBounds b = mu_ball_bounds(rs, c, r, d);
      const Rational psi = Rational(1) / rs.word_count(n);
      w.row({"q" + std::to_string(corner), std::to_string(n), to_string(r), std::to_string(d), to_string(b.lower),
             to_string(b.upper), to_string(psi), fmt(to_double(b.lower / psi)), fmt(to_double(b.upper / psi))});
    }
  }
  write_json(ctx.path("measure_scaling.json"), Json{{"config_hash", hex64(ctx.cfg.hash)},
                                                    {"c1", fmt(law.c1)},
                                                    {"c2", fmt(law.c2)},
                                                    {"inf_alpha", fmt(law.inf_alpha)},
                                                    {"sup_alpha", fmt(law.sup_alpha)}});
  return kOk;
}

int cmd_hausdorff(Context& ctx) {
  const Config& c = ctx.cfg;
  const std::vector<int> prefix = c.gen.take(c.prefix_length);
  const HausdorffDiagnostics d = hausdorff_report(c.a, c.b, prefix, c.theta, c.regime);
  CsvWriter w(ctx.path("hausdorff.csv"), {"n", "count_a", "count_b", "theta_n", "eta_n", "log_xi_n"}, c.hash);
  for (std::size_t i = 0; i < prefix.size(); ++i)
    w.row({std::to_string(i + 1), std::to_string(d.count_a[i]), std::to_string(d.count_b[i]), fmt(d.theta_n[i]),
           fmt(d.eta_n[i]), fmt(d.log_xi_n[i])});
  write_json(ctx.path("hausdorff.json"), Json{{"config_hash", hex64(c.hash)},
                                              {"a", d.a},
                                              {"b", d.b},
                                              {"theta", fmt(d.theta)},
                                              {"alpha", fmt(d.alpha)},
                                              {"f_prime", fmt(d.f_prime)},
                                              {"hausdorff_measure", to_string(d.measure)},
                                              {"ahlfors_regular", d.ahlfors_regular},
                                              {"non_self_similarity_applicable", d.non_self_similarity_applicable},
                                              {"non_self_similar_1", d.non_self_similar_1},
                                              {"non_self_similar_2", d.non_self_similar_2},
                                              {"note", d.note}});
  return kOk;
}

int cmd_energy(Context& ctx) {
  const Hierarchy& h = ctx.hierarchy(ctx.cfg.N);
  const auto& fns = ctx.functions(ctx.cfg.N);
  Json j;
  j["config_hash"] = hex64(ctx.cfg.hash);
  j["p"] = ctx.cfg.p.str();
  j["functions"] = Json::array();
  bool ok = true;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const EnergyReport r = energy_limit(h, fns[i].u, ctx.cfg.p, ctx.cfg.N);
    const StructuralReport t = structural_checks(h, fns[i].u, fns[(i + 1) % fns.size()].u, ctx.cfg.p, ctx.cfg.N);
    ok = ok && r.monotone && t.all_ok();
    j["functions"].push_back({{"name", fns[i].name},
                              {"base_level", fns[i].u.base_level()},
                              {"report", to_json(r)},
                              {"structural", to_json(t)},
                              {"structural_partner", fns[(i + 1) % fns.size()].name}});
  }
  write_json(ctx.path("energy.json"), j);
  return ok ? kOk : kFailed;
}

int cmd_energy_measure(Context& ctx) {
  const Hierarchy& h = ctx.hierarchy(ctx.cfg.N);
  const auto& fns = ctx.functions(ctx.cfg.N);
  const Exponent& p = ctx.cfg.p;
  Json j;
  j["config_hash"] = hex64(ctx.cfg.hash);
  j["cell_level"] = ctx.cfg.cell_level;
  j["functions"] = Json::array();
  bool ok = true;
  for (const auto& f : fns) {
    const CellMeasure g = gamma_cells(h, f.u, p, ctx.cfg.cell_level);
    const CellMeasure m = word_energy_measure(h, f.u, p, ctx.cfg.cell_level);
    write_cell_measure(ctx.path("gamma_" + f.name + ".csv"), g, h.ratios(), ctx.cfg.hash);
    write_cell_measure(ctx.path("word_measure_" + f.name + ".csv"), m, h.ratios(), ctx.cfg.hash);
    const CoincidenceReport co = coincidence_check(h, f.u, p, ctx.cfg.cell_level);
    const ChainRuleReport cr = chain_rule_check(h, f.u, [](double t) { return t * t; }, [](double t) { return 2 * t; }, p,
                                                ctx.cfg.N, ctx.cfg.quadrature);
    Json fj{{"name", f.name},
            {"gamma_total", fmt(g.total)},
            {"coincidence_max_relative", fmt(co.max_relative)},
            {"coincidence_exact", co.exact && co.identical},
            {"chain_rule_square", {{"discrete", fmt(cr.discrete_total)}, {"quadrature", fmt(cr.quadrature_total)}, {"deviation", fmt(cr.total_deviation)}}}};
    if (g.total_exact) fj["gamma_total_exact"] = to_string(*g.total_exact);
    ok = ok && co.max_relative <= 1e-12 && (!co.exact || co.identical);
    if (g.total > 0) {
      const PushforwardHistogram hist = pushforward_profile(h, f.u, p, ctx.cfg.bins);
      write_histogram(ctx.path("pushforward_" + f.name + ".csv"), hist, ctx.cfg.hash);
      fj["histogram_total"] = fmt(hist.total);
      fj["point_masses"] = hist.point_masses;
      ok = ok && hist.point_masses == 0;
    }
    j["functions"].push_back(fj);
  }
  write_json(ctx.path("energy_measure.json"), j);
  return ok ? kOk : kFailed;
}

int cmd_besov(Context& ctx) {
  const Config& c = ctx.cfg;
  const Hierarchy& h = ctx.hierarchy(c.m);
  check_ball_budget(h, c.p, c.m);
  const auto& fns = ctx.functions(c.m);
  CsvWriter prof(ctx.path("besov_profiles.csv"), {"function", "beta", "n", "ball_energy", "phi_hat", "energy_beta"}, c.hash);
  CsvWriter band(ctx.path("besov_bands.csv"),
                 {"function", "beta", "ball_over_energy_lo", "ball_over_energy_hi", "energy_over_ball_lo",
                  "energy_over_ball_hi", "seminorm_q_p", "seminorm_q_inf"},
                 c.hash);
  for (const auto& f : fns) {
    const BallProfile bp = ball_profile(h, f.u, c.p, c.m, c.N);
    const std::vector<double> E = energy_limit(h, f.u, c.p, c.N).energies;
    for (double beta : c.betas) {
      const BesovProfile pr = phi_profile(h, bp, E, c.p, beta);
      for (std::size_t n = 0; n <= c.N; ++n)
        prof.row({f.name, fmt(beta), std::to_string(n), fmt(pr.ball[n]), fmt(pr.phi_hat[n]), fmt(pr.energy[n])});
      const EquivalenceBand b = equivalence_band(pr);
      band.row({f.name, fmt(beta), fmt(b.ball_over_energy_lo), fmt(b.ball_over_energy_hi), fmt(b.energy_over_ball_lo),
                fmt(b.energy_over_ball_hi), fmt(besov_seminorm(h, pr, c.p.value())), fmt(besov_seminorm(h, pr, INFINITY))});
    }
  }
  return kOk;
}

int cmd_bbm(Context& ctx) {
  const Config& c = ctx.cfg;
  const Hierarchy& h = ctx.hierarchy(c.N);
  const auto& fns = ctx.functions(c.N);
  CsvWriter w(ctx.path("bbm.csv"),
              {"function", "epsilon", "beta", "value", "finite_lo", "finite_hi", "limit_lo", "limit_hi", "inside"}, c.hash);
  bool ok = true;
  for (const auto& f : fns)
    for (const BbmRow& r : bbm_curve(h, f.u, c.p, c.epsilons, c.N, c.tail)) {
      w.row({f.name, fmt(r.epsilon), fmt(r.beta), fmt(r.value), fmt(r.finite_lo), fmt(r.finite_hi), fmt(r.limit_lo),
             fmt(r.limit_hi), r.inside ? "1" : "0"});
      ok = ok && r.inside;
    }
  return ok ? kOk : kFailed;
}

int cmd_resistance(Context& ctx) {
  const Config& c = ctx.cfg;
  const Hierarchy& h = ctx.hierarchy(c.resistance_level);
  const VicsekLevel& g = h.level(c.resistance_level);
  CsvWriter w(ctx.path("resistance.csv"), {"a", "b", "geodesic", "formula", "oracle", "relative_error"}, c.hash);
  bool ok = true;
  const bool oracle = c.p.value() <= 8;
  for (VertexId a = 0; a < g.vertex_count(); ++a)
    for (VertexId b = a + 1; b < g.vertex_count(); ++b) {
      const double R = resistance(g, a, b, c.p);
      std::string o = "", err = "";
      if (oracle) {
        const double v = resistance_oracle(g, a, b, c.p);
        o = fmt(v);
        err = fmt(std::fabs(v - R) / R);
        ok = ok && std::fabs(v - R) <= 1e-6 * R;
      }
      w.row({std::to_string(a), std::to_string(b), to_string(geodesic_distance(g, a, b)), fmt(R), o, err});
    }
  return ok ? kOk : kFailed;
}

// ---------------------------------------------------------------- selftest

class Suite {
 public:
  void check(const std::string& name, bool ok, const std::string& detail = "") {
    rows_.push_back({name, ok, detail});
    failed_ = failed_ || !ok;
  }
  bool failed() const { return failed_; }
  void write(const Context& ctx) const {
    CsvWriter w(ctx.path("selftest.csv"), {"check", "status", "detail"}, ctx.cfg.hash);
    for (const auto& r : rows_) w.row({r.name, r.ok ? "pass" : "fail", r.detail});
  }
  void print(std::ostream& os) const {
    for (const auto& r : rows_) os << (r.ok ? "pass " : "FAIL ") << r.name << (r.detail.empty() ? "" : "  " + r.detail) << "\n";
  }

 private:
  struct Row {
    std::string name;
    bool ok;
    std::string detail;
  };
  std::vector<Row> rows_;
  bool failed_ = false;
};

int cmd_selftest(Context& ctx) {
  const Config& c = ctx.cfg;
  const Hierarchy& h = ctx.hierarchy(c.m);
  check_ball_budget(h, c.p, c.m);
  const RatioSequence& rs = h.ratios();
  const auto& fns = ctx.functions(c.m);
  const Exponent& p = c.p;
  Suite s;

  for (std::size_t n = 0; n <= c.N; ++n) {
    const VicsekLevel& g = h.level(n);
    const auto W = rs.word_count(n).convert_to<std::uint64_t>();
    bool ok = g.vertex_count() == 4 * W + 1 && g.edge_count() == 4 * W;
    for (const Edge& e : g.edges()) {
      const std::int64_t dx = g.x(e.head) - g.x(e.tail), dy = g.y(e.head) - g.y(e.tail);
      ok = ok && dx * dx + dy * dy == 2;
    }
    std::size_t reached = 0;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      ok = ok && g.multiplicity(v) <= 2;
      reached += v == g.origin() || g.depth(v) > 0;
    }
    s.check("geometry.level" + std::to_string(n), ok && reached == g.vertex_count());
  }

  {
    bool ok = true;
    for (std::size_t n = 0; n < c.N; ++n)
      ok = ok && Rational(2 * rs.ratio(n + 1) - 1) / rs.word_count(n + 1) == Rational(1) / rs.word_count(n);
    s.check("measure.refinement", ok);
  }

  for (const auto& f : fns) {
    const EnergyReport r = energy_limit(h, f.u, p, c.N);
    s.check("energy.monotone." + f.name, r.monotone);
    s.check("energy.plateau." + f.name, r.plateau <= f.u.base_level(), "plateau from n=" + std::to_string(r.plateau));
    bool grad = true;
    for (std::size_t n = f.u.base_level(); n <= c.N; ++n) {
      const EnergyValue a = discrete_energy(h, f.u, p, n), b = energy_of_gradient(gradient_field(h, f.u, n), p);
      grad = grad && (a.exact && b.exact ? *a.exact == *b.exact : std::fabs(a.value - b.value) <= 1e-12 * std::max(a.value, 1e-300));
    }
    s.check("energy.gradient_identity." + f.name, grad);
  }
  {
    const AffineFunction u = diag_ramp(h);
    const EnergyReport r = energy_limit(h, u, p, c.N);
    const double want = std::pow(2.0, 1 - p.value());
    bool ok = true;
    for (std::size_t n = 0; n <= c.N; ++n)
      ok = ok && (r.exact ? (*r.exact)[n] == Rational(1) / ipow(BigInt(2), static_cast<unsigned>(p.integer() - 1))
                          : std::fabs(r.energies[n] - want) <= 1e-12 * want);
    s.check("energy.diag_ramp_golden", ok, fmt(r.limit));
  }

  {
    const VicsekLevel& g = h.level(c.resistance_level);
    double worst = 0;
    if (p.value() <= 8)
      for (VertexId a = 0; a < g.vertex_count(); ++a)
        for (VertexId b = a + 1; b < g.vertex_count(); ++b) {
          const double R = resistance(g, a, b, p);
          worst = std::max(worst, std::fabs(resistance_oracle(g, a, b, p) - R) / R);
        }
    s.check("resistance.oracle", worst <= 1e-6, "max relative error " + fmt(worst));
  }

  for (const auto& f : fns) {
    const EnergyReport r = energy_limit(h, f.u, p, c.N);
    const std::size_t depth = std::min<std::size_t>(3, c.N);
    const CoincidenceReport co = coincidence_check(h, f.u, p, depth);
    s.check("energy_measure.coincidence." + f.name, co.exact ? co.identical : co.max_relative <= 1e-12, fmt(co.max_relative));
    bool ok = true;
    std::optional<CellMeasure> prev;
    for (std::size_t m = 0; m <= depth; ++m) {
      const CellMeasure cm = gamma_cells(h, f.u, p, m);
      ok = ok && (cm.total_exact && r.limit_exact ? *cm.total_exact == *r.limit_exact
                                                  : std::fabs(cm.total - r.limit) <= 1e-12 * std::max(r.limit, 1e-300));
      if (prev) {
        const std::uint64_t k = h.level(m).below(m - 1);
        for (std::size_t w = 0; w < prev->mass.size(); ++w) {
          if (cm.exact) {
            Rational t = 0;
            for (std::uint64_t i = 0; i < k; ++i) t += (*cm.exact)[w * k + i];
            ok = ok && t == (*prev->exact)[w];
          } else {
            double t = 0;
            for (std::uint64_t i = 0; i < k; ++i) t += cm.mass[w * k + i];
            ok = ok && std::fabs(t - prev->mass[w]) <= 1e-12 * std::max(cm.total, 1e-300);
          }
        }
      }
      prev = cm;
    }
    s.check("energy_measure.totals_and_refinement." + f.name, ok);
  }
  // the truncation error of the square is O(L_N^-2): meaningless on one or two levels
  if (p.is_integer() && p.integer() == 2 && c.N >= 2) {
    const auto cr = chain_rule_check(h, diag_ramp(h), [](double t) { return t * t; }, [](double t) { return 2 * t; }, p, c.N,
                                     c.quadrature);
    s.check("energy_measure.chain_rule_square", cr.total_deviation <= 0.01, fmt(cr.total_deviation));
  }
  s.check("energy_measure.linear_chain_rule", linear_chain_rule(h, fns.back().u, Rational(-3, 2), Rational(1, 7), p, std::min<std::size_t>(2, c.N)));

  {
    const std::size_t mm = std::min<std::size_t>(3, c.m);
    bool ok = true;
    for (const auto& f : fns) {
      if (f.u.base_level() > mm) continue;
      const Samples smp = sample(f.u, h, mm);
      for (std::size_t n = 0; n <= mm; ++n) ok = ok && ball_energy(h, smp, p, n).value == ball_energy_bruteforce(h.level(mm), smp, p, n).value;
    }
    s.check("besov.indexed_equals_bruteforce", ok);
  }

  {
    const AffineFunction u = diag_ramp(h);
    ScaleFactors sf(rs, p);
    const DiscreteProfiles crit = discrete_profiles(h, u, p, c.beta_star, c.N);
    bool ok = true;
    for (double beta : c.betas) {
      const DiscreteProfiles d = discrete_profiles(h, u, p, beta, c.N);
      for (std::size_t n = 0; n <= c.N; ++n)
        ok = ok && d.energy[n] == sf.phi_pow(n, 1 - static_cast<long double>(beta) / c.beta_star) * crit.energy[n];
    }
    s.check("besov.scaling_identity", ok);
  }
  if (c.N >= 2) {
    const AffineFunction u = diag_ramp(h);
    const auto sweep = critical_sweep(h, u, p, {1.2 * c.beta_star, c.beta_star, 0.8 * c.beta_star}, c.N);
    s.check("besov.critical_sweep", sweep[0].trend == Trend::divergent && sweep[1].trend == Trend::plateau &&
                                        sweep[2].trend == Trend::vanishing,
            std::string(to_string(sweep[0].trend)) + "/" + to_string(sweep[1].trend) + "/" + to_string(sweep[2].trend));
  }

  if (c.tail == Tail::plateau && !c.gen.finite()) {
    const auto rows = bbm_curve(h, diag_ramp(h), p, c.epsilons, c.N, c.tail);
    bool inside = true, mono = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      inside = inside && rows[i].inside;
      if (i) mono = mono && ((c.epsilons[i] < c.epsilons[i - 1]) == (rows[i].value < rows[i - 1].value));
    }
    s.check("bbm.inside_bracket", inside);
    s.check("bbm.monotone_in_epsilon", mono);
  }

  if (c.N >= 1) {
    Json wm = Json::array();
    bool ok = true;
    for (const auto& f : fns) {
      const BallProfile bp = ball_profile(h, f.u, p, c.m, c.N);
      const BesovProfile pr = phi_profile(h, bp, energy_limit(h, f.u, p, c.N).energies, p, c.beta_star);
      const WeakMonotonicity w = weak_monotonicity_report(pr, c.window_lo, c.window_hi);
      ok = ok && (w.degenerate || std::isfinite(w.ratio));
      wm.push_back({{"function", f.name}, {"ratio", fmt(w.ratio)}, {"degenerate", w.degenerate}});
    }
    s.check("besov.weak_monotonicity_finite", ok);
    write_json(ctx.path("selftest_weak_monotonicity.json"), Json{{"config_hash", hex64(c.hash)}, {"m", c.m}, {"N", c.N},
                                                                {"window", {c.window_lo, c.window_hi}}, {"rows", wm}});
  }

  for (std::size_t i = 0; i < fns.size(); ++i) {
    const auto t = structural_checks(h, fns[i].u, fns[(i + 1) % fns.size()].u, p, c.N);
    s.check("structural." + fns[i].name, t.all_ok(), "morrey " + fmt(t.morrey) + " spectral " + fmt(t.spectral_gap));
  }

  s.write(ctx);
  s.print(std::cout);
  return s.failed() ? kFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scale-irregular Vicsek sets: geometry, energies, energy measures and Besov experiments"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir, mode;
  std::size_t threads = 0;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads (default: VICSEK_THREADS or 1)");
  app.add_option("--mode", mode, "arithmetic mode")->check(CLI::IsMember({"rational", "float"}));

  const std::map<std::string, std::function<int(Context&)>> commands = {
      {"build", cmd_build},         {"measure", cmd_measure}, {"hausdorff", cmd_hausdorff},
      {"energy", cmd_energy},       {"energy-measure", cmd_energy_measure}, {"besov", cmd_besov},
      {"bbm", cmd_bbm},             {"resistance", cmd_resistance},        {"selftest", cmd_selftest}};
  const std::map<std::string, std::string> help = {
      {"build", "levels, counts and (small) vertex/edge lists"},
      {"measure", "scale table and ball-mass bounds"},
      {"hausdorff", "eta/theta diagnostics for a two-ratio sequence"},
      {"energy", "E_n per level, limit, plateau, structural inequalities"},
      {"energy-measure", "energy measure on cells, chain rule, pushforward histogram"},
      {"besov", "ball-energy profiles and equivalence bands"},
      {"bbm", "epsilon sweep against the limit brackets"},
      {"resistance", "pairwise resistance on V_n, closed form and numerical"},
      {"selftest", "invariant suite; exit 1 on any failure"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    Json j = Json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      try {
        in >> j;
      } catch (const std::exception& e) {
        throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
      }
    }
    if (!mode.empty()) j["mode"] = mode;
    if (!out_dir.empty()) j["output"] = out_dir;
    Config cfg = parse_config(j);
    if (threads > 0) set_default_threads(threads);
    fs::create_directories(cfg.out);
    Context ctx(std::move(cfg));
    const std::string name = app.get_subcommands().front()->get_name();
    return commands.at(name)(ctx);
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
