#pragma once

// Command-line driver. `run` parses arguments, executes one pipeline and
// writes its report; it is a plain function so tests can call it directly.
//
// Exit codes: 0 every asserted check held, 1 a check failed (named in the
// report's "failures"), 2 bad arguments or input, 3 internal error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uclab/uclab.hpp"

namespace uclab::cli {

struct GlobalOptions {
  std::string out;
  std::string format = "json";
  std::uint64_t seed = kDefaultSeed;
  std::size_t jobs = 0;
  std::optional<double> tol;
  bool timing = false;
  double inflate_lambda = 1.0;
};

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("UCLAB_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("UCLAB_SEED must be an unsigned integer");
  }
  return kDefaultSeed;
}

/// Records named checks; a check fails when `ok` is false.
class Checks {
public:
  explicit Checks(Report& r, std::string prefix = {}) : report_(r), prefix_(std::move(prefix)) {}

  void add(const std::string& name, bool ok, Json detail) {
    report_.result["checks"][name] = {{"passed", ok}, {"detail", std::move(detail)}};
    if (!ok) report_.failures.push_back(prefix_ + name);
  }

private:
  Report& report_;
  std::string prefix_;
};

inline Json load_json_config(const GlobalOptions& g) {
  return {{"seed", g.seed}, {"jobs", g.jobs}, {"tol", g.tol ? number(*g.tol) : Json(nullptr)},
          {"format", g.format}};
}

// ---------------------------------------------------------------------------
// scalar

struct ScalarOptions {
  std::size_t grid = 100000;
};

inline Report run_scalar(const ScalarOptions& o, const GlobalOptions& g) {
  Report r;
  r.command = "scalar";
  r.config = load_json_config(g);
  r.config["grid"] = o.grid;
  Checks checks(r);
  const auto tol = [&](double d) { return g.tol.value_or(d); };
  const double us = kGoldenThreshold;

  const double lam_star = lambda(us);
  const double h_gap = binary_entropy(us) - binary_entropy(1.0 - us);
  checks.add("golden_identity", std::abs(lam_star - 1.0) <= tol(1e-12) && std::abs(h_gap) <= tol(1e-12),
             {{"golden_threshold", number(us)}, {"lambda_at_threshold", number(lam_star)},
              {"entropy_difference", number(h_gap)},
              {"union_of_threshold", number(union_prob(us, us))}});

  const double ratio_branch = binary_entropy(union_prob(us, us)) / binary_entropy(us);
  const double linear_branch = (1.0 - us) * kGoldenRatio;
  checks.add("lambda_continuity", std::abs(ratio_branch - linear_branch) <= tol(1e-12),
             {{"ratio_branch", number(ratio_branch)}, {"linear_branch", number(linear_branch)}});

  double symmetry = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const double p = k / 10000.0;
    symmetry = std::max(symmetry, std::abs(binary_entropy(p) - binary_entropy(1.0 - p)));
  }
  checks.add("entropy_symmetry", symmetry <= tol(1e-14), {{"max_difference", number(symmetry)}});

  const std::size_t n = std::max<std::size_t>(o.grid, 3);
  const auto at = [&](std::size_t k) { return static_cast<double>(k) / static_cast<double>(n + 1); };
  std::size_t argmin = 1;
  double fmin = std::numeric_limits<double>::infinity();
  double fmax = 0.0;
  double easier_min = std::numeric_limits<double>::infinity();
  std::vector<double> f(n + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    f[k] = ratio_F(at(k));
    fmax = std::max(fmax, f[k]);
    if (f[k] < fmin) {
      fmin = f[k];
      argmin = k;
    }
    easier_min = std::min(easier_min, easier_inequality_slack(at(k)));
  }
  std::size_t nearest = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    if (std::abs(at(k) - kInverseGolden) < std::abs(at(nearest) - kInverseGolden)) nearest = k;
  }
  bool monotone = true;
  for (std::size_t k = 2; k <= n; ++k) {
    if (k <= argmin && !(f[k] < f[k - 1])) monotone = false;
    if (k > argmin && !(f[k] > f[k - 1])) monotone = false;
  }
  checks.add("F_decrease_increase",
             monotone && argmin == nearest && std::abs(fmin - kGoldenRatio) <= g.tol.value_or(1e-6),
             {{"argmin", number(at(argmin))}, {"nearest_grid_point", number(at(nearest))},
              {"minimum", number(fmin)}, {"golden_ratio", number(kGoldenRatio)}, {"monotone", monotone}});
  const double near_zero = ratio_F(1e-50);
  checks.add("F_bounds", fmax < 2.0 && std::abs(near_zero - 2.0) <= 0.01,
             {{"max_on_grid", number(fmax)}, {"F_at_1e-50", number(near_zero)},
              {"F_at_1e-4", number(ratio_F(1e-4))}, {"F_at_1-1e-4", number(ratio_F(1.0 - 1e-4))}});
  checks.add("easier_inequality", easier_min > 0.0, {{"min_slack", number(easier_min)}});

  double worst_h2 = 0.0;
  double worst_sh = 0.0;
  const auto h_square = [](double s) { return binary_entropy(s * s); };
  const auto s_h = [](double s) { return s * binary_entropy(s); };
  for (int k = 0; k <= 900; ++k) {
    const double s = 0.05 + 0.001 * k;
    const double h = fd::unit_interval_step(s);
    worst_h2 = std::max(worst_h2, std::abs(fd::third(h_square, s, h) / d3_H_square(s) - 1.0));
    worst_sh = std::max(worst_sh, std::abs(fd::third(s_h, s, h) / d3_s_H(s) - 1.0));
  }
  checks.add("third_derivatives", worst_h2 < tol(1e-4) && worst_sh < tol(1e-4),
             {{"max_rel_error_H_square", number(worst_h2)}, {"max_rel_error_s_H", number(worst_sh)},
              {"interval", {0.05, 0.95}}});
  return r;
}

// ---------------------------------------------------------------------------
// lemma

struct LemmaOptions {
  std::size_t u_steps = 1000;
  std::size_t v_steps = 1000;
  std::size_t search_points = 100;
  std::size_t restarts = 10;
  std::size_t atom_grid = 1000;
  std::size_t sharp_points = 100;
};

inline Report run_lemma(const LemmaOptions& o, const GlobalOptions& g) {
  Report r;
  r.command = "lemma";
  r.config = load_json_config(g);
  CertificateOptions c;
  c.u_steps = o.u_steps;
  c.v_steps = o.v_steps;
  c.search_points = o.search_points;
  c.search.restarts = o.restarts;
  c.search.atom_grid = o.atom_grid;
  c.search.seed = g.seed;
  c.lambda_scale = g.inflate_lambda;
  c.jobs = g.jobs;
  r.config["u_steps"] = o.u_steps;
  r.config["v_steps"] = o.v_steps;
  r.config["search_points"] = o.search_points;
  r.config["search"] = to_json(c.search);
  r.config["sharp_points"] = o.sharp_points;
  if (g.inflate_lambda != 1.0) r.config["lambda_scale"] = number(g.inflate_lambda);

  const auto cert = lemma_certificate(c);
  r.result["certificate"] = to_json(cert, true);
  r.table = certificate_table(cert);
  Checks checks(r);
  const double scan_tol = g.tol.value_or(kScanTolerance);
  const double search_tol = g.tol.value_or(kSearchTolerance);
  checks.add("two_atom_scan", cert.worst_scan_slack >= -scan_tol,
             {{"worst_slack", number(cert.worst_scan_slack)}, {"at_u", number(cert.worst_u)}});
  checks.add("local_search", cert.max_search_gain <= search_tol && cert.worst_search_value >= -search_tol,
             {{"max_gain_over_scan", number(cert.max_search_gain)},
              {"worst_value", number(cert.worst_search_value)}, {"restarts", cert.total_restarts}});

  // Zero objective at the sharp measures.
  double sharp = 0.0;
  for (std::size_t k = 1; k <= o.sharp_points; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(o.sharp_points + 1);
    const double lam = lambda(u);
    const auto mu = u <= kGoldenThreshold ? DiscreteMeasure::dirac(u)
                                          : DiscreteMeasure::two_atom(kGoldenThreshold, (1.0 - u) * kGoldenRatio);
    sharp = std::max(sharp, std::abs(objective(mu, lam).value));
  }
  checks.add("sharp_measures", sharp <= g.tol.value_or(1e-12), {{"max_abs_objective", number(sharp)}});

  const auto shape = F_mu_structure_check(DiscreteMeasure::dirac(kGoldenThreshold), 1.0, 10000);
  checks.add("F_mu_structure", shape.strictly_decreasing && shape.sign_mismatches == 0,
             {{"measure", "dirac at (3 - sqrt 5)/2"},
              {"shape", to_string(shape.shape)},
              {"inflection", optional_json(shape.inflection)},
              {"sign_checks", shape.sign_checks}});
  return r;
}

// ---------------------------------------------------------------------------
// families

struct FamiliesOptions {
  int n = 4;
  std::string family_file;
};

inline Family load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open family file " + path);
  return read_family(in);
}

inline Report run_families(const FamiliesOptions& o, const GlobalOptions& g) {
  Report r;
  r.command = "families";
  r.config = load_json_config(g);
  r.config["n"] = o.n;
  Checks checks(r);
  if (!o.family_file.empty()) {
    r.config["family_file"] = o.family_file;
    const auto f = load_family(o.family_file);
    if (!is_union_closed(f)) throw std::invalid_argument("family in " + o.family_file + " is not union-closed");
    const auto freq = max_element_frequency(f);
    const auto diag = entropy_chain_diagnostics(f);
    r.result["family"] = to_json(f);
    r.result["best_element"] = freq.best_element;
    r.result["best_proportion"] = number(freq.best_proportion);
    r.result["diagnostics"] = to_json(diag);
    checks.add("union_entropy_not_above", diag.union_not_above,
               {{"entropy", number(diag.entropy)}, {"union_entropy", number(diag.union_entropy)}});
    checks.add("induction_steps", diag.min_step_slack >= -g.tol.value_or(1e-9),
               {{"min_step_slack", number(diag.min_step_slack)}});
    if (!freq.degenerate) {
      checks.add("frequency", freq.best_proportion >= kGoldenThreshold,
                 {{"best_proportion", number(freq.best_proportion)}});
    }
    return r;
  }
  const auto t = verify_theorem1(o.n);
  r.result["theorem"] = to_json(t);
  r.result["candidate_families"] = family_code_limit(o.n);
  checks.add("min_best_proportion", t.holds, {{"min_best_proportion", number(t.min_best_proportion)}});
  return r;
}

// ---------------------------------------------------------------------------
// theorem2

struct Theorem2Options {
  std::string dist_file;
  std::string mixture_file;
  std::size_t samples = 1000;
  int max_n = 8;
};

/// Random table on [n] with max marginal in (0,1): dense, sparse, uniform on
/// a random union-closed family, or an expanded product mixture.
template <typename Rng>
ExplicitSetDistribution random_distribution(int n, Rng& rng) {
  std::uniform_int_distribution<int> kind_pick(0, 3);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t size = std::size_t{1} << n;
  while (true) {
    const int kind = kind_pick(rng);
    std::vector<double> probs(size, 0.0);
    if (kind == 0 || kind == 1) {
      for (auto& p : probs) p = (kind == 1 && unit(rng) < 0.7) ? 0.0 : expo(rng);
    } else if (kind == 2) {
      const auto f = random_union_closed(n, 1 + rng() % 5, rng);
      for (auto s : f.sets()) probs[s.bits] = 1.0;
    } else {
      ProductMixture m{n, {}};
      const int parts = 1 + static_cast<int>(rng() % 3);
      for (int k = 0; k < parts; ++k) m.components.push_back({1.0 / parts, unit(rng)});
      const auto d = expand(m);
      probs.assign(d.probs().begin(), d.probs().end());
    }
    double total = 0.0;
    for (double p : probs) total += p;
    if (!(total > 0.0)) continue;
    for (auto& p : probs) p /= total;
    detail::renormalize(probs);
    ExplicitSetDistribution d(n, std::move(probs));
    const auto m = marginals(d);
    const double u = *std::max_element(m.begin(), m.end());
    if (u > 0.0 && u < 1.0) return d;
  }
}

inline Report run_theorem2(const Theorem2Options& o, const GlobalOptions& g) {
  Report r;
  r.command = "theorem2";
  r.config = load_json_config(g);
  Checks checks(r);
  const double tol = g.tol.value_or(1e-10);
  if (!o.dist_file.empty() || !o.mixture_file.empty()) {
    const bool mixture = !o.mixture_file.empty();
    const auto& path = mixture ? o.mixture_file : o.dist_file;
    r.config[mixture ? "mixture_file" : "dist_file"] = path;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    const auto d = mixture ? expand(read_mixture(in)) : read_distribution(in);
    const auto t = verify_theorem2(d);
    r.result["n"] = d.n();
    r.result["report"] = to_json(t);
    checks.add("slack", t.slack >= -tol, {{"slack", number(t.slack)}});
    return r;
  }
  if (o.max_n < 1 || o.max_n > kMaxExplicitN) throw std::invalid_argument("--max-n must lie in [1, 24]");
  r.config["samples"] = o.samples;
  r.config["max_n"] = o.max_n;

  std::mt19937_64 rng(g.seed);
  std::uniform_int_distribution<int> n_pick(1, o.max_n);
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_index = 0;
  for (std::size_t k = 0; k < o.samples; ++k) {
    const auto d = random_distribution(n_pick(rng), rng);
    const auto t = verify_theorem2(d);
    if (t.slack < worst) {
      worst = t.slack;
      worst_index = k;
    }
  }
  checks.add("random_tables", o.samples == 0 || worst >= -tol,
             {{"samples", o.samples}, {"worst_slack", number(o.samples ? worst : 0.0)},
              {"worst_sample", worst_index}});

  double example1 = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double u = kGoldenThreshold * k / 20.0;
    for (int n : {2, 4, 6, 8}) example1 = std::max(example1, std::abs(verify_theorem2(example1_distribution(u, n)).slack));
  }
  checks.add("product_tightness", example1 <= tol, {{"max_abs_slack", number(example1)}});

  Json points = Json::array();
  double fitted = 0.0;
  for (int n : {8, 10, 12}) {
    const auto d = expand(example2_distribution(0.5, n));
    const double ratio = entropy_explicit(union_of_independent(d, d)) / entropy_explicit(d);
    const double gap = std::abs(ratio - lambda(0.5));
    fitted = std::max(fitted, gap * n);
    points.push_back({{"n", n}, {"ratio", number(ratio)}, {"gap", number(gap)}});
  }
  checks.add("mixture_asymptotics", fitted <= 3.0,
             {{"u", 0.5}, {"lambda", number(lambda(0.5))}, {"points", points}, {"fitted_C", number(fitted)}});
  return r;
}

// ---------------------------------------------------------------------------
// counterexample

struct CounterexampleOptions {
  CounterexampleParams params;
  int exact_n = 10;
};

inline Report run_counterexample(const CounterexampleOptions& o, const GlobalOptions& g) {
  Report r;
  r.command = "counterexample";
  r.config = load_json_config(g);
  o.params.validate();
  r.config["params"] = to_json(o.params);
  r.config["exact_n"] = o.exact_n;
  Checks checks(r);

  const auto main = counterexample_report(o.params);
  r.result["bounds"] = to_json(main);
  checks.add("admissible", main.admissible, {{"marginal", number(main.marginal)}, {"u", number(o.params.u)}});
  checks.add("ratio_below_d", main.ratio_below_d, {{"ratio", number(main.ratio)}, {"d", number(o.params.d)}});

  Json sweep = Json::array();
  double kl_spread = 0.0;
  for (std::int64_t n : {std::int64_t{100}, std::int64_t{10000}, std::int64_t{1000000}}) {
    auto p = o.params;
    p.n = n;
    const auto b = counterexample_report(p);
    kl_spread = std::max(kl_spread, std::abs(b.kl_bound - main.kl_bound));
    sweep.push_back({{"n", n}, {"ratio_bound", number(b.ratio)}, {"kl_upper_bound", number(b.kl_bound)},
                     {"entropy_lower_bound", number(b.entropy_lower)}});
  }
  r.result["sweep"] = sweep;
  checks.add("kl_constant_in_n", kl_spread <= g.tol.value_or(1e-12), {{"max_difference", number(kl_spread)}});

  if (o.exact_n > 0) {
    auto p = o.params;
    p.n = o.exact_n;
    const auto e = exact_small_n_check(p);
    r.result["exact"] = to_json(e);
    checks.add("exact_bracket", e.exact && e.exact->within_bounds, {{"n", o.exact_n}});
  }
  return r;
}

// ---------------------------------------------------------------------------
// coupling

struct CouplingOptions {
  std::size_t families = 100;
  std::size_t measures = 50;
  int max_n = 8;
  double alpha = 0.05;
  DeltaSearchOptions delta;
  std::string family_file;
  std::string convention = "own";
};

inline Report run_coupling_checks(const CouplingOptions& o, const GlobalOptions& g) {
  Report r;
  r.command = "coupling";
  r.config = load_json_config(g);
  r.config["families"] = o.families;
  r.config["measures"] = o.measures;
  r.config["max_n"] = o.max_n;
  r.config["alpha"] = number(o.alpha);
  Checks checks(r);

  std::size_t mismatches = 0;
  for (int i = 0; i < 300; ++i) {
    for (int j = 0; j < 300; ++j) {
      const double p = i / 299.0;
      const double q = j / 299.0;
      const double expected = std::max({p, q, std::min(p + q, 0.5)});
      if (coupled_union_prob(p, q) != expected || coupled_union_prob(q, p) != expected) ++mismatches;
    }
  }
  checks.add("case_identity", mismatches == 0, {{"grid", 300}, {"mismatches", mismatches}});

  const double collapse = improved_slack(DiscreteMeasure::dirac(kGoldenThreshold), o.alpha);
  const double expected = o.alpha * (kLn2 - binary_entropy(kGoldenThreshold));
  checks.add("sharp_point_collapse", std::abs(collapse - expected) <= g.tol.value_or(1e-12) && collapse > 0.0,
             {{"slack", number(collapse)}, {"closed_form", number(expected)}});

  std::mt19937_64 rng(g.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double lp_excess = -std::numeric_limits<double>::infinity();
  double marginal_error = 0.0;
  for (std::size_t k = 0; k < o.measures; ++k) {
    std::vector<Atom> atoms(1 + rng() % 6);
    for (auto& a : atoms) a = {unit(rng), 0.05 + unit(rng)};
    double total = 0.0;
    for (auto& a : atoms) total += a.weight;
    for (auto& a : atoms) a.weight /= total;
    const auto w = worst_coupling_value(DiscreteMeasure(atoms));
    lp_excess = std::max(lp_excess, w.value - w.independent_value);
    marginal_error = std::max(marginal_error, w.coupling.marginal_error());
  }
  if (o.measures > 0) {
    checks.add("lp_below_independent", lp_excess <= 1e-12 && marginal_error <= 1e-12,
               {{"max_excess", number(lp_excess)}, {"max_marginal_error", number(marginal_error)}});
  }

  double worst_uniformity = 0.0;
  std::uniform_int_distribution<int> n_pick(1, std::clamp(o.max_n, 1, kMaxCouplingDpN));
  for (std::size_t k = 0; k < o.families; ++k) {
    const auto f = random_union_closed(n_pick(rng), 1 + rng() % 6, rng);
    const auto dp = greedy_coupling_dp(f);
    worst_uniformity = std::max({worst_uniformity, dp.marginal_error_a, dp.marginal_error_c});
  }
  checks.add("dp_marginals_uniform", worst_uniformity <= g.tol.value_or(1e-12),
             {{"families", o.families}, {"max_marginal_error", number(worst_uniformity)}});
  return r;
}

inline Report run_delta_search(const CouplingOptions& o, const GlobalOptions& g) {
  Report r;
  r.command = "coupling delta-search";
  r.config = load_json_config(g);
  r.config["alpha"] = number(o.alpha);
  auto options = o.delta;
  options.search.seed = g.seed;
  options.jobs = g.jobs;
  r.config["grid"] = to_json(options);
  const auto d = delta_search(o.alpha, options);
  r.result["delta_search"] = to_json(d);
  Checks checks(r);
  checks.add("delta_positive", !d.failed,
             {{"delta", number(d.delta)}, {"violation_gap", optional_json(d.violation_gap)}});
  return r;
}

inline RateConvention parse_convention(const std::string& s) {
  if (s == "own") return RateConvention::OwnPrefix;
  if (s == "swapped") return RateConvention::SwappedPrefix;
  throw std::invalid_argument("--convention must be own or swapped");
}

inline Report run_coupling_dp(const CouplingOptions& o, const GlobalOptions& g) {
  Report r;
  r.command = "coupling dp";
  r.config = load_json_config(g);
  if (o.family_file.empty()) throw std::invalid_argument("coupling dp needs --family");
  r.config["family_file"] = o.family_file;
  r.config["convention"] = o.convention;
  const auto convention = parse_convention(o.convention);
  const auto f = load_family(o.family_file);
  const auto dp = greedy_coupling_dp(f, convention);
  r.result["family"] = to_json(f);
  r.result["dp"] = to_json(dp);
  if (convention == RateConvention::OwnPrefix) {
    Checks checks(r);
    checks.add("marginals_uniform",
               std::max(dp.marginal_error_a, dp.marginal_error_c) <= g.tol.value_or(1e-12),
               {{"marginal_error_a", number(dp.marginal_error_a)}, {"marginal_error_c", number(dp.marginal_error_c)}});
  }
  return r;
}

// ---------------------------------------------------------------------------
// all

inline Report run_all(const GlobalOptions& g) {
  Report r;
  r.command = "all";
  r.config = load_json_config(g);
  const auto merge = [&](const std::string& name, const Report& part) {
    r.result[name] = part.result;
    for (const auto& f : part.failures) r.failures.push_back(name + "." + f);
  };
  merge("scalar", run_scalar({}, g));
  merge("lemma", run_lemma({}, g));
  merge("families", run_families({}, g));
  merge("theorem2", run_theorem2({}, g));
  merge("counterexample", run_counterexample({}, g));
  const CouplingOptions coupling;
  merge("coupling", run_coupling_checks(coupling, g));
  merge("delta_search", run_delta_search(coupling, g));
  return r;
}

// ---------------------------------------------------------------------------
// Entry point

/// argv[0] is the program name.
inline int run(const std::vector<std::string>& argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Numerical checks for the entropy method on union-closed families", "uclab"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  GlobalOptions g;
  std::optional<std::uint64_t> seed;
  app.add_option("--out", g.out, "Write the report to this file instead of standard output");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", seed, "Random seed (default 271828, or UCLAB_SEED)");
  app.add_option("--jobs", g.jobs, "Worker threads; 0 uses every core");
  app.add_option("--tol", g.tol, "Override the tolerance of every asserted check")->check(CLI::PositiveNumber);
  app.add_flag("--timing", g.timing, "Include wall time in the report");
  app.add_option("--inflate-lambda", g.inflate_lambda)->group("")->check(CLI::PositiveNumber);

  ScalarOptions scalar;
  auto* scalar_cmd = app.add_subcommand("scalar", "Closed-form scalar identities and inequalities");
  scalar_cmd->add_option("--grid", scalar.grid, "Grid points in (0,1)")->check(CLI::PositiveNumber);

  LemmaOptions lemma;
  auto* lemma_cmd = app.add_subcommand("lemma", "Two-atom scan and local search over measures");
  lemma_cmd->add_subcommand("certify", "Same as lemma")->fallthrough();
  lemma_cmd->fallthrough();
  lemma_cmd->add_option("--u-steps", lemma.u_steps, "u grid size")->check(CLI::PositiveNumber);
  lemma_cmd->add_option("--v-steps", lemma.v_steps, "v grid size per u")->check(CLI::PositiveNumber);
  lemma_cmd->add_option("--search-points", lemma.search_points, "u values given a local search");
  lemma_cmd->add_option("--restarts", lemma.restarts, "Local-search restarts per u")->check(CLI::PositiveNumber);
  lemma_cmd->add_option("--atom-grid", lemma.atom_grid, "Local-search location grid")->check(CLI::PositiveNumber);
  lemma_cmd->add_option("--sharp-points", lemma.sharp_points, "u values for the sharp-measure check");

  FamiliesOptions families;
  auto* families_cmd = app.add_subcommand("families", "Exhaustive union-closed families on small ground sets");
  families_cmd->add_subcommand("enumerate", "Same as families")->fallthrough();
  families_cmd->fallthrough();
  families_cmd->add_option("--n", families.n, "Ground-set size")->check(CLI::Range(0, kMaxEnumerationN));
  families_cmd->add_option("--family", families.family_file, "Diagnose one family from a file");

  Theorem2Options theorem2;
  auto* theorem2_cmd = app.add_subcommand("theorem2", "Union-entropy inequality for set distributions");
  theorem2_cmd->add_option("--dist-file", theorem2.dist_file, "Explicit distribution file");
  theorem2_cmd->add_option("--mixture-file", theorem2.mixture_file, "Product mixture file");
  theorem2_cmd->add_option("--samples", theorem2.samples, "Random distributions");
  theorem2_cmd->add_option("--max-n", theorem2.max_n, "Largest ground set for random distributions");

  CounterexampleOptions ce;
  std::optional<int> truncation;
  auto* ce_cmd = app.add_subcommand("counterexample", "Geometric mixture with bounded divergence");
  ce_cmd->add_option("--ubar", ce.params.u_bar, "Base inclusion probability");
  ce_cmd->add_option("--u", ce.params.u, "Marginal cap");
  ce_cmd->add_option("--d", ce.params.d, "Target entropy ratio");
  ce_cmd->add_option("--theta", ce.params.theta, "Geometric parameter");
  ce_cmd->add_option("--n", ce.params.n, "Ground-set size for the bounds");
  ce_cmd->add_option("--K", truncation, "Truncation of the geometric law");
  ce_cmd->add_option("--exact-n", ce.exact_n, "Ground set for the exact check (0 skips it)")->check(CLI::Range(0, 12));

  CouplingOptions coupling;
  auto* coupling_cmd = app.add_subcommand("coupling", "Coupled-union machinery");
  coupling_cmd->fallthrough();
  coupling_cmd->add_option("--alpha", coupling.alpha, "Mixing weight")->check(CLI::Range(0.0, 1.0));
  coupling_cmd->add_option("--families", coupling.families, "Random families for the dynamic program");
  coupling_cmd->add_option("--measures", coupling.measures, "Random measures for the coupling LP");
  auto* delta_cmd = coupling_cmd->add_subcommand("delta-search", "Search for delta");
  delta_cmd->fallthrough();
  delta_cmd->add_option("--delta-max", coupling.delta.delta_max, "Largest gap scanned")->check(CLI::PositiveNumber);
  delta_cmd->add_option("--delta-steps", coupling.delta.delta_steps, "Caps above the threshold")->check(CLI::PositiveNumber);
  delta_cmd->add_option("--below-steps", coupling.delta.below_steps, "Caps below the threshold")->check(CLI::PositiveNumber);
  delta_cmd->add_option("--low-steps", coupling.delta.low_steps, "Lower atom grid");
  delta_cmd->add_option("--high-steps", coupling.delta.high_steps, "Upper atom grid");
  delta_cmd->add_option("--search-caps", coupling.delta.search_caps, "Local searches");
  auto* dp_cmd = coupling_cmd->add_subcommand("dp", "Greedy coupling on a family file");
  dp_cmd->fallthrough();
  dp_cmd->add_option("--family", coupling.family_file, "Family file")->required();
  dp_cmd->add_option("--convention", coupling.convention, "Rate convention")->check(CLI::IsMember({"own", "swapped"}));

  app.add_subcommand("all", "Every suite with default settings");

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  Report report;
  const auto start = std::chrono::steady_clock::now();
  try {
    g.seed = seed ? *seed : default_seed();
    if (truncation) ce.params.truncation = *truncation;
    if (scalar_cmd->parsed()) {
      report = run_scalar(scalar, g);
    } else if (lemma_cmd->parsed()) {
      report = run_lemma(lemma, g);
    } else if (families_cmd->parsed()) {
      report = run_families(families, g);
    } else if (theorem2_cmd->parsed()) {
      report = run_theorem2(theorem2, g);
    } else if (ce_cmd->parsed()) {
      report = run_counterexample(ce, g);
    } else if (coupling_cmd->parsed()) {
      if (delta_cmd->parsed()) {
        report = run_delta_search(coupling, g);
      } else if (dp_cmd->parsed()) {
        report = run_coupling_dp(coupling, g);
      } else {
        report = run_coupling_checks(coupling, g);
      }
    } else {
      report = run_all(g);
    }
  } catch (const std::invalid_argument& e) {
    err << "uclab: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    err << "uclab: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    err << "uclab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "uclab: internal error: " << e.what() << '\n';
    return 3;
  }
  if (g.timing) {
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  const auto format = g.format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
  if (g.out.empty()) {
    emit_report(out, report, format);
  } else {
    std::ofstream file(g.out, std::ios::binary);
    if (file) emit_report(file, report, format);
    if (!file) {
      err << "uclab: cannot write " << g.out << '\n';
      return 2;
    }
  }
  for (const auto& f : report.failures) err << "uclab: failed: " << f << '\n';
  return report.passed() ? 0 : 1;
}

}  // namespace uclab::cli
