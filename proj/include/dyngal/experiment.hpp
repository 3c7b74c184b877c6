#pragma once

// Configuration-driven experiment runner: construct the problem (explicit or
// manufactured right-hand side), fit or override the decay constants, run
// the selected adaptive algorithm and emit trace/report artifacts.
// Configurations are strictly validated (unknown keys rejected) and all
// randomness flows from one 64-bit seed.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyngal/adapt.hpp"
#include "dyngal/io.hpp"
#include "dyngal/marking.hpp"
#include "dyngal/operator.hpp"
#include "dyngal/sparsity.hpp"

namespace dyngal {

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed,
                         const std::set<std::string>& required) {
  if (!obj.is_object())
    throw config_error(where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw config_error(where + ": unknown key '" + key + "'");
  for (const auto& key : required)
    if (!obj.contains(key))
      throw config_error(where + ": missing key '" + key + "'");
}

}  // namespace detail

struct coefficient_spec {
  // fourier: finite trigonometric expansion; legendre_bs: polynomial in x
  std::vector<std::pair<multi_index, complex>> expansion;
  std::vector<double> polynomial;
  double lower = 0.0, upper = 0.0;
};

struct rhs_spec {
  enum class mode_t { explicit_coeffs, manufactured };
  mode_t mode = mode_t::explicit_coeffs;
  std::vector<std::pair<multi_index, complex>> coefficients;
  double eta = 0.5;
  double t = 1.0;
  int support_radius = 0;
};

struct algorithm_spec {
  enum class kind_t { dyn_gal, static_e_dorfler, plain_dorfler };
  kind_t kind = kind_t::dyn_gal;
  bool c0_certified = false;  // c0 = certified bound when true
  double c0 = 0.0;
  double theta = 0.0;  // static/plain
  double sigma_mark = 1.0;
  std::optional<double> theta_cap;
  double epsilon = 1e-10;
  int max_iter = 50;
  double solver_tol = 1e-12;
};

struct decay_spec {
  enum class mode_t { fit, override_values };
  mode_t mode = mode_t::fit;
  std::vector<multi_index> probes;  // empty: defaults
  double c_inverse = 0.0, eta_inverse = 0.0;
};

struct experiment_config {
  std::uint64_t seed = 0;
  basis_kind basis = basis_kind::fourier;
  int dim = 1;
  coefficient_spec nu, sigma;
  rhs_spec rhs;
  algorithm_spec algorithm;
  int radius_max = 256;
  int bandwidth = 1;
  decay_spec decay;
  std::string out_dir = "out";
  bool write_csv = true;
  bool write_json = true;
};

namespace detail {

inline multi_index parse_index(const json& j, int dim,
                               const std::string& where) {
  multi_index k;
  if (j.is_string())
    k = multi_index::parse(j.get<std::string>());
  else if (j.is_number_integer())
    k = multi_index(j.get<int>());
  else if (j.is_array()) {
    if (j.size() == 1)
      k = multi_index(j[0].get<int>());
    else if (j.size() == 2)
      k = multi_index(j[0].get<int>(), j[1].get<int>());
    else
      throw config_error(where + ": index arity " + std::to_string(j.size()));
  } else {
    throw config_error(where + ": malformed index");
  }
  if (k.dim() != dim)
    throw config_error(where + ": index dimension mismatch for " +
                       k.to_string());
  return k;
}

inline std::vector<std::pair<multi_index, complex>> parse_coefficients(
    const json& arr, int dim, const std::string& where) {
  if (!arr.is_array()) throw config_error(where + ": expected an array");
  std::vector<std::pair<multi_index, complex>> out;
  for (const auto& item : arr) {
    require_keys(item, where + " entry", {"index", "re", "im"}, {"index", "re"});
    out.emplace_back(parse_index(item.at("index"), dim, where),
                     complex(item.at("re").get<double>(),
                             item.value("im", 0.0)));
  }
  return out;
}

inline coefficient_spec parse_coefficient_spec(const json& j, basis_kind kind,
                                               int dim,
                                               const std::string& where) {
  coefficient_spec out;
  if (kind == basis_kind::fourier) {
    require_keys(j, where, {"coefficients", "lower", "upper"},
                 {"coefficients", "lower", "upper"});
    out.expansion = parse_coefficients(j.at("coefficients"), dim, where);
  } else {
    require_keys(j, where, {"polynomial", "lower", "upper"},
                 {"polynomial", "lower", "upper"});
    out.polynomial = j.at("polynomial").get<std::vector<double>>();
    if (out.polynomial.empty())
      throw config_error(where + ": empty polynomial");
  }
  out.lower = j.at("lower").get<double>();
  out.upper = j.at("upper").get<double>();
  if (!(out.lower > 0.0 && out.lower <= out.upper))
    throw config_error(where + ": need 0 < lower <= upper");
  return out;
}

}  // namespace detail

inline experiment_config parse_config(const json& j) {
  using detail::require_keys;
  require_keys(j, "config",
               {"seed", "problem", "rhs", "algorithm", "window", "decay",
                "output"},
               {"problem", "rhs", "algorithm", "window"});
  experiment_config cfg;
  cfg.seed = j.value("seed", std::uint64_t(0));

  const json& prob = j.at("problem");
  require_keys(prob, "problem", {"basis", "d", "nu", "sigma"},
               {"basis", "d", "nu", "sigma"});
  const std::string basis = prob.at("basis").get<std::string>();
  if (basis == "fourier")
    cfg.basis = basis_kind::fourier;
  else if (basis == "legendre_bs")
    cfg.basis = basis_kind::legendre_bs;
  else
    throw config_error("problem.basis: unknown basis '" + basis + "'");
  cfg.dim = prob.at("d").get<int>();
  if (cfg.dim < 1 || cfg.dim > 2)
    throw config_error("problem.d: must be 1 or 2");
  if (cfg.basis == basis_kind::legendre_bs && cfg.dim != 1)
    throw config_error("problem: legendre_bs requires d = 1");
  cfg.nu = detail::parse_coefficient_spec(prob.at("nu"), cfg.basis, cfg.dim,
                                          "problem.nu");
  cfg.sigma = detail::parse_coefficient_spec(prob.at("sigma"), cfg.basis,
                                             cfg.dim, "problem.sigma");

  const json& rhs = j.at("rhs");
  const std::string mode = rhs.value("mode", "explicit");
  if (mode == "explicit") {
    require_keys(rhs, "rhs", {"mode", "coefficients"}, {"coefficients"});
    cfg.rhs.mode = rhs_spec::mode_t::explicit_coeffs;
    cfg.rhs.coefficients =
        detail::parse_coefficients(rhs.at("coefficients"), cfg.dim, "rhs");
  } else if (mode == "manufactured") {
    require_keys(rhs, "rhs", {"mode", "eta", "t", "support_radius"},
                 {"eta", "t", "support_radius"});
    cfg.rhs.mode = rhs_spec::mode_t::manufactured;
    cfg.rhs.eta = rhs.at("eta").get<double>();
    cfg.rhs.t = rhs.at("t").get<double>();
    cfg.rhs.support_radius = rhs.at("support_radius").get<int>();
    if (!(cfg.rhs.eta > 0.0))
      throw config_error("rhs.eta: must be positive");
    if (!(cfg.rhs.t > 0.0 && cfg.rhs.t <= double(cfg.dim)))
      throw config_error("rhs.t: must lie in (0, d]");
    if (cfg.rhs.support_radius < 0)
      throw config_error("rhs.support_radius: negative");
  } else {
    throw config_error("rhs.mode: unknown mode '" + mode + "'");
  }

  const json& alg = j.at("algorithm");
  require_keys(alg, "algorithm",
               {"name", "c0", "theta", "sigma_mark", "theta_cap", "epsilon",
                "max_iter", "solver_tol"},
               {"name"});
  const std::string name = alg.at("name").get<std::string>();
  if (name == "dyn_gal") {
    cfg.algorithm.kind = algorithm_spec::kind_t::dyn_gal;
    if (!alg.contains("c0")) throw config_error("algorithm.c0: required");
    if (alg.at("c0").is_string()) {
      if (alg.at("c0").get<std::string>() != "certified")
        throw config_error("algorithm.c0: number or \"certified\"");
      cfg.algorithm.c0_certified = true;
    } else {
      cfg.algorithm.c0 = alg.at("c0").get<double>();
      if (!(cfg.algorithm.c0 > 0.0))
        throw config_error("algorithm.c0: must be positive");
    }
  } else if (name == "static_e_dorfler" || name == "plain_dorfler") {
    cfg.algorithm.kind = name == "static_e_dorfler"
                             ? algorithm_spec::kind_t::static_e_dorfler
                             : algorithm_spec::kind_t::plain_dorfler;
    if (!alg.contains("theta"))
      throw config_error("algorithm.theta: required for " + name);
    cfg.algorithm.theta = alg.at("theta").get<double>();
    if (!(cfg.algorithm.theta > 0.0 && cfg.algorithm.theta < 1.0))
      throw config_error("algorithm.theta: must lie in (0,1)");
  } else {
    throw config_error("algorithm.name: unknown algorithm '" + name + "'");
  }
  cfg.algorithm.sigma_mark = alg.value("sigma_mark", 1.0);
  if (!(cfg.algorithm.sigma_mark > 0.0))
    throw config_error("algorithm.sigma_mark: must be positive");
  if (alg.contains("theta_cap")) {
    cfg.algorithm.theta_cap = alg.at("theta_cap").get<double>();
    if (!(*cfg.algorithm.theta_cap > 0.0 && *cfg.algorithm.theta_cap < 1.0))
      throw config_error("algorithm.theta_cap: must lie in (0,1)");
  }
  cfg.algorithm.epsilon = alg.value("epsilon", 1e-10);
  if (!(cfg.algorithm.epsilon > 0.0 && cfg.algorithm.epsilon < 1.0))
    throw config_error("algorithm.epsilon: must lie in (0,1)");
  cfg.algorithm.max_iter = alg.value("max_iter", 50);
  if (cfg.algorithm.max_iter < 1)
    throw config_error("algorithm.max_iter: must be >= 1");
  cfg.algorithm.solver_tol = alg.value("solver_tol", 1e-12);
  if (!(cfg.algorithm.solver_tol > 0.0))
    throw config_error("algorithm.solver_tol: must be positive");

  const json& win = j.at("window");
  require_keys(win, "window", {"radius_max", "bandwidth"},
               {"radius_max", "bandwidth"});
  cfg.radius_max = win.at("radius_max").get<int>();
  cfg.bandwidth = win.at("bandwidth").get<int>();
  if (cfg.radius_max < 1) throw config_error("window.radius_max: must be >= 1");
  if (cfg.bandwidth < 0) throw config_error("window.bandwidth: negative");

  if (j.contains("decay")) {
    const json& dec = j.at("decay");
    require_keys(dec, "decay",
                 {"mode", "probes", "c_inverse", "eta_inverse"}, {"mode"});
    const std::string dmode = dec.at("mode").get<std::string>();
    if (dmode == "fit") {
      cfg.decay.mode = decay_spec::mode_t::fit;
      if (dec.contains("probes"))
        for (const auto& item : dec.at("probes"))
          cfg.decay.probes.push_back(
              detail::parse_index(item, cfg.dim, "decay.probes"));
    } else if (dmode == "override") {
      cfg.decay.mode = decay_spec::mode_t::override_values;
      if (!dec.contains("c_inverse") || !dec.contains("eta_inverse"))
        throw config_error("decay: override needs c_inverse and eta_inverse");
      cfg.decay.c_inverse = dec.at("c_inverse").get<double>();
      cfg.decay.eta_inverse = dec.at("eta_inverse").get<double>();
      if (!(cfg.decay.c_inverse > 0.0 && cfg.decay.eta_inverse > 0.0))
        throw config_error("decay: override values must be positive");
    } else {
      throw config_error("decay.mode: unknown mode '" + dmode + "'");
    }
  }

  if (j.contains("output")) {
    const json& out = j.at("output");
    require_keys(out, "output", {"dir", "formats"}, {});
    cfg.out_dir = out.value("dir", cfg.out_dir);
    if (out.contains("formats")) {
      cfg.write_csv = false;
      cfg.write_json = false;
      for (const auto& f : out.at("formats")) {
        const std::string fmt = f.get<std::string>();
        if (fmt == "csv")
          cfg.write_csv = true;
        else if (fmt == "json")
          cfg.write_json = true;
        else
          throw config_error("output.formats: unknown format '" + fmt + "'");
      }
    }
  }
  return cfg;
}

inline experiment_config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot open config: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw config_error("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

// Normalized (round-trippable) form of a parsed config.
inline json config_to_json(const experiment_config& cfg) {
  auto coeffs_json = [&](const coefficient_spec& c) {
    json out;
    if (cfg.basis == basis_kind::fourier) {
      json arr = json::array();
      for (const auto& [k, v] : c.expansion)
        arr.push_back(json{{"index", k.to_string()},
                           {"re", v.real()},
                           {"im", v.imag()}});
      out["coefficients"] = arr;
    } else {
      out["polynomial"] = c.polynomial;
    }
    out["lower"] = c.lower;
    out["upper"] = c.upper;
    return out;
  };
  json alg;
  switch (cfg.algorithm.kind) {
    case algorithm_spec::kind_t::dyn_gal:
      alg["name"] = "dyn_gal";
      if (cfg.algorithm.c0_certified)
        alg["c0"] = "certified";
      else
        alg["c0"] = cfg.algorithm.c0;
      break;
    case algorithm_spec::kind_t::static_e_dorfler:
      alg["name"] = "static_e_dorfler";
      alg["theta"] = cfg.algorithm.theta;
      break;
    case algorithm_spec::kind_t::plain_dorfler:
      alg["name"] = "plain_dorfler";
      alg["theta"] = cfg.algorithm.theta;
      break;
  }
  alg["sigma_mark"] = cfg.algorithm.sigma_mark;
  if (cfg.algorithm.theta_cap) alg["theta_cap"] = *cfg.algorithm.theta_cap;
  alg["epsilon"] = cfg.algorithm.epsilon;
  alg["max_iter"] = cfg.algorithm.max_iter;
  alg["solver_tol"] = cfg.algorithm.solver_tol;

  json rhs;
  if (cfg.rhs.mode == rhs_spec::mode_t::explicit_coeffs) {
    rhs["mode"] = "explicit";
    json arr = json::array();
    for (const auto& [k, v] : cfg.rhs.coefficients)
      arr.push_back(json{{"index", k.to_string()},
                         {"re", v.real()},
                         {"im", v.imag()}});
    rhs["coefficients"] = arr;
  } else {
    rhs["mode"] = "manufactured";
    rhs["eta"] = cfg.rhs.eta;
    rhs["t"] = cfg.rhs.t;
    rhs["support_radius"] = cfg.rhs.support_radius;
  }

  json dec;
  if (cfg.decay.mode == decay_spec::mode_t::fit) {
    dec["mode"] = "fit";
    if (!cfg.decay.probes.empty()) {
      json arr = json::array();
      for (const auto& k : cfg.decay.probes) arr.push_back(k.to_string());
      dec["probes"] = arr;
    }
  } else {
    dec["mode"] = "override";
    dec["c_inverse"] = cfg.decay.c_inverse;
    dec["eta_inverse"] = cfg.decay.eta_inverse;
  }

  json formats = json::array();
  if (cfg.write_csv) formats.push_back("csv");
  if (cfg.write_json) formats.push_back("json");

  return json{{"seed", cfg.seed},
              {"problem",
               {{"basis", cfg.basis == basis_kind::fourier ? "fourier"
                                                           : "legendre_bs"},
                {"d", cfg.dim},
                {"nu", coeffs_json(cfg.nu)},
                {"sigma", coeffs_json(cfg.sigma)}}},
              {"rhs", rhs},
              {"algorithm", alg},
              {"window",
               {{"radius_max", cfg.radius_max}, {"bandwidth", cfg.bandwidth}}},
              {"decay", dec},
              {"output",
               {{"dir", cfg.out_dir}, {"formats", formats}}}};
}

inline elliptic_problem build_problem(const experiment_config& cfg) {
  elliptic_problem p;
  p.basis = basis_descriptor{cfg.basis, cfg.dim, 1.0, 1.0};
  if (cfg.basis == basis_kind::fourier) {
    for (const auto& [k, v] : cfg.nu.expansion) p.nu_hat[k] = v;
    for (const auto& [k, v] : cfg.sigma.expansion) p.sigma_hat[k] = v;
  } else {
    auto poly = [](std::vector<double> c) {
      return [c = std::move(c)](double x) {
        double v = 0.0;
        for (std::size_t i = c.size(); i > 0; --i) v = v * x + c[i - 1];
        return v;
      };
    };
    p.nu_fn = poly(cfg.nu.polynomial);
    p.sigma_fn = poly(cfg.sigma.polynomial);
    p.coeff_degree = int(std::max(cfg.nu.polynomial.size(),
                                  cfg.sigma.polynomial.size())) - 1;
  }
  p.nu_lo = cfg.nu.lower;
  p.nu_hi = cfg.nu.upper;
  p.sigma_lo = cfg.sigma.lower;
  p.sigma_hi = cfg.sigma.upper;
  p.rhs = dual_vector(p.basis);
  p.validate();
  return p;
}

struct manufactured_solution {
  coeff_vector u_exact;
  dual_vector f;
};

// Coefficient profile |u_k| d_k^(1/2) = exp(-eta omega_d^(-t/d) n^(t/d))
// along the canonical enumeration (sorted by |k| then lexicographic), with
// seeded uniform phases; f = A u_exact assembled exactly on the window.
inline manufactured_solution manufacture(const rhs_spec& spec,
                                         const elliptic_problem& p,
                                         const stiffness_window& s,
                                         std::uint64_t seed) {
  const window& w = s.win();
  if (spec.support_radius + s.bandwidth() > w.radius_max())
    throw std::invalid_argument(
        "manufacture: support too close to window boundary (need "
        "support_radius + bandwidth <= radius_max)");
  manufactured_solution out;
  out.u_exact = coeff_vector(p.basis);

  std::mt19937_64 rng(seed);
  auto uniform_angle = [&rng]() {
    // 53-bit mantissa draw; avoids distribution implementation differences
    return 2.0 * M_PI * (double(rng() >> 11) * 0x1.0p-53);
  };

  const double td = spec.t / double(w.dim());
  const double scale = spec.eta * std::pow(unit_ball_measure(w.dim()), -td);
  std::size_t n = 0;
  for (const multi_index& k : w.indices_by_norm()) {
    if (k.norm() > double(spec.support_radius)) continue;
    ++n;
    const double modulus =
        std::exp(-scale * std::pow(double(n), td)) / std::sqrt(p.basis.weight(k));
    const double phase = uniform_angle();
    out.u_exact.set(k, std::polar(modulus, phase));
  }

  ball_result support = union_of_balls(out.u_exact.support(), s.bandwidth(), w);
  if (support.saturated)
    throw std::invalid_argument("manufacture: dilated support saturates window");
  out.f = apply(s, out.u_exact, support.set);
  return out;
}

struct experiment_result {
  experiment_config config;
  convergence_trace trace;
  decay_estimate forward_decay;
  decay_estimate inverse_decay;
  std::optional<coeff_vector> u_exact;
  marking_params params;
  std::uint64_t setup_workload = 0;
};

inline index_set default_probe_set(const window& w, int bandwidth) {
  const int margin = 20 * std::max(1, bandwidth);
  const int safe = w.radius_max() - margin;
  if (safe < 0)
    throw std::invalid_argument(
        "default_probe_set: window too small for the probe safety margin");
  std::vector<multi_index> probes;
  if (w.dim() == 1) {
    if (w.kind() == basis_kind::legendre_bs) {
      const int lo = std::max(2, safe / 4);
      probes = {multi_index(lo), multi_index(std::max(2, safe / 2)),
                multi_index(std::max(2, (3 * safe) / 4))};
    } else {
      probes = {multi_index(-safe / 2), multi_index(0),
                multi_index(safe / 2)};
    }
  } else {
    probes = {multi_index(0, 0), multi_index(safe / 2, 0),
              multi_index(0, -safe / 2)};
  }
  return index_set(std::move(probes));
}

inline experiment_result run_experiment(const experiment_config& cfg) {
  experiment_result res;
  res.config = cfg;

  elliptic_problem p = build_problem(cfg);
  const window w(cfg.basis, cfg.dim, cfg.radius_max);

  if (cfg.basis == basis_kind::fourier) {
    const double support = p.coefficient_support_radius();
    if (double(cfg.bandwidth) < support)
      throw config_error(
          "window.bandwidth smaller than the coefficient support radius (" +
          std::to_string(support) + "): rows would be truncated");
  }

  workload_counter setup;
  stiffness_window s = assemble_window(p, w, cfg.bandwidth);
  setup.add(s.nnz());

  if (cfg.rhs.mode == rhs_spec::mode_t::manufactured) {
    manufactured_solution m = manufacture(cfg.rhs, p, s, cfg.seed);
    p.rhs = m.f;
    res.u_exact = std::move(m.u_exact);
  } else {
    p.rhs = dual_vector(p.basis);
    for (const auto& [k, v] : cfg.rhs.coefficients) {
      if (!w.contains(k))
        throw config_error("rhs coefficient outside window: " + k.to_string());
      p.rhs.set(k, v);
    }
  }

  res.forward_decay = fit_decay(s);
  if (cfg.decay.mode == decay_spec::mode_t::override_values) {
    res.inverse_decay = decay_estimate{decay_estimate::kind_t::inverse,
                                       cfg.decay.c_inverse,
                                       cfg.decay.eta_inverse, 0.0, false};
  } else {
    index_set probes = cfg.decay.probes.empty()
                           ? default_probe_set(w, cfg.bandwidth)
                           : index_set(cfg.decay.probes);
    res.inverse_decay = fit_inverse_decay(s, probes);
  }
  res.setup_workload = setup.total();

  marking_params mp;
  mp.sigma_mark = cfg.algorithm.sigma_mark;
  if (cfg.algorithm.theta_cap) mp.theta_cap = *cfg.algorithm.theta_cap;
  mp.inverse_decay = res.inverse_decay;
  mp.alpha_lo = p.alpha_lo();
  mp.alpha_hi = p.alpha_hi();
  mp.beta_lo = p.basis.beta_lo;
  mp.beta_hi = p.basis.beta_hi;
  mp.c0 = cfg.algorithm.c0_certified ? mp.certified_c0_bound()
                                     : cfg.algorithm.c0;
  res.params = mp;

  adapt_options opt;
  opt.epsilon = cfg.algorithm.epsilon;
  opt.max_iter = cfg.algorithm.max_iter;
  opt.solver_tol = cfg.algorithm.solver_tol;
  opt.exact_u = res.u_exact ? &*res.u_exact : nullptr;

  switch (cfg.algorithm.kind) {
    case algorithm_spec::kind_t::dyn_gal:
      res.trace = dyn_gal(p, s, mp, opt);
      break;
    case algorithm_spec::kind_t::static_e_dorfler:
      res.trace = static_e_dorfler_gal(p, s, mp, cfg.algorithm.theta, opt);
      break;
    case algorithm_spec::kind_t::plain_dorfler:
      res.trace = plain_dorfler_gal(p, s, mp, cfg.algorithm.theta, opt);
      break;
  }
  return res;
}

inline json result_to_json(const experiment_result& res) {
  json out{{"config", config_to_json(res.config)},
           {"decay",
            {{"forward", decay_to_json(res.forward_decay)},
             {"inverse", decay_to_json(res.inverse_decay)}}},
           {"marking",
            {{"c0", res.params.c0},
             {"certified", res.params.certified()},
             {"certified_c0_bound", res.params.certified_c0_bound()}}},
           {"setup_workload", res.setup_workload},
           {"trace", trace_to_json(res.trace)}};
  if (res.u_exact) {
    // sparsity fit of the manufactured solution and of the logged run
    const std::vector<double> e = best_n_term(*res.u_exact);
    fit_report u_fit =
        fit_decay_model(e, res.config.dim, fit_report::model_t::gevrey);
    out["sparsity"] = {{"u_class_fit", fit_report_to_json(u_fit)}};
  }
  if (!res.trace.records.empty()) {
    std::vector<std::pair<double, double>> pts;
    pts.emplace_back(0.0, res.trace.r0_norm);
    for (const auto& r : res.trace.records)
      pts.emplace_back(double(r.card_total), r.residual_norm);
    // rate fit needs enough genuinely positive points
    std::size_t positive = 0;
    for (const auto& [n, e] : pts)
      if (e > res.trace.r0_norm * 1e-13) ++positive;
    if (positive >= 6) {
      fit_report rate_fit = fit_decay_model(pts, res.config.dim,
                                            fit_report::model_t::gevrey);
      out["sparsity"]["rate_fit"] = fit_report_to_json(rate_fit);
    }
  }
  return out;
}

// Writes trace artifacts; returns the process exit status for the run.
inline int write_experiment_outputs(const experiment_result& res) {
  namespace fs = std::filesystem;
  fs::create_directories(res.config.out_dir);
  const std::string base = res.config.out_dir + "/trace";
  if (res.config.write_csv) write_file(base + ".csv", trace_to_csv(res.trace));
  if (res.config.write_json)
    write_file(base + ".json", result_to_json(res).dump(2) + "\n");

  switch (res.trace.reason) {
    case termination_reason::tolerance_met:
    case termination_reason::trivial_rhs:
      return 0;
    case termination_reason::max_iter:
      return 2;
    case termination_reason::window_saturated:
      return 3;
  }
  return 2;
}

// Row-aligned per-iteration table across several runs of one problem.
inline std::string compare_to_csv(
    const std::vector<experiment_result>& results,
    const std::vector<std::string>& labels) {
  std::string out = "n";
  for (const auto& label : labels)
    out += "," + label + "_theta," + label + "_J," + label + "_card_total," +
           label + "_residual_ratio," + label + "_energy_error," + label +
           "_workload";
  out += '\n';
  std::size_t rows = 0;
  for (const auto& r : results) rows = std::max(rows, r.trace.records.size());
  for (std::size_t i = 0; i < rows; ++i) {
    out += std::to_string(i);
    for (const auto& r : results) {
      if (i < r.trace.records.size()) {
        const auto& rec = r.trace.records[i];
        out += ',' + format_double(rec.theta_n) + ',' +
               std::to_string(rec.j_n) + ',' + std::to_string(rec.card_total) +
               ',' + format_double(rec.residual_ratio) + ',';
        if (rec.energy_error) out += format_double(*rec.energy_error);
        out += ',' + std::to_string(rec.workload_cumulative);
      } else {
        out += ",,,,,,";
      }
    }
    out += '\n';
  }
  return out;
}

inline bool same_problem_block(const experiment_config& a,
                               const experiment_config& b) {
  const json ja = config_to_json(a), jb = config_to_json(b);
  return ja.at("problem") == jb.at("problem") &&
         ja.at("rhs") == jb.at("rhs") &&
         ja.at("window") == jb.at("window") && a.seed == b.seed;
}

}  // namespace dyngal
