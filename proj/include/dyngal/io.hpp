#pragma once

// Serialization: canonical text forms, JSON for index sets / coefficient
// vectors / traces / fit reports, the pinned trace CSV schema, and the
// coordinate-format matrix export.  CSV uses '.' decimals, ',' separators
// and a mandatory header row; all numeric formatting is locale-independent
// and byte-deterministic.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyngal/adapt.hpp"
#include "dyngal/basis.hpp"
#include "dyngal/multi_index.hpp"
#include "dyngal/operator.hpp"
#include "dyngal/sparsity.hpp"

namespace dyngal {

using json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline json index_set_to_json(const index_set& s) {
  json arr = json::array();
  for (const auto& k : s) arr.push_back(k.to_string());
  return arr;
}

inline index_set index_set_from_json(const json& arr) {
  std::vector<multi_index> ks;
  for (const auto& item : arr)
    ks.push_back(multi_index::parse(item.get<std::string>()));
  return index_set(std::move(ks));
}

// Coefficient vectors serialize as sorted arrays of {index, re, im}.
template <class Tag>
json vector_to_json(const sparse_vector<Tag>& v) {
  json arr = json::array();
  for (const auto& [k, val] : v)
    arr.push_back(json{{"index", k.to_string()},
                       {"re", val.real()},
                       {"im", val.imag()}});
  return arr;
}

template <class Tag>
sparse_vector<Tag> vector_from_json(const json& arr,
                                    const basis_descriptor& basis) {
  sparse_vector<Tag> v(basis);
  for (const auto& item : arr) {
    const multi_index k =
        multi_index::parse(item.at("index").get<std::string>());
    v.set(k, complex(item.at("re").get<double>(),
                     item.value("im", 0.0)));
  }
  return v;
}

inline json decay_to_json(const decay_estimate& d) {
  json out{{"kind", d.kind == decay_estimate::kind_t::forward ? "forward"
                                                              : "inverse"},
           {"c", d.c},
           {"fit_residual", d.fit_residual},
           {"diagonal", d.diagonal}};
  if (d.diagonal)
    out["eta"] = "inf";
  else
    out["eta"] = d.eta;
  return out;
}

inline json fit_report_to_json(const fit_report& f) {
  json out{{"model", f.model == fit_report::model_t::gevrey ? "gevrey"
                                                            : "algebraic"},
           {"prefactor", f.prefactor},
           {"r_squared", f.r_squared},
           {"data_range", json::array({f.n_lo, f.n_hi})},
           {"degenerate", f.degenerate}};
  if (f.model == fit_report::model_t::gevrey) {
    out["eta"] = f.eta_fit;
    out["t"] = f.t_fit;
  } else {
    out["s"] = f.s_fit;
  }
  return out;
}

inline json record_to_json(const iteration_record& r) {
  json out{{"n", r.n},
           {"theta", r.theta_n},
           {"J", r.j_n},
           {"n_marked", r.n_marked},
           {"n_enriched", r.card_added},
           {"card_added", r.card_added},
           {"card_total", r.card_total},
           {"residual_norm", r.residual_norm},
           {"residual_ratio", r.residual_ratio},
           {"contraction_check", r.contraction_check},
           {"workload_cumulative", r.workload_cumulative},
           {"solver_iterations", r.solver_iterations}};
  if (r.energy_error)
    out["energy_error"] = *r.energy_error;
  else
    out["energy_error"] = nullptr;
  return out;
}

inline json trace_to_json(const convergence_trace& t) {
  json recs = json::array();
  for (const auto& r : t.records) recs.push_back(record_to_json(r));
  return json{{"epsilon", t.epsilon},
              {"terminated", t.terminated},
              {"termination_reason", to_string(t.reason)},
              {"workload_total", t.workload_total},
              {"r0_norm", t.r0_norm},
              {"final_cardinality", t.final_lambda.size()},
              {"records", recs}};
}

inline std::string trace_to_csv(const convergence_trace& t) {
  std::string out =
      "n,theta,J,card_added,card_total,residual_norm,residual_ratio,"
      "energy_error,contraction_check,workload_cumulative\n";
  for (const auto& r : t.records) {
    out += std::to_string(r.n) + ',' + format_double(r.theta_n) + ',' +
           std::to_string(r.j_n) + ',' + std::to_string(r.card_added) + ',' +
           std::to_string(r.card_total) + ',' +
           format_double(r.residual_norm) + ',' +
           format_double(r.residual_ratio) + ',';
    if (r.energy_error) out += format_double(*r.energy_error);
    out += ',' + format_double(r.contraction_check) + ',' +
           std::to_string(r.workload_cumulative) + '\n';
  }
  return out;
}

// One "l k re im" line per stored entry, canonical row-major order.
inline std::string stiffness_to_coordinate_text(const stiffness_window& s) {
  std::string out;
  for (const auto& [l, row] : s.rows())
    for (const auto& [k, a] : row)
      out += l.to_string() + ' ' + k.to_string() + ' ' +
             format_double(a.real()) + ' ' + format_double(a.imag()) + '\n';
  return out;
}

inline std::string error_curve_to_csv(const std::vector<double>& e) {
  std::string out = "N,E_N\n";
  for (std::size_t n = 0; n < e.size(); ++n)
    out += std::to_string(n) + ',' + format_double(e[n]) + '\n';
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace dyngal
