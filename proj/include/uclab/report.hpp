#pragma once

// Machine-readable reports. Objects keep insertion order, doubles are printed
// with 17 significant digits and non-finite values become the strings "inf",
// "-inf" and "nan", so a report parses back to an equal object and identical
// runs give identical bytes.

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uclab/counterexample.hpp"
#include "uclab/coupling.hpp"
#include "uclab/families.hpp"
#include "uclab/measure.hpp"
#include "uclab/set_dist.hpp"

namespace uclab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolkitName = "uclab";
inline constexpr const char* kToolkitVersion = "0.1.0";

inline Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

template <typename T>
Json optional_json(const std::optional<T>& x) {
  if (!x) return nullptr;
  if constexpr (std::is_same_v<T, double>) {
    return number(*x);
  } else {
    return Json(*x);
  }
}

namespace detail {

inline void write_string(std::ostream& out, const std::string& s) {
  out << Json(s).dump();
}

inline void write_json(std::ostream& out, const Json& j, int indent, int depth) {
  const auto pad = [&](int d) {
    if (indent >= 0) out << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ',';
        first = false;
        pad(depth + 1);
        write_string(out, it.key());
        out << (indent >= 0 ? ": " : ":");
        write_json(out, it.value(), indent, depth + 1);
      }
      pad(depth);
      out << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out << ',';
        first = false;
        pad(depth + 1);
        write_json(out, v, indent, depth + 1);
      }
      pad(depth);
      out << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        write_json(out, number(x), indent, depth);
        return;
      }
      out << format_double(x);
      return;
    }
    default:
      out << j.dump();
  }
}

inline std::string csv_field(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + '"';
  }
  if (j.is_null()) return "";
  std::ostringstream s;
  write_json(s, j, -1, 0);
  return s.str();
}

inline void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, Json>>& out) {
  if (j.is_object() && !j.empty()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else if (j.is_array() && !j.empty()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else {
    out.emplace_back(prefix, j);
  }
}

}  // namespace detail

/// Two-space indented JSON with a trailing newline.
inline void write_json(std::ostream& out, const Json& j) {
  detail::write_json(out, j, 2, 0);
  out << '\n';
}

inline std::string to_json_string(const Json& j) {
  std::ostringstream s;
  write_json(s, j);
  return s.str();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<Json>> rows;
};

inline void write_csv(std::ostream& out, const CsvTable& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::csv_field(row[i]);
    out << '\n';
  }
}

/// key,value lines for every leaf of a JSON document.
inline CsvTable flatten_to_csv(const Json& j) {
  std::vector<std::pair<std::string, Json>> leaves;
  detail::flatten(j, "", leaves);
  CsvTable t{{"key", "value"}, {}};
  for (auto& [k, v] : leaves) t.rows.push_back({Json(k), v});
  return t;
}

struct Report {
  std::string command;
  Json config = Json::object();
  Json result = Json::object();
  std::vector<std::string> failures;
  std::optional<CsvTable> table;  // sweep table used for CSV output
  std::optional<double> wall_seconds;

  [[nodiscard]] bool passed() const { return failures.empty(); }

  [[nodiscard]] Json to_json() const {
    Json j;
    j["toolkit"] = kToolkitName;
    j["version"] = kToolkitVersion;
    j["command"] = command;
    j["config"] = config;
    if (wall_seconds) j["wall_seconds"] = *wall_seconds;
    j["passed"] = passed();
    j["failures"] = failures;
    j["result"] = result;
    return j;
  }
};

enum class ReportFormat { Json, Csv };

inline void emit_report(std::ostream& out, const Report& r, ReportFormat format) {
  if (format == ReportFormat::Json) {
    write_json(out, r.to_json());
  } else if (r.table) {
    write_csv(out, *r.table);
  } else {
    write_csv(out, flatten_to_csv(r.to_json()));
  }
}

// ---------------------------------------------------------------------------
// Module reports as JSON

inline Json to_json(const DiscreteMeasure& mu) {
  Json atoms = Json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"location", number(a.location)}, {"weight", number(a.weight)}});
  return atoms;
}

inline Json to_json(const JointMeasure& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols.size(); ++j) row.push_back(number(m.at(i, j)));
    rows.push_back(row);
  }
  return {{"rows", to_json(m.rows)}, {"cols", to_json(m.cols)}, {"weights", rows}};
}

inline std::string mask_hex(SubsetMask s) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%x", s.bits);
  return buf;
}

inline Json to_json(const Family& f) {
  Json sets = Json::array();
  for (auto s : f.sets()) sets.push_back(mask_hex(s));
  return {{"n", f.n()}, {"sets", sets}};
}

inline Json to_json(const Theorem1Report& r) {
  return {{"n", r.n},
          {"union_closed_families", r.union_closed_families},
          {"families_checked", r.families_checked},
          {"empty_family_excluded", r.empty_family_excluded},
          {"min_best_proportion", number(r.min_best_proportion)},
          {"golden_threshold", number(kGoldenThreshold)},
          {"witness", r.witness ? to_json(*r.witness) : Json(nullptr)},
          {"witness_element", r.witness_element},
          {"holds", r.holds}};
}

inline Json to_json(const ChainDiagnostics& r) {
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"element", s.element},
                     {"marginal", number(s.marginal)},
                     {"skipped", s.skipped},
                     {"union_step", number(s.union_step)},
                     {"joint_step", number(s.joint_step)},
                     {"single_step", number(s.single_step)},
                     {"slack", number(s.slack)}});
  }
  return {{"entropy", number(r.entropy)},
          {"union_entropy", number(r.union_entropy)},
          {"union_not_above", r.union_not_above},
          {"u", number(r.u)},
          {"lambda", optional_json(r.lambda)},
          {"min_step_slack", number(r.min_step_slack)},
          {"steps", steps}};
}

inline Json to_json(const Theorem2Report& r) {
  return {{"u", number(r.u)},     {"lambda", number(r.lambda)}, {"lhs", number(r.lhs)},
          {"rhs", number(r.rhs)}, {"slack", number(r.slack)},   {"tight", r.tight}};
}

inline Json to_json(const LocalSearchOptions& o) {
  return {{"atom_grid", o.atom_grid},
          {"restarts", o.restarts},
          {"seed", o.seed},
          {"max_iterations", o.max_iterations},
          {"max_start_atoms", o.max_start_atoms}};
}

inline Json to_json(const CertificateReport& r, bool include_rows) {
  Json j{{"worst_scan_slack", number(r.worst_scan_slack)},
         {"worst_u", number(r.worst_u)},
         {"slack_at_golden", number(r.slack_at_golden)},
         {"worst_search_value", number(r.worst_search_value)},
         {"max_search_gain", number(r.max_search_gain)},
         {"total_restarts", r.total_restarts},
         {"scan_tolerance", number(kScanTolerance)},
         {"search_tolerance", number(kSearchTolerance)},
         {"scan_passed", r.scan_passed},
         {"search_passed", r.search_passed}};
  if (include_rows) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"u", number(row.u)},
                      {"lambda", number(row.lambda)},
                      {"scan_min", number(row.scan_min)},
                      {"argmin_v", number(row.argmin_v)},
                      {"search_best", optional_json(row.search_best)},
                      {"search_concentrated", optional_json(row.search_concentrated)}});
    }
    j["rows"] = rows;
  }
  return j;
}

inline CsvTable certificate_table(const CertificateReport& r) {
  CsvTable t{{"u", "lambda", "scan_min", "argmin_v", "search_best", "search_concentrated"}, {}};
  for (const auto& row : r.rows) {
    t.rows.push_back({number(row.u), number(row.lambda), number(row.scan_min), number(row.argmin_v),
                      optional_json(row.search_best), optional_json(row.search_concentrated)});
  }
  return t;
}

inline Json to_json(const CounterexampleParams& p) {
  return {{"u_bar", number(p.u_bar)}, {"u", number(p.u)},         {"d", number(p.d)},
          {"theta", number(p.theta)}, {"n", p.n},                  {"truncation", p.K()}};
}

inline Json to_json(const CounterexampleReport& r) {
  Json j{{"params", to_json(r.params)},
         {"marginal", number(r.marginal)},
         {"marginal_truncated", number(r.marginal_truncated)},
         {"admissible", r.admissible},
         {"ratio_at_u_bar", number(r.ratio_at_u_bar)},
         {"entropy_lower_bound", number(r.entropy_lower)},
         {"entropy_upper_bound", number(r.entropy_upper)},
         {"k_prime_entropy", number(r.k_prime_entropy)},
         {"union_entropy_upper_bound", number(r.union_upper)},
         {"ratio_bound", number(r.ratio)},
         {"ratio_below_d", r.ratio_below_d},
         {"kl_upper_bound", number(r.kl_bound)},
         {"single_factor_inflation", number(r.single_factor_inflation)}};
  if (r.exact) {
    j["exact"] = {{"entropy", number(r.exact->entropy)},
                  {"union_entropy", number(r.exact->union_entropy)},
                  {"kl", number(r.exact->kl)},
                  {"marginal", number(r.exact->marginal)},
                  {"within_bounds", r.exact->within_bounds}};
  } else {
    j["exact"] = nullptr;
  }
  return j;
}

inline Json to_json(const WorstCouplingReport& r) {
  return {{"value", number(r.value)},
          {"independent_value", number(r.independent_value)},
          {"pivots", r.pivots},
          {"coupling", to_json(r.coupling)}};
}

inline Json to_json(const DeltaSearchOptions& o) {
  return {{"delta_max", number(o.delta_max)},
          {"delta_steps", o.delta_steps},
          {"below_steps", o.below_steps},
          {"low_steps", o.low_steps},
          {"high_steps", o.high_steps},
          {"three_atom_steps", o.three_atom_steps},
          {"three_weight_steps", o.three_weight_steps},
          {"search_caps", o.search_caps},
          {"search", to_json(o.search)}};
}

inline Json to_json(const DeltaSearchReport& r) {
  const auto witness = [&](const std::optional<DiscreteMeasure>& mu) -> Json {
    if (!mu) return nullptr;
    Json j{{"measure", to_json(*mu)}, {"mean", number(mean(*mu))}};
    if (r.alpha > 0.0) j["worst_coupling"] = to_json(worst_coupling_value(*mu));
    return j;
  };
  return {{"alpha", number(r.alpha)},
          {"delta", number(r.delta)},
          {"failed", r.failed},
          {"violation_gap", optional_json(r.violation_gap)},
          {"binding", witness(r.binding_measure)},
          {"binding_slack", r.binding_measure ? number(r.binding_slack) : Json(nullptr)},
          {"tightest", witness(r.tightest_measure)},
          {"tightest_slack", r.tightest_measure ? number(r.tightest_slack) : Json(nullptr)},
          {"measures_scanned", r.measures_scanned},
          {"degenerate_skipped", r.degenerate_skipped},
          {"slack_threshold", number(kDeltaSlackThreshold)},
          {"scope", "estimate over the scanned measure class only"},
          {"grid", to_json(r.options)}};
}

inline Json to_json(const CouplingDpReport& r) {
  Json joint = Json::array();
  for (const auto& p : r.joint) joint.push_back({mask_hex(p.a), mask_hex(p.c), number(p.probability)});
  return {{"convention", to_string(r.convention)},
          {"entropy", number(r.entropy)},
          {"coupled_union_entropy", number(r.coupled_union_entropy)},
          {"independent_union_entropy", number(r.independent_union_entropy)},
          {"coupled_minus_independent", number(r.coupled_union_entropy - r.independent_union_entropy)},
          {"marginal_error_a", number(r.marginal_error_a)},
          {"marginal_error_c", number(r.marginal_error_c)},
          {"marginals_uniform", r.marginals_uniform},
          {"undefined_rates", r.undefined_rates},
          {"joint", joint}};
}

}  // namespace uclab
