#pragma once

// CSV and JSON serialization for reports.
//
// Every report carries its resolved statistical configuration and master
// seed. CSV files start with '#' comment lines (the config echo as compact
// JSON), then a header row; numbers print in shortest round-trip form, so a
// given report serializes to identical bytes on every run. Undefined ratios
// are "nan" in CSV and null in JSON.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include <json.hpp>

#include "gwmd/experiments.hpp"
#include "gwmd/inference.hpp"
#include "gwmd/offspring.hpp"
#include "gwmd/stats.hpp"

namespace gwmd {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form ("nan" for NaN).
inline std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

namespace detail {

inline json json_number_or_null(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tail-ratio report
// ---------------------------------------------------------------------------

inline json config_json(const TailRatioReport& rep) {
  json cfg;
  cfg["law"] = rep.law;
  cfg["statistic"] = to_string(rep.statistic);
  cfg["n0"] = rep.n0;
  cfg["n"] = rep.n;
  cfg["replicates"] = rep.replicates;
  cfg["x_grid"] = rep.x_grid;
  cfg["master_seed"] = rep.master_seed;
  return cfg;
}

inline json to_json(const TailRatioReport& rep) {
  const auto rows_json = [](const std::vector<TailRatioRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
      json r;
      r["x"] = row.x;
      r["count"] = row.count;
      r["emp_tail"] = row.emp_tail;
      r["phi_tail"] = row.phi_tail;
      r["ratio"] = detail::json_number_or_null(row.ratio);
      r["log_abs_ratio"] = detail::json_number_or_null(row.log_abs_ratio);
      r["mc_se"] = row.mc_se;
      r["reliable"] = row.reliable;
      arr.push_back(std::move(r));
    }
    return arr;
  };
  json j;
  j["report"] = "tail_ratio";
  j["config"] = config_json(rep);
  j["upper"] = rows_json(rep.upper);
  j["lower"] = rows_json(rep.lower);
  return j;
}

inline void write_csv(const TailRatioReport& rep, std::ostream& os) {
  os << "# gwmd tail-ratio report\n";
  os << "# config: " << config_json(rep).dump() << "\n";
  os << "tail,x,count,emp_tail,phi_tail,ratio,log_abs_ratio,mc_se,reliable\n";
  const auto emit = [&os](const char* side, const TailRatioRow& r) {
    os << side << "," << format_number(r.x) << "," << r.count << ","
       << format_number(r.emp_tail) << "," << format_number(r.phi_tail) << ","
       << format_number(r.ratio) << "," << format_number(r.log_abs_ratio) << ","
       << format_number(r.mc_se) << "," << (r.reliable ? 1 : 0) << "\n";
  };
  for (const auto& r : rep.upper) emit("upper", r);
  for (const auto& r : rep.lower) emit("lower", r);
}

// ---------------------------------------------------------------------------
// MDP report
// ---------------------------------------------------------------------------

inline json config_json(const MdpReport& rep) {
  json cfg;
  cfg["law"] = rep.law;
  cfg["statistic"] = to_string(rep.statistic);
  cfg["n0"] = rep.n0;
  cfg["a_exponent"] = rep.a_exponent;
  cfg["x0"] = rep.x0;
  cfg["n_sweep"] = rep.n_sweep;
  cfg["replicates"] = rep.replicates;
  cfg["master_seed"] = rep.master_seed;
  return cfg;
}

inline json to_json(const MdpReport& rep) {
  json j;
  j["report"] = "mdp";
  j["config"] = config_json(rep);
  json rows = json::array();
  for (const auto& row : rep.rows) {
    json r;
    r["n"] = row.n;
    r["a_n"] = row.a_n;
    r["threshold"] = row.threshold;
    r["count"] = row.count;
    r["emp_log_rate"] = detail::json_number_or_null(row.emp_log_rate);
    r["target"] = row.target;
    r["gap"] = detail::json_number_or_null(row.gap);
    r["estimable"] = row.estimable;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline void write_csv(const MdpReport& rep, std::ostream& os) {
  os << "# gwmd mdp report\n";
  os << "# config: " << config_json(rep).dump() << "\n";
  os << "n,a_n,threshold,count,emp_log_rate,target,gap\n";
  for (const auto& r : rep.rows) {
    os << r.n << "," << format_number(r.a_n) << "," << format_number(r.threshold) << ","
       << r.count << "," << format_number(r.emp_log_rate) << "," << format_number(r.target)
       << "," << format_number(r.gap) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Coverage report
// ---------------------------------------------------------------------------

inline json config_json(const CoverageReport& rep) {
  json cfg;
  cfg["law"] = rep.law;
  cfg["method"] = to_string(rep.method);
  if (rep.width_mode) {
    cfg["width_mode"] = to_string(*rep.width_mode);
  } else {
    cfg["width_mode"] = nullptr;
  }
  cfg["n0"] = rep.n0;
  cfg["n"] = rep.n;
  cfg["kappa"] = rep.kappa;
  cfg["replicates"] = rep.replicates;
  cfg["master_seed"] = rep.master_seed;
  return cfg;
}

inline json to_json(const CoverageReport& rep) {
  json j;
  j["report"] = "coverage";
  j["config"] = config_json(rep);
  j["replicates"] = rep.replicates;
  j["hits"] = rep.hits;
  j["coverage"] = rep.coverage;
  j["nominal"] = rep.nominal;
  j["band_lo"] = rep.band_lo;
  j["band_hi"] = rep.band_hi;
  return j;
}

inline void write_csv(const CoverageReport& rep, std::ostream& os) {
  os << "# gwmd coverage report\n";
  os << "# config: " << config_json(rep).dump() << "\n";
  os << "replicates,hits,coverage,nominal,band_lo,band_hi\n";
  os << rep.replicates << "," << rep.hits << "," << format_number(rep.coverage) << ","
     << format_number(rep.nominal) << "," << format_number(rep.band_lo) << ","
     << format_number(rep.band_hi) << "\n";
}

// ---------------------------------------------------------------------------
// Small-population report
// ---------------------------------------------------------------------------

inline json config_json(const SmallPopReport& rep) {
  json cfg;
  cfg["law"] = rep.law;
  cfg["replicates"] = rep.replicates;
  cfg["master_seed"] = rep.master_seed;
  return cfg;
}

inline json to_json(const SmallPopReport& rep) {
  json j;
  j["report"] = "smallpop";
  j["config"] = config_json(rep);
  json rows = json::array();
  for (const auto& row : rep.rows) {
    json r;
    r["n"] = row.n;
    r["count"] = row.count;
    r["freq"] = row.freq;
    r["bound"] = row.bound;
    r["se"] = row.se;
    r["ok"] = row.ok;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline void write_csv(const SmallPopReport& rep, std::ostream& os) {
  os << "# gwmd smallpop report\n";
  os << "# config: " << config_json(rep).dump() << "\n";
  os << "n,count,freq,bound,se,ok\n";
  for (const auto& r : rep.rows) {
    os << r.n << "," << r.count << "," << format_number(r.freq) << ","
       << format_number(r.bound) << "," << format_number(r.se) << "," << (r.ok ? 1 : 0)
       << "\n";
  }
}

// ---------------------------------------------------------------------------
// Condition report
// ---------------------------------------------------------------------------

inline json to_json(const ConditionReport& rep) {
  json j;
  j["condition"] = to_string(rep.condition);
  json params;
  for (const auto& [name, value] : rep.parameters) params[name] = value;
  j["parameters"] = std::move(params);
  j["passed"] = rep.passed;
  j["divergent"] = rep.divergent;
  if (rep.value) {
    j["value"] = *rep.value;
  } else {
    j["value"] = nullptr;
  }
  j["scan_limit"] = rep.scan_limit;
  if (!rep.per_order.empty()) {
    json rows = json::array();
    for (const auto& row : rep.per_order) {
      json r;
      r["order"] = row.order;
      r["lhs"] = row.lhs;
      r["rhs"] = row.rhs;
      r["ok"] = row.lhs <= row.rhs * (1.0 + detail::kBernsteinCompareSlack);
      rows.push_back(std::move(r));
    }
    j["per_order"] = std::move(rows);
  }
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

inline void write_csv(const ConditionReport& rep, std::ostream& os) {
  os << "# gwmd check report\n";
  os << "# condition: " << to_string(rep.condition) << "\n";
  for (const auto& [name, value] : rep.parameters) {
    os << "# " << name << ": " << format_number(value) << "\n";
  }
  os << "# passed: " << (rep.passed ? 1 : 0) << "\n";
  if (!rep.per_order.empty()) {
    os << "order,lhs,rhs,ok\n";
    for (const auto& row : rep.per_order) {
      os << row.order << "," << format_number(row.lhs) << "," << format_number(row.rhs)
         << ","
         << (row.lhs <= row.rhs * (1.0 + detail::kBernsteinCompareSlack) ? 1 : 0) << "\n";
    }
  } else {
    os << "condition,passed,divergent,value\n";
    os << to_string(rep.condition) << "," << (rep.passed ? 1 : 0) << ","
       << (rep.divergent ? 1 : 0) << ","
       << (rep.value ? format_number(*rep.value) : std::string("nan")) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Confidence interval
// ---------------------------------------------------------------------------

inline json to_json(const ConfidenceInterval& ci) {
  json j;
  j["method"] = to_string(ci.method);
  j["lo"] = ci.lo;
  j["hi"] = ci.hi;
  j["level"] = ci.level;
  if (ci.width_mode) {
    j["width_mode"] = to_string(*ci.width_mode);
  } else {
    j["width_mode"] = nullptr;
  }
  j["quantile_used"] = ci.quantile_used;
  return j;
}

inline void write_csv(const ConfidenceInterval& ci, std::ostream& os) {
  os << "method,lo,hi,level,width_mode,quantile_used\n";
  os << to_string(ci.method) << "," << format_number(ci.lo) << "," << format_number(ci.hi)
     << "," << format_number(ci.level) << ","
     << (ci.width_mode ? to_string(*ci.width_mode) : "") << ","
     << format_number(ci.quantile_used) << "\n";
}

}  // namespace gwmd
