#pragma once

// Per-check verification records and their CSV form.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qortho {

/// Outcome of one check. Exact checks pass only with residual 0; numeric
/// checks pass when residual < tolerance, so a tolerance of 0 fails them.
struct VerificationReport {
  std::string check_id;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  double residual = 0.0;
  double tolerance = 0.0;
  bool exact = false;
  bool relative = false;  ///< residual is |lhs - rhs| / max(1, |rhs|)
  double truncation_bound = 0.0;
  bool pass = false;

  static VerificationReport numeric(std::string id, nlohmann::ordered_json params, double residual, double tol,
                                    double truncation_bound = 0.0, bool relative = false) {
    VerificationReport r;
    r.check_id = std::move(id);
    r.params = params.is_null() ? nlohmann::ordered_json::object() : std::move(params);
    r.residual = residual;
    r.tolerance = tol;
    r.relative = relative;
    r.truncation_bound = truncation_bound;
    r.pass = std::isfinite(residual) && residual < tol;
    return r;
  }

  /// An exact comparison; `mismatches` counts the failed equalities.
  static VerificationReport exact_check(std::string id, nlohmann::ordered_json params, long mismatches) {
    VerificationReport r;
    r.check_id = std::move(id);
    r.params = params.is_null() ? nlohmann::ordered_json::object() : std::move(params);
    r.residual = static_cast<double>(mismatches);
    r.exact = true;
    r.pass = mismatches == 0;
    return r;
  }

  /// A check that could not be carried out (nonconvergence and the like).
  static VerificationReport failed(std::string id, nlohmann::ordered_json params, double tol, const std::string& why) {
    VerificationReport r;
    r.check_id = std::move(id);
    r.params = params.is_null() ? nlohmann::ordered_json::object() : std::move(params);
    r.params["error"] = why;
    r.residual = std::numeric_limits<double>::infinity();
    r.tolerance = tol;
    return r;
  }
};

/// |lhs - rhs| scaled by max(1, |rhs|).
inline double relative_residual(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

inline void sort_reports(std::vector<VerificationReport>& v) {
  std::stable_sort(v.begin(), v.end(),
                   [](const VerificationReport& a, const VerificationReport& b) { return a.check_id < b.check_id; });
}

inline bool all_pass(const std::vector<VerificationReport>& v) {
  return std::all_of(v.begin(), v.end(), [](const VerificationReport& r) { return r.pass; });
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  nlohmann::json j = v;
  return j.dump();
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

/// Columns: check_id, params_json, residual, tolerance, pass.
inline std::string to_csv(const std::vector<VerificationReport>& reports, bool header = true) {
  std::ostringstream os;
  if (header) os << "check_id,params_json,residual,tolerance,pass\n";
  for (const auto& r : reports) {
    os << r.check_id << ',' << detail::csv_quote(r.params.dump()) << ',' << format_double(r.residual) << ','
       << format_double(r.tolerance) << ',' << (r.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

inline nlohmann::ordered_json to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["check_id"] = r.check_id;
  j["params"] = r.params;
  j["residual"] = r.residual;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  if (r.truncation_bound > 0.0) j["truncation_bound"] = r.truncation_bound;
  return j;
}

}  // namespace qortho
