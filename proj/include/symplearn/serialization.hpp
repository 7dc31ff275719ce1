#ifndef SYMPLEARN_SERIALIZATION_HPP
#define SYMPLEARN_SERIALIZATION_HPP

// JSON and CSV persistence for the library's value types.  Vectors serialize
// as flat arrays, matrices as arrays of rows (row-major); doubles round-trip
// exactly (shortest-round-trip decimal in JSON, std::to_chars in CSV).
// Records reject unknown keys so that typos in hand-written files fail loudly
// instead of being silently ignored.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "symplearn/bounds.hpp"
#include "symplearn/errors.hpp"
#include "symplearn/measurement.hpp"
#include "symplearn/phase_space.hpp"
#include "symplearn/symplectic.hpp"
#include "symplearn/tomography.hpp"

namespace symplearn {

using Json = nlohmann::json;

namespace detail {

//! Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

//! Reject keys outside the allowed set and require the mandatory ones.
inline void check_keys(const Json& j, const std::vector<std::string>& required,
                       const std::vector<std::string>& optional, const std::string& who) {
  if (!j.is_object()) throw ConfigError(who + ": expected a JSON object");
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    bool known = false;
    for (const auto& k : required)
      if (k == key) known = true;
    for (const auto& k : optional)
      if (k == key) known = true;
    if (!known) throw ConfigError(who + ": unknown key \"" + key + "\"");
  }
  for (const auto& k : required)
    if (!j.contains(k)) throw ConfigError(who + ": missing key \"" + k + "\"");
}

inline double get_number(const Json& j, const std::string& key, const std::string& who) {
  const Json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(who + ": key \"" + key + "\" must be a number");
  return v.get<double>();
}

inline std::int64_t get_integer(const Json& j, const std::string& key, const std::string& who) {
  const Json& v = j.at(key);
  if (!v.is_number_integer())
    throw ConfigError(who + ": key \"" + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t get_u64(const Json& j, const std::string& key, const std::string& who) {
  const Json& v = j.at(key);
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)))
    throw ConfigError(who + ": key \"" + key + "\" must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

inline std::string get_string(const Json& j, const std::string& key, const std::string& who) {
  const Json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(who + ": key \"" + key + "\" must be a string");
  return v.get<std::string>();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Doubles that may be non-finite (error fields of failed trials)
// ---------------------------------------------------------------------------

//! Encode a double, mapping non-finite values to the strings "inf", "-inf",
//! "nan" (JSON has no literals for them and null would not round-trip).
inline Json number_to_json(double value) {
  if (std::isfinite(value)) return Json(value);
  if (std::isnan(value)) return Json("nan");
  return Json(value > 0 ? "inf" : "-inf");
}

//! Inverse of number_to_json.
inline double number_from_json(const Json& j, const std::string& who) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError(who + ": expected a number or \"inf\"/\"-inf\"/\"nan\"");
}

// ---------------------------------------------------------------------------
// Vectors and matrices
// ---------------------------------------------------------------------------

//! Vector as a flat JSON array.
inline Json vector_to_json(const RealVector& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

//! Parse a flat JSON array of finite numbers.
inline RealVector vector_from_json(const Json& j, const std::string& who) {
  if (!j.is_array()) throw ConfigError(who + ": expected a JSON array");
  RealVector v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(who + ": entries must be numbers");
    v(i) = j[i].get<double>();
  }
  if (!v.allFinite()) throw ConfigError(who + ": entries must be finite");
  return v;
}

//! Matrix as a JSON array of rows (row-major traversal).
inline Json matrix_to_json(const RealMatrix& a) {
  Json out = Json::array();
  for (int i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < a.cols(); ++k) row.push_back(a(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

//! Parse an array of equal-length rows of finite numbers.
inline RealMatrix matrix_from_json(const Json& j, const std::string& who) {
  if (!j.is_array() || j.empty()) throw ConfigError(who + ": expected a nonempty array of rows");
  const int rows = static_cast<int>(j.size());
  if (!j[0].is_array()) throw ConfigError(who + ": rows must be arrays");
  const int cols = static_cast<int>(j[0].size());
  RealMatrix a(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
      throw ConfigError(who + ": rows must all have the same length");
    for (int k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw ConfigError(who + ": entries must be numbers");
      a(i, k) = j[i][k].get<double>();
    }
  }
  if (!a.allFinite()) throw ConfigError(who + ": entries must be finite");
  return a;
}

// ---------------------------------------------------------------------------
// States and unitaries
// ---------------------------------------------------------------------------

//! Gaussian state as {"n": modes, "mean": [...], "cov": [[...]]}.
inline Json state_to_json(const GaussianState& state) {
  return Json{{"n", state.modes()}, {"mean", vector_to_json(state.mean())},
              {"cov", matrix_to_json(state.cov())}};
}

//! Parse and re-validate a Gaussian state record.
inline GaussianState state_from_json(const Json& j) {
  detail::check_keys(j, {"n", "mean", "cov"}, {}, "state_from_json");
  const auto n = detail::get_integer(j, "n", "state_from_json");
  RealVector mean = vector_from_json(j.at("mean"), "state_from_json: mean");
  RealMatrix cov = matrix_from_json(j.at("cov"), "state_from_json: cov");
  if (mean.size() != 2 * n || cov.rows() != 2 * n)
    throw ConfigError("state_from_json: moments do not match the declared mode count");
  return GaussianState(std::move(mean), std::move(cov));
}

//! Gaussian unitary as {"m": modes, "r": [...], "S": [[...]]}.
inline Json unitary_to_json(const GaussianUnitary& g) {
  return Json{{"m", g.modes()}, {"r", vector_to_json(g.r())},
              {"S", matrix_to_json(g.s().matrix())}};
}

//! Parse a Gaussian unitary record; the matrix must pass the symplectic check.
inline GaussianUnitary unitary_from_json(const Json& j, double tol = kSymplecticTol) {
  detail::check_keys(j, {"m", "r", "S"}, {}, "unitary_from_json");
  const auto m = detail::get_integer(j, "m", "unitary_from_json");
  RealVector r = vector_from_json(j.at("r"), "unitary_from_json: r");
  RealMatrix s = matrix_from_json(j.at("S"), "unitary_from_json: S");
  if (r.size() != 2 * m || s.rows() != 2 * m)
    throw ConfigError("unitary_from_json: fields do not match the declared mode count");
  return GaussianUnitary(std::move(r), SymplecticMatrix(std::move(s), tol));
}

// ---------------------------------------------------------------------------
// Enum names
// ---------------------------------------------------------------------------

inline std::string to_string(SymplecticVariant v) {
  return v == SymplecticVariant::vacuum_shared ? "vacuum_shared" : "symmetric";
}

inline std::string to_string(DisplacementVariant v) {
  return v == DisplacementVariant::tmsv ? "tmsv" : "single_mode";
}

inline std::string to_string(Accounting a) { return a == Accounting::paper ? "paper" : "strict"; }

inline std::string to_string(SamplerMode mode) {
  switch (mode) {
    case SamplerMode::per_shot: return "per_shot";
    case SamplerMode::aggregated: return "aggregated";
    default: return "exact_mean";
  }
}

inline SymplecticVariant parse_symplectic_variant(const std::string& name) {
  if (name == "vacuum_shared") return SymplecticVariant::vacuum_shared;
  if (name == "symmetric") return SymplecticVariant::symmetric;
  throw ConfigError("parse_symplectic_variant: unknown variant \"" + name + "\"");
}

inline DisplacementVariant parse_displacement_variant(const std::string& name) {
  if (name == "tmsv") return DisplacementVariant::tmsv;
  if (name == "single_mode") return DisplacementVariant::single_mode;
  throw ConfigError("parse_displacement_variant: unknown variant \"" + name + "\"");
}

inline Accounting parse_accounting(const std::string& name) {
  if (name == "paper") return Accounting::paper;
  if (name == "strict") return Accounting::strict;
  throw ConfigError("parse_accounting: unknown mode \"" + name + "\"");
}

inline SamplerMode parse_sampler_mode(const std::string& name) {
  if (name == "per_shot") return SamplerMode::per_shot;
  if (name == "aggregated") return SamplerMode::aggregated;
  if (name == "exact_mean") return SamplerMode::exact_mean;
  throw ConfigError("parse_sampler_mode: unknown mode \"" + name + "\"");
}

// ---------------------------------------------------------------------------
// Query plans
// ---------------------------------------------------------------------------

//! Full query plan as a flat JSON object.
inline Json plan_to_json(const QueryPlan& plan) {
  return Json{{"m", plan.m},
              {"z", plan.z},
              {"n_bar", plan.n_bar},
              {"n_bar_in", plan.n_bar_in},
              {"epsilon", plan.epsilon},
              {"delta", plan.delta},
              {"eta", plan.eta},
              {"nu", plan.nu},
              {"z_in", plan.z_in},
              {"eps_S", plan.eps_S},
              {"eps_r", plan.eps_r},
              {"N_S", plan.N_S},
              {"N_r", plan.N_r},
              {"N_tot", plan.N_tot},
              {"symplectic_variant", to_string(plan.sym_variant)},
              {"displacement_variant", to_string(plan.disp_variant)}};
}

//! Inverse of plan_to_json; unknown keys rejected.
inline QueryPlan plan_from_json(const Json& j) {
  const std::string who = "plan_from_json";
  detail::check_keys(j,
                     {"m", "z", "n_bar", "n_bar_in", "epsilon", "delta", "eta", "nu", "z_in",
                      "eps_S", "eps_r", "N_S", "N_r", "N_tot", "symplectic_variant",
                      "displacement_variant"},
                     {}, who);
  QueryPlan plan;
  plan.m = static_cast<int>(detail::get_integer(j, "m", who));
  plan.z = detail::get_number(j, "z", who);
  plan.n_bar = detail::get_number(j, "n_bar", who);
  plan.n_bar_in = detail::get_number(j, "n_bar_in", who);
  plan.epsilon = detail::get_number(j, "epsilon", who);
  plan.delta = detail::get_number(j, "delta", who);
  plan.eta = detail::get_number(j, "eta", who);
  plan.nu = detail::get_number(j, "nu", who);
  plan.z_in = detail::get_number(j, "z_in", who);
  plan.eps_S = detail::get_number(j, "eps_S", who);
  plan.eps_r = detail::get_number(j, "eps_r", who);
  plan.N_S = detail::get_u64(j, "N_S", who);
  plan.N_r = detail::get_u64(j, "N_r", who);
  plan.N_tot = detail::get_u64(j, "N_tot", who);
  plan.sym_variant = parse_symplectic_variant(detail::get_string(j, "symplectic_variant", who));
  plan.disp_variant =
      parse_displacement_variant(detail::get_string(j, "displacement_variant", who));
  return plan;
}

// ---------------------------------------------------------------------------
// Sample batches
// ---------------------------------------------------------------------------

//! CSV text for a batch: header y0..y{dim-1}, one row per shot, exact decimals.
inline std::string samples_to_csv(const SampleBatch& batch) {
  std::ostringstream out;
  for (int k = 0; k < batch.dim; ++k) out << (k ? "," : "") << "y" << k;
  out << "\n";
  for (std::int64_t i = 0; i < batch.count; ++i) {
    for (int k = 0; k < batch.dim; ++k)
      out << (k ? "," : "") << detail::format_double(batch.data(i, k));
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

//! Write a file atomically: stage to a sibling temp file, then rename over.
inline void save_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("save_text_file: cannot open \"" + tmp + "\" for writing");
    out << content;
    out.flush();
    if (!out) throw ConfigError("save_text_file: write to \"" + tmp + "\" failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("save_text_file: rename to \"" + path + "\" failed: " + ec.message());
}

//! Read an entire file into a string.
inline std::string load_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_text_file: cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

//! Parse a JSON document from a file, reporting the parse position on error.
inline Json load_json_file(const std::string& path) {
  const std::string text = load_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("load_json_file: \"" + path + "\": " + e.what());
  }
}

//! Pretty-print a JSON document to a file (atomic, trailing newline).
inline void save_json_file(const std::string& path, const Json& j) {
  save_text_file(path, j.dump(2) + "\n");
}

} // namespace symplearn

#endif // SYMPLEARN_SERIALIZATION_HPP
