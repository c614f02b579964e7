#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specshift/core.hpp"
#include "specshift/coupling.hpp"
#include "specshift/hermitian.hpp"
#include "specshift/step_function.hpp"

namespace specshift {

using Json = nlohmann::json;

namespace detail {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_real(double x) {
  if (!std::isfinite(x))
    throw DomainError("serialization: non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void canonical_dump(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        canonical_dump(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        canonical_dump(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float:
      out += format_real(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

}  // namespace detail

// Deterministic text form: sorted keys (the underlying object is ordered),
// no whitespace, reals at 17 significant digits.
inline std::string canonical_json(const Json& j) {
  std::string out;
  detail::canonical_dump(j, out);
  out += '\n';
  return out;
}

// Write-then-rename so readers never observe a partial file.
inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline Json complex_to_json(Complex z) {
  return Json::array({z.real(), z.imag()});
}

inline Complex complex_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError(where + ": expected a [re, im] pair");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

// Matrices travel as {"rows", "cols", "entries"} with row-major [re, im]
// entries.
inline Json matrix_to_json(const ComplexMatrix& m) {
  Json entries = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      entries.push_back(complex_to_json(m(i, j)));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline ComplexMatrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("entries"))
    throw ParseError(where + ": expected {rows, cols, entries}");
  const int rows = j["rows"].get<int>();
  const int cols = j["cols"].get<int>();
  if (rows < 0 || cols < 0)
    throw ParseError(where + ": negative dimensions");
  const Json& entries = j["entries"];
  if (!entries.is_array() ||
      entries.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols))
    throw ParseError(where + ": entry count " +
                     std::to_string(entries.size()) + " does not match " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  ComplexMatrix m(rows, cols);
  size_t idx = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c, ++idx)
      m(r, c) = complex_from_json(entries[idx],
                                  where + ".entries[" + std::to_string(idx) + "]");
  return m;
}

// Right-closed piece listing: each row gives a breakpoint and the value on
// the piece starting there; the leading -inf row carries the left tail.
inline std::string step_function_to_csv(const StepFunction& f) {
  std::string out = "breakpoint,value\n";
  out += "-inf," + detail::format_real(f.values().front()) + "\n";
  for (size_t i = 0; i < f.breakpoints().size(); ++i)
    out += detail::format_real(f.breakpoints()[i]) + "," +
           detail::format_real(f.values()[i + 1]) + "\n";
  return out;
}

inline std::string scan_report_to_csv(const ScanReport& r) {
  std::vector<bool> flagged(r.grid.size(), false);
  for (const Violation& v : r.violations)
    if (v.index >= 0 && static_cast<size_t>(v.index) < flagged.size())
      flagged[static_cast<size_t>(v.index)] = true;
  std::string out = "s,value,violation\n";
  for (size_t i = 0; i < r.grid.size(); ++i)
    out += detail::format_real(r.grid[i]) + "," +
           detail::format_real(r.values[i]) + "," + (flagged[i] ? "1" : "0") +
           "\n";
  return out;
}

inline Json scan_report_to_json(const ScanReport& r) {
  double lo = 0.0, hi = 0.0;
  if (!r.values.empty()) {
    lo = *std::min_element(r.values.begin(), r.values.end());
    hi = *std::max_element(r.values.begin(), r.values.end());
  }
  return Json{{"points", r.grid.size()},
              {"min_value", lo},
              {"max_value", hi},
              {"violation_count", r.violations.size()},
              {"tolerance", r.tolerance}};
}

inline Json step_function_to_json(const StepFunction& f) {
  Json bps = Json::array();
  for (double b : f.breakpoints()) bps.push_back(b);
  Json vals = Json::array();
  for (double v : f.values()) vals.push_back(v);
  return Json{{"breakpoints", bps}, {"values", vals}};
}

}  // namespace specshift
