#pragma once

#include <cstddef>
#include <fstream>
#include <string>

#include "sip/lower_bounding.hpp"

namespace sip {

namespace detail {

// RFC-4180 style: quote a field when it contains a comma, quote or newline.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

// CSV trace of a run, one row per iteration. Columns:
//
//   k, f_lbd, incumbent_value, x1..xN, oracle_status, y1..yM, g_value,
//   g_star_estimate
//
// oracle_status is "feasible", "violation" or "none" (no oracle outcome,
// e.g. the infeasible-relaxation row). y coordinates and g_value are empty
// unless the outcome is a violation; g_star_estimate is empty when the
// oracle did not estimate the lower-level optimum (for a feasible outcome it
// carries the certified bound). Numbers print with 17 significant digits and
// infinities as "inf".
inline std::string write_trace(const SolveReport& rep) {
  std::string out = "k,f_lbd,incumbent_value";
  for (std::size_t i = 0; i < rep.x_dim; ++i)
    out += ",x" + std::to_string(i + 1);
  out += ",oracle_status";
  for (std::size_t j = 0; j < rep.y_dim; ++j)
    out += ",y" + std::to_string(j + 1);
  out += ",g_value,g_star_estimate\n";

  for (const IterationRecord& rec : rep.iterations) {
    out += std::to_string(rec.k);
    out += "," + detail::format_number(rec.lower_bound);
    out += "," + detail::format_number(rec.incumbent_value);
    for (std::size_t i = 0; i < rep.x_dim; ++i) {
      out += ",";
      if (rec.minimizer && i < rec.minimizer->size())
        out += detail::format_number((*rec.minimizer)[i]);
    }
    const OracleOutcome* o = rec.oracle ? &*rec.oracle : nullptr;
    out += "," + detail::csv_field(!o ? "none"
                                      : o->feasible() ? "feasible"
                                                      : "violation");
    for (std::size_t j = 0; j < rep.y_dim; ++j) {
      out += ",";
      if (o && !o->feasible() && j < o->y.size())
        out += detail::format_number(o->y[j]);
    }
    out += ",";
    if (o && !o->feasible()) out += detail::format_number(o->g_value);
    out += ",";
    if (o) {
      if (o->feasible())
        out += detail::format_number(o->certified_max);
      else if (o->g_star_estimate)
        out += detail::format_number(*o->g_star_estimate);
    }
    out += "\n";
  }
  return out;
}

inline void write_trace_file(const SolveReport& rep, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open trace file '" + path + "' for writing");
  const std::string text = write_trace(rep);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("failed writing trace file '" + path + "'");
}

}  // namespace sip
