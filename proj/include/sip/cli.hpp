#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sip/instance_io.hpp"
#include "sip/lower_bounding.hpp"
#include "sip/trace.hpp"

namespace sip {

// Exit codes: 0 for a definitive answer (optimal or certified infeasible),
// 2 when the iteration budget ran out, 3 for solver failures, 64 for usage
// and input errors.
inline constexpr int kExitDefinitive = 0;
inline constexpr int kExitIterationCap = 2;
inline constexpr int kExitFailure = 3;
inline constexpr int kExitUsage = 64;

struct SolveOptions {
  std::string instance_path;         // mutually exclusive with builtin
  std::string builtin;               // "cex"
  std::string oracle = "exact";      // exact | alpha | scripted
  double alpha = 0.5;
  std::vector<double> map_entries;   // row-major matrix then offset; empty =>
                                     // identity map
  double eps_feas = 1e-6;
  double eps_obj = 1e-6;
  int max_iter = 100;
  std::string trace_path;
  bool quiet = false;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string point_text(const PointVec& p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ", ";
    out += format_number(p[i]);
  }
  return out + ")";
}

}  // namespace detail

inline int run_solve(const SolveOptions& opt, std::ostream& out,
                     std::ostream& err) {
  // ---- input selection ----
  if (opt.instance_path.empty() == opt.builtin.empty()) {
    err << "error: pass exactly one of --instance or --builtin\n";
    return kExitUsage;
  }
  std::unique_ptr<SipInstance> inst;
  try {
    if (!opt.builtin.empty()) {
      if (opt.builtin != "cex") {
        err << "error: unknown builtin '" << opt.builtin
            << "' (available: cex)\n";
        return kExitUsage;
      }
      inst = std::make_unique<SipInstance>(builtin_counterexample());
    } else {
      inst = std::make_unique<SipInstance>(
          load_instance(detail::read_file(opt.instance_path)));
    }
  } catch (const Error& e) {
    err << "error: " << opt.instance_path
        << (opt.instance_path.empty() ? "" : ": ") << e.what() << "\n";
    return kExitUsage;
  }

  // ---- oracle selection ----
  std::unique_ptr<LlpOracle> oracle;
  try {
    if (opt.oracle == "exact") {
      oracle = std::make_unique<ExactOracle>();
    } else if (opt.oracle == "alpha") {
      oracle = std::make_unique<AlphaOracle>(AlphaConfig(opt.alpha));
    } else if (opt.oracle == "scripted") {
      const std::size_t n = inst->x_dim();
      const std::size_t m = inst->y_dim();
      if (opt.map_entries.empty()) {
        if (n != m) {
          err << "error: --map is required when dim(X) != dim(Y)\n";
          return kExitUsage;
        }
        oracle = std::make_unique<ScriptedOracle>(AffineMap::identity(m));
      } else {
        if (opt.map_entries.size() != m * n + m) {
          err << "error: --map needs " << m * n + m << " entries ("
              << m << "x" << n << " matrix then " << m << " offsets)\n";
          return kExitUsage;
        }
        std::vector<double> a(opt.map_entries.begin(),
                              opt.map_entries.begin() +
                                  static_cast<std::ptrdiff_t>(m * n));
        std::vector<double> b(opt.map_entries.begin() +
                                  static_cast<std::ptrdiff_t>(m * n),
                              opt.map_entries.end());
        oracle = std::make_unique<ScriptedOracle>(
            AffineMap(m, n, std::move(a), std::move(b)));
      }
    } else {
      err << "error: unknown oracle '" << opt.oracle
          << "' (available: exact, alpha, scripted)\n";
      return kExitUsage;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  SipConfig cfg;
  cfg.eps_feas = opt.eps_feas;
  cfg.max_iter = opt.max_iter;
  cfg.opt.eps_obj = opt.eps_obj;
  try {
    cfg.validate();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  // ---- run ----
  SolveReport rep;
  try {
    rep = run_lower_bounding(*inst, *oracle, cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  if (!opt.quiet) {
    for (const IterationRecord& rec : rep.iterations) {
      out << "k=" << rec.k
          << "  f_lbd=" << detail::format_number(rec.lower_bound);
      if (rec.minimizer) out << "  x=" << detail::point_text(*rec.minimizer);
      if (rec.oracle) {
        if (rec.oracle->feasible())
          out << "  oracle=feasible  certified_max="
              << detail::format_number(rec.oracle->certified_max);
        else
          out << "  oracle=violation  y=" << detail::point_text(rec.oracle->y)
              << "  g=" << detail::format_number(rec.oracle->g_value);
      }
      out << "\n";
    }
  }
  out << "instance: " << inst->name << "\n";
  out << "oracle: " << oracle->name() << "\n";
  out << "status: " << to_string(rep.status) << "\n";
  out << "iterations: " << rep.iterations.size() << "\n";
  out << "final lower bound: " << detail::format_number(rep.final_lower_bound)
      << "\n";
  if (rep.optimal_point)
    out << "optimal point: " << detail::point_text(*rep.optimal_point) << "\n";
  if (!rep.note.empty()) out << "note: " << rep.note << "\n";

  if (!opt.trace_path.empty()) {
    try {
      write_trace_file(rep, opt.trace_path);
      if (!opt.quiet) out << "trace written to " << opt.trace_path << "\n";
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }

  switch (rep.status) {
    case SipStatus::ConvergedOptimal:
    case SipStatus::InfeasibleSIP:
      return kExitDefinitive;
    case SipStatus::MaxIterReached:
      return kExitIterationCap;
    case SipStatus::SubsolverFailure:
      return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace sip
