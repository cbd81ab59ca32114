#pragma once

#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sip/instance.hpp"

namespace sip {

// Line-based instance format. '#' starts a comment; blank lines are ignored;
// keys may appear in any order:
//
//   name <text>
//   xvars <N>
//   yvars <M>
//   xdom <i> <lo> <hi>       one line per x variable, i in 1..N
//   ydom <j> <lo> <hi>       one line per y variable, j in 1..M
//   objective <expression>
//   constraint <expression>

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::string_view next_token(std::string_view& rest) {
  rest = trim(rest);
  std::size_t end = 0;
  while (end < rest.size() && rest[end] != ' ' && rest[end] != '\t') ++end;
  std::string_view tok = rest.substr(0, end);
  rest.remove_prefix(end);
  return tok;
}

inline double parse_double_token(std::string_view tok, int line,
                                 const std::string& what) {
  double v = 0.0;
  const auto rc = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (rc.ec != std::errc{} || rc.ptr != tok.data() + tok.size())
    throw InstanceFormatError("malformed " + what + " '" + std::string(tok) +
                                  "'",
                              line);
  return v;
}

inline int parse_int_token(std::string_view tok, int line,
                           const std::string& what) {
  int v = 0;
  const auto rc = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (rc.ec != std::errc{} || rc.ptr != tok.data() + tok.size())
    throw InstanceFormatError("malformed " + what + " '" + std::string(tok) +
                                  "'",
                              line);
  return v;
}

}  // namespace detail

inline SipInstance load_instance(std::string_view text) {
  std::optional<std::string> name;
  std::optional<int> xvars;
  std::optional<int> yvars;
  std::map<int, Interval> xdom;
  std::map<int, Interval> ydom;
  std::optional<std::string> objective_text;
  std::optional<std::string> constraint_text;
  int objective_line = 0;
  int constraint_line = 0;

  auto read_dom = [](std::string_view rest, int line,
                     std::map<int, Interval>& doms, const char* key) {
    const int idx = detail::parse_int_token(detail::next_token(rest), line,
                                            std::string(key) + " index");
    if (idx < 1)
      throw InstanceFormatError(std::string(key) + " index must be >= 1",
                                line);
    const double lo =
        detail::parse_double_token(detail::next_token(rest), line, "bound");
    const double hi =
        detail::parse_double_token(detail::next_token(rest), line, "bound");
    if (!detail::trim(rest).empty())
      throw InstanceFormatError("trailing input after bounds", line);
    if (!(lo <= hi))
      throw InstanceFormatError("empty interval: lo > hi", line);
    if (doms.count(idx))
      throw InstanceFormatError("duplicate " + std::string(key) + " for index " +
                                    std::to_string(idx),
                                line);
    doms.emplace(idx, Interval(lo, hi));
  };

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    std::string_view rest = line;
    const std::string_view key = detail::next_token(rest);
    if (key == "name") {
      name = std::string(detail::trim(rest));
    } else if (key == "xvars" || key == "yvars") {
      const int n = detail::parse_int_token(detail::next_token(rest), line_no,
                                            "variable count");
      if (n < 1)
        throw InstanceFormatError("variable count must be >= 1", line_no);
      (key == "xvars" ? xvars : yvars) = n;
    } else if (key == "xdom") {
      read_dom(rest, line_no, xdom, "xdom");
    } else if (key == "ydom") {
      read_dom(rest, line_no, ydom, "ydom");
    } else if (key == "objective") {
      objective_text = std::string(detail::trim(rest));
      objective_line = line_no;
    } else if (key == "constraint") {
      constraint_text = std::string(detail::trim(rest));
      constraint_line = line_no;
    } else {
      throw InstanceFormatError("unknown key '" + std::string(key) + "'",
                                line_no);
    }
  }

  if (!name) throw InstanceFormatError("missing key 'name'", line_no);
  if (!xvars) throw InstanceFormatError("missing key 'xvars'", line_no);
  if (!yvars) throw InstanceFormatError("missing key 'yvars'", line_no);
  if (!objective_text)
    throw InstanceFormatError("missing key 'objective'", line_no);
  if (!constraint_text)
    throw InstanceFormatError("missing key 'constraint'", line_no);

  auto collect = [&](const std::map<int, Interval>& doms, int count,
                     const char* key) {
    std::vector<Interval> dims;
    dims.reserve(static_cast<std::size_t>(count));
    for (int i = 1; i <= count; ++i) {
      const auto it = doms.find(i);
      if (it == doms.end())
        throw InstanceFormatError("missing " + std::string(key) +
                                      " for variable " + std::to_string(i),
                                  line_no);
      dims.push_back(it->second);
    }
    if (static_cast<int>(doms.size()) != count)
      throw InstanceFormatError(std::string(key) +
                                    " given for an undeclared variable",
                                line_no);
    return dims;
  };
  const BoxRegion x_box(collect(xdom, *xvars, "xdom"));
  const BoxRegion y_box(collect(ydom, *yvars, "ydom"));

  auto parse_expr_text = [](const std::string& src, int line,
                            const char* what) {
    try {
      return parse(src);
    } catch (const ParseError& e) {
      throw InstanceFormatError(std::string(what) + ": " + e.what(), line);
    }
  };
  const ExprPtr objective =
      parse_expr_text(*objective_text, objective_line, "objective");
  const ExprPtr constraint =
      parse_expr_text(*constraint_text, constraint_line, "constraint");

  const VarUsage fu = var_usage(*objective);
  if (fu.y_count > 0)
    throw InstanceFormatError("objective references a y variable",
                              objective_line);
  if (fu.x_count > *xvars)
    throw InstanceFormatError("objective references undeclared variable x" +
                                  std::to_string(fu.x_count),
                              objective_line);
  const VarUsage gu = var_usage(*constraint);
  if (gu.x_count > *xvars)
    throw InstanceFormatError("constraint references undeclared variable x" +
                                  std::to_string(gu.x_count),
                              constraint_line);
  if (gu.y_count > *yvars)
    throw InstanceFormatError("constraint references undeclared variable y" +
                                  std::to_string(gu.y_count),
                              constraint_line);

  return SipInstance(*name, objective, constraint, x_box, y_box);
}

// Inverse of load_instance for round-tripping instances to disk.
inline std::string to_file_text(const SipInstance& inst) {
  std::string out;
  out += "name " + inst.name + "\n";
  out += "xvars " + std::to_string(inst.x_dim()) + "\n";
  out += "yvars " + std::to_string(inst.y_dim()) + "\n";
  for (std::size_t i = 0; i < inst.x_dim(); ++i)
    out += "xdom " + std::to_string(i + 1) + " " +
           detail::format_number(inst.x_box.dims[i].lo) + " " +
           detail::format_number(inst.x_box.dims[i].hi) + "\n";
  for (std::size_t j = 0; j < inst.y_dim(); ++j)
    out += "ydom " + std::to_string(j + 1) + " " +
           detail::format_number(inst.y_box.dims[j].lo) + " " +
           detail::format_number(inst.y_box.dims[j].hi) + "\n";
  out += "objective " + to_text(inst.objective) + "\n";
  out += "constraint " + to_text(inst.constraint) + "\n";
  return out;
}

}  // namespace sip
