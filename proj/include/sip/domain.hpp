#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "sip/errors.hpp"

namespace sip {

// Closed interval [lo, hi]. Degenerate intervals (lo == hi) are allowed and
// stand for fixed variables.
struct Interval {
  double lo;
  double hi;

  Interval(double lo_in, double hi_in) : lo(lo_in), hi(hi_in) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi)
      throw Error("invalid interval [" + std::to_string(lo_in) + ", " +
                  std::to_string(hi_in) + "]");
  }

  double width() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  double clamp(double v) const { return std::min(std::max(v, lo), hi); }

  bool operator==(const Interval&) const = default;
};

// Vector of finite coordinates. May be empty (e.g. the y part of an
// assignment for an expression that only mentions x variables).
struct PointVec {
  std::vector<double> coords;

  PointVec() = default;
  explicit PointVec(std::vector<double> c) : coords(std::move(c)) { check(); }
  PointVec(std::initializer_list<double> c) : coords(c) { check(); }

  std::size_t size() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }

  bool operator==(const PointVec&) const = default;

 private:
  void check() const {
    for (double v : coords)
      if (!std::isfinite(v)) throw Error("non-finite coordinate in point");
  }
};

// Axis-aligned product of intervals. Always has at least one dimension.
struct BoxRegion {
  std::vector<Interval> dims;

  explicit BoxRegion(std::vector<Interval> d) : dims(std::move(d)) {
    if (dims.empty()) throw Error("box must have at least one dimension");
  }
  BoxRegion(std::initializer_list<Interval> d)
      : BoxRegion(std::vector<Interval>(d)) {}

  std::size_t size() const { return dims.size(); }

  bool contains(const PointVec& p) const {
    if (p.size() != dims.size())
      throw DimensionMismatch("point has " + std::to_string(p.size()) +
                              " coordinates, box has " +
                              std::to_string(dims.size()));
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (!dims[i].contains(p[i])) return false;
    return true;
  }

  PointVec midpoint() const {
    std::vector<double> c;
    c.reserve(dims.size());
    for (const Interval& d : dims) c.push_back(d.midpoint());
    return PointVec(std::move(c));
  }

  // Index of the widest dimension; lowest index wins ties.
  std::size_t widest_dim() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dims.size(); ++i)
      if (dims[i].width() > dims[best].width()) best = i;
    return best;
  }

  double max_width() const { return dims[widest_dim()].width(); }

  std::uint64_t corner_count() const {
    return std::uint64_t{1} << dims.size();
  }

  // Corner selected by bitmask: bit i set picks the upper end of dimension i.
  std::vector<double> corner(std::uint64_t mask) const {
    std::vector<double> c;
    c.reserve(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i)
      c.push_back((mask >> i) & 1u ? dims[i].hi : dims[i].lo);
    return c;
  }

  bool operator==(const BoxRegion&) const = default;
};

// Project each coordinate of p onto the corresponding interval of b.
inline PointVec clamp_to_box(const PointVec& p, const BoxRegion& b) {
  if (p.size() != b.size())
    throw DimensionMismatch("cannot clamp a " + std::to_string(p.size()) +
                            "-dim point to a " + std::to_string(b.size()) +
                            "-dim box");
  std::vector<double> c;
  c.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) c.push_back(b.dims[i].clamp(p[i]));
  return PointVec(std::move(c));
}

// Bisect the widest dimension at its midpoint. The union of the two children
// is the parent; they share the midpoint facet.
inline std::pair<BoxRegion, BoxRegion> split_widest(const BoxRegion& b) {
  for (const Interval& d : b.dims)
    if (!std::isfinite(d.width()))
      throw Error("cannot split a box with an infinite dimension");
  const std::size_t axis = b.widest_dim();
  const double mid = b.dims[axis].midpoint();
  std::vector<Interval> lo_dims = b.dims;
  std::vector<Interval> hi_dims = b.dims;
  lo_dims[axis] = Interval(b.dims[axis].lo, mid);
  hi_dims[axis] = Interval(mid, b.dims[axis].hi);
  return {BoxRegion(std::move(lo_dims)), BoxRegion(std::move(hi_dims))};
}

}  // namespace sip
