#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "chronoscale/error.hpp"
#include "chronoscale/format.hpp"

namespace chronoscale {

/// Closed segment [lo, hi] of the real line; lo == hi is an isolated point.
struct Segment {
  double lo = 0.0;
  double hi = 0.0;

  bool is_point() const { return lo == hi; }
  double length() const { return hi - lo; }

  friend bool operator==(const Segment&, const Segment&) = default;
};

enum class Side { kScattered, kDense };

struct PointClass {
  Side right = Side::kDense;
  Side left = Side::kDense;
  bool is_min = false;
  bool is_max = false;

  bool right_scattered() const { return right == Side::kScattered; }
  bool left_scattered() const { return left == Side::kScattered; }

  friend bool operator==(const PointClass&, const PointClass&) = default;
};

/// A bounded time scale: finite union of disjoint closed segments, stored in
/// canonical form (sorted, strictly positive gaps, nothing mergeable).
/// Immutable after construction.
class TimeScale {
 public:
  /// Sorts and merges overlapping or adjacent segments. Segments whose gap is
  /// at most `snap_tolerance` are merged as well.
  static TimeScale canonicalize(std::vector<Segment> raw,
                                double snap_tolerance = 0.0) {
    if (raw.empty()) throw Error(ErrorCode::kEmptyScale, "no segments given");
    if (!(snap_tolerance >= 0.0) || !std::isfinite(snap_tolerance)) {
      throw Error(ErrorCode::kBadArgument, "snap tolerance must be finite and >= 0");
    }
    for (const auto& s : raw) {
      if (!std::isfinite(s.lo) || !std::isfinite(s.hi)) {
        throw Error(ErrorCode::kBadInterval, "segment endpoints must be finite");
      }
      if (s.lo > s.hi) {
        throw Error(ErrorCode::kBadInterval,
                    "segment [" + format_real(s.lo) + "," + format_real(s.hi) +
                        "] has lo > hi");
      }
    }
    std::sort(raw.begin(), raw.end(), [](const Segment& x, const Segment& y) {
      return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi);
    });
    std::vector<Segment> merged;
    merged.reserve(raw.size());
    for (const auto& s : raw) {
      if (!merged.empty() && s.lo - merged.back().hi <= snap_tolerance) {
        merged.back().hi = std::max(merged.back().hi, s.hi);
      } else {
        merged.push_back(s);
      }
    }
    return TimeScale(std::move(merged));
  }

  static TimeScale interval(double a, double b) {
    if (!(a <= b)) throw Error(ErrorCode::kBadInterval, "interval needs a <= b");
    return canonicalize({{a, b}});
  }

  /// Arithmetic lattice start, start+step, ... up to stop (inclusive when
  /// stop is reached within rounding).
  static TimeScale lattice(double start, double stop, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) {
      throw Error(ErrorCode::kBadArgument, "lattice step must be positive");
    }
    if (!(start <= stop)) throw Error(ErrorCode::kBadInterval, "lattice needs start <= stop");
    const double span = (stop - start) / step;
    const auto n = static_cast<long long>(std::floor(span + 1e-9));
    if (n > 10'000'000) throw Error(ErrorCode::kBadArgument, "lattice too large");
    std::vector<Segment> pts;
    pts.reserve(static_cast<std::size_t>(n) + 1);
    for (long long k = 0; k <= n; ++k) {
      double t = start + static_cast<double>(k) * step;
      if (k == n && std::abs(t - stop) <= 1e-9 * step) t = stop;
      pts.push_back({t, t});
    }
    return canonicalize(std::move(pts));
  }

  /// Geometric points min * q^k <= max for k = 0, 1, ...
  static TimeScale geometric(double q, double min, double max) {
    if (!(q > 1.0) || !std::isfinite(q)) {
      throw Error(ErrorCode::kBadArgument, "geometric ratio must exceed 1");
    }
    if (!(min > 0.0) || !(min <= max) || !std::isfinite(max)) {
      throw Error(ErrorCode::kBadInterval, "geometric scale needs 0 < min <= max");
    }
    std::vector<Segment> pts;
    for (int k = 0;; ++k) {
      const double t = min * std::pow(q, k);
      if (t > max * (1.0 + 1e-12)) break;
      pts.push_back({t, t});
      if (pts.size() > 10'000'000) throw Error(ErrorCode::kBadArgument, "geometric scale too large");
    }
    return canonicalize(std::move(pts));
  }

  static TimeScale unite(const std::vector<TimeScale>& parts, double snap_tolerance = 0.0) {
    std::vector<Segment> raw;
    for (const auto& p : parts) raw.insert(raw.end(), p.segments_.begin(), p.segments_.end());
    return canonicalize(std::move(raw), snap_tolerance);
  }

  const std::vector<Segment>& segments() const { return segments_; }
  double min() const { return segments_.front().lo; }
  double max() const { return segments_.back().hi; }

  bool is_discrete() const {
    return std::all_of(segments_.begin(), segments_.end(),
                       [](const Segment& s) { return s.is_point(); });
  }

  /// Index of the segment containing t, if any.
  std::optional<std::size_t> segment_index(double t) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const Segment& s) { return v < s.lo; });
    if (it == segments_.begin()) return std::nullopt;
    --it;
    if (t > it->hi) return std::nullopt;
    return static_cast<std::size_t>(it - segments_.begin());
  }

  bool contains(double t) const { return segment_index(t).has_value(); }

  const Segment& segment_of(double t) const { return segments_[require(t)]; }

  /// Forward jump inf{s in T : s > t}; the maximum maps to itself.
  double sigma(double t) const {
    const std::size_t i = require(t);
    if (t < segments_[i].hi) return t;
    return i + 1 < segments_.size() ? segments_[i + 1].lo : t;
  }

  /// Backward jump sup{s in T : s < t}; the minimum maps to itself.
  double rho(double t) const {
    const std::size_t i = require(t);
    if (t > segments_[i].lo) return t;
    return i > 0 ? segments_[i - 1].hi : t;
  }

  /// Graininess sigma(t) - t.
  double mu(double t) const { return sigma(t) - t; }

  /// At the maximum (minimum) sigma (rho) is the point itself; there the
  /// right (left) side is reported scattered exactly when the point is
  /// isolated, so an isolated maximum reads as scattered on both sides.
  PointClass classify(double t) const {
    const std::size_t i = require(t);
    const Segment& s = segments_[i];
    PointClass pc;
    pc.is_min = (i == 0 && t == s.lo);
    pc.is_max = (i + 1 == segments_.size() && t == s.hi);
    if (pc.is_max) {
      pc.right = s.is_point() ? Side::kScattered : Side::kDense;
    } else {
      pc.right = sigma(t) > t ? Side::kScattered : Side::kDense;
    }
    if (pc.is_min) {
      pc.left = s.is_point() ? Side::kScattered : Side::kDense;
    } else {
      pc.left = rho(t) < t ? Side::kScattered : Side::kDense;
    }
    return pc;
  }

  /// True when t is a left-scattered maximum, i.e. t is not in T^kappa.
  bool is_left_scattered_max(double t) const {
    const std::size_t i = require(t);
    return i + 1 == segments_.size() && t == segments_[i].hi && segments_[i].is_point();
  }

  /// T intersected with [a, b]; both endpoints must be in T.
  TimeScale restrict(double a, double b) const {
    if (!contains(a) || !contains(b)) {
      throw Error(ErrorCode::kNotInScale, "restriction endpoints must lie in the scale");
    }
    if (!(a < b)) throw Error(ErrorCode::kBadInterval, "restriction needs a < b");
    std::vector<Segment> out;
    for (const auto& s : segments_) {
      const double lo = std::max(s.lo, a);
      const double hi = std::min(s.hi, b);
      if (lo <= hi) out.push_back({lo, hi});
    }
    return TimeScale(std::move(out));
  }

  /// Every segment endpoint plus an even grid on each dense segment whose
  /// spacing does not exceed max_dense_step. Sorted, no duplicates.
  std::vector<double> points(double max_dense_step) const {
    if (!(max_dense_step > 0.0)) {
      throw Error(ErrorCode::kBadArgument, "grid step must be positive");
    }
    std::vector<double> out;
    for (const auto& s : segments_) {
      if (s.is_point()) {
        out.push_back(s.lo);
        continue;
      }
      const auto n = static_cast<std::size_t>(
          std::max(1.0, std::ceil(s.length() / max_dense_step)));
      append_grid(out, s, n);
    }
    return out;
  }

  /// Every scattered point plus `per_segment` samples per dense segment.
  std::vector<double> points_per_segment(std::size_t per_segment) const {
    std::vector<double> out;
    for (const auto& s : segments_) {
      if (s.is_point()) {
        out.push_back(s.lo);
      } else {
        append_grid(out, s, std::max<std::size_t>(1, per_segment));
      }
    }
    return out;
  }

  /// Hypothesis-sampling grid: explicit step when given, otherwise 64 samples
  /// per dense segment.
  std::vector<double> sample_grid(std::optional<double> max_dense_step) const {
    return max_dense_step ? points(*max_dense_step) : points_per_segment(64);
  }

  std::string to_string() const {
    std::string out = "[";
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (i) out += ",";
      out += "[" + format_real(segments_[i].lo) + "," + format_real(segments_[i].hi) + "]";
    }
    return out + "]";
  }

  friend bool operator==(const TimeScale&, const TimeScale&) = default;

 private:
  explicit TimeScale(std::vector<Segment> segments) : segments_(std::move(segments)) {}

  std::size_t require(double t) const {
    auto i = segment_index(t);
    if (!i) throw Error(ErrorCode::kNotInScale, format_real(t) + " is not in the scale");
    return *i;
  }

  static void append_grid(std::vector<double>& out, const Segment& s, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      out.push_back(s.lo + s.length() * static_cast<double>(k) / static_cast<double>(n));
    }
    out.push_back(s.hi);
  }

  std::vector<Segment> segments_;
};

/// FNV-1a digest of the canonical segment list, as 16 hex digits.
inline std::string scale_digest(const TimeScale& T) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : T.segments()) {
    mix(s.lo);
    mix(s.hi);
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = kHex[h & 0xfU];
  return out;
}

inline TimeScale canonicalize(std::vector<Segment> raw, double snap_tolerance = 0.0) {
  return TimeScale::canonicalize(std::move(raw), snap_tolerance);
}

}  // namespace chronoscale
