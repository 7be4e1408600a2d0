#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bloch.hpp"

namespace peierls {

// Eigenvalues restricted to a window, plus the maximal intervals obtained by joining
// neighbours closer than merge_tol.
class SpectrumSet {
 public:
  SpectrumSet() = default;
  SpectrumSet(std::vector<double> points, Interval window, double merge_tol) : window_(window), merge_tol_(merge_tol) {
    if (!(window.hi >= window.lo)) throw ConfigError("spectral window must satisfy lo <= hi");
    if (!(merge_tol >= 0)) throw ConfigError("merge_tol must be nonnegative");
    for (double x : points)
      if (window.contains(x)) points_.push_back(x);
    std::sort(points_.begin(), points_.end());
    for (double x : points_) {
      if (!merged_.empty() && x - merged_.back().hi <= merge_tol_) {
        merged_.back().hi = x;
      } else {
        merged_.push_back({x, x});
      }
    }
  }

  static SpectrumSet from_intervals(const std::vector<Interval>& parts, Interval window, double merge_tol) {
    SpectrumSet s({}, window, merge_tol);
    std::vector<Interval> v;
    for (auto p : parts) {
      p.lo = std::max(p.lo, window.lo);
      p.hi = std::min(p.hi, window.hi);
      if (p.lo <= p.hi) v.push_back(p);
    }
    std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
    for (auto& p : v) {
      s.points_.push_back(p.lo);
      s.points_.push_back(p.hi);
      if (!s.merged_.empty() && p.lo - s.merged_.back().hi <= merge_tol) {
        s.merged_.back().hi = std::max(s.merged_.back().hi, p.hi);
      } else {
        s.merged_.push_back(p);
      }
    }
    std::sort(s.points_.begin(), s.points_.end());
    return s;
  }

  const std::vector<double>& points() const { return points_; }
  const Interval& window() const { return window_; }
  double merge_tol() const { return merge_tol_; }
  const std::vector<Interval>& merged_intervals() const { return merged_; }
  bool empty() const { return points_.empty(); }
  SpectrumSet remerged(double tol) const {
    SpectrumSet s(points_, window_, tol);
    return s;
  }

 private:
  std::vector<double> points_;
  Interval window_;
  double merge_tol_ = 0;
  std::vector<Interval> merged_;
};

struct HausdorffResult {
  enum class Status { ok, one_empty, both_empty };
  double value = 0;  // NaN when both sets are empty
  Status status = Status::ok;
  bool defined() const { return status != Status::both_empty; }
  bool flagged() const { return status != Status::ok; }
};

namespace detail {

// sup over a of dist(x, b), both unions of closed intervals sorted by lo.
inline double directed_hausdorff(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  auto dist = [&b](double x) {
    auto it = std::lower_bound(b.begin(), b.end(), x, [](const Interval& i, double v) { return i.hi < v; });
    double d = std::numeric_limits<double>::infinity();
    if (it != b.end()) d = std::min(d, it->contains(x) ? 0.0 : it->lo - x);
    if (it != b.begin()) d = std::min(d, x - std::prev(it)->hi);
    return d;
  };
  double best = 0;
  for (auto& i : a) {
    best = std::max({best, dist(i.lo), dist(i.hi)});
    // the distance to b peaks at midpoints of b's gaps
    for (size_t j = 0; j + 1 < b.size(); ++j) {
      const double m = 0.5 * (b[j].hi + b[j + 1].lo);
      if (i.contains(m)) best = std::max(best, dist(m));
    }
  }
  return best;
}

}  // namespace detail

inline HausdorffResult hausdorff_distance(const SpectrumSet& a, const SpectrumSet& b) {
  HausdorffResult r;
  if (a.empty() && b.empty()) {
    r.status = HausdorffResult::Status::both_empty;
    r.value = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  if (a.empty() || b.empty()) {
    r.status = HausdorffResult::Status::one_empty;
    r.value = std::max(a.window().width(), b.window().width());
    return r;
  }
  const auto& ma = a.merged_intervals();
  const auto& mb = b.merged_intervals();
  r.value = std::max(detail::directed_hausdorff(ma, mb), detail::directed_hausdorff(mb, ma));
  return r;
}

// Open complement intervals within the window, each wider than merge_tol.
inline std::vector<Interval> detect_gaps(const SpectrumSet& s) {
  std::vector<Interval> gaps;
  double cursor = s.window().lo;
  auto push = [&](double lo, double hi) {
    if (hi - lo > s.merge_tol()) gaps.push_back({lo, hi});
  };
  for (auto& m : s.merged_intervals()) {
    push(cursor, m.lo);
    cursor = m.hi;
  }
  push(cursor, s.window().hi);
  return gaps;
}

// 3x the largest jump of the listed bands between neighbouring grid points, a bound on
// how far apart consecutive samples of one band can be.
inline double sampling_merge_tol(const BandStructure& b, const std::vector<int>& bands) {
  const auto& g = b.grid;
  const int r = g.resolution(), d = g.dim();
  double jump = 0;
  for (int k : bands) {
    if (k < 0 || k >= b.n_bands()) throw ConfigError("band index out of range");
    for (int p = 0; p < g.size(); ++p) {
      auto idx = g.multi(p);
      for (int j = 0; j < d; ++j) {
        auto n = idx;
        n[j] = (n[j] + 1) % r;
        jump = std::max(jump, std::abs(b.values(p, k) - b.values(g.flat(n[0], n[1]), k)));
      }
    }
  }
  return 3 * jump;
}

struct EpsilonDistance {
  double epsilon;
  double distance;
  bool flagged = false;
};

struct LipschitzFit {
  double slope = 0;      // least squares through the origin
  double max_ratio = 0;  // max d / eps
  double residual = 0;   // max |d/eps - slope| / slope
  int used = 0;
};

inline LipschitzFit lipschitz_fit(const std::vector<EpsilonDistance>& pairs) {
  std::vector<EpsilonDistance> v;
  for (auto& p : pairs)
    if (!p.flagged && std::isfinite(p.distance)) v.push_back(p);
  if (v.size() < 3) throw ConfigError("lipschitz_fit needs at least 3 unflagged (eps, d) pairs");
  for (auto& p : v)
    if (!(p.epsilon > 0)) throw ConfigError("lipschitz_fit needs positive eps");
  LipschitzFit f;
  double num = 0, den = 0;
  for (auto& p : v) {
    num += p.epsilon * p.distance;
    den += p.epsilon * p.epsilon;
    f.max_ratio = std::max(f.max_ratio, p.distance / p.epsilon);
  }
  f.slope = num / den;
  for (auto& p : v)
    f.residual = std::max(f.residual, f.slope > 0 ? std::abs(p.distance / p.epsilon - f.slope) / f.slope : 0.0);
  f.used = static_cast<int>(v.size());
  return f;
}

// d/eps along decreasing eps may grow by at most the given relative slack per step.
inline bool ratios_nonincreasing(std::vector<EpsilonDistance> pairs, double slack) {
  std::sort(pairs.begin(), pairs.end(), [](auto& a, auto& b) { return a.epsilon > b.epsilon; });
  for (size_t i = 1; i < pairs.size(); ++i)
    if (pairs[i].distance / pairs[i].epsilon > (1 + slack) * pairs[i - 1].distance / pairs[i - 1].epsilon) return false;
  return true;
}

inline bool distances_nonincreasing(std::vector<EpsilonDistance> pairs, double slack) {
  std::sort(pairs.begin(), pairs.end(), [](auto& a, auto& b) { return a.epsilon > b.epsilon; });
  for (size_t i = 1; i < pairs.size(); ++i)
    if (pairs[i].distance > (1 + slack) * pairs[i - 1].distance) return false;
  return true;
}

struct HausdorffReport {
  std::vector<EpsilonDistance> pairs;
  LipschitzFit fit;
};

}  // namespace peierls
