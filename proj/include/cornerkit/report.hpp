#ifndef CORNERKIT_REPORT_HPP
#define CORNERKIT_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cornerkit/expr.hpp"
#include "cornerkit/point.hpp"
#include "cornerkit/tensor.hpp"

namespace cornerkit {

/// Tolerance ladder: kernel noise < classification zero < failure floor.
struct Tolerances {
  double kernel = 1e-8;
  double classification = 1e-6;
  double failure_floor = 1e-3;

  bool valid() const {
    return kernel > 0.0 && classification > 0.0 && failure_floor > 0.0 && kernel < classification &&
           classification < failure_floor;
  }
};

struct Residual {
  std::string name;
  double max = 0.0;
  std::optional<Point> argmax;
  double tolerance = 0.0;

  bool pass() const { return std::isfinite(max) && max <= tolerance; }
};

struct PointIssue {
  Point point;
  std::string message;
};

/// Named residual maxima over a point sample.
struct ResidualReport {
  std::vector<Residual> residuals;
  std::vector<PointIssue> issues;

  bool passed() const {
    return issues.empty() &&
           std::all_of(residuals.begin(), residuals.end(), [](const Residual& r) { return r.pass(); });
  }

  const Residual& at(const std::string& name) const {
    for (const auto& r : residuals)
      if (r.name == name) return r;
    throw std::out_of_range("no residual named '" + name + "'");
  }
  double max(const std::string& name) const { return at(name).max; }

  double worst() const {
    double w = 0.0;
    for (const auto& r : residuals) w = std::max(w, r.max);
    return w;
  }
};

namespace detail {

template <class R, class Fn>
std::vector<R> map_indices(std::size_t n, Fn&& fn) {
  std::vector<R> out(n);
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n / 32 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<void>> jobs;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    jobs.push_back(std::async(std::launch::async, [&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) out[i] = fn(i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

template <class R, class Fn>
std::vector<R> map_points(const std::vector<Point>& pts, Fn&& fn) {
  return map_indices<R>(pts.size(), [&](std::size_t i) { return fn(pts[i]); });
}

} // namespace detail

/// Per-point outcome: one value per residual name, or the reason the point was skipped.
struct PointValues {
  std::vector<double> values;
  std::optional<std::string> issue;
};

/// Evaluates fn at every point (in parallel for large samples) and reduces to maxima.
/// Exceptions thrown for a single point are recorded as issues; the run continues.
template <class Fn>
ResidualReport evaluate_residuals(const std::vector<std::string>& names,
                                  const std::vector<double>& tolerances,
                                  const std::vector<Point>& pts, Fn&& fn) {
  auto per_point = detail::map_points<PointValues>(pts, [&](const Point& p) {
    PointValues pv;
    try {
      pv.values = fn(p);
      if (pv.values.size() != names.size())
        throw std::logic_error("residual function returned the wrong number of values");
    } catch (const std::logic_error&) {
      throw;
    } catch (const std::exception& e) {
      pv.values.clear();
      pv.issue = e.what();
    }
    return pv;
  });

  ResidualReport rep;
  for (std::size_t k = 0; k < names.size(); ++k)
    rep.residuals.push_back(Residual{names[k], 0.0, std::nullopt, tolerances[k]});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const PointValues& pv = per_point[i];
    if (pv.issue) {
      rep.issues.push_back(PointIssue{pts[i], *pv.issue});
      continue;
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
      Residual& r = rep.residuals[k];
      const double v = pv.values[k];
      if (!std::isfinite(v)) {
        if (std::isfinite(r.max)) {
          r.max = v;
          r.argmax = pts[i];
        }
      } else if (std::isfinite(r.max) && (v > r.max || !r.argmax)) {
        r.max = v;
        r.argmax = pts[i];
      }
    }
  }
  return rep;
}

template <class Fn>
ResidualReport evaluate_residuals(const std::vector<std::string>& names, double tolerance,
                                  const std::vector<Point>& pts, Fn&& fn) {
  return evaluate_residuals(names, std::vector<double>(names.size(), tolerance), pts,
                            std::forward<Fn>(fn));
}

/// Mean and sample standard deviation.
inline std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size() - 1))};
}

inline double max_abs(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::fabs(x));
  return m;
}

} // namespace cornerkit

#endif
