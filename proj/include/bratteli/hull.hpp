#pragma once

// Convex-hull membership: a phase-one simplex feasibility test for any
// dimension, plus explicit hulls for points of a 1- or 2-simplex.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bratteli {

struct HullMembership {
  bool member = false;
  /// Sum of phase-one artificials at the optimum: 0 for an exact member.
  double residual = 0.0;
  /// Convex weights on the points (meaningful when member).
  std::vector<double> weights;
};

/// Is q a convex combination of `points`? Solves
///   find w >= 0 with sum_i w_i p_i = q and sum_i w_i = 1
/// by phase-one simplex with Bland's rule; `tolerance` bounds the residual.
inline HullMembership hull_membership(const std::vector<std::vector<double>>& points, const std::vector<double>& q,
                                      double tolerance = 1e-8) {
  if (points.empty()) throw std::invalid_argument("hull_membership: no points");
  const std::size_t dim = q.size();
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("hull_membership: dimension mismatch");
  }
  const std::size_t rows = dim + 1;
  const std::size_t k = points.size();
  const std::size_t cols = k + rows;  // structural + artificial
  constexpr double pivot_eps = 1e-12;

  // tableau rows: [a_1 .. a_k | I | rhs]
  std::vector<std::vector<double>> t(rows, std::vector<double>(cols + 1, 0.0));
  for (std::size_t r = 0; r < rows; ++r) {
    double rhs = r < dim ? q[r] : 1.0;
    for (std::size_t j = 0; j < k; ++j) t[r][j] = r < dim ? points[j][r] : 1.0;
    if (rhs < 0) {
      for (std::size_t j = 0; j < k; ++j) t[r][j] = -t[r][j];
      rhs = -rhs;
    }
    t[r][k + r] = 1.0;
    t[r][cols] = rhs;
  }
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) basis[r] = k + r;

  auto reduced_cost = [&](std::size_t j) {
    // phase-one cost is 1 on artificials, 0 on structurals
    double c = j >= k ? 1.0 : 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (basis[r] >= k) c -= t[r][j];
    }
    return c;
  };

  const std::size_t max_iter = 100 * cols + 1000;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_iter) throw std::runtime_error("hull_membership: iteration limit");
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
      if (reduced_cost(j) < -pivot_eps) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = rows;
    double best = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (t[r][enter] <= pivot_eps) continue;
      const double ratio = t[r][cols] / t[r][enter];
      if (leave == rows || ratio < best - 1e-15 || (std::fabs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave == rows) break;  // unbounded direction cannot occur in phase one
    const double pv = t[leave][enter];
    for (double& x : t[leave]) x /= pv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == leave || t[r][enter] == 0.0) continue;
      const double f = t[r][enter];
      for (std::size_t j = 0; j <= cols; ++j) t[r][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }

  HullMembership out;
  out.weights.assign(k, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] >= k) {
      out.residual += std::max(0.0, t[r][cols]);
    } else {
      out.weights[basis[r]] = std::max(0.0, t[r][cols]);
    }
  }
  out.member = out.residual <= tolerance;
  return out;
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Convex hull (counter-clockwise, no collinear points) by monotone chain.
inline std::vector<Point2> convex_hull_2d(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Point2> h(2 * pts.size());
  std::size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

/// Distance-tolerant membership in a convex polygon (or segment / point).
inline bool in_convex_polygon(const std::vector<Point2>& hull, Point2 q, double tolerance) {
  auto seg_dist = [](Point2 a, Point2 b, Point2 p) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double s = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return std::hypot(p.x - a.x - s * dx, p.y - a.y - s * dy);
  };
  if (hull.empty()) return false;
  if (hull.size() == 1) return std::hypot(q.x - hull[0].x, q.y - hull[0].y) <= tolerance;
  if (hull.size() == 2) return seg_dist(hull[0], hull[1], q) <= tolerance;
  bool inside = true;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2& a = hull[i];
    const Point2& b = hull[(i + 1) % hull.size()];
    if ((b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x) < 0) inside = false;
  }
  if (inside) return true;
  double best = seg_dist(hull.back(), hull.front(), q);
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) best = std::min(best, seg_dist(hull[i], hull[i + 1], q));
  return best <= tolerance;
}

}  // namespace bratteli
