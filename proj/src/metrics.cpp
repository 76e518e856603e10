#include "se3track/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace se3track {

ModelPoints model_points_from_mesh(const TriangleMesh& mesh, int max_points) {
  if (mesh.vertices.empty())
    throw std::invalid_argument("model_points_from_mesh: empty mesh");
  ModelPoints m;
  const size_t n = mesh.vertices.size();
  if (static_cast<int>(n) <= max_points) {
    m.points = mesh.vertices;
    return m;
  }
  const size_t stride = (n + max_points - 1) / max_points;
  for (size_t i = 0; i < n; i += stride) m.points.push_back(mesh.vertices[i]);
  return m;
}

double add_metric(const ModelPoints& m, const Pose& T_gt, const Pose& T_est) {
  if (m.points.empty()) throw std::invalid_argument("add_metric: empty model");
  double sum = 0.0;
  for (const Vec3& x : m.points)
    sum += norm(transform_point(T_gt, x) - transform_point(T_est, x));
  return sum / static_cast<double>(m.points.size());
}

namespace {

// Exact nearest-neighbor distances via a uniform grid: cells are visited in
// expanding Chebyshev shells around the query's (possibly out-of-range) cell;
// the walk stops once no unvisited cell can beat the best distance found.
double grid_nn_mean(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  Vec3 lo = to[0], hi = to[0];
  for (const Vec3& p : to)
    for (int i = 0; i < 3; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z, 1e-9});
  const int res = std::max(1, static_cast<int>(std::cbrt(static_cast<double>(to.size()))));
  const double cell = extent / res * (1.0 + 1e-12);

  auto cell_index = [&](const Vec3& p, int axis) {
    return static_cast<int>(std::floor((p[axis] - lo[axis]) / cell));
  };
  auto clamp_cell = [&](int c) { return std::clamp(c, 0, res - 1); };

  std::vector<std::vector<int>> grid(static_cast<size_t>(res) * res * res);
  for (size_t i = 0; i < to.size(); ++i) {
    const int x = clamp_cell(cell_index(to[i], 0));
    const int y = clamp_cell(cell_index(to[i], 1));
    const int z = clamp_cell(cell_index(to[i], 2));
    grid[(static_cast<size_t>(x) * res + y) * res + z].push_back(static_cast<int>(i));
  }

  double total = 0.0;
  for (const Vec3& q : from) {
    // Rings walk outward from the clamped cell. The (ring-1)*cell lower bound
    // holds even for queries outside the grid: along the axis where a
    // candidate cell is `ring` cells away, the in-box coordinate separation
    // is at least (ring-1)*cell, and any out-of-box overhang of q only adds.
    const int qc[3] = {clamp_cell(cell_index(q, 0)), clamp_cell(cell_index(q, 1)),
                       clamp_cell(cell_index(q, 2))};
    double best = std::numeric_limits<double>::infinity();
    for (int ring = 0; ring < res; ++ring) {
      if (std::isfinite(best) && ring > 0 && best <= (ring - 1) * cell) break;
      for (int dx = -ring; dx <= ring; ++dx)
        for (int dy = -ring; dy <= ring; ++dy)
          for (int dz = -ring; dz <= ring; ++dz) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
            const int x = qc[0] + dx, y = qc[1] + dy, z = qc[2] + dz;
            if (x < 0 || x >= res || y < 0 || y >= res || z < 0 || z >= res) continue;
            for (int idx : grid[(static_cast<size_t>(x) * res + y) * res + z])
              best = std::min(best, norm(q - to[idx]));
          }
    }
    total += best;
  }
  return total / static_cast<double>(from.size());
}

}  // namespace

double adds_metric(const ModelPoints& m, const Pose& T_gt, const Pose& T_est) {
  if (m.points.empty()) throw std::invalid_argument("adds_metric: empty model");
  const size_t n = m.points.size();
  std::vector<Vec3> gt(n), est(n);
  for (size_t i = 0; i < n; ++i) {
    gt[i] = transform_point(T_gt, m.points[i]);
    est[i] = transform_point(T_est, m.points[i]);
  }
  if (n <= 3000) {
    double total = 0.0;
    for (const Vec3& g : gt) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& e : est) best = std::min(best, norm(g - e));
      total += best;
    }
    return total / static_cast<double>(n);
  }
  return grid_nn_mean(gt, est);
}

double auc(const std::vector<double>& errors, double d_max) {
  if (errors.empty()) throw std::invalid_argument("auc: empty error list");
  if (d_max <= 0.0) throw std::invalid_argument("auc: d_max must be positive");
  double sum = 0.0;
  for (double e : errors) {
    if (std::isfinite(e)) sum += std::max(0.0, 1.0 - e / d_max);
  }
  return sum / static_cast<double>(errors.size());
}

EvalReport evaluate_sequence(const std::vector<Pose>& pred, const std::vector<Pose>& gt,
                             const ModelPoints& m, bool symmetric, double d_max,
                             const std::vector<bool>* lost) {
  if (pred.size() != gt.size())
    throw std::invalid_argument("evaluate_sequence: prediction/ground-truth length mismatch");
  if (lost && lost->size() != pred.size())
    throw std::invalid_argument("evaluate_sequence: lost-flag length mismatch");

  EvalReport report;
  report.symmetric = symmetric;
  report.d_max = d_max;
  const double inf = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pred.size(); ++i) {
    if (lost && (*lost)[i]) {
      report.add.push_back(inf);
      report.adds.push_back(inf);
      ++report.lost_frames;
      continue;
    }
    report.add.push_back(add_metric(m, gt[i], pred[i]));
    report.adds.push_back(adds_metric(m, gt[i], pred[i]));
  }
  report.auc_add = auc(report.add, d_max);
  report.auc_adds = auc(report.adds, d_max);
  report.headline_auc = symmetric ? report.auc_adds : report.auc_add;
  return report;
}

}  // namespace se3track
