#pragma once

// Pose-accuracy metrics: ADD (exact model matching), ADD-S (nearest-neighbor
// matching for symmetric objects) and the accuracy-threshold AUC.

#include <optional>
#include <vector>

#include "se3track/geometry.hpp"
#include "se3track/mesh.hpp"

namespace se3track {

struct ModelPoints {
  std::vector<Vec3> points;  // object frame, meters
};

// Mesh vertices capped at max_points by deterministic stride subsampling.
ModelPoints model_points_from_mesh(const TriangleMesh& mesh, int max_points = 3000);

// Mean distance between identically-indexed model points under the two poses.
double add_metric(const ModelPoints& m, const Pose& T_gt, const Pose& T_est);

// Mean nearest-neighbor distance from ground-truth-posed points to the
// estimate-posed point set. Exact; grid-accelerated above 3000 points.
double adds_metric(const ModelPoints& m, const Pose& T_gt, const Pose& T_est);

// (1/N) sum max(0, 1 - e/d_max): the normalized integral of the
// accuracy-vs-threshold curve over [0, d_max]. Lost frames enter as +inf.
double auc(const std::vector<double>& errors, double d_max);

struct EvalReport {
  std::vector<double> add;   // per frame, meters; +inf for lost frames
  std::vector<double> adds;  // per frame, meters; +inf for lost frames
  double auc_add = 0.0;
  double auc_adds = 0.0;
  double headline_auc = 0.0;  // auc_adds when symmetric, else auc_add
  bool symmetric = false;
  double d_max = 0.1;
  int lost_frames = 0;
};

// Per-frame ADD / ADD-S and both AUCs. `lost` (optional) marks frames whose
// error is scored as +inf. Throws std::invalid_argument on length mismatch.
EvalReport evaluate_sequence(const std::vector<Pose>& pred, const std::vector<Pose>& gt,
                             const ModelPoints& m, bool symmetric, double d_max,
                             const std::vector<bool>* lost = nullptr);

}  // namespace se3track
