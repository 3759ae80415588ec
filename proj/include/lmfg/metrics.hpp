#pragma once

#include "lmfg/core.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace lmfg {

/// Weighted point cloud. Rows of `points` are support points; `period`
/// (one entry per coordinate, empty for R^d) switches to the flat torus
/// metric with the given side lengths.
struct DiscreteMeasure {
  Eigen::MatrixXd points;
  RealArray weights;
  std::vector<double> period;

  DiscreteMeasure() = default;
  /// Validates weights >= 0 and unit total within 1e-10.
  DiscreteMeasure(Eigen::MatrixXd pts, RealArray w, std::vector<double> period = {});

  Index size() const noexcept { return weights.size(); }
  int dim() const noexcept { return static_cast<int>(points.cols()); }
  double distance(Index i, Index j) const;

  /// Cell masses of a grid field (values times cell volume) on the torus of the grid.
  /// Small negative ripples are clipped and the result renormalized.
  static DiscreteMeasure from_field(const Field& f);
};

enum class D0Method { exact_lp, grid_lp, bounds };

D0Method parse_d0_method(const std::string& name);
std::string to_string(D0Method m);

struct D0Result {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// Added uncertainty from coarsening (block diameter), zero if none.
  double pooling_uncertainty = 0.0;
  /// "d0" for exact values, "d0_l1" for the axis-neighbour variant, "d0_bounds".
  std::string label;
  /// Feasible test function at the support points (LP methods only).
  RealArray certificate;
};

/// Kantorovich-Rubinstein distance sup { sum f (mu - nu) : |f| <= 1, Lip f <= 1 }.
D0Result d0_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, D0Method method = D0Method::exact_lp);

/// Grid-field variant: cell masses on the grid torus. exact_lp on d >= 2 grids
/// with more than `max_cells` cells block-sum pools both fields first.
D0Result d0_distance(const Field& a, const Field& b, D0Method method = D0Method::exact_lp, Index max_cells = 2000);

/// Independent exact maximization for tiny supports (at most 6 points): every
/// vertex of the feasible polytope is enumerated through its tight-constraint forest.
double d0_brute_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Evaluates sum f (mu - nu) after checking feasibility of f (tolerance 1e-12).
double evaluate_test_function(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const RealArray& f);

struct TrajectorySup {
  double value = 0.0;
  Index index = 0;
  double time = 0.0;
  double pooling_uncertainty = 0.0;
};

/// sup over shared time nodes of d0(traj1(t), traj2(t)).
TrajectorySup d0_trajectory_sup(const std::vector<Field>& a, const std::vector<Field>& b,
                                D0Method method = D0Method::grid_lp);

}  // namespace lmfg
