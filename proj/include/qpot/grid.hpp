// Tensor-grid evaluation kernels. The OpenMP versions write each grid value
// independently, so they reproduce the serial references bitwise; reductions
// (means) are always taken serially over the stored values.
#pragma once

#include "qpot/poly.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace qpot {

struct Box {
  Eigen::VectorXd lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  static Box centered(int n, double half_width);
};

// Row-major tensor grid over a box. A single point per axis sits at the
// midpoint; otherwise points include both endpoints.
struct TensorGrid {
  Box box;
  std::vector<int> points_per_dim;

  std::int64_t total() const;
  Eigen::VectorXd point(std::int64_t flat_index) const;

  static TensorGrid uniform(const Box& box, int per_dim);
  // Uniform grid whose total size is capped; the per-axis count is reduced
  // (never below 3) until the cap holds.
  static TensorGrid uniform_capped(const Box& box, int per_dim, std::int64_t cap);
};

std::vector<double> evaluate_on_grid(const Polynomial& p, const TensorGrid& grid);
std::vector<double> evaluate_on_grid_serial(const Polynomial& p, const TensorGrid& grid);

std::vector<double> evaluate_at_points(const Polynomial& p,
                                       const std::vector<Eigen::VectorXd>& pts);
std::vector<double> evaluate_at_points_serial(const Polynomial& p,
                                              const std::vector<Eigen::VectorXd>& pts);

// Deterministic serial mean of a value array.
double mean(const std::vector<double>& values);

}  // namespace qpot
