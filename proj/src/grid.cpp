#include "qpot/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace qpot {

Box Box::centered(int n, double half_width) {
  Box b;
  b.lo = Eigen::VectorXd::Constant(n, -half_width);
  b.hi = Eigen::VectorXd::Constant(n, half_width);
  return b;
}

std::int64_t TensorGrid::total() const {
  std::int64_t t = 1;
  for (int p : points_per_dim) t *= p;
  return t;
}

Eigen::VectorXd TensorGrid::point(std::int64_t flat_index) const {
  const int n = box.dim();
  Eigen::VectorXd x(n);
  std::int64_t rem = flat_index;
  for (int i = n - 1; i >= 0; --i) {
    const int pts = points_per_dim[i];
    const int idx = static_cast<int>(rem % pts);
    rem /= pts;
    if (pts == 1) {
      x[i] = 0.5 * (box.lo[i] + box.hi[i]);
    } else {
      x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * idx / (pts - 1);
    }
  }
  return x;
}

TensorGrid TensorGrid::uniform(const Box& box, int per_dim) {
  if (per_dim < 1) throw std::invalid_argument("TensorGrid: need at least one point per axis");
  TensorGrid g;
  g.box = box;
  g.points_per_dim.assign(box.dim(), per_dim);
  return g;
}

TensorGrid TensorGrid::uniform_capped(const Box& box, int per_dim, std::int64_t cap) {
  int p = per_dim;
  while (p > 3) {
    std::int64_t t = 1;
    bool over = false;
    for (int i = 0; i < box.dim(); ++i) {
      t *= p;
      if (t > cap) {
        over = true;
        break;
      }
    }
    if (!over) break;
    --p;
  }
  return uniform(box, std::max(p, 1));
}

std::vector<double> evaluate_on_grid_serial(const Polynomial& p, const TensorGrid& grid) {
  const std::int64_t t = grid.total();
  std::vector<double> out(static_cast<std::size_t>(t));
  for (std::int64_t i = 0; i < t; ++i) {
    out[static_cast<std::size_t>(i)] = p.evaluate(grid.point(i));
  }
  return out;
}

std::vector<double> evaluate_on_grid(const Polynomial& p, const TensorGrid& grid) {
  const std::int64_t t = grid.total();
  std::vector<double> out(static_cast<std::size_t>(t));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < t; ++i) {
    out[static_cast<std::size_t>(i)] = p.evaluate(grid.point(i));
  }
  return out;
}

std::vector<double> evaluate_at_points_serial(const Polynomial& p,
                                              const std::vector<Eigen::VectorXd>& pts) {
  std::vector<double> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = p.evaluate(pts[i]);
  return out;
}

std::vector<double> evaluate_at_points(const Polynomial& p,
                                       const std::vector<Eigen::VectorXd>& pts) {
  std::vector<double> out(pts.size());
  const std::int64_t n = static_cast<std::int64_t>(pts.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = p.evaluate(pts[static_cast<std::size_t>(i)]);
  }
  return out;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace qpot
