#include "lmfg/core.hpp"

#include <limits>
#include <sstream>

namespace lmfg {

Grid::Grid(std::vector<double> half_extent, std::vector<int> points)
    : half_extent_(std::move(half_extent)), points_(std::move(points)) {
  if (points_.empty() || points_.size() != half_extent_.size())
    throw ContractViolation("Grid: half_extent and points must have the same nonzero length");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const int n = points_[i];
    if (n < 2 || (n & (n - 1)) != 0)
      throw ContractViolation("Grid: points per axis must be a power of two >= 2");
    if (!(half_extent_[i] > 0.0) || !std::isfinite(half_extent_[i]))
      throw ContractViolation("Grid: half_extent must be positive and finite");
  }
  strides_.assign(points_.size(), 1);
  for (int a = static_cast<int>(points_.size()) - 2; a >= 0; --a)
    strides_[a] = strides_[a + 1] * points_[a + 1];
  size_ = strides_[0] * points_[0];
}

Grid Grid::cube(int dim, double half_extent, int points) {
  return Grid(std::vector<double>(dim, half_extent), std::vector<int>(dim, points));
}

double Grid::cell_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= spacing(a);
  return v;
}

double Grid::volume() const noexcept {
  double v = 1.0;
  for (double l : half_extent_) v *= 2.0 * l;
  return v;
}

int Grid::wavenumber(int axis, int j) const {
  const int n = points_[axis];
  return j < n / 2 ? j : j - n;
}

std::vector<int> Grid::unflatten(Index flat) const {
  std::vector<int> idx(dim());
  for (int a = 0; a < dim(); ++a) {
    idx[a] = static_cast<int>(flat / strides_[a]);
    flat %= strides_[a];
  }
  return idx;
}

Index Grid::flatten(const std::vector<int>& idx) const {
  Index flat = 0;
  for (int a = 0; a < dim(); ++a) flat += strides_[a] * idx[a];
  return flat;
}

std::vector<double> Grid::point(Index flat) const {
  std::vector<double> x(dim());
  for (int a = 0; a < dim(); ++a) {
    const int j = static_cast<int>(flat / strides_[a]);
    flat %= strides_[a];
    x[a] = coordinate(a, j);
  }
  return x;
}

Index Grid::negated_slot(Index flat) const {
  Index out = 0;
  for (int a = 0; a < dim(); ++a) {
    const int j = static_cast<int>(flat / strides_[a]);
    flat %= strides_[a];
    out += strides_[a] * ((points_[a] - j) % points_[a]);
  }
  return out;
}

std::vector<RealArray> Grid::coordinates() const {
  std::vector<RealArray> out(dim(), RealArray(size_));
  for (Index i = 0; i < size_; ++i) {
    Index flat = i;
    for (int a = 0; a < dim(); ++a) {
      const int j = static_cast<int>(flat / strides_[a]);
      flat %= strides_[a];
      out[a][i] = coordinate(a, j);
    }
  }
  return out;
}

bool Grid::operator==(const Grid& other) const {
  return points_ == other.points_ && half_extent_ == other.half_extent_;
}

Field::Field(Grid g, RealArray v, std::optional<double> t)
    : grid(std::move(g)), values(std::move(v)), time(t) {
  if (values.size() != grid.size())
    throw ContractViolation("Field: value count does not match grid size");
}

Field Field::zeros(const Grid& g, std::optional<double> t) {
  return Field(g, RealArray::Zero(g.size()), t);
}

Field Field::constant(const Grid& g, double c, std::optional<double> t) {
  return Field(g, RealArray::Constant(g.size(), c), t);
}

ProbabilityField::ProbabilityField(Field f, ProbabilityTolerances tol) : field_(std::move(f)) {
  if (!field_.all_finite()) throw ContractViolation("ProbabilityField: non-finite values");
  const double lo = field_.values.minCoeff();
  if (lo < -tol.positivity) {
    std::ostringstream os;
    os << "ProbabilityField: positivity defect " << lo;
    throw ContractViolation(os.str());
  }
  const double m = field_.integral();
  if (std::abs(m - 1.0) > tol.mass) {
    std::ostringstream os;
    os << "ProbabilityField: mass " << m << " differs from 1";
    throw ContractViolation(os.str());
  }
}

ProbabilityField ProbabilityField::normalized(Field f, ProbabilityTolerances tol) {
  const double m = f.integral();
  if (!(m > 0.0)) throw ContractViolation("ProbabilityField::normalized: nonpositive mass");
  f.values /= m;
  return ProbabilityField(std::move(f), tol);
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (a != b) throw ContractViolation(std::string(where) + ": grid mismatch");
}

double lp_norm(const Grid& g, const RealArray& values, double p) {
  if (std::isinf(p)) return values.abs().maxCoeff();
  if (p == 1.0) return values.abs().sum() * g.cell_volume();
  if (p == 2.0) return std::sqrt(values.square().sum() * g.cell_volume());
  return std::pow(values.abs().pow(p).sum() * g.cell_volume(), 1.0 / p);
}

RealArray pointwise_norm(const VectorField& v) {
  if (v.empty()) return {};
  RealArray s = RealArray::Zero(v.front().size());
  for (const auto& c : v) s += c.square();
  return s.sqrt();
}

}  // namespace lmfg
