#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chern/error.hpp"

namespace chern {

enum class GridKind { tensor2d, radial };

inline const char* to_string(GridKind kind) {
  return kind == GridKind::tensor2d ? "tensor2d" : "radial";
}

inline GridKind grid_kind_from_string(const std::string& name) {
  if (name == "tensor2d") return GridKind::tensor2d;
  if (name == "radial") return GridKind::radial;
  throw ConfigurationError("unknown grid kind '" + name + "'");
}

enum class NodeRole : std::uint8_t { interior, boundary, outside };

struct Point {
  double x = 0.0;
  double y = 0.0;
  double norm() const { return std::hypot(x, y); }
};

/// Uniform node set over a ball of radius R.
///
/// A radial grid holds the nodes 0, h, ..., N h of a radially symmetric field
/// in R^{2n}; node N is the Dirichlet boundary. A tensor2d grid (n = 1 only)
/// is the square box [-M h, M h]^2 with a disk mask: nodes with r < R are
/// interior, nodes at r >= R with an interior 4-neighbour are boundary, the
/// rest are outside and carry no data.
class Grid {
 public:
  static constexpr std::size_t min_interior_per_axis = 8;

  static Grid radial(int n, double spacing, double radius) {
    check_common(n, spacing, radius);
    const auto last = static_cast<std::size_t>(std::llround(radius / spacing));
    Grid g(GridKind::radial, n, spacing, last * spacing, last + 1);
    g.require_resolution();
    return g;
  }

  /// Radial grid with an exact node count on [0, radius].
  static Grid radial_with_nodes(int n, std::size_t nodes, double radius) {
    if (nodes < 2) throw ConfigurationError("radial grid needs at least 2 nodes");
    const double spacing = radius / static_cast<double>(nodes - 1);
    check_common(n, spacing, radius);
    Grid g(GridKind::radial, n, spacing, radius, nodes);
    g.require_resolution();
    return g;
  }

  static Grid tensor2d(double spacing, double radius) {
    check_common(1, spacing, radius);
    Grid g = make_tensor(spacing, radius);
    g.require_resolution();
    return g;
  }

  GridKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return n_; }
  int real_dimension() const noexcept { return 2 * n_; }
  double spacing() const noexcept { return h_; }
  double radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return roles_.size(); }
  std::size_t side() const noexcept { return side_; }
  std::ptrdiff_t offset() const noexcept { return offset_; }

  Point position(std::size_t node) const {
    if (kind_ == GridKind::radial) return {static_cast<double>(node) * h_, 0.0};
    const auto [i, j] = coordinates(node);
    return {static_cast<double>(static_cast<std::ptrdiff_t>(i) - offset_) * h_,
            static_cast<double>(static_cast<std::ptrdiff_t>(j) - offset_) * h_};
  }

  double radius_at(std::size_t node) const { return position(node).norm(); }

  NodeRole role(std::size_t node) const { return roles_[node]; }
  bool interior(std::size_t node) const { return roles_[node] == NodeRole::interior; }
  bool boundary(std::size_t node) const { return roles_[node] == NodeRole::boundary; }
  bool active(std::size_t node) const { return roles_[node] != NodeRole::outside; }

  std::size_t index(std::size_t i, std::size_t j) const { return j * side_ + i; }
  std::pair<std::size_t, std::size_t> coordinates(std::size_t node) const {
    return {node % side_, node / side_};
  }

  /// Node closest to the origin.
  std::size_t center() const {
    if (kind_ == GridKind::radial) return 0;
    const auto m = static_cast<std::size_t>(offset_);
    return index(m, m);
  }

  std::size_t interior_count() const {
    return static_cast<std::size_t>(
        std::count(roles_.begin(), roles_.end(), NodeRole::interior));
  }

  /// Same nodes, domain shrunk to the ball of the given radius.
  Grid restricted(double radius) const {
    if (radius < 4.0 * h_ * (1.0 - 1e-12)) {
      throw ConfigurationError("restriction radius " + std::to_string(radius) +
                               " is smaller than 4h");
    }
    if (radius > radius_ * (1.0 + 1e-12) + 1e-14) {
      throw ConfigurationError("restriction radius exceeds grid extent");
    }
    if (kind_ == GridKind::radial) {
      const auto last = static_cast<std::size_t>(std::llround(radius / h_));
      if (last + 1 == size()) return *this;
      return Grid(GridKind::radial, n_, h_, static_cast<double>(last) * h_, last + 1);
    }
    return make_tensor(h_, radius);
  }

  /// Maps a node of this grid to the node at the same position in `other`
  /// (both grids must share spacing and kind). Returns size() of other when absent.
  std::size_t map_to(std::size_t node, const Grid& other) const {
    if (kind_ == GridKind::radial) return node < other.size() ? node : other.size();
    const auto [i, j] = coordinates(node);
    const std::ptrdiff_t shift = other.offset_ - offset_;
    const std::ptrdiff_t oi = static_cast<std::ptrdiff_t>(i) + shift;
    const std::ptrdiff_t oj = static_cast<std::ptrdiff_t>(j) + shift;
    const auto s = static_cast<std::ptrdiff_t>(other.side_);
    if (oi < 0 || oj < 0 || oi >= s || oj >= s) return other.size();
    return other.index(static_cast<std::size_t>(oi), static_cast<std::size_t>(oj));
  }

  bool shares_nodes_with(const Grid& other) const {
    return kind_ == other.kind_ && n_ == other.n_ && h_ == other.h_;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.kind_ == b.kind_ && a.n_ == b.n_ && a.h_ == b.h_ && a.radius_ == b.radius_ &&
           a.roles_.size() == b.roles_.size();
  }

 private:
  Grid(GridKind kind, int n, double h, double radius, std::size_t nodes)
      : kind_(kind), n_(n), h_(h), radius_(radius), side_(nodes), roles_(nodes, NodeRole::interior) {
    roles_.back() = NodeRole::boundary;
  }

  Grid() = default;

  static void check_common(int n, double spacing, double radius) {
    if (n < 1) throw ConfigurationError("complex dimension must be >= 1");
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigurationError("grid spacing must be positive");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigurationError("grid radius must be positive");
  }

  static Grid make_tensor(double h, double radius) {
    Grid g;
    g.kind_ = GridKind::tensor2d;
    g.n_ = 1;
    g.h_ = h;
    g.radius_ = radius;
    g.offset_ = static_cast<std::ptrdiff_t>(std::floor(radius / h + 1e-9)) + 1;
    g.side_ = static_cast<std::size_t>(2 * g.offset_ + 1);
    g.roles_.assign(g.side_ * g.side_, NodeRole::outside);
    const double cut = radius * (1.0 - 1e-12);
    for (std::size_t node = 0; node < g.roles_.size(); ++node) {
      if (g.position(node).norm() < cut) g.roles_[node] = NodeRole::interior;
    }
    for (std::size_t j = 0; j < g.side_; ++j) {
      for (std::size_t i = 0; i < g.side_; ++i) {
        const std::size_t node = g.index(i, j);
        if (g.roles_[node] == NodeRole::interior) continue;
        const bool touches = (i > 0 && g.roles_[node - 1] == NodeRole::interior) ||
                             (i + 1 < g.side_ && g.roles_[node + 1] == NodeRole::interior) ||
                             (j > 0 && g.roles_[node - g.side_] == NodeRole::interior) ||
                             (j + 1 < g.side_ && g.roles_[node + g.side_] == NodeRole::interior);
        if (touches) g.roles_[node] = NodeRole::boundary;
      }
    }
    return g;
  }

  void require_resolution() const {
    std::size_t along_axis = 0;
    if (kind_ == GridKind::radial) {
      along_axis = size() - 1;
    } else {
      const auto m = static_cast<std::size_t>(offset_);
      for (std::size_t i = 0; i < side_; ++i) along_axis += interior(index(i, m)) ? 1 : 0;
    }
    if (along_axis < min_interior_per_axis) {
      throw ConfigurationError("grid too coarse: " + std::to_string(along_axis) +
                               " interior nodes per axis (need 8)");
    }
  }

  GridKind kind_ = GridKind::radial;
  int n_ = 1;
  double h_ = 0.0;
  double radius_ = 0.0;
  std::ptrdiff_t offset_ = 0;
  std::size_t side_ = 0;
  std::vector<NodeRole> roles_;
};

/// Node values over a grid. Outside nodes hold 0 and are never read.
class DiscreteField {
 public:
  DiscreteField() = default;
  explicit DiscreteField(Grid grid, double fill = 0.0)
      : grid_(std::move(grid)), values_(grid_.size(), 0.0) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (grid_.active(i)) values_[i] = fill;
    }
  }
  DiscreteField(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw ConfigurationError("field size does not match grid");
    require_finite();
  }

  /// Evaluates `fn(Point)` at every active node.
  template <class Fn>
  static DiscreteField sample(const Grid& grid, Fn&& fn) {
    DiscreteField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid.active(i)) out.values_[i] = fn(grid.position(i));
    }
    out.require_finite();
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  void require_finite() const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (grid_.active(i) && !std::isfinite(values_[i])) {
        throw DomainError("non-finite field value at node " + std::to_string(i));
      }
    }
  }

  /// Applies `op(a, b)` nodewise on active nodes; grids must coincide.
  template <class Op>
  friend DiscreteField combine(const DiscreteField& a, const DiscreteField& b, Op&& op) {
    if (!(a.grid_ == b.grid_)) throw ConfigurationError("fields live on different grids");
    DiscreteField out(a.grid_);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a.grid_.active(i)) out.values_[i] = op(a.values_[i], b.values_[i]);
    }
    return out;
  }

  template <class Op>
  DiscreteField map(Op&& op) const {
    DiscreteField out(grid_);
    for (std::size_t i = 0; i < size(); ++i) {
      if (grid_.active(i)) out.values_[i] = op(values_[i]);
    }
    return out;
  }

  friend DiscreteField operator+(const DiscreteField& a, const DiscreteField& b) {
    return combine(a, b, std::plus<>{});
  }
  friend DiscreteField operator-(const DiscreteField& a, const DiscreteField& b) {
    return combine(a, b, std::minus<>{});
  }
  friend DiscreteField operator*(double s, const DiscreteField& a) {
    return a.map([s](double v) { return s * v; });
  }

 private:
  Grid grid_ = Grid::radial(1, 1.0, 8.0);
  std::vector<double> values_;
};

enum class NodeSet { interior, active };

template <class Pred>
double reduce_max(const DiscreteField& f, NodeSet set, Pred&& keep) {
  double best = -HUGE_VAL;
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const bool in = set == NodeSet::interior ? g.interior(i) : g.active(i);
    if (in && keep(i)) best = std::max(best, f[i]);
  }
  return best;
}

inline double max_value(const DiscreteField& f, NodeSet set = NodeSet::active) {
  return reduce_max(f, set, [](std::size_t) { return true; });
}

inline double min_value(const DiscreteField& f, NodeSet set = NodeSet::active) {
  return -max_value(-1.0 * f, set);
}

inline double max_abs(const DiscreteField& f, NodeSet set = NodeSet::active) {
  return std::max(max_value(f, set), -min_value(f, set));
}

/// sup |a - b| over the chosen node set.
inline double sup_difference(const DiscreteField& a, const DiscreteField& b, NodeSet set = NodeSet::active) {
  return max_abs(a - b, set);
}

/// Moves the boundary to the sphere r = radius; values outside are dropped.
inline DiscreteField restrict(const DiscreteField& f, double radius) {
  const Grid& src = f.grid();
  Grid dst = src.restricted(radius);
  DiscreteField out(dst);
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (!dst.active(i)) continue;
    const std::size_t j = dst.map_to(i, src);
    out[i] = f[j];
  }
  return out;
}

/// Copies values of `f` onto the nodes of a larger grid sharing its spacing;
/// nodes not covered by f's active set receive `fill`.
inline DiscreteField extend(const DiscreteField& f, const Grid& target, double fill = 0.0) {
  if (!f.grid().shares_nodes_with(target)) throw ConfigurationError("extend: grids do not share nodes");
  DiscreteField out(target, fill);
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!target.active(i)) continue;
    const std::size_t j = target.map_to(i, f.grid());
    if (j < f.size() && f.grid().active(j)) out[i] = f[j];
  }
  return out;
}

/// Linear (radial) or bilinear (tensor2d) value of f at a point.
inline double interpolate_at(const DiscreteField& f, Point p) {
  const Grid& g = f.grid();
  const double h = g.spacing();
  const double slack = 1e-9 * h;
  if (g.kind() == GridKind::radial) {
    const double r = p.norm();
    const double last = static_cast<double>(g.size() - 1);
    double t = r / h;
    if (t > last + 1e-9) throw DomainError("interpolation point outside source grid");
    t = std::min(t, last);
    auto i = static_cast<std::size_t>(std::floor(t));
    if (i >= g.size() - 1) i = g.size() - 2;
    const double w = t - static_cast<double>(i);
    return (1.0 - w) * f[i] + w * f[i + 1];
  }
  const double m = static_cast<double>(g.offset());
  const double tx = p.x / h + m;
  const double ty = p.y / h + m;
  const double top = static_cast<double>(g.side() - 1);
  if (tx < -slack || ty < -slack || tx > top + slack || ty > top + slack) {
    throw DomainError("interpolation point outside source grid");
  }
  auto cell = [&](double t) {
    auto i = static_cast<std::size_t>(std::floor(std::clamp(t, 0.0, top)));
    return std::min<std::size_t>(i, g.side() - 2);
  };
  const std::size_t i = cell(tx);
  const std::size_t j = cell(ty);
  const double wx = std::clamp(tx - static_cast<double>(i), 0.0, 1.0);
  const double wy = std::clamp(ty - static_cast<double>(j), 0.0, 1.0);
  const std::size_t corners[4] = {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)};
  const double weights[4] = {(1 - wx) * (1 - wy), wx * (1 - wy), (1 - wx) * wy, wx * wy};
  double value = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (weights[k] == 0.0) continue;
    if (!g.active(corners[k])) throw DomainError("interpolation would extrapolate beyond the source domain");
    value += weights[k] * f[corners[k]];
  }
  return value;
}

inline DiscreteField interpolate(const DiscreteField& f, const Grid& target) {
  if (target.kind() != f.grid().kind()) throw ConfigurationError("interpolate: grid kinds differ");
  if (target == f.grid()) return f;
  DiscreteField out(target);
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target.active(i)) out[i] = interpolate_at(f, target.position(i));
  }
  return out;
}

/// Nested balls Ω_1 ⊂⊂ Ω_2 ⊂⊂ ... sharing the nodes of one fine grid.
class DomainExhaustion {
 public:
  DomainExhaustion(Grid finest, std::vector<double> radii) : grid_(std::move(finest)), radii_(std::move(radii)) {
    if (radii_.empty()) throw ConfigurationError("exhaustion needs at least one radius");
    for (std::size_t k = 1; k < radii_.size(); ++k) {
      if (radii_[k] - radii_[k - 1] < 2.0 * grid_.spacing() * (1.0 - 1e-9)) {
        throw ConfigurationError("exhaustion radii must increase by at least 2h");
      }
    }
    if (radii_.back() > grid_.radius() * (1.0 + 1e-12)) {
      throw ConfigurationError("largest exhaustion radius exceeds the grid");
    }
  }

  std::size_t levels() const noexcept { return radii_.size(); }
  double radius(std::size_t k) const { return radii_.at(k); }
  const std::vector<double>& radii() const noexcept { return radii_; }
  const Grid& finest() const noexcept { return grid_; }
  Grid level(std::size_t k) const { return grid_.restricted(radii_.at(k)); }

 private:
  Grid grid_;
  std::vector<double> radii_;
};

/// A scalar function of position: a constant, a closed form, or nodal data.
class SpatialFunction {
 public:
  using Formula = std::function<double(const Point&)>;

  SpatialFunction() : SpatialFunction(0.0) {}
  SpatialFunction(double constant)  // NOLINT(google-explicit-constructor)
      : formula_([constant](const Point&) { return constant; }), constant_(constant) {}
  explicit SpatialFunction(Formula formula) : formula_(std::move(formula)) {}
  explicit SpatialFunction(DiscreteField nodal) : nodal_(std::make_shared<DiscreteField>(std::move(nodal))) {}

  static SpatialFunction radial(std::function<double(double)> profile) {
    return SpatialFunction(Formula([p = std::move(profile)](const Point& x) { return p(x.norm()); }));
  }

  bool is_constant() const noexcept { return constant_.has_value(); }
  bool is_nodal() const noexcept { return nodal_ != nullptr; }
  std::optional<double> constant() const { return constant_; }
  const DiscreteField* nodal() const noexcept { return nodal_.get(); }

  double operator()(const Point& p) const {
    if (nodal_) return interpolate_at(*nodal_, p);
    return formula_(p);
  }

  DiscreteField sample(const Grid& grid) const {
    if (nodal_) {
      if (nodal_->grid() == grid) return *nodal_;
      if (nodal_->grid().shares_nodes_with(grid)) {
        DiscreteField out(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (!grid.active(i)) continue;
          const std::size_t j = grid.map_to(i, nodal_->grid());
          if (j >= nodal_->size() || !nodal_->grid().active(j)) {
            throw DomainError("nodal function does not cover the requested grid");
          }
          out[i] = (*nodal_)[j];
        }
        return out;
      }
      return interpolate(*nodal_, grid);
    }
    return DiscreteField::sample(grid, formula_);
  }

 private:
  Formula formula_;
  std::shared_ptr<const DiscreteField> nodal_;
  std::optional<double> constant_;
};

}  // namespace chern
