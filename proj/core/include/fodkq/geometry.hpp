#pragma once

#include "fodkq/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fodkq {

/// Antipodally symmetric direction set on the upper hemisphere.
///
/// Directions are stored canonicalized: z > 0, or z == 0 with y > 0, or
/// z == y == 0 with x > 0. Indices are therefore stable across runs.
class DirectionSet {
 public:
  DirectionSet() = default;
  /// Normalizes and canonicalizes every vector; throws std::invalid_argument
  /// on zero vectors or (antipodal) duplicates closer than 1e-9 rad.
  explicit DirectionSet(std::vector<Vec3> directions);

  [[nodiscard]] std::size_t size() const { return dirs_.size(); }
  [[nodiscard]] bool empty() const { return dirs_.empty(); }
  [[nodiscard]] const Vec3& operator[](std::size_t i) const { return dirs_[i]; }
  [[nodiscard]] const std::vector<Vec3>& directions() const { return dirs_; }

  /// Index of the direction with the smallest antipodal angle to `d`.
  [[nodiscard]] std::size_t nearest(const Vec3& d) const;

 private:
  std::vector<Vec3> dirs_;
};

/// Flip `d` onto the canonical hemisphere.
[[nodiscard]] Vec3 canonicalize(const Vec3& d);

struct QPoint {
  double b_value = 0.0;  // s/mm^2
  Vec3 direction = Vec3::Zero();
};

/// Single-shell acquisition: entry 0 is the b = 0 (s0) point, every other
/// entry shares one nonzero b-value and carries a unit direction.
class QScheme {
 public:
  QScheme() = default;
  explicit QScheme(std::vector<QPoint> points);

  /// b0 point followed by one point per direction at `b_value`.
  static QScheme single_shell(double b_value, const DirectionSet& dirs);

  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] std::size_t diffusion_count() const { return points_.empty() ? 0 : points_.size() - 1; }
  [[nodiscard]] const QPoint& operator[](std::size_t i) const { return points_[i]; }
  [[nodiscard]] const std::vector<QPoint>& points() const { return points_; }
  [[nodiscard]] double shell_b_value() const;

 private:
  std::vector<QPoint> points_;
};

/// Cone adjacency over a direction set. N(d) is sorted and always holds d.
struct AngularNeighborhood {
  double cone_half_angle_deg = 0.0;
  std::vector<std::vector<std::size_t>> adjacency;

  [[nodiscard]] const std::vector<std::size_t>& operator[](std::size_t d) const { return adjacency[d]; }
  [[nodiscard]] std::size_t size() const { return adjacency.size(); }
};

/// Antipodal Coulomb energy sum_{i<j} 1/|xi - xj| + 1/|xi + xj|.
[[nodiscard]] double antipodal_energy(const std::vector<Vec3>& points);

/// Near-uniform hemisphere directions by electrostatic repulsion from a
/// seeded random start. Deterministic for a given (n, seed).
[[nodiscard]] DirectionSet generate_directions(std::size_t n, std::uint64_t seed);

/// Greedy maximin subset: b0 point plus `m` diffusion points.
[[nodiscard]] QScheme subset_q_points(const QScheme& full, std::size_t m);

[[nodiscard]] AngularNeighborhood build_angular_neighborhood(const DirectionSet& dirs, double half_angle_deg);

/// Antipodal angle in degrees, in [0, 90]. Throws std::invalid_argument
/// ("direction not normalized") when either input is off the unit sphere.
[[nodiscard]] double angle_between(const Vec3& d1, const Vec3& d2);

/// Smallest pairwise antipodal angle in degrees (180 for fewer than 2 points).
[[nodiscard]] double min_pairwise_angle(const std::vector<Vec3>& dirs);

// Text formats: "x y z" per line (directions), "b x y z" per line (q-scheme),
// 17 significant digits, LF line endings.
void write_directions(std::ostream& os, const DirectionSet& dirs);
[[nodiscard]] DirectionSet read_directions(std::istream& is);
void write_qscheme(std::ostream& os, const QScheme& q);
[[nodiscard]] QScheme read_qscheme(std::istream& is);

}  // namespace fodkq
