#include "fixtures.hpp"

#include <fodkq/geometry.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace fodkq;

namespace {

bool on_canonical_hemisphere(const Vec3& d) {
  return d.z() > 0 || (d.z() == 0 && (d.y() > 0 || (d.y() == 0 && d.x() > 0)));
}

}  // namespace

TEST(GenerateDirections, SingleDirectionIsZAxis) {
  const auto d = generate_directions(1, 7);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR((d[0] - Vec3::UnitZ()).norm(), 0.0, 1e-15);
}

TEST(GenerateDirections, ThreeDirectionsAreOrthogonal) {
  const auto d = generate_directions(3, 11);
  ASSERT_EQ(d.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) EXPECT_LE(std::abs(d[i].dot(d[j])), 0.02);
  // The orthogonal triple has energy 3 * (1/sqrt2 + 1/sqrt2) = 3 sqrt2.
  EXPECT_NEAR(antipodal_energy(d.directions()), 3.0 * std::sqrt(2.0), 1e-6);
}

TEST(GenerateDirections, TwoHundredAreWellSeparated) {
  const auto d = generate_directions(200, 3);
  ASSERT_EQ(d.size(), 200u);
  EXPECT_GE(min_pairwise_angle(d.directions()), 7.0);
}

TEST(GenerateDirections, CanonicalUnitAndDeterministic) {
  const auto a = generate_directions(60, 42);
  const auto b = generate_directions(60, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);  // bit identical
    EXPECT_NEAR(a[i].norm(), 1.0, 1e-12);
    EXPECT_TRUE(on_canonical_hemisphere(a[i]));
  }
  const auto c = generate_directions(60, 43);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= (a[i] != c[i]);
  EXPECT_TRUE(differs);
}

TEST(GenerateDirections, BeatsRandomConfigurations) {
  for (std::size_t n : {10u, 30u}) {
    const double e = antipodal_energy(generate_directions(n, 5).directions());
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
      const auto pts = fixture::random_unit_vectors(n, rng);
      EXPECT_LE(e, antipodal_energy(pts));
    }
  }
}

TEST(GenerateDirections, RejectsZeroCount) { EXPECT_THROW((void)generate_directions(0, 1), std::invalid_argument); }

TEST(DirectionSet, CanonicalizesAndRejectsDuplicates) {
  DirectionSet s({Vec3(0, 0, -2), Vec3(1, 0, 0), Vec3(0, -1, 0)});
  EXPECT_EQ(s[0], Vec3(0, 0, 1));
  EXPECT_EQ(s[1], Vec3(1, 0, 0));
  EXPECT_EQ(s[2], Vec3(0, 1, 0));
  EXPECT_THROW(DirectionSet({Vec3(0, 0, 1), Vec3(0, 0, -1)}), std::invalid_argument);
  EXPECT_THROW(DirectionSet({Vec3::Zero()}), std::invalid_argument);
  EXPECT_EQ(s.nearest(Vec3(0.1, 0.0, -1.0).normalized()), 0u);
}

TEST(SubsetQPoints, AllPointsReturnsFullScheme) {
  const auto full = QScheme::single_shell(2000, generate_directions(12, 1));
  const auto sub = subset_q_points(full, 12);
  ASSERT_EQ(sub.size(), full.size());
  EXPECT_EQ(sub[0].b_value, 0.0);
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_EQ(sub[i].direction, full[i].direction);
}

TEST(SubsetQPoints, OrthogonalPairsGiveOrthogonalTriple) {
  // three orthogonal axes, each paired with a direction 5 degrees away
  const double t = 5.0 * std::numbers::pi / 180.0;
  std::vector<Vec3> dirs{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), Vec3(std::cos(t), std::sin(t), 0),
                         Vec3(0, std::cos(t), std::sin(t)), Vec3(std::sin(t), 0, std::cos(t))};
  const auto full = QScheme::single_shell(1000, DirectionSet(dirs));
  const auto sub = subset_q_points(full, 3);
  ASSERT_EQ(sub.size(), 4u);
  // brute force: the best 3-subset by minimum pairwise angle
  double best = 0;
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b)
      for (int c = b + 1; c < 6; ++c) best = std::max(best, min_pairwise_angle({dirs[a], dirs[b], dirs[c]}));
  std::vector<Vec3> got{sub[1].direction, sub[2].direction, sub[3].direction};
  EXPECT_NEAR(min_pairwise_angle(got), best, 1e-9);
  EXPECT_NEAR(min_pairwise_angle(got), 90.0, 1e-9);
  // one direction per near-duplicate pair
  for (int axis = 0; axis < 3; ++axis) {
    int hits = 0;
    for (const auto& g : got) hits += angle_between(g, dirs[axis]) <= 5.0 + 1e-9;
    EXPECT_EQ(hits, 1);
  }
}

TEST(SubsetQPoints, BeatsMedianRandomSubset) {
  const auto full = QScheme::single_shell(2000, generate_directions(256, 17));
  const auto sub = subset_q_points(full, 30);
  std::vector<Vec3> chosen;
  for (std::size_t i = 1; i < sub.size(); ++i) chosen.push_back(sub[i].direction);
  const double greedy = min_pairwise_angle(chosen);

  std::mt19937_64 rng(5);
  std::vector<std::size_t> idx(256);
  std::iota(idx.begin(), idx.end(), 1);
  std::vector<double> random_angles;
  for (int trial = 0; trial < 100; ++trial) {
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<Vec3> pick;
    for (int k = 0; k < 30; ++k) pick.push_back(full[idx[static_cast<std::size_t>(k)]].direction);
    random_angles.push_back(min_pairwise_angle(pick));
  }
  std::nth_element(random_angles.begin(), random_angles.begin() + 50, random_angles.end());
  EXPECT_GE(greedy, random_angles[50]);
}

TEST(SubsetQPoints, InsufficientPoints) {
  const auto full = QScheme::single_shell(2000, generate_directions(6, 1));
  try {
    (void)subset_q_points(full, 7);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "insufficient q-points");
  }
}

TEST(AngularNeighborhood, Examples) {
  const auto ortho = build_angular_neighborhood(DirectionSet({Vec3::UnitX(), Vec3::UnitY()}), 15);
  EXPECT_EQ(ortho[0], std::vector<std::size_t>{0});
  EXPECT_EQ(ortho[1], std::vector<std::size_t>{1});

  const double t = 10.0 * std::numbers::pi / 180.0;
  const auto ten = build_angular_neighborhood(DirectionSet({Vec3::UnitZ(), Vec3(std::sin(t), 0, std::cos(t))}), 15);
  EXPECT_EQ(ten[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(ten[1], (std::vector<std::size_t>{0, 1}));

  // (0,0,-1) rotated 5 degrees: its canonical copy lies 5 degrees from +z
  const double f = 5.0 * std::numbers::pi / 180.0;
  const auto anti =
      build_angular_neighborhood(DirectionSet({Vec3::UnitZ(), Vec3(std::sin(f), 0, -std::cos(f))}), 15);
  EXPECT_EQ(anti[0], (std::vector<std::size_t>{0, 1}));
}

TEST(AngularNeighborhood, SymmetricAndReflexive) {
  const auto dirs = generate_directions(120, 9);
  const auto nbh = build_angular_neighborhood(dirs, 15);
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    EXPECT_TRUE(std::binary_search(nbh[d].begin(), nbh[d].end(), d));
    EXPECT_TRUE(std::is_sorted(nbh[d].begin(), nbh[d].end()));
    for (auto e : nbh[d]) EXPECT_TRUE(std::binary_search(nbh[e].begin(), nbh[e].end(), d));
  }
}

TEST(AngleBetween, Examples) {
  const Vec3 a = Vec3(1, 2, 3).normalized();
  EXPECT_EQ(angle_between(a, a), 0.0);
  EXPECT_EQ(angle_between(a, -a), 0.0);
  EXPECT_NEAR(angle_between(Vec3::UnitX(), Vec3::UnitY()), 90.0, 1e-12);
  try {
    (void)angle_between(Vec3(1, 1, 0), Vec3::UnitX());
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "direction not normalized");
  }
}

TEST(AngleBetween, SymmetricBoundedSignInvariant) {
  std::mt19937_64 rng(1);
  const auto v = fixture::random_unit_vectors(200, rng);
  for (std::size_t i = 0; i + 1 < v.size(); i += 2) {
    const double ab = angle_between(v[i], v[i + 1]);
    EXPECT_EQ(ab, angle_between(v[i + 1], v[i]));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 90.0);
    EXPECT_NEAR(ab, angle_between(-v[i], v[i + 1]), 1e-12);
    EXPECT_NEAR(ab, angle_between(v[i], -v[i + 1]), 1e-12);
    const double acos_form = std::acos(std::min(1.0, std::abs(v[i].dot(v[i + 1])))) * 180.0 / std::numbers::pi;
    EXPECT_NEAR(ab, acos_form, 1e-6);
  }
}

TEST(GeometryText, RoundTrip) {
  const auto dirs = generate_directions(25, 4);
  std::stringstream ss;
  write_directions(ss, dirs);
  const auto back = read_directions(ss);
  ASSERT_EQ(back.size(), dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) EXPECT_EQ(back[i], dirs[i]);

  const auto q = QScheme::single_shell(2000, dirs);
  std::stringstream qs;
  write_qscheme(qs, q);
  const auto qb = read_qscheme(qs);
  ASSERT_EQ(qb.size(), q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_EQ(qb[i].b_value, q[i].b_value);
    EXPECT_EQ(qb[i].direction, q[i].direction);
  }
}

TEST(QSchemeInvariants, RejectsMixedShells) {
  std::vector<QPoint> pts{{0, Vec3::Zero()}, {1000, Vec3::UnitX()}, {2000, Vec3::UnitY()}};
  EXPECT_THROW(QScheme{pts}, std::invalid_argument);
}
