#include <fodkq/fft.hpp>
#include <fodkq/phantom.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace fodkq;

namespace {

Bundle line(Vec3 a, Vec3 b, double radius, int weight) { return {LineCenterline{a, b}, radius, weight}; }

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

PhantomSpec default_spec() { return parse_phantom_spec(read_file(std::string(FODKQ_DATA_DIR) + "/default_phantom.json")); }

}  // namespace

TEST(Rasterize, SingleStraightBundle) {
  PhantomSpec spec;
  spec.volume_shape = {12, 12, 3};
  spec.bundles = {line({0, 5, 1}, {11, 5, 1}, 1.5, 3)};
  const auto gt = rasterize_phantom(spec);
  std::size_t covered = 0;
  for (std::size_t v = 0; v < gt.shape.voxels(); ++v) {
    const auto& f = gt.fibers[v];
    if (f.empty()) {
      EXPECT_EQ(gt.s0(static_cast<Eigen::Index>(v)), 0.0);
      continue;
    }
    ++covered;
    ASSERT_EQ(f.size(), 1u);
    EXPECT_NEAR((f[0].direction - Vec3::UnitX()).norm(), 0.0, 1e-12);
    EXPECT_EQ(f[0].fraction, 1.0);
    EXPECT_EQ(gt.s0(static_cast<Eigen::Index>(v)), 3.0);
  }
  // y in 4..6 and z in 0..2 all lie within 1.5 of (y=5, z=1)
  EXPECT_EQ(covered, 12u * 9u);
  EXPECT_EQ(gt.fiber_voxel_count(), covered);
}

TEST(Rasterize, OrthogonalCrossing) {
  PhantomSpec spec;
  spec.volume_shape = {10, 10, 1};
  spec.bundles = {line({0, 5, 0}, {9, 5, 0}, 1.0, 2), line({5, 0, 0}, {5, 9, 0}, 1.0, 3)};
  const auto gt = rasterize_phantom(spec);
  const auto v = static_cast<std::size_t>(spec.volume_shape.index(5, 5, 0));
  const auto& f = gt.fibers[v];
  ASSERT_EQ(f.size(), 2u);
  EXPECT_NEAR(angle_between(f[0].direction, f[1].direction), 90.0, 1e-9);
  EXPECT_EQ(f[0].fraction, 0.5);
  EXPECT_EQ(f[1].fraction, 0.5);
  EXPECT_EQ(gt.s0(static_cast<Eigen::Index>(v)), 5.0);
}

TEST(Rasterize, DefaultSpecIsCrossingRich) {
  const auto spec = default_spec();
  EXPECT_EQ(spec.volume_shape, (VolumeShape{16, 16, 5}));
  EXPECT_EQ(spec.bundles.size(), 5u);
  const auto gt = rasterize_phantom(spec);
  std::size_t nonempty = 0, crossing = 0;
  for (const auto& f : gt.fibers) {
    EXPECT_LE(f.size(), 5u);
    nonempty += !f.empty();
    crossing += f.size() >= 2;
    double sum = 0;
    for (const auto& e : f) sum += e.fraction;
    if (!f.empty()) {
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
  ASSERT_GT(nonempty, 0u);
  EXPECT_GE(static_cast<double>(crossing) / static_cast<double>(nonempty), 0.25);
  for (const auto& b : spec.bundles) {
    EXPECT_GE(b.weight, 1);
    EXPECT_LE(b.weight, 5);
  }
}

TEST(Rasterize, OutOfBounds) {
  PhantomSpec spec;
  spec.volume_shape = {8, 8, 1};
  spec.bundles = {line({0, 4, 0}, {12, 4, 0}, 1.0, 1)};
  try {
    (void)rasterize_phantom(spec);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "bundle out of bounds");
  }
}

TEST(PhantomSpec, Validation) {
  PhantomSpec spec;
  EXPECT_THROW(spec.validate(), std::invalid_argument);  // no bundles
  spec.bundles = {line({0, 0, 0}, {1, 0, 0}, 1.0, 6)};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.bundles = {line({0, 0, 0}, {1, 0, 0}, -1.0, 2)};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(PhantomSpec, JsonRoundTrip) {
  const auto spec = default_spec();
  const auto again = parse_phantom_spec(phantom_spec_to_json(spec));
  EXPECT_EQ(phantom_spec_to_json(again), phantom_spec_to_json(spec));
  const auto a = rasterize_phantom(spec);
  const auto b = rasterize_phantom(again);
  EXPECT_EQ(a.s0, b.s0);
}

TEST(Signal, ClosedFormValues) {
  GroundTruth gt;
  gt.shape = {2, 1, 1};
  gt.fibers = {{{Vec3::UnitZ(), 1.0}}, {{Vec3::UnitZ(), 0.5}, {Vec3::UnitX(), 0.5}}};
  gt.s0 = Eigen::Vector2d(1.0, 1.0);
  const QScheme q({{0, Vec3::Zero()}, {2000, Vec3::UnitZ()}});
  const auto s = synthesize_q_signal(gt, q, TensorParams{});
  EXPECT_EQ(s(0, 0), 1.0);
  EXPECT_EQ(s(0, 1), 1.0);
  EXPECT_NEAR(s(1, 0), 0.033373, 5e-7);
  EXPECT_NEAR(s(1, 1), 0.2910925, 5e-7);
  EXPECT_NEAR(s(1, 1), 0.5 * std::exp(-3.4) + 0.5 * std::exp(-0.6), 1e-15);
}

TEST(Signal, WithinZeroAndS0) {
  const auto gt = rasterize_phantom(default_spec());
  const auto q = QScheme::single_shell(2000, generate_directions(30, 2));
  const auto s = synthesize_q_signal(gt, q, TensorParams{});
  for (Eigen::Index v = 0; v < s.cols(); ++v) {
    EXPECT_EQ(s(0, v), gt.s0(v));
    if (gt.s0(v) == 0) continue;
    EXPECT_TRUE((s.col(v).array() > 0).all());
    EXPECT_TRUE((s.col(v).array() <= gt.s0(v)).all());
  }
}

TEST(Acquire, ConstantImageIsDeltaAtDc) {
  const VolumeShape shape{8, 4, 2};
  const Eigen::MatrixXd sig = Eigen::MatrixXd::Constant(1, 64, 2.5);
  const auto acq = acquire(sig, shape, full_masks(8, 4, 2, 1), INFINITY, PhaseMode::None, SensitivityMap::unit(64), 0);
  const auto& b = acq.measurements.data.block(0, 0);
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < 32; ++i) {
      const Complex z = b(s * 32 + i);
      if (i == 0) {
        EXPECT_NEAR(std::abs(z - Complex(std::sqrt(32.0) * 2.5, 0)), 0.0, 1e-12);
      } else {
        EXPECT_NEAR(std::abs(z), 0.0, 1e-12);
      }
    }
  EXPECT_EQ(acq.true_phase.size(), 0);
}

TEST(Acquire, NoiseLevelMatchesSnr) {
  const VolumeShape shape{16, 16, 5};
  const int q = 40;
  Eigen::MatrixXd sig = Eigen::MatrixXd::Constant(q, 1280, 3.0);
  const auto masks = full_masks(16, 16, 5, q);
  const auto sens = SensitivityMap::unit(1280);
  const auto clean = acquire(sig, shape, masks, INFINITY, PhaseMode::None, sens, 4);
  const auto noisy = acquire(sig, shape, masks, 30.0, PhaseMode::None, sens, 4);
  EXPECT_DOUBLE_EQ(noisy.measurements.noise_sigma, 0.1);
  double ss = 0;
  std::size_t n = 0;
  for (std::size_t b = 0; b < clean.measurements.data.blocks.size(); ++b) {
    const Eigen::VectorXcd d = noisy.measurements.data.blocks[b] - clean.measurements.data.blocks[b];
    for (const auto& z : d) {
      ss += z.real() * z.real() + z.imag() * z.imag();
      n += 2;
    }
  }
  ASSERT_GE(n, 100000u);
  EXPECT_NEAR(std::sqrt(ss / static_cast<double>(n)), 0.1, 0.002);
}

TEST(Acquire, RejectsNonPositiveSnr) {
  const Eigen::MatrixXd sig = Eigen::MatrixXd::Ones(1, 4);
  EXPECT_THROW((void)acquire(sig, {2, 2, 1}, full_masks(2, 2, 1, 1), 0.0, PhaseMode::None, SensitivityMap::unit(4), 0),
               std::invalid_argument);
  EXPECT_THROW((void)acquire(sig, {2, 2, 1}, full_masks(2, 2, 1, 1), -3.0, PhaseMode::None, SensitivityMap::unit(4), 0),
               std::invalid_argument);
}

TEST(Acquire, LinearPhaseShiftsKspace) {
  // shift theorem: exp(i 2 pi x / nx) moves the spectrum by one bin along axis 0
  const int rows = 8, cols = 6;
  std::vector<Complex> img(48), shifted(48);
  for (int i = 0; i < 48; ++i) img[static_cast<std::size_t>(i)] = {std::sin(0.3 * i) + 1.5, 0.0};
  const auto ph = linear_phase_slice(rows, cols, 1.0, 0.0);
  for (int i = 0; i < 48; ++i) shifted[static_cast<std::size_t>(i)] = img[static_cast<std::size_t>(i)] * ph(i);
  fft2(img, rows, cols, false);
  fft2(shifted, rows, cols, false);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const auto src = static_cast<std::size_t>(((r - 1 + rows) % rows) * cols + c);
      EXPECT_NEAR(std::abs(shifted[static_cast<std::size_t>(r * cols + c)] - img[src]), 0.0, 1e-12);
    }
}

TEST(Acquire, PhaseContaminationIsRecorded) {
  const VolumeShape shape{8, 8, 2};
  Eigen::MatrixXd sig = Eigen::MatrixXd::Constant(3, 128, 1.0);
  const auto masks = full_masks(8, 8, 2, 3);
  const auto acq = acquire(sig, shape, masks, INFINITY, PhaseMode::Linear, SensitivityMap::unit(128), 12);
  ASSERT_EQ(acq.true_phase.rows(), 3);
  EXPECT_LT(((acq.true_phase.array().abs() - 1.0).abs()).maxCoeff(), 1e-12);
  for (int q = 0; q < 3; ++q) {
    Eigen::VectorXcd d = acq.measurements.data.block(q, 0);
    fft2_slices(std::span<Complex>(d.data(), static_cast<std::size_t>(d.size())), 8, 8, 2, true);
    for (Eigen::Index v = 0; v < 128; ++v) EXPECT_NEAR(std::abs(d(v) - acq.true_phase(q, v)), 0.0, 1e-12);
  }
}

TEST(Acquire, RoundTripWithoutPhaseOrNoise) {
  const auto spec = default_spec();
  const auto gt = rasterize_phantom(spec);
  const auto q = QScheme::single_shell(2000, generate_directions(10, 2));
  const auto sig = synthesize_q_signal(gt, q, TensorParams{});
  const auto acq = acquire(sig, gt.shape, full_masks(16, 16, 5, 11), INFINITY, PhaseMode::None,
                           SensitivityMap::unit(1280), 0);
  for (int r = 0; r < 11; ++r) {
    Eigen::VectorXcd d = acq.measurements.data.block(r, 0);
    EXPECT_EQ(d.size(), 1280);
    fft2_slices(std::span<Complex>(d.data(), 1280), 16, 16, 5, true);
    EXPECT_LT((d.real() - sig.row(r).transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(d.imag().cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Acquire, DeterministicPerSeed) {
  const auto gt = rasterize_phantom(default_spec());
  const auto q = QScheme::single_shell(2000, generate_directions(6, 2));
  const auto sig = synthesize_q_signal(gt, q, TensorParams{});
  const auto masks = generate_masks(16, 16, 5, 7, 3.3, 0.125, 8);
  const auto a = acquire(sig, gt.shape, masks, 30, PhaseMode::Linear, SensitivityMap::unit(1280), 5);
  const auto b = acquire(sig, gt.shape, masks, 30, PhaseMode::Linear, SensitivityMap::unit(1280), 5);
  const auto c = acquire(sig, gt.shape, masks, 30, PhaseMode::Linear, SensitivityMap::unit(1280), 6);
  for (std::size_t i = 0; i < a.measurements.data.blocks.size(); ++i) {
    EXPECT_EQ(a.measurements.data.blocks[i], b.measurements.data.blocks[i]);
    EXPECT_EQ(a.measurements.data.blocks[i].size(), static_cast<Eigen::Index>(masks.count(static_cast<int>(i))));
  }
  EXPECT_NE(a.measurements.data.blocks[1], c.measurements.data.blocks[1]);
  EXPECT_EQ(a.measurements.data.blocks[0].size(), 1280);
}

TEST(SnapToGrid, MergesOntoDictionary) {
  const auto dirs = generate_directions(200, 4);
  const auto gt = rasterize_phantom(default_spec());
  const auto snapped = snap_to_grid(gt, dirs);
  for (const auto& f : snapped.fibers) {
    double sum = 0;
    for (const auto& e : f) {
      sum += e.fraction;
      EXPECT_EQ(e.direction, dirs[dirs.nearest(e.direction)]);
    }
    if (!f.empty()) {
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}
