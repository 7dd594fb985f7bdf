#include <fodkq/dictionary.hpp>
#include <fodkq/kq_operator.hpp>
#include <fodkq/rng.hpp>
#include <fodkq/sampling.hpp>
#include <fodkq/solver.hpp>

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

namespace {

using namespace fodkq;

// Desk-scale setup: 16x16x5 grid, about 60% white matter, n = 200.
struct Setup {
  VolumeShape shape{16, 16, 5};
  DirectionSet dirs = generate_directions(200, 3);
  QScheme q = subset_q_points(QScheme::single_shell(2000.0, generate_directions(60, 3)), 30);
  ResponseDictionary dict = build_dictionary(q, dirs, TensorParams{}, {kGrayMatterDiffusivity});
  Eigen::VectorXd s0;
  std::shared_ptr<const TissueLayout> layout;
  std::unique_ptr<KqOperator> op;
  FodField x;
  KqData y;

  explicit Setup(double accel) {
    auto rng = substream(7, {}, StreamTag::Test);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    s0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape.voxels()));
    for (Eigen::Index v = 0; v < s0.size(); ++v) {
      if (u(rng) < 0.6) s0[v] = 1.0 + 4.0 * u(rng);
    }
    layout = std::make_shared<const TissueLayout>(TissueLayout::white_matter_where(s0));
    const auto masks = generate_masks(shape.nx, shape.ny, shape.nz, static_cast<int>(q.size()), accel, 0.125, 5);
    op = std::make_unique<KqOperator>(dict, layout, CalibrationData{s0, SensitivityMap::unit(shape.voxels()), {}},
                                      masks, shape);
    x = op->zero_field();
    for (Eigen::Index i = 0; i < x.s1.size(); ++i) x.s1.data()[i] = u(rng) < 0.02 ? u(rng) : 0.0;
    y = op->apply(x);
  }
};

Setup& setup(double accel) {
  static Setup full(1.0);
  static Setup under(10.0);
  return accel > 1.0 ? under : full;
}

void BM_Apply(benchmark::State& state) {
  auto& s = setup(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(s.op->apply(s.x));
}
BENCHMARK(BM_Apply)->Arg(1)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_Adjoint(benchmark::State& state) {
  auto& s = setup(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(s.op->apply_adjoint(s.y));
}
BENCHMARK(BM_Adjoint)->Arg(1)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_ProjectWeightedL1(benchmark::State& state) {
  auto rng = substream(11, {}, StreamTag::Test);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Eigen::MatrixXd x(200, n / 200), w(200, n / 200);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = g(rng);
    w.data()[i] = u(rng);
  }
  const double kappa = 0.1 * static_cast<double>(x.cols());
  for (auto _ : state) benchmark::DoNotOptimize(project_weighted_l1_positive(x, w, kappa));
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_ProjectWeightedL1)->Arg(200 * 64)->Arg(200 * 744)->Unit(benchmark::kMicrosecond);

void BM_Blur(benchmark::State& state) {
  auto& s = setup(1.0);
  const auto idx = build_neighborhood_index(*s.layout, s.shape, s.dirs, 15.0);
  for (auto _ : state) benchmark::DoNotOptimize(compute_blur(s.x.s1, idx));
}
BENCHMARK(BM_Blur)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
