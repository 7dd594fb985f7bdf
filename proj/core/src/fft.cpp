#include "fodkq/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace fodkq {
namespace {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// Planner calls are not thread-safe in FFTW; execution on new arrays is.
fftw_plan plan_for(int rows, int cols, int slices, bool inverse) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int, bool>, PlanPtr> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(rows, cols, slices, inverse);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second.get();
  std::vector<Complex> scratch(static_cast<std::size_t>(rows) * cols * slices);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const int dims[2] = {rows, cols};
  fftw_plan p = fftw_plan_many_dft(2, dims, slices, buf, nullptr, 1, rows * cols, buf, nullptr, 1, rows * cols,
                                   inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (p == nullptr) throw std::runtime_error("FFTW planning failed");
  cache.emplace(key, PlanPtr(p));
  return p;
}

}  // namespace

void fft2_slices(std::span<Complex> data, int rows, int cols, int slices, bool inverse) {
  const auto n = static_cast<std::size_t>(rows) * cols;
  if (data.size() != n * slices) throw std::invalid_argument("fft2_slices: buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(rows, cols, slices, inverse), buf, buf);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : data) v *= scale;
}

}  // namespace fodkq
