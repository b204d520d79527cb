#include "plab/suites.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "plab/random.hpp"

namespace plab {

TrigSeries random_boundary(std::uint64_t seed) { return TrigSeries::random(seed, 5, 3.0, 0.5, 1.0); }

ManufacturedProblem manufactured_problem(const ExponentCtx& ctx, const Grid2D& grid, std::uint64_t seed) {
  Rng rng(seed);
  TrigSeries exact = TrigSeries::random(rng.split(), 4, 4.0, 0.3, 1.0);
  TrigSeries psi = TrigSeries::random(rng.split(), 3, 6.0, 0.2);
  ScalarField u = sample(grid, [&](const Vec2& x) { return exact.value(x); });
  VectorField g = sample(grid, [&](const Vec2& x) { return exact.gradient(x); });
  VectorField f = manufactured_forcing(g, ctx, psi);
  DirichletProblem prob = DirichletProblem::on_rectangle(ctx, u, f);
  return {std::move(exact), std::move(psi), std::move(u), std::move(g), std::move(f), std::move(prob)};
}

std::vector<Ball> sample_balls(std::uint64_t seed, std::size_t count, const Grid2D& grid, double r_lo, double r_hi,
                               double factor) {
  if (!(r_lo > 0.0 && r_hi >= r_lo)) throw ParameterError("radius range must satisfy 0 < lo <= hi");
  if (!(factor >= 1.0)) throw ParameterError("ball factor must be >= 1");
  const double reach = factor * r_hi;
  if (2.0 * reach > grid.x_max() - grid.x0() || 2.0 * reach > grid.y_max() - grid.y0()) {
    throw ParameterError("sampled balls do not fit in the grid");
  }
  Rng rng(seed);
  std::vector<Ball> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double r = rng.uniform(r_lo, r_hi);
    const double m = factor * r;
    const double cx = rng.uniform(grid.x0() + m, grid.x_max() - m);
    const double cy = rng.uniform(grid.y0() + m, grid.y_max() - m);
    out.emplace_back(Vec2{cx, cy}, r);
  }
  return out;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::size_t(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace plab
