#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace hdyn {

/// Deterministic sub-stream `stream` of a run seeded with `seed`. Streams are
/// independent of how many workers consume them.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller; bit-reproducible across standard libraries.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do u1 = uniform(); while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd unit_vector(Eigen::Index dim) {
    Eigen::VectorXd v(dim);
    double norm = 0.0;
    do {
      for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal();
      norm = v.norm();
    } while (norm == 0.0);
    return v / norm;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Pairwise (cascade) summation in index order.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

/// Runs body(batch_index) for every batch on a small worker pool. Each batch
/// writes only its own output slot, so results do not depend on scheduling.
inline void for_each_batch(std::size_t batches, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(batches, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t b = 0; b < batches; ++b) body(b);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < batches; b += workers) body(b);
    });
  }
  for (auto& t : pool) t.join();
}

inline constexpr std::size_t kSamplesPerBatch = 1u << 14;

inline std::size_t batch_count(std::size_t samples) {
  return (samples + kSamplesPerBatch - 1) / kSamplesPerBatch;
}

}  // namespace hdyn
