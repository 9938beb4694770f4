#include "flatproc/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "flatproc/errors.hpp"
#include "flatproc/moments.hpp"

namespace flatproc {
namespace {

constexpr double kDegenerateNorm = 1e-8;

Eigen::VectorXd gaussian_vector(int dim, SplitMix64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  return v;
}

// Gram-Schmidt against the columns of `basis`; empty optional if the draw is
// numerically inside their span.
std::optional<Eigen::VectorXd> orthonormalize(Eigen::VectorXd v, const Eigen::MatrixXd& basis, int used) {
  const double original = v.norm();
  for (int pass = 0; pass < 2; ++pass) {
    for (int c = 0; c < used; ++c) v -= basis.col(c).dot(v) * basis.col(c);
  }
  const double norm = v.norm();
  if (norm <= kDegenerateNorm * std::max(1.0, original)) return std::nullopt;
  return v / norm;
}

template <typename Fn>
void parallel_blocks(std::int64_t n_blocks, int workers, Fn&& fn) {
  if (workers <= 1 || n_blocks <= 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= n_blocks || failed.load()) return;
      try {
        fn(b);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto n = static_cast<std::int64_t>(workers);
    for (std::int64_t i = 0; i < std::min(n, n_blocks); ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

void check_budget(const ProcessParams& p, const MonteCarloOptions& options) {
  const double mean = p.intensity * hitting_measure(p);
  if (mean > options.max_mean_flats) {
    throw BudgetExceeded("expected " + std::to_string(mean) + " flats per realization exceeds cap " +
                         std::to_string(options.max_mean_flats));
  }
}

void check_run_shape(std::int64_t n_reps, const MonteCarloOptions& options) {
  if (n_reps < 1) throw std::invalid_argument("replication count must be >= 1");
  if (options.block_size < 1) throw std::invalid_argument("block size must be >= 1");
}

int resolve_workers(const MonteCarloOptions& options) {
  return options.workers > 0 ? options.workers : default_worker_count();
}

void add_section_volumes(const Realization& r, const ProcessParams& p, int j_max, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const double rho = p.radius;
  for (const auto& flat : r.flats) {
    const double section = std::sqrt(std::max((rho - flat.distance) * (rho + flat.distance), 0.0));
    for (int j = 0; j <= j_max; ++j) out[static_cast<std::size_t>(j)] += intrinsic_volume_ball(p.k, j, section);
  }
}

// Intrinsic volumes of one replication, components 0..j_max.
void replication_volumes(const ProcessParams& p, int j_max, std::uint64_t seed, std::int64_t rep,
                         std::span<double> out) {
  auto rng = replication_stream(seed, static_cast<std::uint64_t>(rep));
  add_section_volumes(sample_realization(p, rng), p, j_max, out);
}

}  // namespace

SplitMix64 replication_stream(std::uint64_t seed, std::uint64_t replication) {
  return SplitMix64(SplitMix64::mix(SplitMix64::mix(seed) ^ (replication * 0xD1B54A32D192ED03ULL + 1)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64::mix(seed + 0x9E3779B97F4A7C15ULL * (index + 1));
}

std::uint64_t sample_flat_count(const ProcessParams& p, SplitMix64& rng) {
  p.validate();
  const double mean = p.intensity * hitting_measure(p);
  std::poisson_distribution<std::uint64_t> poisson(mean);
  return poisson(rng);
}

Realization sample_realization(const ProcessParams& p, SplitMix64& rng, bool with_frames) {
  const auto count = sample_flat_count(p, rng);
  Realization r;
  r.flats.resize(count);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double rho = p.radius;
  if (p.convention == MeasureConvention::signed_distance) {
    for (auto& flat : r.flats) flat.distance = rho * std::abs(2.0 * uniform(rng) - 1.0);
  } else {
    const double inv_n = 1.0 / static_cast<double>(p.dim - p.k);
    for (auto& flat : r.flats) flat.distance = rho * std::pow(uniform(rng), inv_n);
  }
  if (with_frames) attach_frames(r, p, rng);
  return r;
}

FlatFrame sample_frame(const ProcessParams& p, SplitMix64& rng) {
  FlatFrame f;
  f.directions = Eigen::MatrixXd::Zero(p.dim, p.k);
  int used = 0;
  while (used < p.k) {
    if (auto v = orthonormalize(gaussian_vector(p.dim, rng), f.directions, used)) {
      f.directions.col(used++) = *v;
    }
  }
  for (;;) {
    if (auto v = orthonormalize(gaussian_vector(p.dim, rng), f.directions, used)) {
      f.offset_direction = *v;
      break;
    }
  }
  return f;
}

void attach_frames(Realization& r, const ProcessParams& p, SplitMix64& rng) {
  for (auto& flat : r.flats) flat.frame = sample_frame(p, rng);
}

IntrinsicVolumeVector intrinsic_volume_vector(const Realization& r, const ProcessParams& p) {
  IntrinsicVolumeVector v;
  v.values.assign(static_cast<std::size_t>(p.k) + 1, 0.0);
  add_section_volumes(r, p, p.k, v.values);
  return v;
}

// SampleAccumulator ----------------------------------------------------------

SampleAccumulator::SampleAccumulator(int components, int max_order, std::vector<double> shift)
    : components_(components), max_order_(max_order), shift_(std::move(shift)) {
  if (components < 1) throw std::invalid_argument("accumulator needs at least one component");
  if (max_order < 1) throw std::invalid_argument("accumulator order must be >= 1");
  if (shift_.empty()) shift_.assign(static_cast<std::size_t>(components), 0.0);
  if (shift_.size() != static_cast<std::size_t>(components)) {
    throw std::invalid_argument("shift length does not match component count");
  }
  const auto c = static_cast<std::size_t>(components);
  power_sums_.assign(c * static_cast<std::size_t>(max_order), 0.0);
  constexpr std::size_t per_pair = (kCrossOrder + 1) * (kCrossOrder + 1);
  cross_sums_.assign(c * (c - 1) / 2 * per_pair, 0.0);
}

std::size_t SampleAccumulator::pair_slot(int a, int b) const {
  if (a > b) std::swap(a, b);
  // Row-major index of (a, b) in the strict upper triangle.
  const auto ua = static_cast<std::size_t>(a);
  const auto ub = static_cast<std::size_t>(b);
  const auto c = static_cast<std::size_t>(components_);
  return ua * (2 * c - ua - 1) / 2 + (ub - ua - 1);
}

void SampleAccumulator::add(std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(components_)) {
    throw std::invalid_argument("sample length does not match component count");
  }
  constexpr int q_max = kCrossOrder;
  constexpr std::size_t per_pair = (kCrossOrder + 1) * (kCrossOrder + 1);
  std::vector<double> dev(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    dev[c] = x[c] - shift_[c];
    double power = 1.0;
    for (int p = 1; p <= max_order_; ++p) {
      power *= dev[c];
      power_sums_[c * static_cast<std::size_t>(max_order_) + static_cast<std::size_t>(p - 1)] += power;
    }
  }
  for (int a = 0; a < components_; ++a) {
    for (int b = a + 1; b < components_; ++b) {
      double* slot = cross_sums_.data() + pair_slot(a, b) * per_pair;
      double pa = 1.0;
      for (int p = 1; p < q_max; ++p) {
        pa *= dev[static_cast<std::size_t>(a)];
        double pb = 1.0;
        for (int q = 1; p + q <= q_max; ++q) {
          pb *= dev[static_cast<std::size_t>(b)];
          slot[p * (kCrossOrder + 1) + q] += pa * pb;
        }
      }
    }
  }
  ++count_;
}

void SampleAccumulator::merge(const SampleAccumulator& other) {
  if (other.components_ != components_ || other.max_order_ != max_order_ || other.shift_ != shift_) {
    throw std::invalid_argument("cannot merge accumulators of different shape or shift");
  }
  count_ += other.count_;
  block_index_ = std::min(block_index_, other.block_index_);
  for (std::size_t i = 0; i < power_sums_.size(); ++i) power_sums_[i] += other.power_sums_[i];
  for (std::size_t i = 0; i < cross_sums_.size(); ++i) cross_sums_[i] += other.cross_sums_[i];
}

double SampleAccumulator::power_sum(int component, int p) const {
  if (component < 0 || component >= components_) throw std::out_of_range("component index out of range");
  if (p < 0 || p > max_order_) throw std::out_of_range("power exceeds accumulated order");
  if (p == 0) return static_cast<double>(count_);
  return power_sums_[static_cast<std::size_t>(component) * static_cast<std::size_t>(max_order_) +
                     static_cast<std::size_t>(p - 1)];
}

double SampleAccumulator::cross_sum(int a, int b, int p, int q) const {
  if (a == b) throw std::invalid_argument("cross_sum needs two distinct components");
  if (a > b) {
    std::swap(a, b);
    std::swap(p, q);
  }
  if (p == 0) return power_sum(b, q);
  if (q == 0) return power_sum(a, p);
  if (b >= components_ || a < 0) throw std::out_of_range("component index out of range");
  if (p < 0 || q < 0 || p + q > kCrossOrder) throw std::out_of_range("mixed order exceeds accumulated order");
  constexpr std::size_t per_pair = (kCrossOrder + 1) * (kCrossOrder + 1);
  return cross_sums_[pair_slot(a, b) * per_pair + static_cast<std::size_t>(p * (kCrossOrder + 1) + q)];
}

SampleAccumulator merge(const SampleAccumulator& a, const SampleAccumulator& b) {
  SampleAccumulator out = a;
  out.merge(b);
  return out;
}

// Runners --------------------------------------------------------------------

int default_worker_count() {
  if (const char* env = std::getenv("FLATPROC_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

SampleAccumulator run_monte_carlo(const ProcessParams& p, int j_max, std::int64_t n_reps, int max_order,
                                  std::uint64_t seed, const MonteCarloOptions& options) {
  p.validate();
  check_run_shape(n_reps, options);
  if (j_max < 0 || j_max > p.k) throw DimensionError("j_max must satisfy 0 <= j_max <= k");
  if (max_order < 1 || max_order > kMaxAccumulatedOrder) {
    throw OrderOutOfRange("accumulated power order must be in [1, " + std::to_string(kMaxAccumulatedOrder) + "]");
  }
  check_budget(p, options);

  const int components = j_max + 1;
  std::vector<double> shift = options.shift;
  if (shift.empty()) {
    for (int j = 0; j <= j_max; ++j) shift.push_back(mean_exact(p, j));
  }
  const std::int64_t n_blocks = (n_reps + options.block_size - 1) / options.block_size;
  std::vector<SampleAccumulator> blocks(static_cast<std::size_t>(n_blocks));
  parallel_blocks(n_blocks, resolve_workers(options), [&](std::int64_t b) {
    SampleAccumulator acc(components, max_order, shift);
    acc.set_block_index(b);
    std::vector<double> v(static_cast<std::size_t>(components));
    const std::int64_t end = std::min(n_reps, (b + 1) * options.block_size);
    for (std::int64_t rep = b * options.block_size; rep < end; ++rep) {
      replication_volumes(p, j_max, seed, rep, v);
      acc.add(v);
    }
    blocks[static_cast<std::size_t>(b)] = std::move(acc);
  });

  SampleAccumulator total(components, max_order, shift);
  for (const auto& block : blocks) total.merge(block);
  return total;
}

std::vector<double> simulate_intrinsic_volumes(const ProcessParams& p, std::int64_t n_reps, std::uint64_t seed,
                                               const MonteCarloOptions& options) {
  p.validate();
  check_run_shape(n_reps, options);
  check_budget(p, options);
  const auto width = static_cast<std::size_t>(p.k) + 1;
  std::vector<double> out(static_cast<std::size_t>(n_reps) * width);
  const std::int64_t n_blocks = (n_reps + options.block_size - 1) / options.block_size;
  parallel_blocks(n_blocks, resolve_workers(options), [&](std::int64_t b) {
    const std::int64_t end = std::min(n_reps, (b + 1) * options.block_size);
    for (std::int64_t rep = b * options.block_size; rep < end; ++rep) {
      replication_volumes(p, p.k, seed, rep, std::span(out).subspan(static_cast<std::size_t>(rep) * width, width));
    }
  });
  return out;
}

}  // namespace flatproc
