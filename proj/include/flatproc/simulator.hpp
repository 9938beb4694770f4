#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "flatproc/geometry.hpp"

namespace flatproc {

// Power sums up to order 24 give moment estimates with standard errors up
// to order 12.
inline constexpr int kMaxAccumulatedOrder = 24;

// SplitMix64 as a UniformRandomBitGenerator. Each replication owns one
// stream whose starting state is a hash of (seed, replication index), so a
// replication can be regenerated without touching any other.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

SplitMix64 replication_stream(std::uint64_t seed, std::uint64_t replication);

// Child seed for the i-th independent sub-experiment of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Orientation of one flat: k orthonormal direction vectors (columns) and a
// unit vector in their orthogonal complement pointing towards the flat.
struct FlatFrame {
  Eigen::MatrixXd directions;
  Eigen::VectorXd offset_direction;
};

struct SampledFlat {
  double distance = 0.0;  // distance from the window centre, in [0, rho]
  std::optional<FlatFrame> frame;
};

struct Realization {
  std::vector<SampledFlat> flats;
};

struct IntrinsicVolumeVector {
  std::vector<double> values;  // entry j = sum over flats of V_j(B_rho ∩ E)
};

std::uint64_t sample_flat_count(const ProcessParams& p, SplitMix64& rng);

// Flat count, then all distances; frames (if requested) are drawn after the
// distances so enabling them does not change any distance.
Realization sample_realization(const ProcessParams& p, SplitMix64& rng, bool with_frames = false);

FlatFrame sample_frame(const ProcessParams& p, SplitMix64& rng);
void attach_frames(Realization& r, const ProcessParams& p, SplitMix64& rng);

IntrinsicVolumeVector intrinsic_volume_vector(const Realization& r, const ProcessParams& p);

// Streaming power sums of a vector-valued sample, taken about a fixed
// `shift` (per component). Per pair of components, mixed sums
// sum (x_a - s_a)^p (x_b - s_b)^q for p, q >= 1, p + q <= kCrossOrder.
class SampleAccumulator {
 public:
  static constexpr int kCrossOrder = 4;

  SampleAccumulator() = default;
  SampleAccumulator(int components, int max_order, std::vector<double> shift = {});

  void add(std::span<const double> x);
  // Componentwise sum; shapes and shifts must match.
  void merge(const SampleAccumulator& other);

  int components() const { return components_; }
  int max_order() const { return max_order_; }
  std::int64_t count() const { return count_; }
  std::int64_t block_index() const { return block_index_; }
  void set_block_index(std::int64_t b) { block_index_ = b; }
  const std::vector<double>& shift() const { return shift_; }

  // p == 0 returns the count.
  double power_sum(int component, int p) const;
  // Requires a != b; p == 0 or q == 0 falls back to power_sum.
  double cross_sum(int a, int b, int p, int q) const;

  friend bool operator==(const SampleAccumulator&, const SampleAccumulator&) = default;

 private:
  std::size_t pair_slot(int a, int b) const;

  int components_ = 0;
  int max_order_ = 0;
  std::int64_t count_ = 0;
  std::int64_t block_index_ = 0;
  std::vector<double> shift_;
  std::vector<double> power_sums_;  // [component][p-1]
  std::vector<double> cross_sums_;  // [pair][p][q], (kCrossOrder+1)^2 per pair
};

SampleAccumulator merge(const SampleAccumulator& a, const SampleAccumulator& b);

struct MonteCarloOptions {
  int workers = 0;                  // 0: FLATPROC_WORKERS or hardware concurrency
  std::int64_t block_size = 1024;   // replications per reduction block
  double max_mean_flats = 1e7;      // cap on tau * Lambda([B_rho])
  std::vector<double> shift;        // accumulator shift; empty: exact means
};

int default_worker_count();

// Accumulates (V_0, ..., V_{j_max}) over n_reps replications. Results are
// bit-identical for fixed (seed, n_reps, block_size) at any worker count.
SampleAccumulator run_monte_carlo(const ProcessParams& p, int j_max, std::int64_t n_reps, int max_order,
                                  std::uint64_t seed, const MonteCarloOptions& options = {});

// Row-major n_reps x (k+1) matrix of per-replication intrinsic volume vectors.
std::vector<double> simulate_intrinsic_volumes(const ProcessParams& p, std::int64_t n_reps, std::uint64_t seed,
                                               const MonteCarloOptions& options = {});

}  // namespace flatproc
