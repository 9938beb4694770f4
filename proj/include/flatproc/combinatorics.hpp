#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace flatproc {

inline constexpr int kMaxPartitionOrder = 24;

// One class of singleton-free set partitions of {1..m}: the block sizes
// (non-increasing, each >= 2) and how many set partitions share them.
struct BlockPartition {
  std::vector<int> sizes;
  std::uint64_t count = 0;

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;
};

struct BlockPartitionTable {
  int order = 0;
  std::vector<BlockPartition> entries;  // sizes in descending lexicographic order

  std::uint64_t total() const;
};

// Singleton-free set partitions of {1..m}, grouped by block-size multiset.
// Counts are m! / (prod m_i! * prod c_s!) with c_s the multiplicity of size s,
// evaluated exactly. Throws OrderOutOfRange unless 2 <= m <= 24.
BlockPartitionTable enumerate_singleton_free_partitions(int m);

// n!! with the empty-product convention (-1)!! = 0!! = 1.
// Throws std::invalid_argument for n < -1, std::overflow_error past 64 bits.
std::uint64_t double_factorial(int n);

std::uint64_t binomial(int n, int r);

// Centred moment / cumulant sequences. Index i holds the i-th value; index 0
// is unused and set to 1 for moments (mu_0) and 0 for cumulants, index 1
// is exactly 0.
template <typename Real>
struct BasicMomentSequence {
  std::vector<Real> values;

  int order() const { return static_cast<int>(values.size()) - 1; }
  const Real& operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
  Real& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
};

using MomentSequence = BasicMomentSequence<double>;

// gamma_m = mu_m - sum_{i=1}^{m-1} C(m-1, i-1) gamma_i mu_{m-i}.
template <typename Real>
BasicMomentSequence<Real> cumulants_from_moments(const BasicMomentSequence<Real>& mu) {
  const int order = mu.order();
  BasicMomentSequence<Real> gamma{std::vector<Real>(mu.values.size(), Real(0))};
  for (int m = 1; m <= order; ++m) {
    Real acc = mu[m];
    for (int i = 1; i <= m - 1; ++i) {
      acc -= Real(static_cast<double>(binomial(m - 1, i - 1))) * gamma[i] * mu[m - i];
    }
    gamma[m] = acc;
  }
  return gamma;
}

// Inverse of cumulants_from_moments: mu_m = gamma_m + sum C(m-1, i-1) gamma_i mu_{m-i}.
template <typename Real>
BasicMomentSequence<Real> moments_from_cumulants(const BasicMomentSequence<Real>& gamma) {
  const int order = gamma.order();
  BasicMomentSequence<Real> mu{std::vector<Real>(gamma.values.size(), Real(0))};
  if (order >= 0) mu[0] = Real(1);
  for (int m = 1; m <= order; ++m) {
    Real acc = gamma[m];
    for (int i = 1; i <= m - 1; ++i) {
      acc += Real(static_cast<double>(binomial(m - 1, i - 1))) * gamma[i] * mu[m - i];
    }
    mu[m] = acc;
  }
  return mu;
}

// Builds a sequence from values listed for orders 1..M (index 0 filled in).
MomentSequence moment_sequence_from_orders(std::span<const double> orders_1_to_m);
MomentSequence cumulant_sequence_from_orders(std::span<const double> orders_1_to_m);

}  // namespace flatproc
