#include "flatproc/combinatorics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <functional>
#include <stdexcept>
#include <string>

#include "flatproc/errors.hpp"

namespace flatproc {
namespace {

using u128 = unsigned __int128;

u128 factorial(int n) {
  u128 f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<u128>(i);
  return f;
}

// Integer partitions of `remaining` into parts in [2, max_part], non-increasing.
void integer_partitions(int remaining, int max_part, std::vector<int>& current,
                        std::vector<std::vector<int>>& out) {
  if (remaining == 0) {
    out.push_back(current);
    return;
  }
  for (int part = std::min(remaining, max_part); part >= 2; --part) {
    current.push_back(part);
    integer_partitions(remaining - part, part, current, out);
    current.pop_back();
  }
}

std::uint64_t set_partition_count(int m, const std::vector<int>& sizes) {
  u128 denom = 1;
  std::map<int, int> multiplicity;
  for (int s : sizes) {
    denom *= factorial(s);
    ++multiplicity[s];
  }
  for (const auto& [size, c] : multiplicity) denom *= factorial(c);
  const u128 count = factorial(m) / denom;
  return static_cast<std::uint64_t>(count);
}

}  // namespace

std::uint64_t BlockPartitionTable::total() const {
  std::uint64_t t = 0;
  for (const auto& e : entries) t += e.count;
  return t;
}

BlockPartitionTable enumerate_singleton_free_partitions(int m) {
  if (m < 2 || m > kMaxPartitionOrder) {
    throw OrderOutOfRange("partition order " + std::to_string(m) + " outside [2, " +
                          std::to_string(kMaxPartitionOrder) + "]");
  }
  std::vector<std::vector<int>> shapes;
  std::vector<int> scratch;
  integer_partitions(m, m, scratch, shapes);
  std::sort(shapes.begin(), shapes.end(), std::greater<>());

  BlockPartitionTable table;
  table.order = m;
  table.entries.reserve(shapes.size());
  for (auto& sizes : shapes) {
    const auto count = set_partition_count(m, sizes);
    table.entries.push_back({std::move(sizes), count});
  }
  return table;
}

std::uint64_t double_factorial(int n) {
  if (n < -1) throw std::invalid_argument("double_factorial requires n >= -1");
  std::uint64_t r = 1;
  for (int i = n; i > 1; i -= 2) {
    const auto f = static_cast<std::uint64_t>(i);
    if (r > std::numeric_limits<std::uint64_t>::max() / f) {
      throw std::overflow_error("double_factorial(" + std::to_string(n) + ") overflows 64 bits");
    }
    r *= f;
  }
  return r;
}

std::uint64_t binomial(int n, int r) {
  if (r < 0 || n < 0 || r > n) return 0;
  r = std::min(r, n - r);
  u128 acc = 1;
  for (int i = 1; i <= r; ++i) {
    acc = acc * static_cast<u128>(n - r + i) / static_cast<u128>(i);
  }
  return static_cast<std::uint64_t>(acc);
}

MomentSequence moment_sequence_from_orders(std::span<const double> orders_1_to_m) {
  MomentSequence s;
  s.values.reserve(orders_1_to_m.size() + 1);
  s.values.push_back(1.0);
  s.values.insert(s.values.end(), orders_1_to_m.begin(), orders_1_to_m.end());
  return s;
}

MomentSequence cumulant_sequence_from_orders(std::span<const double> orders_1_to_m) {
  MomentSequence s = moment_sequence_from_orders(orders_1_to_m);
  s.values[0] = 0.0;
  return s;
}

}  // namespace flatproc
