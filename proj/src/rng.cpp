#include "zovr/rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace zovr {

std::vector<int> sample_without_replacement(int n, int B, CounterRng& rng) {
  if (n <= 0) throw std::invalid_argument("sample_without_replacement: n must be positive");
  if (B <= 0 || B > n)
    throw std::invalid_argument("sample_without_replacement: need 1 <= B <= n");
  std::unordered_set<int> chosen;
  chosen.reserve(static_cast<std::size_t>(B) * 2);
  for (int j = n - B; j < n; ++j) {
    const int t = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(j) + 1));
    chosen.insert(chosen.count(t) ? j : t);
  }
  std::vector<int> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace zovr
