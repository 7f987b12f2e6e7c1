#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ulfkit {

struct SelftestCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Fast invariant suite: transform oracles, Parseval, coherence bounds and
// the toy fits. Never throws; a failing check carries the reason.
std::vector<SelftestCheck> run_selftest(std::uint64_t seed = 1);

}  // namespace ulfkit
