#pragma once

// Description-minimization benchmark: 3 classes in 10 dimensions. Features 0
// and 1 carry the class structure (means (0,0), (6,0), (0,6) in pooled-std
// units, so both are needed); features 2..9 are unit noise.

#include <random>
#include <string>
#include <vector>

#include "ulfkit/features.hpp"

namespace synthetic {

inline ulfkit::DescriptionSet mo_benchmark(std::uint64_t seed, std::size_t per_class = 12) {
  std::vector<std::string> names;
  for (int f = 0; f < 10; ++f) names.push_back("f" + std::to_string(f));
  ulfkit::DescriptionSet set(names);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  const double means[3][2] = {{0.0, 0.0}, {6.0, 0.0}, {0.0, 6.0}};
  const char* labels[3] = {"A", "B", "C"};
  for (std::size_t i = 0; i < per_class; ++i) {
    for (int c = 0; c < 3; ++c) {
      std::vector<double> x(10);
      for (int f = 0; f < 10; ++f) x[f] = d(rng) + (f < 2 ? means[c][f] : 0.0);
      set.add(labels[c], x);
    }
  }
  return set;
}

}  // namespace synthetic
