#pragma once

#include <cstdint>

#include "mkdv/triplet.hpp"

namespace fixtures {

// Scalar triplet ([a],[1],[c]); generates the one-soliton solution with
// amplitude 2a and speed 4a^2.
inline mkdv::Triplet example_one(double a, double c) {
  return mkdv::Triplet(mkdv::Mat{{a}}, mkdv::Mat{{1.0}}, mkdv::Mat{{c}});
}

// Order-3 single-eigenvalue triplet whose Sylvester solution has exact
// dyadic entries; the multipole (non-soliton) fixture.
inline mkdv::Triplet example_two() {
  return mkdv::Triplet(mkdv::Mat{{1, -1, 0}, {0, 1, -1}, {0, 0, 1}},
                       mkdv::Mat{{0}, {0}, {1}}, mkdv::Mat{{1, 2, 0.5}});
}

// Deterministic splitmix64 sampler so test points are identical everywhere.
struct Sampler {
  std::uint64_t state;

  explicit Sampler(std::uint64_t seed) : state(seed) {}

  double next01() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return double(z >> 11) * (1.0 / 9007199254740992.0);
  }

  double uni(double lo, double hi) { return lo + (hi - lo) * next01(); }
};

}  // namespace fixtures
