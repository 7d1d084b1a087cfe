#pragma once

#include <cstdint>
#include <random>

namespace fedmobile {

// splitmix64 finalizer; used to derive statistically independent seeds from
// a base seed plus stream coordinates, so that e.g. batch draws are a pure
// function of (run seed, client, slot) and parallel runs cannot interleave.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Named RNG streams hanging off one experiment seed.
enum class Stream : std::uint64_t {
  TrueWeights = 1,
  ClientData = 2,
  TestSet = 3,
  Schedule = 4,
  Contacts = 5,
  Batch = 6,
  Trial = 7,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = mix64(base ^ mix64(static_cast<std::uint64_t>(stream)));
  s = mix64(s ^ mix64(a + 0x632be59bd9b4e019ULL));
  return mix64(s ^ mix64(b + 0x9e6c63d0876a9a47ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline std::mt19937_64 make_rng(std::uint64_t base, Stream stream,
                                std::uint64_t a = 0, std::uint64_t b = 0) {
  return std::mt19937_64(derive_seed(base, stream, a, b));
}

}  // namespace fedmobile
