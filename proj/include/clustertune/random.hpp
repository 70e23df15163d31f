#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace clustertune {

// SplitMix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, 64-bit. Stable across platforms and releases.
constexpr std::uint64_t stable_hash64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ (stream + 0x632be59bd9b4e019ULL));
}

// Uniform doubles built directly from engine bits so sequences do not depend
// on the standard library's distribution implementations.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double next() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // (0, 1]
  double next_open_low() noexcept { return 1.0 - next(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace clustertune
