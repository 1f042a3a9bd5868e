#pragma once

#include <cstdint>
#include <initializer_list>

namespace netgame {

/// Counter-based generator built on the SplitMix64 finalizer.
///
/// A stream is identified by a 64-bit key; draw k is mix(key + k * golden).
/// Streams are split by hashing the parent key with a label, so the draws an
/// experiment sees for (n, rep) do not depend on the order in which other
/// (n, rep) cells were generated. Uniforms are built from the top 53 bits,
/// which keeps the output identical across standard libraries.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  CounterRng split(std::uint64_t label) const {
    return CounterRng(mix(key_ ^ mix(label + 0x9e3779b97f4a7c15ULL)));
  }

  CounterRng split(std::initializer_list<std::uint64_t> labels) const {
    CounterRng out = *this;
    for (auto l : labels) out = out.split(l);
    return out;
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace netgame
