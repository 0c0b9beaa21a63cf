#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace sgame {

/// SplitMix64 stream. Simulation streams are derived from a master seed by
/// the splitting rule in `player_stream`, so changing the number of players
/// never perturbs another player's draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Inverse-CDF draw from an unnormalized nonnegative weight vector.
  Eigen::Index sample(const Eigen::VectorXd& weights) {
    const double total = weights.sum();
    const double u = next_unit() * total;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    Rng r(seed + 0x9e3779b97f4a7c15ULL * (salt + 1));
    return r.next_u64();
  }

  /// Named-stream rule: seed -> replication -> player.
  static Rng player_stream(std::uint64_t master, std::uint64_t replication,
                           std::uint64_t player) {
    return Rng(mix(mix(master, replication), player));
  }

  static std::uint64_t replication_seed(std::uint64_t master,
                                        std::uint64_t replication) {
    return mix(master, replication);
  }

 private:
  std::uint64_t state_;
};

}  // namespace sgame
