#pragma once

#include <cstdint>
#include <random>

namespace qfuel {

std::uint64_t splitmix64(std::uint64_t x);

// Per-trajectory generator. Each (master_seed, stream) pair yields an
// independent Mersenne Twister stream, so trajectory i draws the same
// numbers no matter which worker runs it.
class TrajectoryRng {
  public:
    TrajectoryRng(std::uint64_t master_seed, std::uint64_t stream);

    // Uniform double in [0, 1) built from the top 53 bits.
    double uniform();
    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace qfuel
