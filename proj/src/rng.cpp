#include "qfuel/rng.hpp"

namespace qfuel {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

TrajectoryRng::TrajectoryRng(std::uint64_t master_seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(master_seed) ^ splitmix64(~stream))) {}

double TrajectoryRng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

}  // namespace qfuel
