#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace loynes {

// Deterministic stream of doubles for the samplers. std::mt19937_64 has a
// fully specified algorithm, so a seed pins the exact trace on every
// platform. Replica r of an experiment uses seed = base_seed + r.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on (0, 1]. The +1 keeps 0 out of the range so -log(u) is finite.
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard exponential by inverse CDF.
    double exponential() { return -std::log(uniform01()); }

    // Draw an index from a discrete distribution. Weights are assumed to sum
    // to 1 up to rounding; any shortfall is absorbed by the last index.
    std::size_t categorical(std::span<const double> weights) {
        const double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u <= acc) return i;
        }
        return weights.size() - 1;
    }

  private:
    std::mt19937_64 gen_;
};

} // namespace loynes
