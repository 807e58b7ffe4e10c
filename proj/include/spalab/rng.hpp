#pragma once
#include <cstdint>

namespace spalab {

// Counter-based generator (splitmix64 applied to key + counter). Every
// household gets its own stream keyed by (seed, cohort, household), so draws
// do not depend on thread scheduling and panels are bit-identical for any
// worker count.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream))) {}

    std::uint64_t next_u64() {
        return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ull);
    }

    // uniform on [0, 1), 53-bit resolution
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    // index into a discrete distribution given cumulative weights logic:
    // walks probs in order, returns first i with cumsum > u (last index if
    // rounding leaves a remainder)
    template <typename Probs>
    int next_discrete(const Probs& probs) {
        double u = next_double();
        double acc = 0.0;
        int last = 0;
        int i = 0;
        for (double p : probs) {
            acc += p;
            last = i;
            if (u < acc) return i;
            ++i;
        }
        return last;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace spalab
