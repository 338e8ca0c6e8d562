#ifndef CHARGEOPT_RNG_HPP
#define CHARGEOPT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <utility>

namespace chargeopt {

// Counter-based generator built on the splitmix64 output function
// (Steele, Lea & Flood; the fixed-increment variant popularized by Vigna).
// Every draw is a pure function of (key, counter), so arrays of samples can
// be filled in any order -- or in parallel -- and come out bit-identical to
// a sequential fill.  Streams are keyed by a 64-bit (seed, stream) pair;
// distinct stream ids give statistically independent sequences.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(mix64(seed + kGolden) ^ mix64(stream ^ kStreamSalt))) {}

    // splitmix64 finalizer: the bijective scramble applied to the counter walk.
    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t bits(std::uint64_t counter) const {
        return mix64(key_ + (counter + 1) * kGolden);
    }

    // Uniform on the open interval (0,1); never returns 0 or 1, so it is
    // safe under log().
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Two independent standard normals per counter via Box-Muller, consuming
    // uniforms at counters (2c, 2c+1).
    std::pair<double, double> normal_pair(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    std::uint64_t key() const { return key_; }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kStreamSalt = 0x5851F42D4C957F2DULL;
    static constexpr double kPi = 3.14159265358979323846;

    std::uint64_t key_;
};

// Stream-id namespaces, so the same user seed can feed several unrelated
// purposes without overlap.  Station streams use id = purpose | station id.
namespace streams {
inline constexpr std::uint64_t kScenario = 0x0100000000ULL;  // + station id
inline constexpr std::uint64_t kNodePlacement = 0x0200000000ULL;
inline constexpr std::uint64_t kStationPlacement = 0x0300000000ULL;
inline constexpr std::uint64_t kDemand = 0x0400000000ULL;  // + node id
} // namespace streams

} // namespace chargeopt

#endif
