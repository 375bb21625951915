#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace manet {

enum class StreamPurpose : std::uint8_t
{
    Mobility = 1,
    Loss = 2,
    Traffic = 3,
    ProtocolJitter = 4,
};

std::string_view ToString(StreamPurpose p);

/**
 * Random stream keyed by (scenario seed, purpose). Each purpose draws from
 * its own engine, so changing how often one subsystem consumes randomness
 * leaves the others' sequences untouched.
 *
 * Distributions are computed here rather than with <random>'s distribution
 * classes, whose output is implementation-defined; mt19937_64 itself is
 * fully specified, so sequences are identical across standard libraries.
 */
class RngStream
{
  public:
    RngStream(std::uint64_t seed, StreamPurpose purpose);

    std::uint64_t Seed() const { return m_seed; }
    StreamPurpose Purpose() const { return m_purpose; }

    std::uint64_t NextU64() { return m_engine(); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double Uniform01();

    /// Uniform in [lo, hi); returns lo when lo == hi.
    double Uniform(double lo, double hi);

    /// Uniform integer in [lo, hi] (inclusive), unbiased.
    std::uint64_t UniformInt(std::uint64_t lo, std::uint64_t hi);

    /// True with probability p. Draws nothing when p is 0 or 1.
    bool Bernoulli(double p);

  private:
    std::uint64_t m_seed;
    StreamPurpose m_purpose;
    std::mt19937_64 m_engine;
};

} // namespace manet
