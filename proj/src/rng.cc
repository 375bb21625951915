#include "manet/rng.h"

namespace manet {

namespace {

std::uint64_t
SplitMix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::string_view
ToString(StreamPurpose p)
{
    switch (p)
    {
    case StreamPurpose::Mobility:
        return "mobility";
    case StreamPurpose::Loss:
        return "loss";
    case StreamPurpose::Traffic:
        return "traffic";
    case StreamPurpose::ProtocolJitter:
        return "protocol-jitter";
    }
    return "unknown";
}

RngStream::RngStream(std::uint64_t seed, StreamPurpose purpose)
    : m_seed(seed),
      m_purpose(purpose),
      m_engine(SplitMix64(SplitMix64(seed) ^ (static_cast<std::uint64_t>(purpose) << 56)))
{
}

double
RngStream::Uniform01()
{
    return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
}

double
RngStream::Uniform(double lo, double hi)
{
    if (lo == hi)
    {
        return lo;
    }
    return lo + (hi - lo) * Uniform01();
}

std::uint64_t
RngStream::UniformInt(std::uint64_t lo, std::uint64_t hi)
{
    std::uint64_t span = hi - lo;
    if (span == ~0ULL)
    {
        return m_engine();
    }
    std::uint64_t range = span + 1;
    std::uint64_t limit = ~0ULL - (~0ULL % range);
    std::uint64_t x;
    do
    {
        x = m_engine();
    } while (x >= limit);
    return lo + x % range;
}

bool
RngStream::Bernoulli(double p)
{
    if (p <= 0.0)
    {
        return false;
    }
    if (p >= 1.0)
    {
        return true;
    }
    return Uniform01() < p;
}

} // namespace manet
