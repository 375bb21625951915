#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>

namespace manet {

/// Simulated time with microsecond resolution. Seconds appear only at the
/// configuration and report boundary; all ordering is done on integers.
class SimTime
{
  public:
    constexpr SimTime() = default;

    static constexpr SimTime FromMicros(std::int64_t us) { return SimTime(us); }

    /// Rounds to the nearest microsecond.
    static constexpr SimTime FromSeconds(double s)
    {
        double us = s * 1e6;
        return SimTime(static_cast<std::int64_t>(us < 0 ? us - 0.5 : us + 0.5));
    }

    static constexpr SimTime Max() { return SimTime(std::numeric_limits<std::int64_t>::max()); }

    constexpr std::int64_t Micros() const { return m_us; }
    constexpr double Seconds() const { return static_cast<double>(m_us) / 1e6; }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime o) const { return SimTime(m_us + o.m_us); }
    constexpr SimTime operator-(SimTime o) const { return SimTime(m_us - o.m_us); }
    constexpr SimTime& operator+=(SimTime o)
    {
        m_us += o.m_us;
        return *this;
    }

  private:
    constexpr explicit SimTime(std::int64_t us) : m_us(us) {}

    std::int64_t m_us = 0;
};

constexpr SimTime Seconds(double s) { return SimTime::FromSeconds(s); }
constexpr SimTime MilliSeconds(std::int64_t ms) { return SimTime::FromMicros(ms * 1000); }
constexpr SimTime MicroSeconds(std::int64_t us) { return SimTime::FromMicros(us); }

inline std::ostream& operator<<(std::ostream& os, SimTime t)
{
    return os << t.Seconds() << "s";
}

} // namespace manet
