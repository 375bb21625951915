#pragma once

#include "manet/network.h"

#include <array>
#include <json.hpp>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace manet {

/// Raised for any invalid scenario before a simulation starts.
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

struct MobilityConfig
{
    enum class Kind
    {
        RandomWaypoint,
        Trace,
    };

    Kind kind = Kind::RandomWaypoint;
    double speedMin = 5.0;
    double speedMax = 15.0;
    double pause = 0.0;
    std::string tracePath;

    /// Parses "rwp" or "trace:<path>". Throws ConfigError.
    static MobilityConfig Parse(const std::string& spec);
    std::string ToString() const;
};

struct ScenarioConfig
{
    Protocol protocol = Protocol::Aodv;
    std::size_t nodes = 100;
    Arena arena;
    double duration = 175.0; // s
    std::uint64_t seed = 1;
    MobilityConfig mobility;
    ChannelConfig channel;
    FlowSpec flows;
    std::size_t bufferCapacity = 64;
    std::uint32_t ttl = kDefaultTtl;
    aodv::AodvConfig aodv;
    dsdv::DsdvConfig dsdv;
    dsr::DsrConfig dsr;

    /// Throws ConfigError describing the first problem found.
    void Validate() const;

    /// Unknown keys are rejected; missing keys keep their defaults.
    static ScenarioConfig FromJson(const nlohmann::json& j);
    nlohmann::json ToJson() const;
};

struct RunResult
{
    ScenarioConfig config;
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t dropped = 0;
    std::uint64_t pending = 0;
    std::uint64_t forwarded = 0;
    std::uint64_t controlTx = 0;
    std::uint64_t controlBytes = 0;
    std::uint64_t loopsFlagged = 0;
    std::uint64_t unaccounted = 0; // pending packets held by nobody
    std::array<std::uint64_t, kDropReasonCount> dropsByReason{};
    double paperPdr = 0.0; // sent/received*100, two decimals; inf when nothing arrived
    double pdr = 0.0;
    double throughput = 0.0; // B/s
    std::optional<double> avgDelay;
    double nrl = 0.0;
    double wallSeconds = 0.0;
};

/// Builds and runs one scenario. Deterministic for a given config. When
/// `eventTrace` is set, every executed event is logged there.
RunResult RunScenario(const ScenarioConfig& cfg, std::ostream* eventTrace = nullptr);

/// Validates `cfg` and assembles its network with every flow scheduled;
/// the caller drives the clock.
std::unique_ptr<Network> BuildNetwork(const ScenarioConfig& cfg);

/// Reads the counters of a finished run (wallSeconds left at 0).
RunResult CollectResult(const ScenarioConfig& cfg, const Network& net);

/// Builds the mobility source a config describes.
MobilitySource BuildMobility(const ScenarioConfig& cfg);

class SweepError : public std::runtime_error
{
  public:
    SweepError(const std::string& what, std::vector<RunResult> partial)
        : std::runtime_error(what),
          m_partial(std::move(partial))
    {
    }

    const std::vector<RunResult>& Partial() const { return m_partial; }

  private:
    std::vector<RunResult> m_partial;
};

/**
 * Runs the cartesian product protocols x times x seeds on `threads` workers.
 * Results come back ordered by (protocol, time, seed) as listed, whatever
 * the thread count. On any failure throws SweepError carrying the runs that
 * finished.
 */
std::vector<RunResult> Sweep(const ScenarioConfig& base, std::span<const Protocol> protocols,
                             std::span<const double> times, std::span<const std::uint64_t> seeds,
                             unsigned threads = 1);

} // namespace manet
