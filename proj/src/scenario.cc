#include "manet/scenario.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace manet {

using nlohmann::json;

namespace {

void
RejectUnknownKeys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where)
{
    if (!obj.is_object())
    {
        throw ConfigError(where + " must be a JSON object");
    }
    for (const auto& [key, value] : obj.items())
    {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void
Read(const json& obj, const char* key, T& out, const std::string& where)
{
    if (!obj.contains(key))
    {
        return;
    }
    try
    {
        out = obj.at(key).get<T>();
    }
    catch (const json::exception& e)
    {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

void
ReadSeconds(const json& obj, const char* key, SimTime& out, const std::string& where)
{
    if (!obj.contains(key))
    {
        return;
    }
    double s = 0;
    Read(obj, key, s, where);
    if (!(s > 0) || !std::isfinite(s))
    {
        throw ConfigError(where + "." + key + " must be a positive number of seconds");
    }
    out = Seconds(s);
}

void
RequirePositive(SimTime t, const std::string& what)
{
    if (t <= SimTime())
    {
        throw ConfigError(what + " must be positive");
    }
}

} // namespace

MobilityConfig
MobilityConfig::Parse(const std::string& spec)
{
    MobilityConfig m;
    if (spec == "rwp")
    {
        return m;
    }
    const std::string prefix = "trace:";
    if (spec.rfind(prefix, 0) == 0 && spec.size() > prefix.size())
    {
        m.kind = Kind::Trace;
        m.tracePath = spec.substr(prefix.size());
        return m;
    }
    throw ConfigError("mobility must be 'rwp' or 'trace:<path>', got '" + spec + "'");
}

std::string
MobilityConfig::ToString() const
{
    return kind == Kind::RandomWaypoint ? "rwp" : "trace:" + tracePath;
}

void
ScenarioConfig::Validate() const
{
    if (!(duration > 0) || !std::isfinite(duration))
    {
        throw ConfigError("duration must be positive");
    }
    if (mobility.kind == MobilityConfig::Kind::RandomWaypoint)
    {
        if (nodes < 1)
        {
            throw ConfigError("node count must be at least 1");
        }
        if (!(arena.width > 0) || !(arena.height > 0))
        {
            throw ConfigError("arena dimensions must be positive");
        }
        if (!(mobility.speedMin >= 0) || !(mobility.speedMax >= mobility.speedMin))
        {
            throw ConfigError("speeds must satisfy 0 <= min <= max");
        }
        if (!(mobility.pause >= 0))
        {
            throw ConfigError("pause must be nonnegative");
        }
        if (2 * flows.count > nodes)
        {
            throw ConfigError("need at least " + std::to_string(2 * flows.count) + " nodes for " +
                              std::to_string(flows.count) + " flows with distinct endpoints");
        }
    }
    else
    {
        std::error_code ec;
        if (!std::filesystem::is_regular_file(mobility.tracePath, ec))
        {
            throw ConfigError("mobility trace '" + mobility.tracePath + "' does not exist");
        }
    }
    try
    {
        channel.Validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError(e.what());
    }
    if (flows.count > 0)
    {
        if (!(flows.aggregateRate > 0) || !std::isfinite(flows.aggregateRate))
        {
            throw ConfigError("offered load must be positive");
        }
        if (flows.packetSize == 0)
        {
            throw ConfigError("packet size must be positive");
        }
        if (!(flows.start >= 0) || !(flows.start < duration))
        {
            throw ConfigError("flow start must lie in [0, duration)");
        }
    }
    if (bufferCapacity == 0)
    {
        throw ConfigError("buffer capacity must be at least 1");
    }
    if (ttl == 0)
    {
        throw ConfigError("ttl must be at least 1");
    }
    RequirePositive(aodv.helloInterval, "aodv.hello_interval");
    RequirePositive(aodv.activeRouteTimeout, "aodv.active_route_timeout");
    RequirePositive(aodv.rreqRetryTimeout, "aodv.rreq_retry_timeout");
    RequirePositive(dsdv.periodicInterval, "dsdv.periodic_interval");
    RequirePositive(dsdv.settlingTime, "dsdv.settling_time");
    RequirePositive(dsdv.bufferTimeout, "dsdv.buffer_timeout");
    RequirePositive(dsr.ackTimeout, "dsr.ack_timeout");
    RequirePositive(dsr.cacheLifetime, "dsr.cache_lifetime");
    RequirePositive(dsr.discoveryTimeout, "dsr.discovery_timeout");
    if (dsdv.periodicJitter >= dsdv.periodicInterval)
    {
        throw ConfigError("dsdv.periodic_jitter must be smaller than the period");
    }
    if (aodv.rreqMaxAttempts == 0 || dsr.discoveryAttempts == 0)
    {
        throw ConfigError("discovery attempts must be at least 1");
    }
    if (dsr.routesPerDestination == 0)
    {
        throw ConfigError("dsr.routes_per_destination must be at least 1");
    }
}

ScenarioConfig
ScenarioConfig::FromJson(const json& j)
{
    ScenarioConfig c;
    RejectUnknownKeys(j,
                      {"protocol", "n_nodes", "arena", "duration", "seed", "mobility", "channel", "flows",
                       "buffer", "ttl", "aodv", "dsdv", "dsr"},
                      "config");
    if (j.contains("protocol"))
    {
        std::string p;
        Read(j, "protocol", p, "config");
        try
        {
            c.protocol = ParseProtocol(p);
        }
        catch (const std::invalid_argument& e)
        {
            throw ConfigError(e.what());
        }
    }
    Read(j, "n_nodes", c.nodes, "config");
    if (j.contains("arena"))
    {
        const json& a = j.at("arena");
        if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number())
        {
            c.arena = {a[0].get<double>(), a[1].get<double>()};
        }
        else if (a.is_object())
        {
            RejectUnknownKeys(a, {"width", "height"}, "arena");
            Read(a, "width", c.arena.width, "arena");
            Read(a, "height", c.arena.height, "arena");
        }
        else
        {
            throw ConfigError("arena must be [width, height] or {width, height}");
        }
    }
    Read(j, "duration", c.duration, "config");
    Read(j, "seed", c.seed, "config");
    if (j.contains("mobility"))
    {
        const json& m = j.at("mobility");
        if (m.is_string())
        {
            c.mobility = MobilityConfig::Parse(m.get<std::string>());
        }
        else
        {
            RejectUnknownKeys(m, {"model", "speed_min", "speed_max", "pause", "path"}, "mobility");
            std::string model = "rwp";
            Read(m, "model", model, "mobility");
            if (model == "trace")
            {
                c.mobility.kind = MobilityConfig::Kind::Trace;
                Read(m, "path", c.mobility.tracePath, "mobility");
            }
            else if (model != "rwp")
            {
                throw ConfigError("mobility.model must be 'rwp' or 'trace'");
            }
            Read(m, "speed_min", c.mobility.speedMin, "mobility");
            Read(m, "speed_max", c.mobility.speedMax, "mobility");
            Read(m, "pause", c.mobility.pause, "mobility");
        }
    }
    if (j.contains("channel"))
    {
        const json& ch = j.at("channel");
        RejectUnknownKeys(ch, {"range", "data_rate", "loss", "prop_delay"}, "channel");
        Read(ch, "range", c.channel.range, "channel");
        Read(ch, "data_rate", c.channel.dataRate, "channel");
        Read(ch, "loss", c.channel.lossProb, "channel");
        Read(ch, "prop_delay", c.channel.propDelay, "channel");
    }
    if (j.contains("flows"))
    {
        const json& f = j.at("flows");
        RejectUnknownKeys(f, {"count", "packet_size", "rate", "start"}, "flows");
        Read(f, "count", c.flows.count, "flows");
        Read(f, "packet_size", c.flows.packetSize, "flows");
        Read(f, "rate", c.flows.aggregateRate, "flows");
        Read(f, "start", c.flows.start, "flows");
    }
    Read(j, "buffer", c.bufferCapacity, "config");
    Read(j, "ttl", c.ttl, "config");
    if (j.contains("aodv"))
    {
        const json& a = j.at("aodv");
        RejectUnknownKeys(a,
                          {"hello_interval", "allowed_hello_loss", "active_route_timeout", "rreq_retry_timeout",
                           "rreq_max_attempts", "hello"},
                          "aodv");
        ReadSeconds(a, "hello_interval", c.aodv.helloInterval, "aodv");
        Read(a, "allowed_hello_loss", c.aodv.allowedHelloLoss, "aodv");
        ReadSeconds(a, "active_route_timeout", c.aodv.activeRouteTimeout, "aodv");
        ReadSeconds(a, "rreq_retry_timeout", c.aodv.rreqRetryTimeout, "aodv");
        Read(a, "rreq_max_attempts", c.aodv.rreqMaxAttempts, "aodv");
        Read(a, "hello", c.aodv.enableHello, "aodv");
    }
    if (j.contains("dsdv"))
    {
        const json& d = j.at("dsdv");
        RejectUnknownKeys(d,
                          {"periodic_interval", "periodic_jitter", "settling_time", "missed_periods",
                           "buffer_timeout"},
                          "dsdv");
        ReadSeconds(d, "periodic_interval", c.dsdv.periodicInterval, "dsdv");
        if (d.contains("periodic_jitter"))
        {
            double s = 0;
            Read(d, "periodic_jitter", s, "dsdv");
            if (!(s >= 0))
            {
                throw ConfigError("dsdv.periodic_jitter must be nonnegative");
            }
            c.dsdv.periodicJitter = Seconds(s);
        }
        ReadSeconds(d, "settling_time", c.dsdv.settlingTime, "dsdv");
        Read(d, "missed_periods", c.dsdv.missedPeriods, "dsdv");
        ReadSeconds(d, "buffer_timeout", c.dsdv.bufferTimeout, "dsdv");
    }
    if (j.contains("dsr"))
    {
        const json& d = j.at("dsr");
        RejectUnknownKeys(d,
                          {"routes_per_destination", "cache_lifetime", "ack_timeout", "max_retransmits",
                           "discovery_timeout", "discovery_attempts", "promiscuous"},
                          "dsr");
        Read(d, "routes_per_destination", c.dsr.routesPerDestination, "dsr");
        ReadSeconds(d, "cache_lifetime", c.dsr.cacheLifetime, "dsr");
        ReadSeconds(d, "ack_timeout", c.dsr.ackTimeout, "dsr");
        Read(d, "max_retransmits", c.dsr.maxRetransmits, "dsr");
        ReadSeconds(d, "discovery_timeout", c.dsr.discoveryTimeout, "dsr");
        Read(d, "discovery_attempts", c.dsr.discoveryAttempts, "dsr");
        Read(d, "promiscuous", c.dsr.promiscuous, "dsr");
    }
    return c;
}

json
ScenarioConfig::ToJson() const
{
    json j;
    j["protocol"] = std::string(ToString(protocol));
    j["n_nodes"] = nodes;
    j["arena"] = {arena.width, arena.height};
    j["duration"] = duration;
    j["seed"] = seed;
    if (mobility.kind == MobilityConfig::Kind::RandomWaypoint)
    {
        j["mobility"] = {{"model", "rwp"},
                         {"speed_min", mobility.speedMin},
                         {"speed_max", mobility.speedMax},
                         {"pause", mobility.pause}};
    }
    else
    {
        j["mobility"] = {{"model", "trace"}, {"path", mobility.tracePath}};
    }
    j["channel"] = {{"range", channel.range},
                    {"data_rate", channel.dataRate},
                    {"loss", channel.lossProb},
                    {"prop_delay", channel.propDelay}};
    j["flows"] = {{"count", flows.count},
                  {"packet_size", flows.packetSize},
                  {"rate", flows.aggregateRate},
                  {"start", flows.start}};
    j["buffer"] = bufferCapacity;
    j["ttl"] = ttl;
    j["aodv"] = {{"hello_interval", aodv.helloInterval.Seconds()},
                 {"allowed_hello_loss", aodv.allowedHelloLoss},
                 {"active_route_timeout", aodv.activeRouteTimeout.Seconds()},
                 {"rreq_retry_timeout", aodv.rreqRetryTimeout.Seconds()},
                 {"rreq_max_attempts", aodv.rreqMaxAttempts},
                 {"hello", aodv.enableHello}};
    j["dsdv"] = {{"periodic_interval", dsdv.periodicInterval.Seconds()},
                 {"periodic_jitter", dsdv.periodicJitter.Seconds()},
                 {"settling_time", dsdv.settlingTime.Seconds()},
                 {"missed_periods", dsdv.missedPeriods},
                 {"buffer_timeout", dsdv.bufferTimeout.Seconds()}};
    j["dsr"] = {{"routes_per_destination", dsr.routesPerDestination},
                {"cache_lifetime", dsr.cacheLifetime.Seconds()},
                {"ack_timeout", dsr.ackTimeout.Seconds()},
                {"max_retransmits", dsr.maxRetransmits},
                {"discovery_timeout", dsr.discoveryTimeout.Seconds()},
                {"discovery_attempts", dsr.discoveryAttempts},
                {"promiscuous", dsr.promiscuous}};
    return j;
}

MobilitySource
BuildMobility(const ScenarioConfig& cfg)
{
    if (cfg.mobility.kind == MobilityConfig::Kind::Trace)
    {
        std::ifstream in(cfg.mobility.tracePath);
        if (!in)
        {
            throw ConfigError("cannot open mobility trace '" + cfg.mobility.tracePath + "'");
        }
        return LoadFcdTrace(in);
    }
    RandomWaypointParams p;
    p.nodes = cfg.nodes;
    p.arena = cfg.arena;
    p.speedMin = cfg.mobility.speedMin;
    p.speedMax = cfg.mobility.speedMax;
    p.pause = cfg.mobility.pause;
    p.duration = cfg.duration;
    RngStream rng(cfg.seed, StreamPurpose::Mobility);
    return GenerateRandomWaypoint(p, rng);
}

std::unique_ptr<Network>
BuildNetwork(const ScenarioConfig& cfg)
{
    cfg.Validate();
    MobilitySource mobility = BuildMobility(cfg);
    if (2 * cfg.flows.count > mobility.NodeCount())
    {
        throw ConfigError("trace has " + std::to_string(mobility.NodeCount()) + " nodes, too few for " +
                          std::to_string(cfg.flows.count) + " flows");
    }
    FlowSpec spec = cfg.flows;
    spec.stop = cfg.duration;
    RngStream trafficRng(cfg.seed, StreamPurpose::Traffic);
    const std::vector<CbrFlow> flows = SpawnFlows(spec, mobility.NodeCount(), trafficRng);

    NetworkConfig nc;
    nc.protocol = cfg.protocol;
    nc.seed = cfg.seed;
    nc.channel = cfg.channel;
    nc.bufferCapacity = cfg.bufferCapacity;
    nc.ttl = cfg.ttl;
    nc.aodv = cfg.aodv;
    nc.dsdv = cfg.dsdv;
    nc.dsr = cfg.dsr;

    auto net = std::make_unique<Network>(std::move(mobility), nc);
    for (const CbrFlow& f : flows)
    {
        net->AddFlow(f);
    }
    return net;
}

RunResult
CollectResult(const ScenarioConfig& cfg, const Network& net)
{
    const MetricsAccumulator& m = net.Metrics();
    RunResult r;
    r.config = cfg;
    r.sent = m.Sent();
    r.received = m.Received();
    r.dropped = m.Dropped();
    r.pending = m.Pending();
    r.forwarded = m.Forwarded();
    r.controlTx = m.ControlTx();
    r.controlBytes = m.ControlBytes();
    r.loopsFlagged = m.LoopsFlagged();
    r.unaccounted = net.UnaccountedPendingIds().size();
    for (std::size_t i = 0; i < kDropReasonCount; ++i)
    {
        r.dropsByReason[i] = m.Dropped(static_cast<DropReason>(i));
    }
    r.paperPdr = SentPerReceivedPercent(r.sent, r.received);
    r.pdr = Pdr(r.sent, r.received);
    r.throughput = Throughput(m.DataBytesReceived(), cfg.duration);
    r.avgDelay = AverageDelay(m.LatencySamples());
    r.nrl = Nrl(r.controlTx, r.received);
    return r;
}

RunResult
RunScenario(const ScenarioConfig& cfg, std::ostream* eventTrace)
{
    const auto wallStart = std::chrono::steady_clock::now();
    auto net = BuildNetwork(cfg);
    net->Sim().SetTrace(eventTrace);
    net->RunUntil(Seconds(cfg.duration));
    RunResult r = CollectResult(cfg, *net);
    r.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wallStart).count();
    return r;
}

std::vector<RunResult>
Sweep(const ScenarioConfig& base, std::span<const Protocol> protocols, std::span<const double> times,
      std::span<const std::uint64_t> seeds, unsigned threads)
{
    if (protocols.empty())
    {
        throw ConfigError("sweep needs at least one protocol");
    }
    if (times.empty())
    {
        throw ConfigError("sweep needs at least one simulation time");
    }
    if (seeds.empty())
    {
        throw ConfigError("sweep needs at least one seed");
    }

    std::vector<ScenarioConfig> jobs;
    for (Protocol p : protocols)
    {
        for (double t : times)
        {
            for (std::uint64_t s : seeds)
            {
                ScenarioConfig c = base;
                c.protocol = p;
                c.duration = t;
                c.seed = s;
                c.Validate();
                jobs.push_back(std::move(c));
            }
        }
    }

    std::vector<std::optional<RunResult>> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex errorMutex;
    std::string firstError;
    std::atomic<bool> failed{false};

    auto worker = [&] {
        while (!failed)
        {
            const std::size_t i = next++;
            if (i >= jobs.size())
            {
                return;
            }
            try
            {
                results[i] = RunScenario(jobs[i]);
            }
            catch (const std::exception& e)
            {
                std::lock_guard lock(errorMutex);
                if (!failed.exchange(true))
                {
                    firstError = std::string(ToString(jobs[i].protocol)) + " t=" +
                                 std::to_string(jobs[i].duration) + " seed=" + std::to_string(jobs[i].seed) +
                                 ": " + e.what();
                }
            }
        }
    };

    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
    if (n == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < n; ++k)
        {
            pool.emplace_back(worker);
        }
    }

    std::vector<RunResult> out;
    out.reserve(jobs.size());
    for (auto& r : results)
    {
        if (r)
        {
            out.push_back(std::move(*r));
        }
    }
    if (failed)
    {
        throw SweepError("sweep aborted: " + firstError, std::move(out));
    }
    return out;
}

} // namespace manet
