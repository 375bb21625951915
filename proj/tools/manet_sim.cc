#include "manet/report.h"
#include "manet/scenario.h"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace manet;

namespace {

Arena
ParseArea(const std::string& s)
{
    const auto x = s.find_first_of("xX");
    if (x == std::string::npos)
    {
        throw ConfigError("--area expects WxH, got '" + s + "'");
    }
    try
    {
        std::size_t used = 0;
        Arena a{std::stod(s.substr(0, x), &used), 0.0};
        if (used != x)
        {
            throw std::invalid_argument("width");
        }
        const std::string h = s.substr(x + 1);
        a.height = std::stod(h, &used);
        if (used != h.size())
        {
            throw std::invalid_argument("height");
        }
        return a;
    }
    catch (const std::logic_error&)
    {
        throw ConfigError("--area expects WxH, got '" + s + "'");
    }
}

void
PrintRun(const RunResult& r)
{
    std::cout << ToUpperString(r.config.protocol) << " t=" << r.config.duration << "s seed=" << r.config.seed
              << "  sent=" << r.sent << " received=" << r.received << " dropped=" << r.dropped
              << " pending=" << r.pending << " forwarded=" << r.forwarded
              << " pdr=" << FormatNumber(r.pdr, 4) << " paper_pdr=" << FormatNumber(r.paperPdr, 2)
              << " throughput=" << FormatNumber(r.throughput, 2) << "B/s"
              << " delay=" << FormatNumber(r.avgDelay.value_or(std::numeric_limits<double>::infinity()), 6)
              << "s nrl=" << FormatNumber(r.nrl, 4) << "  (" << FormatNumber(r.wallSeconds, 2) << "s wall)\n";
    std::cout << "  drops:";
    for (std::size_t i = 0; i < kDropReasonCount; ++i)
    {
        std::cout << ' ' << ToString(static_cast<DropReason>(i)) << '=' << r.dropsByReason[i];
    }
    std::cout << " control_tx=" << r.controlTx << " loops_flagged=" << r.loopsFlagged << '\n';
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Discrete-event comparison of AODV, DSDV and DSR over mobile ad hoc networks"};

    std::string configPath;
    std::string protocol;
    std::vector<std::string> protocols;
    std::size_t nodes = 0;
    std::string area;
    double duration = 0;
    std::vector<double> times;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;
    std::string mobility;
    std::size_t flowCount = 0;
    std::uint32_t packetSize = 0;
    double rate = 0;
    double range = 0;
    double loss = 0;
    double dataRate = 0;
    std::size_t buffer = 0;
    std::string out = "results";
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string eventTrace;
    bool printConfig = false;

    app.add_option("--config", configPath, "JSON scenario file; flags override its values")
        ->check(CLI::ExistingFile);
    auto* oProtocol = app.add_option("--protocol", protocol, "aodv, dsdv or dsr");
    auto* oProtocols =
        app.add_option("--protocols", protocols, "Several protocols for a sweep")->delimiter(',');
    auto* oNodes = app.add_option("--nodes", nodes, "Node count (random waypoint only)");
    auto* oArea = app.add_option("--area", area, "Arena size WxH in meters, e.g. 867x561");
    auto* oDuration = app.add_option("--duration", duration, "Simulated seconds");
    auto* oTimes = app.add_option("--times", times, "Several durations for a sweep, e.g. 25,50,75")
                       ->delimiter(',');
    auto* oSeed = app.add_option("--seed", seed, "Scenario seed");
    auto* oSeeds = app.add_option("--seeds", seeds, "Several seeds for a sweep, e.g. 1,2,3")->delimiter(',');
    auto* oMobility = app.add_option("--mobility", mobility, "rwp or trace:<fcd.xml>");
    auto* oFlows = app.add_option("--flows", flowCount, "Number of CBR flows");
    auto* oPacketSize = app.add_option("--packet-size", packetSize, "Payload bytes per packet");
    auto* oRate = app.add_option("--rate", rate, "Aggregate offered load in packets/s over all flows");
    auto* oRange = app.add_option("--range", range, "Radio range in meters");
    auto* oLoss = app.add_option("--loss", loss, "Per-frame loss probability");
    auto* oDataRate = app.add_option("--data-rate", dataRate, "Radio bit rate in bit/s");
    auto* oBuffer = app.add_option("--buffer", buffer, "Per-node send buffer in packets");
    app.add_option("--out", out, "Output directory for results.csv, series and summary");
    app.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    app.add_option("--trace-events", eventTrace, "Write the event log of a single run to this file");
    app.add_flag("--print-config", printConfig, "Print the effective configuration as JSON and exit");
    oProtocol->excludes(oProtocols);
    oDuration->excludes(oTimes);
    oSeed->excludes(oSeeds);

    CLI11_PARSE(app, argc, argv);

    try
    {
        ScenarioConfig cfg;
        if (!configPath.empty())
        {
            std::ifstream in(configPath);
            nlohmann::json j;
            try
            {
                j = nlohmann::json::parse(in);
            }
            catch (const nlohmann::json::parse_error& e)
            {
                throw ConfigError(configPath + ": " + e.what());
            }
            cfg = ScenarioConfig::FromJson(j);
        }
        if (oProtocol->count())
        {
            cfg.protocol = ParseProtocol(protocol);
        }
        if (oNodes->count())
        {
            cfg.nodes = nodes;
        }
        if (oArea->count())
        {
            cfg.arena = ParseArea(area);
        }
        if (oDuration->count())
        {
            cfg.duration = duration;
        }
        if (oSeed->count())
        {
            cfg.seed = seed;
        }
        if (oMobility->count())
        {
            const MobilityConfig parsed = MobilityConfig::Parse(mobility);
            cfg.mobility.kind = parsed.kind;
            cfg.mobility.tracePath = parsed.tracePath;
        }
        if (oFlows->count())
        {
            cfg.flows.count = flowCount;
        }
        if (oPacketSize->count())
        {
            cfg.flows.packetSize = packetSize;
        }
        if (oRate->count())
        {
            cfg.flows.aggregateRate = rate;
        }
        if (oRange->count())
        {
            cfg.channel.range = range;
        }
        if (oLoss->count())
        {
            cfg.channel.lossProb = loss;
        }
        if (oDataRate->count())
        {
            cfg.channel.dataRate = dataRate;
        }
        if (oBuffer->count())
        {
            cfg.bufferCapacity = buffer;
        }
        cfg.Validate();

        if (printConfig)
        {
            std::cout << cfg.ToJson().dump(2) << '\n';
            return 0;
        }

        std::vector<Protocol> protoList;
        for (const auto& p : protocols)
        {
            protoList.push_back(ParseProtocol(p));
        }
        if (protoList.empty())
        {
            protoList.push_back(cfg.protocol);
        }
        if (times.empty())
        {
            times.push_back(cfg.duration);
        }
        if (seeds.empty() && !oSeeds->count())
        {
            seeds.push_back(cfg.seed);
        }

        std::vector<RunResult> results;
        const bool single = protoList.size() == 1 && times.size() == 1 && seeds.size() == 1;
        if (!eventTrace.empty())
        {
            if (!single)
            {
                throw ConfigError("--trace-events needs a single run");
            }
            std::ofstream trace(eventTrace);
            if (!trace)
            {
                throw ConfigError("cannot write " + eventTrace);
            }
            ScenarioConfig one = cfg;
            one.protocol = protoList[0];
            one.duration = times[0];
            one.seed = seeds[0];
            results.push_back(RunScenario(one, &trace));
        }
        else
        {
            try
            {
                results = Sweep(cfg, protoList, times, seeds, threads);
            }
            catch (const SweepError& e)
            {
                std::cerr << "error: " << e.what() << '\n';
                if (!e.Partial().empty())
                {
                    EmitReport(e.Partial(), out);
                    std::cerr << "partial results (" << e.Partial().size() << " runs) written to " << out
                              << '\n';
                }
                return 1;
            }
        }
        for (const RunResult& r : results)
        {
            PrintRun(r);
        }
        EmitReport(results, out);
        std::cout << FormatSummary(results);
        std::cout << "wrote " << out << "/results.csv\n";
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
