#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "manet/report.h"
#include "manet/scenario.h"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace manet;
namespace fs = std::filesystem;

namespace {

ScenarioConfig
Small(Protocol p = Protocol::Aodv)
{
    ScenarioConfig c;
    c.protocol = p;
    c.nodes = 20;
    c.duration = 10;
    c.flows.count = 3;
    c.flows.aggregateRate = 30;
    return c;
}

std::vector<std::string>
Lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
    {
        out.push_back(line);
    }
    return out;
}

std::vector<std::string>
Fields(const std::string& line)
{
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');)
    {
        out.push_back(f);
    }
    return out;
}

std::string
Slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path
ScratchDir(const std::string& name)
{
    fs::path dir = fs::temp_directory_path() / ("manet_test_" + name);
    fs::remove_all(dir);
    return dir;
}

fs::path
WriteTrace(const std::string& name, double gap)
{
    fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << "<fcd-export>\n";
    for (int t = 0; t <= 30; t += 10)
    {
        out << "  <timestep time=\"" << t << "\">\n"
            << "    <vehicle id=\"left\" x=\"10\" y=\"10\" speed=\"0\"/>\n"
            << "    <vehicle id=\"right\" x=\"" << 10 + gap << "\" y=\"10\" speed=\"0\"/>\n"
            << "  </timestep>\n";
    }
    out << "</fcd-export>\n";
    return p;
}

} // namespace

TEST_CASE("json config: fields, defaults and unknown keys")
{
    auto j = nlohmann::json::parse(R"({
        "protocol": "dsr", "n_nodes": 50, "arena": [500, 400], "duration": 75, "seed": 9,
        "mobility": {"model": "rwp", "speed_min": 1, "speed_max": 2, "pause": 3},
        "channel": {"range": 200, "loss": 0.1},
        "flows": {"count": 5, "packet_size": 128, "rate": 100},
        "buffer": 50, "dsdv": {"settling_time": 2}
    })");
    auto c = ScenarioConfig::FromJson(j);
    CHECK(c.protocol == Protocol::Dsr);
    CHECK(c.nodes == 50);
    CHECK(c.arena.width == 500);
    CHECK(c.arena.height == 400);
    CHECK(c.duration == 75);
    CHECK(c.seed == 9);
    CHECK(c.mobility.speedMax == 2);
    CHECK(c.mobility.pause == 3);
    CHECK(c.channel.range == 200);
    CHECK(c.channel.lossProb == doctest::Approx(0.1));
    CHECK(c.channel.dataRate == 2'000'000);
    CHECK(c.flows.count == 5);
    CHECK(c.flows.packetSize == 128);
    CHECK(c.bufferCapacity == 50);
    CHECK(c.dsdv.settlingTime == Seconds(2));
    CHECK_NOTHROW(c.Validate());

    auto again = ScenarioConfig::FromJson(c.ToJson());
    CHECK(again.ToJson() == c.ToJson());

    auto obj = ScenarioConfig::FromJson(nlohmann::json::parse(R"({"arena": {"width": 10, "height": 20}})"));
    CHECK(obj.arena.height == 20);
    auto defaults = ScenarioConfig::FromJson(nlohmann::json::object());
    CHECK(defaults.nodes == 100);
    CHECK(defaults.arena.width == 867);
    CHECK(defaults.arena.height == 561);

    CHECK_THROWS_AS(ScenarioConfig::FromJson(nlohmann::json::parse(R"({"nodes": 3})")), ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::FromJson(nlohmann::json::parse(R"({"channel": {"rnage": 3}})")), ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::FromJson(nlohmann::json::parse(R"({"protocol": "olsr"})")), ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::FromJson(nlohmann::json::parse(R"({"duration": "long"})")), ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::FromJson(nlohmann::json::parse(R"({"arena": [1]})")), ConfigError);
}

TEST_CASE("mobility spec strings")
{
    CHECK(MobilityConfig::Parse("rwp").kind == MobilityConfig::Kind::RandomWaypoint);
    auto t = MobilityConfig::Parse("trace:/tmp/x.xml");
    CHECK(t.kind == MobilityConfig::Kind::Trace);
    CHECK(t.tracePath == "/tmp/x.xml");
    CHECK(t.ToString() == "trace:/tmp/x.xml");
    CHECK_THROWS_AS(MobilityConfig::Parse("manhattan"), ConfigError);
    CHECK_THROWS_AS(MobilityConfig::Parse("trace:"), ConfigError);
}

TEST_CASE("validation rejects bad scenarios before running")
{
    auto c = Small();
    c.duration = 0;
    CHECK_THROWS_AS(c.Validate(), ConfigError);
    CHECK_THROWS_AS(RunScenario(c), ConfigError);

    c = Small();
    c.flows.count = 11;
    CHECK_THROWS_AS(c.Validate(), ConfigError);

    c = Small();
    c.arena.height = 0;
    CHECK_THROWS_AS(c.Validate(), ConfigError);

    c = Small();
    c.channel.lossProb = 2;
    CHECK_THROWS_AS(c.Validate(), ConfigError);

    c = Small();
    c.mobility = MobilityConfig::Parse("trace:/nonexistent/trace.xml");
    CHECK_THROWS_AS(c.Validate(), ConfigError);
}

TEST_CASE("two static nodes in range deliver everything, for every protocol")
{
    for (Protocol p : {Protocol::Aodv, Protocol::Dsdv, Protocol::Dsr})
    {
        ScenarioConfig c;
        c.protocol = p;
        c.nodes = 2;
        c.arena = {100, 100};
        c.mobility.speedMin = 0;
        c.mobility.speedMax = 0;
        c.flows.count = 1;
        c.flows.aggregateRate = 4;
        c.duration = 30;
        auto r = RunScenario(c);
        CAPTURE(ToString(p));
        CHECK(r.sent == 120);
        CHECK(r.pdr == 1.0);
        CHECK(r.paperPdr == 100.0);
        CHECK(r.unaccounted == 0);
        CHECK(r.avgDelay.has_value());
    }
}

TEST_CASE("two trace vehicles out of range deliver nothing")
{
    auto trace = WriteTrace("manet_far.xml", 1000);
    for (Protocol p : {Protocol::Aodv, Protocol::Dsdv, Protocol::Dsr})
    {
        ScenarioConfig c;
        c.protocol = p;
        c.mobility = MobilityConfig::Parse("trace:" + trace.string());
        c.flows.count = 1;
        c.flows.aggregateRate = 2;
        c.duration = 30;
        auto r = RunScenario(c);
        CAPTURE(ToString(p));
        CHECK(r.sent == 60);
        CHECK(r.received == 0);
        CHECK(r.pdr == 0.0);
        CHECK(std::isinf(r.paperPdr));
        CHECK_FALSE(r.avgDelay.has_value());
        const auto lost = r.dropsByReason[static_cast<std::size_t>(DropReason::Unreachable)] +
                          r.dropsByReason[static_cast<std::size_t>(DropReason::NoRoute)];
        CHECK(lost == r.dropped);
        CHECK(r.dropped > 0);
        CHECK(r.sent == r.received + r.dropped + r.pending);
    }
}

TEST_CASE("identical configs give identical results")
{
    auto c = Small(Protocol::Dsr);
    auto a = RunScenario(c);
    auto b = RunScenario(c);
    CHECK(FormatResultsCsv({a}) == FormatResultsCsv({b}));
    CHECK(a.controlTx == b.controlTx);
    CHECK(a.forwarded == b.forwarded);

    std::ostringstream t1, t2;
    RunScenario(c, &t1);
    RunScenario(c, &t2);
    CHECK(t1.str() == t2.str());
    CHECK_FALSE(t1.str().empty());
}

TEST_CASE("sweep: sent column follows the calibrated rate")
{
    ScenarioConfig c;
    c.nodes = 20;
    std::vector<Protocol> protos{Protocol::Dsdv};
    std::vector<double> times{25, 50};
    std::vector<std::uint64_t> seeds{1};
    auto results = Sweep(c, protos, times, seeds, 2);
    REQUIRE(results.size() == 2);
    CHECK(results[0].sent == 12208);
    CHECK(results[1].sent == 24416);
}

TEST_CASE("sweep: ordering, averaging and errors")
{
    auto c = Small();
    std::vector<Protocol> protos{Protocol::Dsr, Protocol::Aodv};
    std::vector<double> times{4, 8};
    std::vector<std::uint64_t> seeds{3, 1, 2};
    auto serial = Sweep(c, protos, times, seeds, 1);
    auto parallel = Sweep(c, protos, times, seeds, 4);
    REQUIRE(serial.size() == 12);
    CHECK(FormatResultsCsv(serial) == FormatResultsCsv(parallel));
    CHECK(serial[0].config.protocol == Protocol::Dsr);
    CHECK(serial[0].config.seed == 3);
    CHECK(serial[3].config.duration == 8);

    auto rows = Lines(FormatResultsCsv(serial));
    REQUIRE(rows.size() == 1 + 12 + 4);
    CHECK(rows[0] == kCsvHeader);
    // The mean row for (DSR, 4) follows its three seeds.
    int meanRows = 0;
    for (const auto& line : rows)
    {
        auto f = Fields(line);
        if (f[2] != "mean")
        {
            continue;
        }
        ++meanRows;
        double sum = 0;
        for (const auto& r : serial)
        {
            if (ToUpperString(r.config.protocol) == f[0] && FormatNumber(r.config.duration, 0) == f[1])
            {
                sum += static_cast<double>(r.sent);
            }
        }
        CHECK(std::stod(f[3]) == doctest::Approx(sum / 3));
    }
    CHECK(meanRows == 4);

    std::vector<std::uint64_t> none;
    CHECK_THROWS_AS(Sweep(c, protos, times, none), ConfigError);
    std::vector<double> noTimes;
    CHECK_THROWS_AS(Sweep(c, protos, noTimes, seeds), ConfigError);

    auto broken = fs::temp_directory_path() / "manet_broken.xml";
    std::ofstream(broken) << "<fcd-export><timestep time=\"0\">";
    auto bad = Small();
    bad.mobility = MobilityConfig::Parse("trace:" + broken.string());
    CHECK_THROWS_AS(Sweep(bad, protos, times, seeds, 2), SweepError);
}

TEST_CASE("csv rows: header, decimals and infinity marker")
{
    RunResult r;
    r.config = Small(Protocol::Dsdv);
    r.config.duration = 25;
    r.config.seed = 4;
    r.sent = 24416;
    r.received = 1916;
    r.paperPdr = 1274.32;
    r.forwarded = 10;
    r.pdr = Pdr(24416, 1916);
    r.throughput = 2452.48;
    r.avgDelay = 0.0125;
    r.nrl = 3.5;
    auto rows = Lines(FormatResultsCsv({r}));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "protocol,sim_time,seed,packets_sent,packets_received,paper_pdr,packets_forwarded,pdr,"
                     "throughput_Bps,avg_delay_s,nrl");
    CHECK(rows[1] == "DSDV,25,4,24416,1916,1274.32,10,0.078473,2452.4800,0.012500,3.500000");

    r.received = 0;
    r.paperPdr = std::numeric_limits<double>::infinity();
    r.pdr = 0;
    r.avgDelay.reset();
    r.nrl = std::numeric_limits<double>::infinity();
    auto f = Fields(Lines(FormatResultsCsv({r}))[1]);
    CHECK(f[5] == "inf");
    CHECK(f[9] == "inf");
    CHECK(f[10] == "inf");
}

TEST_CASE("report files: rows per time, summary lines, idempotence")
{
    auto c = Small();
    std::vector<Protocol> one{Protocol::Aodv};
    std::vector<double> seven{1, 2, 3, 4, 5, 6, 7};
    std::vector<std::uint64_t> seed{1};
    auto results = Sweep(c, one, seven, seed, 4);
    auto dir = ScratchDir("report");
    EmitReport(results, dir);
    CHECK(Lines(Slurp(dir / "results.csv")).size() == 8);
    for (const auto& m : SeriesMetrics())
    {
        auto lines = Lines(Slurp(dir / ("series_" + m + ".dat")));
        REQUIRE(lines.size() == 8);
        CHECK(lines[0] == "# time AODV");
    }
    CHECK(SeriesMetrics().size() == 5);
    const auto csv = Slurp(dir / "results.csv");
    const auto summary = Slurp(dir / "summary.txt");
    EmitReport(results, dir);
    CHECK(Slurp(dir / "results.csv") == csv);
    CHECK(Slurp(dir / "summary.txt") == summary);

    std::vector<Protocol> all{Protocol::Aodv, Protocol::Dsdv, Protocol::Dsr};
    std::vector<double> two{3, 6};
    auto three = Sweep(c, all, two, seed, 4);
    auto lines = Lines(FormatSummary(three));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].rfind("throughput: ", 0) == 0);
    CHECK(lines[1].rfind("pdr: ", 0) == 0);
    CHECK(lines[2].rfind("nrl: ", 0) == 0);
    for (const auto& l : lines)
    {
        for (const char* name : {"AODV", "DSDV", "DSR"})
        {
            CHECK(l.find(name) != std::string::npos);
        }
    }
    auto series = Lines(FormatSeries(three, "pdr"));
    REQUIRE(series.size() == 3);
    CHECK(series[0] == "# time AODV DSDV DSR");

    CHECK_THROWS(EmitReport({}, ScratchDir("empty")));
    CHECK_THROWS(EmitReport(results, "/proc/manet_cannot_write_here"));
    CHECK_THROWS(FormatSeries(results, "latency"));
}

TEST_CASE("property: every run satisfies the accounting identity")
{
    for (Protocol p : {Protocol::Aodv, Protocol::Dsdv, Protocol::Dsr})
    {
        for (std::uint64_t seed : {1, 2, 3})
        {
            auto c = Small(p);
            c.duration = 30;
            c.seed = seed;
            c.channel.lossProb = 0.05;
            auto r = RunScenario(c);
            CAPTURE(ToString(p));
            CHECK(r.sent == r.received + r.dropped + r.pending);
            CHECK(r.unaccounted == 0);
            if (r.received > 0)
            {
                CHECK(SentPerReceivedPercentExact(r.sent, r.received) * r.pdr == doctest::Approx(100.0));
            }
        }
    }
}
