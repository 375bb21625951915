#include "manet/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace manet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Group
{
    Protocol protocol;
    double time;
    std::vector<const RunResult*> runs;
};

std::vector<Group>
GroupRuns(const std::vector<RunResult>& results)
{
    std::vector<Group> groups;
    for (const RunResult& r : results)
    {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.protocol == r.config.protocol && g.time == r.config.duration;
        });
        if (it == groups.end())
        {
            groups.push_back({r.config.protocol, r.config.duration, {}});
            it = groups.end() - 1;
        }
        it->runs.push_back(&r);
    }
    return groups;
}

std::vector<Protocol>
ProtocolsInOrder(const std::vector<RunResult>& results)
{
    std::vector<Protocol> out;
    for (const RunResult& r : results)
    {
        if (std::find(out.begin(), out.end(), r.config.protocol) == out.end())
        {
            out.push_back(r.config.protocol);
        }
    }
    return out;
}

double
Metric(const RunResult& r, const std::string& metric)
{
    if (metric == "pdr")
    {
        return r.pdr;
    }
    if (metric == "paper_pdr")
    {
        return r.paperPdr;
    }
    if (metric == "throughput")
    {
        return r.throughput;
    }
    if (metric == "avg_delay")
    {
        return r.avgDelay.value_or(kInf);
    }
    if (metric == "nrl")
    {
        return r.nrl;
    }
    throw std::invalid_argument("unknown metric '" + metric + "'");
}

template <typename F>
double
Mean(const std::vector<const RunResult*>& runs, F value)
{
    double sum = 0;
    for (const RunResult* r : runs)
    {
        sum += value(*r);
    }
    return runs.empty() ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(runs.size());
}

std::string
FormatTime(double t)
{
    std::ostringstream os;
    os << t;
    return os.str();
}

std::string
OrderingLine(const std::string& label, const std::vector<std::pair<Protocol, double>>& values, bool descending)
{
    auto sorted = values;
    std::stable_sort(sorted.begin(), sorted.end(), [descending](const auto& a, const auto& b) {
        return descending ? a.second > b.second : a.second < b.second;
    });
    std::string line = label + ": ";
    for (std::size_t i = 0; i < sorted.size(); ++i)
    {
        if (i > 0)
        {
            const bool tie = FormatNumber(sorted[i].second, 6) == FormatNumber(sorted[i - 1].second, 6);
            line += tie ? " = " : (descending ? " > " : " < ");
        }
        line += ToUpperString(sorted[i].first);
    }
    return line;
}

void
WriteFile(const std::filesystem::path& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << contents;
    if (!out.flush())
    {
        throw std::runtime_error("failed writing " + path.string());
    }
}

} // namespace

std::string
FormatNumber(double v, int decimals)
{
    if (std::isnan(v))
    {
        return "nan";
    }
    if (std::isinf(v))
    {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string
FormatResultsCsv(const std::vector<RunResult>& results)
{
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const Group& g : GroupRuns(results))
    {
        const std::string proto(ToUpperString(g.protocol));
        const std::string time = FormatTime(g.time);
        for (const RunResult* r : g.runs)
        {
            os << proto << ',' << time << ',' << r->config.seed << ',' << r->sent << ',' << r->received << ','
               << FormatNumber(r->paperPdr, 2) << ',' << r->forwarded << ',' << FormatNumber(r->pdr, 6) << ','
               << FormatNumber(r->throughput, 4) << ',' << FormatNumber(r->avgDelay.value_or(kInf), 6) << ','
               << FormatNumber(r->nrl, 6) << '\n';
        }
        if (g.runs.size() > 1)
        {
            auto mean = [&](auto f) { return Mean(g.runs, f); };
            os << proto << ',' << time << ",mean,"
               << FormatNumber(mean([](const RunResult& r) { return static_cast<double>(r.sent); }), 2) << ','
               << FormatNumber(mean([](const RunResult& r) { return static_cast<double>(r.received); }), 2)
               << ',' << FormatNumber(mean([](const RunResult& r) { return r.paperPdr; }), 2) << ','
               << FormatNumber(mean([](const RunResult& r) { return static_cast<double>(r.forwarded); }), 2)
               << ',' << FormatNumber(mean([](const RunResult& r) { return r.pdr; }), 6) << ','
               << FormatNumber(mean([](const RunResult& r) { return r.throughput; }), 4) << ','
               << FormatNumber(mean([](const RunResult& r) { return r.avgDelay.value_or(kInf); }), 6) << ','
               << FormatNumber(mean([](const RunResult& r) { return r.nrl; }), 6) << '\n';
        }
    }
    return os.str();
}

std::string
FormatSeries(const std::vector<RunResult>& results, const std::string& metric)
{
    const std::vector<Protocol> protocols = ProtocolsInOrder(results);
    std::vector<double> times;
    for (const RunResult& r : results)
    {
        times.push_back(r.config.duration);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    const std::vector<Group> groups = GroupRuns(results);
    std::ostringstream os;
    os << "# time";
    for (Protocol p : protocols)
    {
        os << ' ' << ToUpperString(p);
    }
    os << '\n';
    for (double t : times)
    {
        os << FormatTime(t);
        for (Protocol p : protocols)
        {
            auto g = std::find_if(groups.begin(), groups.end(),
                                  [&](const Group& x) { return x.protocol == p && x.time == t; });
            double v = std::numeric_limits<double>::quiet_NaN();
            if (g != groups.end())
            {
                v = Mean(g->runs, [&](const RunResult& r) { return Metric(r, metric); });
            }
            os << ' ' << FormatNumber(v, 6);
        }
        os << '\n';
    }
    return os.str();
}

std::string
FormatSummary(const std::vector<RunResult>& results)
{
    std::vector<std::pair<Protocol, double>> throughput;
    std::vector<std::pair<Protocol, double>> pdr;
    std::vector<std::pair<Protocol, double>> nrl;
    for (Protocol p : ProtocolsInOrder(results))
    {
        std::vector<const RunResult*> runs;
        for (const RunResult& r : results)
        {
            if (r.config.protocol == p)
            {
                runs.push_back(&r);
            }
        }
        throughput.emplace_back(p, Mean(runs, [](const RunResult& r) { return r.throughput; }));
        pdr.emplace_back(p, Mean(runs, [](const RunResult& r) { return r.pdr; }));
        nrl.emplace_back(p, Mean(runs, [](const RunResult& r) { return r.nrl; }));
    }
    return OrderingLine("throughput", throughput, true) + '\n' + OrderingLine("pdr", pdr, true) + '\n' +
           OrderingLine("nrl", nrl, false) + '\n';
}

const std::vector<std::string>&
SeriesMetrics()
{
    static const std::vector<std::string> metrics = {"pdr", "paper_pdr", "throughput", "avg_delay", "nrl"};
    return metrics;
}

void
EmitReport(const std::vector<RunResult>& results, const std::filesystem::path& dir)
{
    if (results.empty())
    {
        throw std::runtime_error("no results to report");
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!std::filesystem::is_directory(dir))
    {
        throw std::runtime_error("output directory " + dir.string() + " is not usable" +
                                 (ec ? ": " + ec.message() : std::string()));
    }
    WriteFile(dir / "results.csv", FormatResultsCsv(results));
    for (const std::string& metric : SeriesMetrics())
    {
        WriteFile(dir / ("series_" + metric + ".dat"), FormatSeries(results, metric));
    }
    WriteFile(dir / "summary.txt", FormatSummary(results));
}

} // namespace manet
