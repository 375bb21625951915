#include "manet/traffic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace manet {

void
CbrFlow::Validate() const
{
    if (!(interval > 0.0))
    {
        throw std::invalid_argument("flow interval must be positive");
    }
    if (!(startAt < stopAt))
    {
        throw std::invalid_argument("flow must start before it stops");
    }
    if (src == dst)
    {
        throw std::invalid_argument("flow source and sink must differ");
    }
    if (packetSize == 0)
    {
        throw std::invalid_argument("flow packet size must be positive");
    }
}

SimTime
CbrFlow::SendTime(std::uint64_t m) const
{
    return Seconds(startAt + static_cast<double>(m) * interval);
}

std::uint64_t
CbrFlow::PacketCount() const
{
    const SimTime stop = Seconds(stopAt);
    // Float estimate, then settle the boundary on the microsecond grid.
    auto n = static_cast<std::uint64_t>(std::max(0.0, std::floor((stopAt - startAt) / interval)));
    while (n > 0 && SendTime(n - 1) >= stop)
    {
        --n;
    }
    while (SendTime(n) < stop)
    {
        ++n;
    }
    return n;
}

std::vector<CbrFlow>
SpawnFlows(const FlowSpec& spec, std::size_t nodeCount, RngStream& rng)
{
    std::vector<CbrFlow> flows;
    if (spec.count == 0)
    {
        return flows;
    }
    if (2 * spec.count > nodeCount)
    {
        throw std::invalid_argument("need at least " + std::to_string(2 * spec.count) +
                                    " nodes for " + std::to_string(spec.count) + " disjoint flows");
    }
    if (!(spec.aggregateRate > 0.0))
    {
        throw std::invalid_argument("aggregate rate must be positive");
    }

    // Partial Fisher-Yates: the first 2*count slots become sources and sinks.
    std::vector<NodeId> nodes(nodeCount);
    std::iota(nodes.begin(), nodes.end(), NodeId{0});
    for (std::size_t i = 0; i < 2 * spec.count; ++i)
    {
        std::size_t j = i + rng.UniformInt(0, nodeCount - 1 - i);
        std::swap(nodes[i], nodes[j]);
    }

    const double n = static_cast<double>(spec.count);
    for (std::size_t k = 0; k < spec.count; ++k)
    {
        CbrFlow f;
        f.src = nodes[k];
        f.dst = nodes[spec.count + k];
        f.packetSize = spec.packetSize;
        f.interval = n / spec.aggregateRate;
        f.startAt = spec.start + static_cast<double>(k) / spec.aggregateRate;
        f.stopAt = spec.stop;
        if (f.startAt < f.stopAt)
        {
            f.Validate();
        }
        flows.push_back(f);
    }
    return flows;
}

} // namespace manet
