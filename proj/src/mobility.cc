#include "manet/mobility.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>

namespace manet {

MobilitySource::MobilitySource(Kind kind, Arena arena, std::vector<std::vector<Waypoint>> chains,
                               std::vector<std::string> labels)
    : m_kind(kind),
      m_arena(arena),
      m_chains(std::move(chains)),
      m_labels(std::move(labels))
{
    for (std::size_t i = 0; i < m_chains.size(); ++i)
    {
        const auto& chain = m_chains[i];
        if (chain.empty())
        {
            throw std::invalid_argument("node " + std::to_string(i) + " has no waypoints");
        }
        for (std::size_t k = 1; k < chain.size(); ++k)
        {
            if (chain[k].at <= chain[k - 1].at)
            {
                throw std::invalid_argument("waypoints of node " + std::to_string(i) +
                                            " are not strictly increasing in time");
            }
        }
    }
    if (m_labels.empty())
    {
        for (std::size_t i = 0; i < m_chains.size(); ++i)
        {
            m_labels.push_back(std::to_string(i));
        }
    }
    if (m_labels.size() != m_chains.size())
    {
        throw std::invalid_argument("label count does not match node count");
    }
}

const std::vector<Waypoint>&
MobilitySource::Chain(NodeId node) const
{
    if (node >= m_chains.size())
    {
        throw std::out_of_range("unknown node " + std::to_string(node));
    }
    return m_chains[node];
}

Position
MobilitySource::PositionAt(NodeId node, SimTime t) const
{
    const auto& chain = Chain(node);
    if (t <= chain.front().at)
    {
        return chain.front().pos;
    }
    if (t >= chain.back().at)
    {
        return chain.back().pos;
    }
    auto next = std::upper_bound(chain.begin(), chain.end(), t,
                                 [](SimTime v, const Waypoint& w) { return v < w.at; });
    auto prev = next - 1;
    if (prev->at == t)
    {
        return prev->pos;
    }
    double span = static_cast<double>((next->at - prev->at).Micros());
    double f = static_cast<double>((t - prev->at).Micros()) / span;
    return Position{prev->pos.x + f * (next->pos.x - prev->pos.x),
                    prev->pos.y + f * (next->pos.y - prev->pos.y)};
}

SimTime
MobilitySource::ActiveFrom(NodeId node) const
{
    return Chain(node).front().at;
}

const std::vector<Waypoint>&
MobilitySource::Waypoints(NodeId node) const
{
    return Chain(node);
}

const std::string&
MobilitySource::Label(NodeId node) const
{
    Chain(node);
    return m_labels[node];
}

MobilitySource
GenerateRandomWaypoint(const RandomWaypointParams& params, RngStream& rng)
{
    if (params.nodes == 0)
    {
        throw std::invalid_argument("random waypoint needs at least one node");
    }
    if (!(params.arena.width > 0.0) || !(params.arena.height > 0.0))
    {
        throw std::invalid_argument("arena must have positive width and height");
    }
    if (params.speedMin < 0.0 || params.speedMin > params.speedMax)
    {
        throw std::invalid_argument("speed range must satisfy 0 <= min <= max");
    }
    if (!(params.duration > 0.0) || params.pause < 0.0)
    {
        throw std::invalid_argument("duration must be positive and pause nonnegative");
    }

    const SimTime end = Seconds(params.duration);
    const SimTime pause = Seconds(params.pause);
    auto uniformPoint = [&] {
        double x = rng.Uniform(0.0, params.arena.width);
        double y = rng.Uniform(0.0, params.arena.height);
        return Position{x, y};
    };

    std::vector<std::vector<Waypoint>> chains(params.nodes);
    for (auto& chain : chains)
    {
        SimTime t;
        Position here = uniformPoint();
        chain.push_back({t, here});
        while (t < end)
        {
            Position dest = uniformPoint();
            double speed = rng.Uniform(params.speedMin, params.speedMax);
            if (!(speed > 0.0))
            {
                break;
            }
            // Rounding the travel time up keeps the realised speed <= speed.
            double travelUs = std::ceil(Distance(here, dest) / speed * 1e6);
            SimTime arrive = t + MicroSeconds(std::max<std::int64_t>(1, static_cast<std::int64_t>(travelUs)));
            chain.push_back({arrive, dest});
            t = arrive;
            here = dest;
            if (pause > SimTime())
            {
                t += pause;
                chain.push_back({t, here});
            }
        }
    }
    return MobilitySource(MobilitySource::Kind::RandomWaypoint, params.arena, std::move(chains));
}

void
WriteFcdTrace(const MobilitySource& source, std::ostream& out)
{
    std::set<SimTime> times;
    for (NodeId n = 0; n < source.NodeCount(); ++n)
    {
        for (const auto& w : source.Waypoints(n))
        {
            times.insert(w.at);
        }
    }

    auto flags = out.flags();
    auto precision = out.precision();
    out << std::setprecision(17);
    out << "<fcd-export>\n";
    for (SimTime t : times)
    {
        out << "  <timestep time=\"" << t.Seconds() << "\">\n";
        for (NodeId n = 0; n < source.NodeCount(); ++n)
        {
            const auto& chain = source.Waypoints(n);
            if (t < chain.front().at || t > chain.back().at)
            {
                continue;
            }
            Position p = source.PositionAt(n, t);
            double speed = 0.0;
            auto next = std::upper_bound(chain.begin(), chain.end(), t,
                                         [](SimTime v, const Waypoint& w) { return v < w.at; });
            if (next != chain.end() && next != chain.begin())
            {
                auto prev = next - 1;
                speed = Distance(prev->pos, next->pos) / (next->at - prev->at).Seconds();
            }
            out << "    <vehicle id=\"" << source.Label(n) << "\" x=\"" << p.x << "\" y=\"" << p.y
                << "\" speed=\"" << speed << "\"/>\n";
        }
        out << "  </timestep>\n";
    }
    out << "</fcd-export>\n";
    out.flags(flags);
    out.precision(precision);
}

} // namespace manet
