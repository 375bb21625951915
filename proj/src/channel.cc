#include "manet/channel.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace manet {

void
ChannelConfig::Validate() const
{
    if (!(range > 0.0))
    {
        throw std::invalid_argument("channel range must be positive");
    }
    if (!(dataRate > 0.0))
    {
        throw std::invalid_argument("channel data rate must be positive");
    }
    if (!(lossProb >= 0.0 && lossProb <= 1.0))
    {
        throw std::invalid_argument("loss probability must lie in [0, 1]");
    }
    if (!(propDelay >= 0.0))
    {
        throw std::invalid_argument("propagation delay must be nonnegative");
    }
}

Channel::Channel(Simulator& sim, const MobilitySource& mobility, ChannelConfig config, RngStream& loss)
    : m_sim(sim),
      m_mobility(mobility),
      m_config(config),
      m_loss(loss)
{
    m_config.Validate();
}

const std::vector<Position>&
Channel::PositionsAt(SimTime t) const
{
    if (t != m_cacheTime)
    {
        m_cache.resize(m_mobility.NodeCount());
        for (NodeId n = 0; n < m_cache.size(); ++n)
        {
            m_cache[n] = m_mobility.PositionAt(n, t);
        }
        m_cacheTime = t;
    }
    return m_cache;
}

bool
Channel::InRange(NodeId a, NodeId b, SimTime t) const
{
    if (a == b || !m_mobility.IsActive(a, t) || !m_mobility.IsActive(b, t))
    {
        return false;
    }
    const auto& pos = PositionsAt(t);
    return Distance(pos.at(a), pos.at(b)) <= m_config.range;
}

std::vector<NodeId>
Channel::Neighbors(NodeId node, SimTime t) const
{
    if (node >= m_mobility.NodeCount())
    {
        throw std::out_of_range("unknown node " + std::to_string(node));
    }
    std::vector<NodeId> out;
    if (!m_mobility.IsActive(node, t))
    {
        return out;
    }
    const auto& pos = PositionsAt(t);
    const Position self = pos[node];
    for (NodeId j = 0; j < pos.size(); ++j)
    {
        if (j != node && m_mobility.IsActive(j, t) && Distance(self, pos[j]) <= m_config.range)
        {
            out.push_back(j);
        }
    }
    return out;
}

SimTime
Channel::TransmitDelay(std::uint32_t bytes, double meters) const
{
    double seconds = bytes * 8.0 / m_config.dataRate + m_config.propDelay * meters;
    auto us = static_cast<std::int64_t>(std::llround(seconds * 1e6));
    return MicroSeconds(std::max<std::int64_t>(us, 1));
}

void
Channel::ScheduleDelivery(const Frame& frame, NodeId receiver, SimTime at, bool overheard)
{
    if (!overheard && frame.kind == FrameKind::Data)
    {
        ++m_inFlight[frame.dataId];
    }
    m_sim.ScheduleAt(
        at,
        [this, receiver, frame, overheard] {
            if (overheard)
            {
                if (m_overhear)
                {
                    m_overhear(receiver, frame);
                }
                return;
            }
            if (frame.kind == FrameKind::Data)
            {
                auto it = m_inFlight.find(frame.dataId);
                if (--it->second == 0)
                {
                    m_inFlight.erase(it);
                }
            }
            if (m_receive)
            {
                m_receive(receiver, frame);
            }
        },
        receiver, overheard ? "overhear" : "rx");
}

std::vector<Delivery>
Channel::Broadcast(const Frame& frame)
{
    const SimTime now = m_sim.Now();
    std::vector<Delivery> out;
    ++m_framesSent;
    const auto& pos = PositionsAt(now);
    for (NodeId j : Neighbors(frame.sender, now))
    {
        if (m_loss.Bernoulli(m_config.lossProb))
        {
            continue;
        }
        SimTime at = now + TransmitDelay(frame.size, Distance(pos[frame.sender], pos[j]));
        ScheduleDelivery(frame, j, at, false);
        out.push_back({j, at});
    }
    return out;
}

std::optional<Delivery>
Channel::Unicast(const Frame& frame, NodeId dst)
{
    const SimTime now = m_sim.Now();
    ++m_framesSent;
    std::optional<Delivery> result;
    const auto neighbors = Neighbors(frame.sender, now);
    const auto& pos = PositionsAt(now);
    for (NodeId j : neighbors)
    {
        if (j != dst && !m_overhear)
        {
            continue;
        }
        if (m_loss.Bernoulli(m_config.lossProb))
        {
            continue;
        }
        SimTime at = now + TransmitDelay(frame.size, Distance(pos[frame.sender], pos[j]));
        ScheduleDelivery(frame, j, at, j != dst);
        if (j == dst)
        {
            result = Delivery{j, at};
        }
    }
    return result;
}

std::vector<PacketId>
Channel::InFlightDataIds() const
{
    std::vector<PacketId> ids;
    ids.reserve(m_inFlight.size());
    for (const auto& [id, count] : m_inFlight)
    {
        ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace manet
