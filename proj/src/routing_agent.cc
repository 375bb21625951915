#include "manet/routing_agent.h"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace manet {

std::string_view
ToString(Protocol p)
{
    switch (p)
    {
    case Protocol::Aodv:
        return "aodv";
    case Protocol::Dsdv:
        return "dsdv";
    case Protocol::Dsr:
        return "dsr";
    }
    return "unknown";
}

std::string_view
ToUpperString(Protocol p)
{
    switch (p)
    {
    case Protocol::Aodv:
        return "AODV";
    case Protocol::Dsdv:
        return "DSDV";
    case Protocol::Dsr:
        return "DSR";
    }
    return "UNKNOWN";
}

Protocol
ParseProtocol(std::string_view s)
{
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "aodv")
    {
        return Protocol::Aodv;
    }
    if (lower == "dsdv")
    {
        return Protocol::Dsdv;
    }
    if (lower == "dsr")
    {
        return Protocol::Dsr;
    }
    throw std::invalid_argument("unknown protocol '" + std::string(s) + "' (expected aodv, dsdv or dsr)");
}

// ---------------------------------------------------------------------------

std::optional<PacketEnvelope>
SendBuffer::Push(PacketEnvelope pkt, SimTime now)
{
    std::optional<PacketEnvelope> evicted;
    if (m_capacity == 0)
    {
        return pkt;
    }
    if (m_entries.size() >= m_capacity)
    {
        evicted = std::move(m_entries.front().packet);
        m_entries.pop_front();
    }
    m_entries.push_back({std::move(pkt), now});
    return evicted;
}

std::vector<PacketEnvelope>
SendBuffer::TakeFor(NodeId dst)
{
    std::vector<PacketEnvelope> out;
    auto keep = std::stable_partition(m_entries.begin(), m_entries.end(),
                                      [dst](const Entry& e) { return e.packet.dst != dst; });
    for (auto it = keep; it != m_entries.end(); ++it)
    {
        out.push_back(std::move(it->packet));
    }
    m_entries.erase(keep, m_entries.end());
    return out;
}

std::vector<PacketEnvelope>
SendBuffer::TakeQueuedBefore(SimTime cutoff)
{
    std::vector<PacketEnvelope> out;
    while (!m_entries.empty() && m_entries.front().queuedAt <= cutoff)
    {
        out.push_back(std::move(m_entries.front().packet));
        m_entries.pop_front();
    }
    return out;
}

bool
SendBuffer::HasFor(NodeId dst) const
{
    return std::any_of(m_entries.begin(), m_entries.end(),
                       [dst](const Entry& e) { return e.packet.dst == dst; });
}

std::vector<NodeId>
SendBuffer::Destinations() const
{
    std::vector<NodeId> out;
    for (const auto& e : m_entries)
    {
        if (std::find(out.begin(), out.end(), e.packet.dst) == out.end())
        {
            out.push_back(e.packet.dst);
        }
    }
    return out;
}

void
SendBuffer::AppendIds(std::vector<PacketId>& out) const
{
    for (const auto& e : m_entries)
    {
        out.push_back(e.packet.id);
    }
}

// ---------------------------------------------------------------------------

RoutingAgent::RoutingAgent(NodeId self, AgentServices services)
    : m_self(self),
      m_services(std::move(services))
{
}

void
RoutingAgent::SendData(PacketEnvelope pkt)
{
    if (pkt.src != m_self)
    {
        throw std::invalid_argument("packet source " + std::to_string(pkt.src) +
                                    " does not match agent " + std::to_string(m_self));
    }
    if (pkt.hopsVisited.empty())
    {
        pkt.hopsVisited.push_back(m_self);
    }
    if (pkt.dst == m_self)
    {
        Deliver(pkt);
        return;
    }
    RouteOutput(std::move(pkt));
}

bool
RoutingAgent::Deliver(PacketEnvelope& pkt, std::span<const NodeId> headerRoute)
{
    pkt.deliveredAt = Now();
    bool first = m_services.metrics.OnDelivered(pkt, Now());
    if (first && m_services.onDelivered)
    {
        m_services.onDelivered(pkt, headerRoute);
    }
    return first;
}

void
RoutingAgent::Drop(const PacketEnvelope& pkt, DropReason reason)
{
    m_services.metrics.OnDropped(pkt.id, reason);
}

void
RoutingAgent::RecordHop(PacketEnvelope& pkt)
{
    if (std::find(pkt.hopsVisited.begin(), pkt.hopsVisited.end(), m_self) != pkt.hopsVisited.end())
    {
        m_services.metrics.OnLoopFlagged();
    }
    pkt.hopsVisited.push_back(m_self);
}

void
RoutingAgent::BroadcastControl(std::shared_ptr<const Payload> payload, std::uint32_t size)
{
    Frame f{m_self, FrameKind::Control, size, std::move(payload), Now(), 0};
    m_services.metrics.OnControlTx(size);
    m_services.channel.Broadcast(f);
}

bool
RoutingAgent::UnicastControl(std::shared_ptr<const Payload> payload, std::uint32_t size, NodeId to)
{
    Frame f{m_self, FrameKind::Control, size, std::move(payload), Now(), 0};
    m_services.metrics.OnControlTx(size);
    return m_services.channel.Unicast(f, to).has_value();
}

bool
RoutingAgent::UnicastData(const PacketEnvelope& pkt, std::shared_ptr<const Payload> payload,
                          std::uint32_t size, NodeId to, bool countForward)
{
    Frame f{m_self, FrameKind::Data, size, std::move(payload), Now(), pkt.id};
    m_services.metrics.OnDataTx();
    if (countForward && pkt.src != m_self)
    {
        m_services.metrics.OnForwarded();
    }
    return m_services.channel.Unicast(f, to).has_value();
}

} // namespace manet
