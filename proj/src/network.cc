#include "manet/network.h"

#include <algorithm>
#include <unordered_set>

namespace manet {

Network::Network(MobilitySource mobility, NetworkConfig config)
    : m_mobility(std::move(mobility)),
      m_config(config),
      m_lossRng(config.seed, StreamPurpose::Loss),
      m_jitterRng(config.seed, StreamPurpose::ProtocolJitter)
{
    m_channel = std::make_unique<Channel>(m_sim, m_mobility, m_config.channel, m_lossRng);

    m_config.aodv.bufferCapacity = m_config.bufferCapacity;
    m_config.aodv.ttl = m_config.ttl;
    m_config.dsdv.bufferCapacity = m_config.bufferCapacity;
    m_config.dsdv.ttl = m_config.ttl;
    m_config.dsr.bufferCapacity = m_config.bufferCapacity;
    m_config.dsr.ttl = m_config.ttl;

    DeliveryObserver forward = [this](const PacketEnvelope& pkt, std::span<const NodeId> route) {
        if (m_observer)
        {
            m_observer(pkt, route);
        }
    };

    m_agents.reserve(m_mobility.NodeCount());
    for (NodeId n = 0; n < m_mobility.NodeCount(); ++n)
    {
        AgentServices services{m_sim, *m_channel, m_metrics, m_jitterRng, forward};
        switch (m_config.protocol)
        {
        case Protocol::Aodv:
            m_agents.push_back(std::make_unique<aodv::AodvAgent>(n, services, m_config.aodv));
            break;
        case Protocol::Dsdv:
            m_agents.push_back(std::make_unique<dsdv::DsdvAgent>(n, services, m_config.dsdv));
            break;
        case Protocol::Dsr:
            m_agents.push_back(std::make_unique<dsr::DsrAgent>(n, services, m_config.dsr));
            break;
        }
    }

    m_channel->SetReceiveHandler([this](NodeId rx, const Frame& f) { m_agents[rx]->Receive(f); });
    if (m_config.protocol == Protocol::Dsr && m_config.dsr.promiscuous)
    {
        m_channel->SetOverhearHandler([this](NodeId rx, const Frame& f) { m_agents[rx]->Overhear(f); });
    }
}

void
Network::Start()
{
    if (m_started)
    {
        return;
    }
    m_started = true;
    for (auto& agent : m_agents)
    {
        agent->Start();
    }
}

PacketId
Network::Send(NodeId src, NodeId dst, std::uint32_t size)
{
    if (src >= NodeCount() || dst >= NodeCount())
    {
        throw std::out_of_range("flow endpoint outside the network");
    }
    PacketEnvelope pkt;
    pkt.id = m_nextPacketId++;
    pkt.src = src;
    pkt.dst = dst;
    pkt.size = size;
    pkt.createdAt = m_sim.Now();
    pkt.ttl = m_config.ttl;
    pkt.hopsVisited = {src};
    m_metrics.OnSent(pkt);
    m_agents[src]->SendData(std::move(pkt));
    return m_nextPacketId - 1;
}

void
Network::AddFlow(const CbrFlow& flow)
{
    flow.Validate();
    if (flow.src >= NodeCount() || flow.dst >= NodeCount())
    {
        throw std::out_of_range("flow endpoint outside the network");
    }
    if (flow.PacketCount() == 0)
    {
        return;
    }
    m_sim.ScheduleAt(flow.SendTime(0), [this, flow] { EmitFlowPacket(flow, 0); }, flow.src, "cbr");
}

void
Network::EmitFlowPacket(const CbrFlow& flow, std::uint64_t index)
{
    Send(flow.src, flow.dst, flow.packetSize);
    if (index + 1 < flow.PacketCount())
    {
        m_sim.ScheduleAt(flow.SendTime(index + 1), [this, flow, index] { EmitFlowPacket(flow, index + 1); },
                         flow.src, "cbr");
    }
}

void
Network::RunUntil(SimTime end)
{
    Start();
    m_sim.RunUntil(end);
}

std::vector<PacketId>
Network::UnaccountedPendingIds() const
{
    std::unordered_set<PacketId> held;
    for (const auto& agent : m_agents)
    {
        for (PacketId id : agent->HeldPacketIds())
        {
            held.insert(id);
        }
    }
    for (PacketId id : m_channel->InFlightDataIds())
    {
        held.insert(id);
    }
    std::vector<PacketId> missing;
    for (PacketId id : m_metrics.PendingIds())
    {
        if (!held.contains(id))
        {
            missing.push_back(id);
        }
    }
    std::sort(missing.begin(), missing.end());
    return missing;
}

} // namespace manet
