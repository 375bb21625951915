#pragma once

#include "manet/aodv.h"
#include "manet/channel.h"
#include "manet/dsdv.h"
#include "manet/dsr.h"
#include "manet/metrics.h"
#include "manet/mobility.h"
#include "manet/routing_agent.h"
#include "manet/simulator.h"
#include "manet/traffic.h"

#include <memory>
#include <vector>

namespace manet {

struct NetworkConfig
{
    Protocol protocol = Protocol::Aodv;
    std::uint64_t seed = 1;
    ChannelConfig channel;
    std::size_t bufferCapacity = 64;
    std::uint32_t ttl = kDefaultTtl;
    aodv::AodvConfig aodv;
    dsdv::DsdvConfig dsdv;
    dsr::DsrConfig dsr;
};

/**
 * One simulated network: clock, medium, one agent per node and the run's
 * counters. Traffic is injected with Send() or AddFlow().
 */
class Network
{
  public:
    Network(MobilitySource mobility, NetworkConfig config);

    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

    Simulator& Sim() { return m_sim; }
    const Simulator& Sim() const { return m_sim; }
    Channel& Radio() { return *m_channel; }
    MetricsAccumulator& Metrics() { return m_metrics; }
    const MetricsAccumulator& Metrics() const { return m_metrics; }
    const MobilitySource& Mobility() const { return m_mobility; }
    const NetworkConfig& Config() const { return m_config; }
    std::size_t NodeCount() const { return m_agents.size(); }

    RoutingAgent& Agent(NodeId n) { return *m_agents.at(n); }

    template <typename T>
    T& AgentAs(NodeId n)
    {
        return dynamic_cast<T&>(*m_agents.at(n));
    }

    /// Called for every first delivery, after the metrics are updated.
    void SetDeliveryObserver(DeliveryObserver obs) { m_observer = std::move(obs); }

    /// Arms every agent's timers. Implicitly done by the first RunUntil().
    void Start();

    /// Creates a data packet at the current clock and hands it to `src`.
    PacketId Send(NodeId src, NodeId dst, std::uint32_t size = 64);

    /// Schedules every packet of a CBR flow.
    void AddFlow(const CbrFlow& flow);

    void RunUntil(SimTime end);

    /// Packets the metrics consider pending but nobody holds: should be empty.
    std::vector<PacketId> UnaccountedPendingIds() const;

  private:
    void EmitFlowPacket(const CbrFlow& flow, std::uint64_t index);

    MobilitySource m_mobility;
    NetworkConfig m_config;
    Simulator m_sim;
    RngStream m_lossRng;
    RngStream m_jitterRng;
    std::unique_ptr<Channel> m_channel;
    MetricsAccumulator m_metrics;
    std::vector<std::unique_ptr<RoutingAgent>> m_agents;
    DeliveryObserver m_observer;
    PacketId m_nextPacketId = 1;
    bool m_started = false;
};

} // namespace manet
