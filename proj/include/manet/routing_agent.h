#pragma once

#include "manet/channel.h"
#include "manet/metrics.h"
#include "manet/packet.h"
#include "manet/rng.h"
#include "manet/simulator.h"

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace manet {

enum class Protocol : std::uint8_t
{
    Aodv,
    Dsdv,
    Dsr,
};

std::string_view ToString(Protocol p);
std::string_view ToUpperString(Protocol p);

/// Parses "aodv" / "dsdv" / "dsr" (any case). Throws std::invalid_argument.
Protocol ParseProtocol(std::string_view s);

/// Called on every first delivery with the packet and, for source-routed
/// protocols, the route carried in its header.
using DeliveryObserver = std::function<void(const PacketEnvelope&, std::span<const NodeId> headerRoute)>;

/// What an agent may touch: the clock, the medium, the run's counters and
/// its jitter stream. Everything is owned by the enclosing run.
struct AgentServices
{
    Simulator& sim;
    Channel& channel;
    MetricsAccumulator& metrics;
    RngStream& jitter;
    DeliveryObserver onDelivered;
};

/// FIFO of packets waiting for a route, drop-oldest when full.
class SendBuffer
{
  public:
    struct Entry
    {
        PacketEnvelope packet;
        SimTime queuedAt;
    };

    explicit SendBuffer(std::size_t capacity = 64) : m_capacity(capacity) {}

    /// Returns the evicted oldest packet when the buffer was full.
    std::optional<PacketEnvelope> Push(PacketEnvelope pkt, SimTime now);

    /// Removes and returns all packets for `dst` in arrival order.
    std::vector<PacketEnvelope> TakeFor(NodeId dst);

    /// Removes and returns every packet queued at or before `cutoff`.
    std::vector<PacketEnvelope> TakeQueuedBefore(SimTime cutoff);

    bool HasFor(NodeId dst) const;
    std::size_t Size() const { return m_entries.size(); }
    std::size_t Capacity() const { return m_capacity; }
    std::vector<NodeId> Destinations() const;
    void AppendIds(std::vector<PacketId>& out) const;

  private:
    std::size_t m_capacity;
    std::deque<Entry> m_entries;
};

/**
 * Common contract for all routing protocols.
 *
 * Proactive agents keep routes current from Start() on; reactive agents
 * look for a route only when SendData() finds none. Either way, agents talk
 * to the world only through the radio helpers below, which also maintain
 * the control/data counters.
 */
class RoutingAgent
{
  public:
    RoutingAgent(NodeId self, AgentServices services);
    virtual ~RoutingAgent() = default;

    RoutingAgent(const RoutingAgent&) = delete;
    RoutingAgent& operator=(const RoutingAgent&) = delete;

    NodeId Id() const { return m_self; }
    virtual Protocol Kind() const = 0;

    /// Arms periodic timers. Called once before the run starts.
    virtual void Start() {}

    /// Entry point for locally generated data (enqueue_or_send). The packet
    /// must originate here; packets for this node are delivered at once.
    void SendData(PacketEnvelope pkt);

    /// A frame addressed to this node (or broadcast) arrived.
    virtual void Receive(const Frame& frame) = 0;

    /// A unicast for someone else was overheard.
    virtual void Overhear(const Frame&) {}

    /// Every data packet this agent still holds (buffers, retransmit queues).
    virtual std::vector<PacketId> HeldPacketIds() const = 0;

  protected:
    /// Route a packet that originates here and is not for this node.
    virtual void RouteOutput(PacketEnvelope pkt) = 0;

    Simulator& Sim() { return m_services.sim; }
    SimTime Now() const { return m_services.sim.Now(); }
    Channel& Radio() { return m_services.channel; }
    MetricsAccumulator& Metrics() { return m_services.metrics; }
    RngStream& Jitter() { return m_services.jitter; }

    /// Marks delivery; returns false for a duplicate copy.
    bool Deliver(PacketEnvelope& pkt, std::span<const NodeId> headerRoute = {});
    void Drop(const PacketEnvelope& pkt, DropReason reason);

    /// Records arrival of a data packet at this node. Flags a loop if the
    /// node was visited before.
    void RecordHop(PacketEnvelope& pkt);

    /// True if the packet may take one more hop.
    static bool HasHopBudget(const PacketEnvelope& pkt) { return pkt.HopsTaken() < pkt.ttl; }

    void BroadcastControl(std::shared_ptr<const Payload> payload, std::uint32_t size);
    bool UnicastControl(std::shared_ptr<const Payload> payload, std::uint32_t size, NodeId to);

    /// Transmits a data frame carrying `pkt`. Counts a forward when this node
    /// is not the packet's source.
    bool UnicastData(const PacketEnvelope& pkt, std::shared_ptr<const Payload> payload,
                     std::uint32_t size, NodeId to, bool countForward = true);

  private:
    NodeId m_self;
    AgentServices m_services;
};

} // namespace manet
