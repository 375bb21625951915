#pragma once

#include "manet/mobility.h"
#include "manet/packet.h"
#include "manet/rng.h"
#include "manet/simulator.h"

#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

namespace manet {

struct ChannelConfig
{
    double range = 250.0;        // m
    double dataRate = 2'000'000; // bit/s
    double lossProb = 0.0;
    double propDelay = 0.0; // s per meter

    /// Throws std::invalid_argument on out-of-range values.
    void Validate() const;
};

struct Delivery
{
    NodeId receiver = 0;
    SimTime at;
};

/**
 * Shared unit-disk medium. Two active nodes hear each other iff their
 * distance is at most the configured range (closed ball). Every frame that
 * reaches a receiver survives an independent loss draw and arrives after
 * its serialization time plus propagation delay. There is no contention.
 */
class Channel
{
  public:
    using Handler = std::function<void(NodeId receiver, const Frame& frame)>;

    Channel(Simulator& sim, const MobilitySource& mobility, ChannelConfig config, RngStream& loss);

    const ChannelConfig& Config() const { return m_config; }
    std::size_t NodeCount() const { return m_mobility.NodeCount(); }

    void SetReceiveHandler(Handler h) { m_receive = std::move(h); }

    /// Promiscuous tap: called for nodes that hear a unicast addressed to
    /// someone else. Leave unset to skip overhearing altogether.
    void SetOverhearHandler(Handler h) { m_overhear = std::move(h); }

    /// Active nodes within range of `node` at `t`, ascending ids. Empty when
    /// `node` itself is not active yet.
    std::vector<NodeId> Neighbors(NodeId node, SimTime t) const;

    bool InRange(NodeId a, NodeId b, SimTime t) const;

    /// False before a trace vehicle's first sample.
    bool IsActive(NodeId node, SimTime t) const { return m_mobility.IsActive(node, t); }

    SimTime TransmitDelay(std::uint32_t bytes, double meters) const;

    /// Sends to every neighbor at the current clock; returns the deliveries
    /// that were scheduled.
    std::vector<Delivery> Broadcast(const Frame& frame);

    /// Sends to `dst`; nullopt if out of range or lost. The sender learns the
    /// outcome immediately, standing in for a link-layer acknowledgement.
    std::optional<Delivery> Unicast(const Frame& frame, NodeId dst);

    /// Copies of data frames scheduled but not yet handed to a receiver.
    std::vector<PacketId> InFlightDataIds() const;

    std::uint64_t FramesSent() const { return m_framesSent; }

  private:
    const std::vector<Position>& PositionsAt(SimTime t) const;
    void ScheduleDelivery(const Frame& frame, NodeId receiver, SimTime at, bool overheard);

    Simulator& m_sim;
    const MobilitySource& m_mobility;
    ChannelConfig m_config;
    RngStream& m_loss;
    Handler m_receive;
    Handler m_overhear;
    std::unordered_map<PacketId, std::uint32_t> m_inFlight;
    std::uint64_t m_framesSent = 0;

    mutable SimTime m_cacheTime = SimTime::Max();
    mutable std::vector<Position> m_cache;
};

} // namespace manet
