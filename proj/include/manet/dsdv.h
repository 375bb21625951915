#pragma once

#include "manet/routing_agent.h"

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace manet::dsdv {

inline constexpr std::uint32_t kInfinity = std::numeric_limits<std::uint32_t>::max();

struct DsdvConfig
{
    SimTime periodicInterval = Seconds(15);
    SimTime periodicJitter = Seconds(1);
    SimTime settlingTime = Seconds(5);
    std::uint32_t missedPeriods = 3;
    SimTime bufferTimeout = Seconds(5);
    std::size_t bufferCapacity = 64;
    std::uint32_t ttl = kDefaultTtl;
};

inline constexpr std::uint32_t UpdateSize(std::size_t entries)
{
    return 12 + 12 * static_cast<std::uint32_t>(entries);
}

struct DsdvEntry
{
    NodeId dst = 0;
    NodeId nextHop = 0;
    std::uint32_t hops = kInfinity;
    std::uint64_t seqNo = 0;
    SimTime installedAt;
    std::optional<SimTime> settlingDeadline; // set while a change awaits advertisement

    bool Valid() const { return hops != kInfinity; }
};

struct Advertised
{
    NodeId dst = 0;
    std::uint32_t hops = kInfinity;
    std::uint64_t seqNo = 0;
};

struct DsdvUpdate : Payload
{
    enum class Kind
    {
        FullDump,
        Incremental,
    };

    Kind kind = Kind::FullDump;
    NodeId sender = 0;
    std::vector<Advertised> entries;
};

/**
 * Destination-sequenced distance vector agent.
 *
 * Every node advertises its whole table periodically with a fresh even
 * sequence number for itself; metric changes go out as incrementals once the
 * settling time has passed. A newer-sequence advert that is worse than the
 * current route and comes from a different neighbor is parked instead of
 * adopted, so the table does not flap to a longer path when the fresh
 * number happens to arrive that way first. It replaces the route as soon as
 * the current one breaks.
 */
class DsdvAgent : public RoutingAgent
{
  public:
    DsdvAgent(NodeId self, AgentServices services, DsdvConfig config = {});

    Protocol Kind() const override { return Protocol::Dsdv; }
    void Start() override;
    void Receive(const Frame& frame) override;
    std::vector<PacketId> HeldPacketIds() const override;

    const std::map<NodeId, DsdvEntry>& Table() const { return m_table; }
    std::optional<DsdvEntry> Route(NodeId dst) const;
    std::uint64_t OwnSeq() const { return m_table.at(Id()).seqNo; }
    std::size_t BufferedCount() const { return m_buffer.Size(); }

    std::uint64_t PeriodicUpdates() const { return m_periodic; }
    std::uint64_t IncrementalUpdates() const { return m_incremental; }
    std::uint64_t BogusSelfAdverts() const { return m_bogusSelf; }

    /// Applies one received update (merge_update).
    void MergeUpdate(const DsdvUpdate& upd, NodeId from);

    /// Invalidates every route through `neighbor` (handle_link_break).
    void HandleLinkBreak(NodeId neighbor);

    /// Sends a full dump now, bumping the own sequence number.
    void PeriodicUpdate();

  protected:
    void RouteOutput(PacketEnvelope pkt) override;

  private:
    struct Candidate
    {
        NodeId nextHop = 0;
        std::uint32_t hops = kInfinity;
        std::uint64_t seqNo = 0;
    };

    void PeriodicTick();
    void CheckNeighbors();
    void Install(DsdvEntry& e, const Candidate& c, bool metricChange);
    void MarkChanged(DsdvEntry& e);
    void ScheduleIncremental(SimTime delay);
    void SendIncremental();
    void HandleData(const PacketEnvelope& pkt);
    void Forward(PacketEnvelope pkt, NodeId nextHop);
    void FlushBuffered(NodeId dst);
    void ExpireBuffered();

    DsdvConfig m_config;
    std::map<NodeId, DsdvEntry> m_table;
    std::map<NodeId, Candidate> m_parked;
    std::map<NodeId, SimTime> m_lastHeard;
    std::set<NodeId> m_changed;
    EventId m_incrementalTimer;
    SendBuffer m_buffer;

    std::uint64_t m_periodic = 0;
    std::uint64_t m_incremental = 0;
    std::uint64_t m_bogusSelf = 0;
};

} // namespace manet::dsdv
