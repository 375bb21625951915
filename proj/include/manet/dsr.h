#pragma once

#include "manet/routing_agent.h"

#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

namespace manet::dsr {

/// Ordered node list from source to destination inclusive.
using SourceRoute = std::vector<NodeId>;

/// True if the route is nonempty and repeats no node.
bool IsSimple(const SourceRoute& route);

struct DsrConfig
{
    std::size_t routesPerDestination = 4;
    SimTime cacheLifetime = Seconds(30);
    SimTime ackTimeout = MilliSeconds(500);
    std::uint32_t maxRetransmits = 3;
    SimTime discoveryTimeout = Seconds(2);
    std::uint32_t discoveryAttempts = 3;
    SimTime requestSeenLifetime = Seconds(3);
    std::size_t bufferCapacity = 64;
    std::uint32_t ttl = kDefaultTtl;
    bool promiscuous = true;
};

inline constexpr std::uint32_t kAckSize = 8;
inline constexpr std::uint32_t RreqSize(std::size_t recordLength)
{
    return 8 + 4 * static_cast<std::uint32_t>(recordLength);
}
inline constexpr std::uint32_t RrepSize(std::size_t routeLength)
{
    return 8 + 4 * static_cast<std::uint32_t>(routeLength);
}
inline constexpr std::uint32_t RerrSize(std::size_t pathLength)
{
    return 16 + 4 * static_cast<std::uint32_t>(pathLength);
}
inline constexpr std::uint32_t DataFrameSize(std::uint32_t payload, std::size_t routeLength)
{
    return payload + 8 + 4 * static_cast<std::uint32_t>(routeLength);
}

/**
 * Per-node store of source routes starting at the owner. Each destination
 * keeps at most `capacity` routes, shortest first; routes expire a fixed
 * time after they were last learned.
 */
class RouteCache
{
  public:
    RouteCache(NodeId owner, std::size_t capacity, SimTime lifetime);

    /// Stores `route` (which must start at the owner) and every prefix of
    /// it as a route to the intermediate node. Returns false when the route
    /// is malformed and was ignored.
    bool Add(const SourceRoute& route, SimTime now);

    /// A shortest live route to `dst`.
    std::optional<SourceRoute> Lookup(NodeId dst, SimTime now) const;

    /// Shortest live route to `dst` that avoids every node in `avoid`.
    std::optional<SourceRoute> LookupAvoiding(NodeId dst, SimTime now, const std::set<NodeId>& avoid) const;

    /// Drops every route using the link a-b in either direction.
    std::size_t RemoveLink(NodeId a, NodeId b);

    std::vector<SourceRoute> Routes(NodeId dst, SimTime now) const;
    std::vector<NodeId> Destinations() const;
    std::size_t Size() const;

  private:
    struct Cached
    {
        SourceRoute route;
        SimTime learnedAt;
    };

    void Insert(SourceRoute route, SimTime now);

    NodeId m_owner;
    std::size_t m_capacity;
    SimTime m_lifetime;
    std::map<NodeId, std::vector<Cached>> m_routes;
};

struct DsrRreq : Payload
{
    NodeId origin = 0;
    std::uint32_t requestId = 0;
    NodeId target = 0;
    SourceRoute routeRecord;
};

struct DsrRrep : Payload
{
    SourceRoute route;      // origin .. target
    std::vector<NodeId> path; // replier .. origin, the way the reply travels
    std::size_t index = 0;    // position of the receiving node in path
};

struct DsrRerr : Payload
{
    NodeId brokenFrom = 0;
    NodeId brokenTo = 0;
    std::vector<NodeId> path; // reporter .. packet source
    std::size_t index = 0;
};

struct DsrAck : Payload
{
    PacketId packetId = 0;
    std::uint32_t salvage = 0;
};

/// Data frame payload: the packet plus its source-route header.
struct DsrData : DataPayload
{
    DsrData(PacketEnvelope p, SourceRoute r, std::size_t idx, std::uint32_t s)
        : DataPayload(std::move(p)),
          route(std::move(r)),
          index(idx),
          salvage(s)
    {
    }

    SourceRoute route;
    std::size_t index = 0; // position of the receiving node in route
    std::uint32_t salvage = 0;
};

/**
 * Dynamic source routing agent.
 *
 * Discovery floods a request that accumulates the traversed nodes; the
 * target answers the first copy with the complete route, which travels back
 * along the reversed record. Data packets carry their full route. Each hop
 * waits for an explicit acknowledgement from the next one and retransmits a
 * bounded number of times before declaring the link dead, reporting it to
 * the source and trying an alternate cached route.
 */
class DsrAgent : public RoutingAgent
{
  public:
    DsrAgent(NodeId self, AgentServices services, DsrConfig config = {});

    Protocol Kind() const override { return Protocol::Dsr; }
    void Receive(const Frame& frame) override;
    void Overhear(const Frame& frame) override;
    std::vector<PacketId> HeldPacketIds() const override;

    const RouteCache& Cache() const { return m_cache; }
    RouteCache& MutableCache() { return m_cache; }
    bool DiscoveryPending(NodeId dst) const { return m_discoveries.contains(dst); }
    std::size_t BufferedCount() const { return m_buffer.Size(); }
    std::size_t AwaitingAck() const { return m_maintenance.size(); }

    std::uint64_t RreqOriginated() const { return m_rreqOriginated; }
    std::uint64_t RreqForwarded() const { return m_rreqForwarded; }
    std::uint64_t RrepSent() const { return m_rrepSent; }
    std::uint64_t RerrSent() const { return m_rerrSent; }
    std::uint64_t Retransmissions() const { return m_retransmissions; }
    std::uint64_t Salvaged() const { return m_salvaged; }
    std::uint64_t CorruptHeaders() const { return m_corrupt; }

  protected:
    void RouteOutput(PacketEnvelope pkt) override;

  private:
    struct Discovery
    {
        std::uint32_t attempts = 0;
        EventId timer;
    };

    struct AwaitingAckEntry
    {
        PacketEnvelope packet;
        SourceRoute route;
        std::size_t index = 0; // position of this node in route
        std::uint32_t salvage = 0;
        std::uint32_t retransmits = 0;
        EventId timer;
    };

    void Discover(NodeId dst);
    void OnDiscoveryTimeout(NodeId dst);
    void HandleRreq(const DsrRreq& rreq);
    void HandleRrep(const DsrRrep& rrep);
    void HandleRerr(const DsrRerr& rerr);
    void HandleAck(const DsrAck& ack, NodeId from);
    void HandleData(const DsrData& data, NodeId from);
    void SendReply(const SourceRoute& route, std::vector<NodeId> path);
    void SendRouteError(NodeId brokenFrom, NodeId brokenTo, const SourceRoute& route, std::size_t index);
    void SendAlongRoute(PacketEnvelope pkt, SourceRoute route, std::size_t index, std::uint32_t salvage,
                        bool countForward);
    void Transmit(AwaitingAckEntry& entry, bool countForward);
    using MaintenanceKey = std::pair<PacketId, std::uint32_t>; // (packet, salvage)

    void OnAckTimeout(MaintenanceKey key);
    void Salvage(AwaitingAckEntry entry);
    void FlushBuffered(NodeId dst);
    void LearnSuffix(const SourceRoute& route);

    DsrConfig m_config;
    RouteCache m_cache;
    SendBuffer m_buffer;
    std::uint32_t m_requestCounter = 0;
    std::map<std::pair<NodeId, std::uint32_t>, SimTime> m_seenRequests;
    std::map<NodeId, Discovery> m_discoveries;
    std::map<MaintenanceKey, AwaitingAckEntry> m_maintenance;
    std::set<std::tuple<PacketId, std::uint32_t, NodeId>> m_seenData;

    std::uint64_t m_rreqOriginated = 0;
    std::uint64_t m_rreqForwarded = 0;
    std::uint64_t m_rrepSent = 0;
    std::uint64_t m_rerrSent = 0;
    std::uint64_t m_retransmissions = 0;
    std::uint64_t m_salvaged = 0;
    std::uint64_t m_corrupt = 0;
};

} // namespace manet::dsr
