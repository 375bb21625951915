#pragma once

#include "manet/routing_agent.h"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace manet::aodv {

struct AodvConfig
{
    SimTime helloInterval = Seconds(1);
    std::uint32_t allowedHelloLoss = 3;
    SimTime activeRouteTimeout = Seconds(10);
    SimTime rreqRetryTimeout = Seconds(2);
    std::uint32_t rreqMaxAttempts = 3;
    SimTime seenCacheLifetime = Seconds(3);
    std::size_t bufferCapacity = 64;
    std::uint32_t ttl = kDefaultTtl;
    bool enableHello = true;
};

inline constexpr std::uint32_t kRreqSize = 24;
inline constexpr std::uint32_t kRrepSize = 20;
inline constexpr std::uint32_t kHelloSize = 12;
inline constexpr std::uint32_t RerrSize(std::size_t destinations)
{
    return 12 + 4 * static_cast<std::uint32_t>(destinations);
}

/// Hop-by-hop routing state for one destination.
struct AodvEntry
{
    NodeId dst = 0;
    NodeId nextHop = 0;
    std::uint32_t hopCount = 0;
    std::uint32_t dstSeq = 0;
    bool validSeq = false;
    bool valid = false;
    SimTime expiresAt;

    bool Usable(SimTime now) const { return valid && now < expiresAt; }
};

struct Rreq : Payload
{
    NodeId origin = 0;
    std::uint32_t rreqId = 0;
    std::uint32_t originSeq = 0;
    NodeId dst = 0;
    std::optional<std::uint32_t> dstSeq;
    std::uint32_t hopCount = 0;
};

struct Rrep : Payload
{
    NodeId dst = 0;
    std::uint32_t dstSeq = 0;
    std::uint32_t hopCount = 0; // hops from the replier to dst
    NodeId origin = 0;
};

struct Rerr : Payload
{
    std::vector<std::pair<NodeId, std::uint32_t>> unreachable; // (dst, seq)
};

struct Hello : Payload
{
    NodeId node = 0;
    std::uint32_t seq = 0;
};

/**
 * Ad hoc on-demand distance vector agent.
 *
 * Discovery floods a RREQ network-wide (no expanding ring); each node
 * rebroadcasts a given request at most once and remembers the reverse hop.
 * The destination, or an intermediate node holding a route at least as fresh
 * as the one requested, unicasts a RREP back along the reverse path. HELLO
 * beacons keep neighbor liveness; a failed unicast or silent neighbor
 * invalidates routes through it and triggers a RERR.
 */
class AodvAgent : public RoutingAgent
{
  public:
    AodvAgent(NodeId self, AgentServices services, AodvConfig config = {});

    Protocol Kind() const override { return Protocol::Aodv; }
    void Start() override;
    void Receive(const Frame& frame) override;
    std::vector<PacketId> HeldPacketIds() const override;

    std::optional<AodvEntry> Route(NodeId dst) const;
    std::optional<AodvEntry> UsableRoute(NodeId dst) const;
    bool DiscoveryPending(NodeId dst) const { return m_discoveries.contains(dst); }
    std::size_t BufferedCount() const { return m_buffer.Size(); }
    std::uint32_t OwnSeq() const { return m_seq; }

    std::uint64_t RreqOriginated() const { return m_rreqOriginated; }
    std::uint64_t RreqRebroadcasts() const { return m_rreqRebroadcasts; }
    std::uint64_t RrepSent() const { return m_rrepSent; }
    std::uint64_t RerrSent() const { return m_rerrSent; }
    std::uint64_t RrepDroppedNoReverse() const { return m_rrepDropped; }
    /// Largest number of rebroadcasts this node made for a single request.
    std::uint32_t MaxRebroadcastsPerRequest() const;

    /// Declares the link to `neighbor` broken (handle_broken_link).
    void HandleBrokenLink(NodeId neighbor);

  protected:
    void RouteOutput(PacketEnvelope pkt) override;

  private:
    using RequestKey = std::pair<NodeId, std::uint32_t>;

    struct Discovery
    {
        std::uint32_t attempts = 0;
        EventId timer;
    };

    void HelloTick();
    void CheckNeighbors();
    void OriginateRreq(NodeId dst);
    void OnRreqTimeout(NodeId dst);
    void HandleRreq(const Rreq& rreq, NodeId from);
    void HandleRrep(const Rrep& rrep, NodeId from);
    void HandleRerr(const Rerr& rerr, NodeId from);
    void HandleHello(const Hello& hello, NodeId from);
    void HandleData(const PacketEnvelope& pkt);
    void Forward(PacketEnvelope pkt, NodeId nextHop);
    void SendRerr(std::vector<std::pair<NodeId, std::uint32_t>> unreachable);
    void TouchNeighborRoute(NodeId neighbor);
    void RefreshRoute(NodeId dst);
    bool UpdateRoute(NodeId dst, NodeId nextHop, std::uint32_t hops, std::optional<std::uint32_t> seq,
                     SimTime lifetime);
    void FlushBuffered(NodeId dst);
    void OnRouteAvailable(NodeId dst);
    bool SeenRecently(const RequestKey& key);

    AodvConfig m_config;
    std::uint32_t m_seq = 0;
    std::uint32_t m_rreqCounter = 0;
    std::map<NodeId, AodvEntry> m_table;
    std::map<RequestKey, SimTime> m_seen;
    std::map<RequestKey, std::uint32_t> m_rebroadcastCount;
    std::map<NodeId, Discovery> m_discoveries;
    std::map<NodeId, SimTime> m_neighbors;
    SendBuffer m_buffer;

    std::uint64_t m_rreqOriginated = 0;
    std::uint64_t m_rreqRebroadcasts = 0;
    std::uint64_t m_rrepSent = 0;
    std::uint64_t m_rerrSent = 0;
    std::uint64_t m_rrepDropped = 0;
};

} // namespace manet::aodv
