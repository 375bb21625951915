#include "manet/aodv.h"

#include <algorithm>

namespace manet::aodv {

AodvAgent::AodvAgent(NodeId self, AgentServices services, AodvConfig config)
    : RoutingAgent(self, std::move(services)),
      m_config(config),
      m_buffer(config.bufferCapacity)
{
}

void
AodvAgent::Start()
{
    if (!m_config.enableHello)
    {
        return;
    }
    // Desynchronise beacons across nodes.
    auto offset = MicroSeconds(
        static_cast<std::int64_t>(Jitter().UniformInt(0, m_config.helloInterval.Micros() - 1)));
    Sim().Schedule(offset, [this] { HelloTick(); }, Id(), "aodv-hello");
}

void
AodvAgent::HelloTick()
{
    if (Radio().IsActive(Id(), Now()))
    {
        auto hello = std::make_shared<Hello>();
        hello->node = Id();
        hello->seq = m_seq;
        BroadcastControl(std::move(hello), kHelloSize);
    }
    CheckNeighbors();
    std::erase_if(m_seen, [now = Now()](const auto& kv) { return kv.second <= now; });
    Sim().Schedule(m_config.helloInterval, [this] { HelloTick(); }, Id(), "aodv-hello");
}

void
AodvAgent::CheckNeighbors()
{
    const SimTime horizon = SimTime::FromMicros(m_config.helloInterval.Micros() * m_config.allowedHelloLoss);
    std::vector<NodeId> lost;
    for (const auto& [n, heard] : m_neighbors)
    {
        if (Now() - heard > horizon)
        {
            lost.push_back(n);
        }
    }
    for (NodeId n : lost)
    {
        HandleBrokenLink(n);
    }
}

std::vector<PacketId>
AodvAgent::HeldPacketIds() const
{
    std::vector<PacketId> ids;
    m_buffer.AppendIds(ids);
    return ids;
}

std::optional<AodvEntry>
AodvAgent::Route(NodeId dst) const
{
    auto it = m_table.find(dst);
    if (it == m_table.end())
    {
        return std::nullopt;
    }
    return it->second;
}

std::optional<AodvEntry>
AodvAgent::UsableRoute(NodeId dst) const
{
    auto r = Route(dst);
    if (r && r->Usable(Now()))
    {
        return r;
    }
    return std::nullopt;
}

std::uint32_t
AodvAgent::MaxRebroadcastsPerRequest() const
{
    std::uint32_t best = 0;
    for (const auto& [key, n] : m_rebroadcastCount)
    {
        best = std::max(best, n);
    }
    return best;
}

bool
AodvAgent::UpdateRoute(NodeId dst, NodeId nextHop, std::uint32_t hops, std::optional<std::uint32_t> seq,
                       SimTime lifetime)
{
    auto [it, inserted] = m_table.try_emplace(dst);
    AodvEntry& e = it->second;
    const bool wasUsable = !inserted && e.Usable(Now());
    bool adopt = !wasUsable || !e.validSeq;
    if (!adopt && seq)
    {
        adopt = *seq > e.dstSeq || (*seq == e.dstSeq && hops < e.hopCount);
    }
    if (!adopt && !seq)
    {
        adopt = hops < e.hopCount;
    }
    if (!adopt)
    {
        return false;
    }
    e.dst = dst;
    e.nextHop = nextHop;
    e.hopCount = hops;
    if (seq)
    {
        e.dstSeq = e.validSeq ? std::max(e.dstSeq, *seq) : *seq;
        e.validSeq = true;
    }
    e.valid = true;
    e.expiresAt = std::max(wasUsable ? e.expiresAt : SimTime(), Now() + lifetime);
    return true;
}

void
AodvAgent::TouchNeighborRoute(NodeId neighbor)
{
    m_neighbors[neighbor] = Now();
    AodvEntry& e = m_table[neighbor];
    if (!e.Usable(Now()) || e.hopCount > 1)
    {
        e.dst = neighbor;
        e.nextHop = neighbor;
        e.hopCount = 1;
        e.valid = true;
        e.expiresAt = Now() + m_config.activeRouteTimeout;
    }
}

void
AodvAgent::OnRouteAvailable(NodeId dst)
{
    if (!UsableRoute(dst))
    {
        return;
    }
    if (auto it = m_discoveries.find(dst); it != m_discoveries.end())
    {
        Sim().Cancel(it->second.timer);
        m_discoveries.erase(it);
    }
    FlushBuffered(dst);
}

void
AodvAgent::RefreshRoute(NodeId dst)
{
    auto it = m_table.find(dst);
    if (it != m_table.end() && it->second.Usable(Now()))
    {
        it->second.expiresAt = std::max(it->second.expiresAt, Now() + m_config.activeRouteTimeout);
    }
}

void
AodvAgent::RouteOutput(PacketEnvelope pkt)
{
    if (auto route = UsableRoute(pkt.dst))
    {
        RefreshRoute(pkt.dst);
        Forward(std::move(pkt), route->nextHop);
        return;
    }
    NodeId dst = pkt.dst;
    if (auto evicted = m_buffer.Push(std::move(pkt), Now()))
    {
        Drop(*evicted, DropReason::NoRoute);
    }
    if (!m_discoveries.contains(dst))
    {
        OriginateRreq(dst);
    }
}

void
AodvAgent::OriginateRreq(NodeId dst)
{
    ++m_seq;
    ++m_rreqCounter;
    auto rreq = std::make_shared<Rreq>();
    rreq->origin = Id();
    rreq->rreqId = m_rreqCounter;
    rreq->originSeq = m_seq;
    rreq->dst = dst;
    if (auto it = m_table.find(dst); it != m_table.end() && it->second.validSeq)
    {
        rreq->dstSeq = it->second.dstSeq;
    }
    rreq->hopCount = 0;
    m_seen[{Id(), m_rreqCounter}] = Now() + m_config.seenCacheLifetime;

    auto& d = m_discoveries[dst];
    ++d.attempts;
    d.timer = Sim().Schedule(m_config.rreqRetryTimeout, [this, dst] { OnRreqTimeout(dst); }, Id(),
                             "aodv-rreq-timeout");
    ++m_rreqOriginated;
    BroadcastControl(std::move(rreq), kRreqSize);
}

void
AodvAgent::OnRreqTimeout(NodeId dst)
{
    auto it = m_discoveries.find(dst);
    if (it == m_discoveries.end())
    {
        return;
    }
    if (UsableRoute(dst))
    {
        OnRouteAvailable(dst);
        return;
    }
    if (it->second.attempts >= m_config.rreqMaxAttempts)
    {
        m_discoveries.erase(it);
        for (const auto& pkt : m_buffer.TakeFor(dst))
        {
            Drop(pkt, DropReason::Unreachable);
        }
        return;
    }
    OriginateRreq(dst);
}

bool
AodvAgent::SeenRecently(const RequestKey& key)
{
    auto it = m_seen.find(key);
    return it != m_seen.end() && it->second > Now();
}

void
AodvAgent::Receive(const Frame& frame)
{
    const NodeId from = frame.sender;
    TouchNeighborRoute(from);

    if (auto* rreq = frame.As<Rreq>())
    {
        HandleRreq(*rreq, from);
    }
    else if (auto* rrep = frame.As<Rrep>())
    {
        HandleRrep(*rrep, from);
    }
    else if (auto* rerr = frame.As<Rerr>())
    {
        HandleRerr(*rerr, from);
    }
    else if (auto* hello = frame.As<Hello>())
    {
        HandleHello(*hello, from);
    }
    else if (auto* data = frame.As<DataPayload>())
    {
        HandleData(data->packet);
    }
}

void
AodvAgent::HandleHello(const Hello& hello, NodeId from)
{
    const SimTime lifetime =
        SimTime::FromMicros(m_config.helloInterval.Micros() * m_config.allowedHelloLoss);
    UpdateRoute(from, from, 1, hello.seq, lifetime);
    if (m_buffer.HasFor(from))
    {
        OnRouteAvailable(from);
    }
}

void
AodvAgent::HandleRreq(const Rreq& rreq, NodeId from)
{
    const RequestKey key{rreq.origin, rreq.rreqId};
    if (rreq.origin == Id() || SeenRecently(key))
    {
        return;
    }
    m_seen[key] = Now() + m_config.seenCacheLifetime;

    UpdateRoute(rreq.origin, from, rreq.hopCount + 1, rreq.originSeq, m_config.activeRouteTimeout);
    if (m_buffer.HasFor(rreq.origin))
    {
        OnRouteAvailable(rreq.origin);
    }

    if (rreq.dst == Id())
    {
        m_seq = std::max(m_seq, rreq.dstSeq.value_or(0));
        auto rrep = std::make_shared<Rrep>();
        rrep->dst = Id();
        rrep->dstSeq = m_seq;
        rrep->hopCount = 0;
        rrep->origin = rreq.origin;
        ++m_rrepSent;
        UnicastControl(std::move(rrep), kRrepSize, from);
        return;
    }

    // Intermediate reply only when freshness can be judged.
    if (rreq.dstSeq)
    {
        auto it = m_table.find(rreq.dst);
        if (it != m_table.end() && it->second.Usable(Now()) && it->second.validSeq &&
            it->second.dstSeq >= *rreq.dstSeq)
        {
            auto rrep = std::make_shared<Rrep>();
            rrep->dst = rreq.dst;
            rrep->dstSeq = it->second.dstSeq;
            rrep->hopCount = it->second.hopCount;
            rrep->origin = rreq.origin;
            ++m_rrepSent;
            UnicastControl(std::move(rrep), kRrepSize, from);
            return;
        }
    }

    if (rreq.hopCount + 1 >= m_config.ttl)
    {
        return;
    }
    auto fwd = std::make_shared<Rreq>(rreq);
    fwd->hopCount = rreq.hopCount + 1;
    ++m_rreqRebroadcasts;
    ++m_rebroadcastCount[key];
    BroadcastControl(std::move(fwd), kRreqSize);
}

void
AodvAgent::HandleRrep(const Rrep& rrep, NodeId from)
{
    if (rrep.dst == Id())
    {
        return;
    }
    UpdateRoute(rrep.dst, from, rrep.hopCount + 1, rrep.dstSeq, m_config.activeRouteTimeout);

    if (rrep.origin == Id())
    {
        OnRouteAvailable(rrep.dst);
        return;
    }

    auto reverse = UsableRoute(rrep.origin);
    if (!reverse)
    {
        ++m_rrepDropped;
        return;
    }
    RefreshRoute(rrep.origin);
    auto fwd = std::make_shared<Rrep>(rrep);
    fwd->hopCount = rrep.hopCount + 1;
    ++m_rrepSent;
    if (!UnicastControl(std::move(fwd), kRrepSize, reverse->nextHop))
    {
        HandleBrokenLink(reverse->nextHop);
    }
}

void
AodvAgent::FlushBuffered(NodeId dst)
{
    auto route = UsableRoute(dst);
    if (!route)
    {
        return;
    }
    for (auto& pkt : m_buffer.TakeFor(dst))
    {
        // A failed send below may tear the route down mid-flush.
        if (auto r = UsableRoute(dst))
        {
            Forward(std::move(pkt), r->nextHop);
        }
        else
        {
            RouteOutput(std::move(pkt));
        }
    }
}

void
AodvAgent::HandleData(const PacketEnvelope& incoming)
{
    PacketEnvelope pkt = incoming;
    RecordHop(pkt);
    if (pkt.dst == Id())
    {
        RefreshRoute(pkt.src);
        Deliver(pkt);
        return;
    }
    if (!HasHopBudget(pkt))
    {
        Drop(pkt, DropReason::Ttl);
        return;
    }
    auto route = UsableRoute(pkt.dst);
    if (!route)
    {
        Drop(pkt, DropReason::NoRoute);
        auto it = m_table.find(pkt.dst);
        std::uint32_t seq = it != m_table.end() ? it->second.dstSeq : 0;
        SendRerr({{pkt.dst, seq}});
        return;
    }
    RefreshRoute(pkt.dst);
    RefreshRoute(pkt.src);
    Forward(std::move(pkt), route->nextHop);
}

void
AodvAgent::Forward(PacketEnvelope pkt, NodeId nextHop)
{
    auto payload = std::make_shared<DataPayload>(pkt);
    if (!UnicastData(pkt, std::move(payload), pkt.size, nextHop))
    {
        Drop(pkt, DropReason::LinkBreak);
        HandleBrokenLink(nextHop);
    }
}

void
AodvAgent::HandleBrokenLink(NodeId neighbor)
{
    m_neighbors.erase(neighbor);
    std::vector<std::pair<NodeId, std::uint32_t>> unreachable;
    for (auto& [dst, e] : m_table)
    {
        if (e.valid && e.nextHop == neighbor)
        {
            e.valid = false;
            if (e.validSeq)
            {
                ++e.dstSeq;
            }
            unreachable.emplace_back(dst, e.dstSeq);
        }
    }
    if (!unreachable.empty())
    {
        SendRerr(std::move(unreachable));
    }
}

void
AodvAgent::SendRerr(std::vector<std::pair<NodeId, std::uint32_t>> unreachable)
{
    auto rerr = std::make_shared<Rerr>();
    std::uint32_t size = RerrSize(unreachable.size());
    rerr->unreachable = std::move(unreachable);
    ++m_rerrSent;
    BroadcastControl(std::move(rerr), size);
}

void
AodvAgent::HandleRerr(const Rerr& rerr, NodeId from)
{
    std::vector<std::pair<NodeId, std::uint32_t>> invalidated;
    for (const auto& [dst, seq] : rerr.unreachable)
    {
        auto it = m_table.find(dst);
        if (it == m_table.end() || !it->second.valid || it->second.nextHop != from)
        {
            continue;
        }
        AodvEntry& e = it->second;
        e.valid = false;
        e.dstSeq = std::max(e.dstSeq, seq);
        e.validSeq = true;
        invalidated.emplace_back(dst, e.dstSeq);
    }
    if (!invalidated.empty())
    {
        SendRerr(std::move(invalidated));
    }
}

} // namespace manet::aodv
