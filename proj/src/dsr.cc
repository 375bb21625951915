#include "manet/dsr.h"

#include <algorithm>

namespace manet::dsr {

DsrAgent::DsrAgent(NodeId self, AgentServices services, DsrConfig config)
    : RoutingAgent(self, std::move(services)),
      m_config(config),
      m_cache(self, config.routesPerDestination, config.cacheLifetime),
      m_buffer(config.bufferCapacity)
{
}

std::vector<PacketId>
DsrAgent::HeldPacketIds() const
{
    std::vector<PacketId> ids;
    m_buffer.AppendIds(ids);
    for (const auto& [key, entry] : m_maintenance)
    {
        ids.push_back(entry.packet.id);
    }
    return ids;
}

void
DsrAgent::RouteOutput(PacketEnvelope pkt)
{
    if (auto route = m_cache.Lookup(pkt.dst, Now()))
    {
        SendAlongRoute(std::move(pkt), std::move(*route), 0, 0, true);
        return;
    }
    NodeId dst = pkt.dst;
    if (auto evicted = m_buffer.Push(std::move(pkt), Now()))
    {
        Drop(*evicted, DropReason::NoRoute);
    }
    if (!m_discoveries.contains(dst))
    {
        Discover(dst);
    }
}

void
DsrAgent::Discover(NodeId dst)
{
    auto rreq = std::make_shared<DsrRreq>();
    rreq->origin = Id();
    rreq->requestId = ++m_requestCounter;
    rreq->target = dst;
    rreq->routeRecord = {Id()};
    m_seenRequests[{Id(), rreq->requestId}] = Now() + m_config.requestSeenLifetime;

    auto& d = m_discoveries[dst];
    ++d.attempts;
    d.timer = Sim().Schedule(m_config.discoveryTimeout, [this, dst] { OnDiscoveryTimeout(dst); }, Id(),
                             "dsr-discovery-timeout");
    ++m_rreqOriginated;
    BroadcastControl(std::move(rreq), RreqSize(1));
}

void
DsrAgent::OnDiscoveryTimeout(NodeId dst)
{
    auto it = m_discoveries.find(dst);
    if (it == m_discoveries.end())
    {
        return;
    }
    if (m_cache.Lookup(dst, Now()))
    {
        m_discoveries.erase(it);
        FlushBuffered(dst);
        return;
    }
    if (it->second.attempts >= m_config.discoveryAttempts)
    {
        m_discoveries.erase(it);
        for (const auto& pkt : m_buffer.TakeFor(dst))
        {
            Drop(pkt, DropReason::Unreachable);
        }
        return;
    }
    Discover(dst);
}

void
DsrAgent::FlushBuffered(NodeId dst)
{
    if (auto it = m_discoveries.find(dst); it != m_discoveries.end())
    {
        Sim().Cancel(it->second.timer);
        m_discoveries.erase(it);
    }
    for (auto& pkt : m_buffer.TakeFor(dst))
    {
        RouteOutput(std::move(pkt));
    }
}

void
DsrAgent::Receive(const Frame& frame)
{
    if (auto* data = frame.As<DsrData>())
    {
        HandleData(*data, frame.sender);
    }
    else if (auto* ack = frame.As<DsrAck>())
    {
        HandleAck(*ack, frame.sender);
    }
    else if (auto* rreq = frame.As<DsrRreq>())
    {
        HandleRreq(*rreq);
    }
    else if (auto* rrep = frame.As<DsrRrep>())
    {
        HandleRrep(*rrep);
    }
    else if (auto* rerr = frame.As<DsrRerr>())
    {
        HandleRerr(*rerr);
    }
}

void
DsrAgent::Overhear(const Frame& frame)
{
    if (!m_config.promiscuous)
    {
        return;
    }
    if (auto* data = frame.As<DsrData>())
    {
        LearnSuffix(data->route);
    }
    else if (auto* rrep = frame.As<DsrRrep>())
    {
        LearnSuffix(rrep->route);
    }
}

void
DsrAgent::LearnSuffix(const SourceRoute& route)
{
    auto self = std::find(route.begin(), route.end(), Id());
    if (self == route.end() || self + 1 == route.end())
    {
        return;
    }
    m_cache.Add(SourceRoute(self, route.end()), Now());
}

void
DsrAgent::HandleRreq(const DsrRreq& rreq)
{
    const std::pair<NodeId, std::uint32_t> key{rreq.origin, rreq.requestId};
    if (auto it = m_seenRequests.find(key); it != m_seenRequests.end() && it->second > Now())
    {
        return;
    }
    if (m_seenRequests.size() > 4096)
    {
        std::erase_if(m_seenRequests, [now = Now()](const auto& kv) { return kv.second <= now; });
    }
    m_seenRequests[key] = Now() + m_config.requestSeenLifetime;
    if (std::find(rreq.routeRecord.begin(), rreq.routeRecord.end(), Id()) != rreq.routeRecord.end())
    {
        return;
    }

    SourceRoute record = rreq.routeRecord;
    record.push_back(Id());
    std::vector<NodeId> back(record.rbegin(), record.rend());

    if (rreq.target == Id())
    {
        m_cache.Add(back, Now());
        SendReply(record, std::move(back));
        return;
    }

    if (auto cached = m_cache.Lookup(rreq.target, Now()))
    {
        SourceRoute full = record;
        full.insert(full.end(), cached->begin() + 1, cached->end());
        if (IsSimple(full))
        {
            SendReply(full, std::move(back));
            return;
        }
    }

    if (record.size() - 1 >= m_config.ttl)
    {
        return;
    }
    auto fwd = std::make_shared<DsrRreq>(rreq);
    fwd->routeRecord = std::move(record);
    const std::uint32_t size = RreqSize(fwd->routeRecord.size());
    ++m_rreqForwarded;
    BroadcastControl(std::move(fwd), size);
}

void
DsrAgent::SendReply(const SourceRoute& route, std::vector<NodeId> path)
{
    auto rrep = std::make_shared<DsrRrep>();
    rrep->route = route;
    rrep->path = std::move(path);
    rrep->index = 1;
    const NodeId next = rrep->path[1];
    ++m_rrepSent;
    UnicastControl(std::move(rrep), RrepSize(route.size()), next);
}

void
DsrAgent::HandleRrep(const DsrRrep& rrep)
{
    if (rrep.index >= rrep.path.size() || rrep.path[rrep.index] != Id())
    {
        return;
    }
    if (rrep.index + 1 == rrep.path.size())
    {
        if (m_cache.Add(rrep.route, Now()))
        {
            FlushBuffered(rrep.route.back());
        }
        return;
    }
    LearnSuffix(rrep.route);
    auto fwd = std::make_shared<DsrRrep>(rrep);
    fwd->index = rrep.index + 1;
    const NodeId next = fwd->path[fwd->index];
    ++m_rrepSent;
    UnicastControl(std::move(fwd), RrepSize(rrep.route.size()), next);
}

void
DsrAgent::SendRouteError(NodeId brokenFrom, NodeId brokenTo, const SourceRoute& route, std::size_t index)
{
    if (index == 0)
    {
        return;
    }
    auto rerr = std::make_shared<DsrRerr>();
    rerr->brokenFrom = brokenFrom;
    rerr->brokenTo = brokenTo;
    rerr->path.assign(route.rend() - static_cast<std::ptrdiff_t>(index) - 1, route.rend());
    rerr->index = 1;
    const NodeId next = rerr->path[1];
    const std::uint32_t size = RerrSize(rerr->path.size());
    ++m_rerrSent;
    UnicastControl(std::move(rerr), size, next);
}

void
DsrAgent::HandleRerr(const DsrRerr& rerr)
{
    m_cache.RemoveLink(rerr.brokenFrom, rerr.brokenTo);
    if (rerr.index >= rerr.path.size() || rerr.path[rerr.index] != Id() || rerr.index + 1 == rerr.path.size())
    {
        return;
    }
    auto fwd = std::make_shared<DsrRerr>(rerr);
    fwd->index = rerr.index + 1;
    const NodeId next = fwd->path[fwd->index];
    const std::uint32_t size = RerrSize(fwd->path.size());
    ++m_rerrSent;
    UnicastControl(std::move(fwd), size, next);
}

void
DsrAgent::HandleData(const DsrData& data, NodeId from)
{
    const SourceRoute& route = data.route;
    const std::size_t pos = data.index;
    if (pos == 0 || pos >= route.size() || route[pos] != Id() || route[pos - 1] != from)
    {
        ++m_corrupt;
        Drop(data.packet, DropReason::CorruptHeader);
        return;
    }

    auto ack = std::make_shared<DsrAck>();
    ack->packetId = data.packet.id;
    ack->salvage = data.salvage;
    UnicastControl(std::move(ack), kAckSize, from);

    if (!m_seenData.insert({data.packet.id, data.salvage, from}).second)
    {
        return;
    }

    PacketEnvelope pkt = data.packet;
    RecordHop(pkt);
    if (pkt.dst == Id())
    {
        Deliver(pkt, route);
        return;
    }
    if (!HasHopBudget(pkt))
    {
        Drop(pkt, DropReason::Ttl);
        return;
    }
    LearnSuffix(route);
    SendAlongRoute(std::move(pkt), route, pos, data.salvage, true);
}

void
DsrAgent::SendAlongRoute(PacketEnvelope pkt, SourceRoute route, std::size_t index, std::uint32_t salvage,
                         bool countForward)
{
    const MaintenanceKey key{pkt.id, salvage};
    AwaitingAckEntry& entry = m_maintenance[key];
    entry.packet = std::move(pkt);
    entry.route = std::move(route);
    entry.index = index;
    entry.salvage = salvage;
    entry.retransmits = 0;
    Transmit(entry, countForward);
}

void
DsrAgent::Transmit(AwaitingAckEntry& entry, bool countForward)
{
    const NodeId next = entry.route[entry.index + 1];
    auto payload = std::make_shared<DsrData>(entry.packet, entry.route, entry.index + 1, entry.salvage);
    UnicastData(entry.packet, std::move(payload), DataFrameSize(entry.packet.size, entry.route.size()), next,
                countForward);
    const MaintenanceKey key{entry.packet.id, entry.salvage};
    entry.timer = Sim().Schedule(m_config.ackTimeout, [this, key] { OnAckTimeout(key); }, Id(),
                                 "dsr-ack-timeout");
}

void
DsrAgent::HandleAck(const DsrAck& ack, NodeId from)
{
    auto it = m_maintenance.find({ack.packetId, ack.salvage});
    if (it == m_maintenance.end() || it->second.route[it->second.index + 1] != from)
    {
        return;
    }
    Sim().Cancel(it->second.timer);
    m_maintenance.erase(it);
}

void
DsrAgent::OnAckTimeout(MaintenanceKey key)
{
    auto it = m_maintenance.find(key);
    if (it == m_maintenance.end())
    {
        return;
    }
    AwaitingAckEntry& entry = it->second;
    if (entry.retransmits < m_config.maxRetransmits)
    {
        ++entry.retransmits;
        ++m_retransmissions;
        Transmit(entry, false);
        return;
    }
    // The link is dead for every packet queued behind it, not just this one.
    const NodeId next = entry.route[entry.index + 1];
    m_cache.RemoveLink(Id(), next);
    std::vector<AwaitingAckEntry> stranded;
    for (auto m = m_maintenance.begin(); m != m_maintenance.end();)
    {
        if (m->second.route[m->second.index + 1] == next)
        {
            Sim().Cancel(m->second.timer);
            stranded.push_back(std::move(m->second));
            m = m_maintenance.erase(m);
        }
        else
        {
            ++m;
        }
    }
    std::set<NodeId> notified;
    for (AwaitingAckEntry& dead : stranded)
    {
        if (notified.insert(dead.route.front()).second)
        {
            SendRouteError(Id(), next, dead.route, dead.index);
        }
        Salvage(std::move(dead));
    }
}

void
DsrAgent::Salvage(AwaitingAckEntry entry)
{
    if (entry.index == 0)
    {
        // Still at the source: look again, rediscovering if needed.
        RouteOutput(std::move(entry.packet));
        return;
    }
    std::set<NodeId> avoid(entry.route.begin(), entry.route.begin() + static_cast<std::ptrdiff_t>(entry.index));
    auto alt = m_cache.LookupAvoiding(entry.packet.dst, Now(), avoid);
    if (!alt)
    {
        Drop(entry.packet, DropReason::LinkBreak);
        return;
    }
    SourceRoute rewritten(entry.route.begin(), entry.route.begin() + static_cast<std::ptrdiff_t>(entry.index));
    rewritten.insert(rewritten.end(), alt->begin(), alt->end());
    ++m_salvaged;
    SendAlongRoute(std::move(entry.packet), std::move(rewritten), entry.index, entry.salvage + 1, true);
}

} // namespace manet::dsr
