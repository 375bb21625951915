#include "manet/dsdv.h"

#include <algorithm>

namespace manet::dsdv {

DsdvAgent::DsdvAgent(NodeId self, AgentServices services, DsdvConfig config)
    : RoutingAgent(self, std::move(services)),
      m_config(config),
      m_buffer(config.bufferCapacity)
{
    DsdvEntry& own = m_table[self];
    own.dst = self;
    own.nextHop = self;
    own.hops = 0;
    own.seqNo = 0;
}

void
DsdvAgent::Start()
{
    // First dump early so tables fill without waiting a whole period.
    auto offset = MicroSeconds(
        static_cast<std::int64_t>(Jitter().UniformInt(0, m_config.periodicJitter.Micros())));
    Sim().Schedule(offset, [this] { PeriodicTick(); }, Id(), "dsdv-periodic");
}

void
DsdvAgent::PeriodicTick()
{
    CheckNeighbors();
    if (Radio().IsActive(Id(), Now()))
    {
        PeriodicUpdate();
    }
    const std::int64_t j = m_config.periodicJitter.Micros();
    const std::int64_t delta = static_cast<std::int64_t>(Jitter().UniformInt(0, 2 * j)) - j;
    Sim().Schedule(m_config.periodicInterval + MicroSeconds(delta), [this] { PeriodicTick(); }, Id(),
                   "dsdv-periodic");
}

void
DsdvAgent::PeriodicUpdate()
{
    DsdvEntry& own = m_table.at(Id());
    own.seqNo += 2;
    own.installedAt = Now();

    auto upd = std::make_shared<DsdvUpdate>();
    upd->kind = DsdvUpdate::Kind::FullDump;
    upd->sender = Id();
    upd->entries.reserve(m_table.size());
    for (auto& [dst, e] : m_table)
    {
        upd->entries.push_back({dst, e.hops, e.seqNo});
        e.settlingDeadline.reset();
    }
    m_changed.clear();
    Sim().Cancel(m_incrementalTimer);
    m_incrementalTimer = {};

    ++m_periodic;
    const std::uint32_t size = UpdateSize(upd->entries.size());
    BroadcastControl(std::move(upd), size);
}

void
DsdvAgent::CheckNeighbors()
{
    const SimTime horizon = SimTime::FromMicros(
        (m_config.periodicInterval + m_config.periodicJitter).Micros() * m_config.missedPeriods);
    std::vector<NodeId> lost;
    for (const auto& [n, heard] : m_lastHeard)
    {
        if (Now() - heard > horizon)
        {
            lost.push_back(n);
        }
    }
    for (NodeId n : lost)
    {
        HandleLinkBreak(n);
    }
}

void
DsdvAgent::HandleLinkBreak(NodeId neighbor)
{
    m_lastHeard.erase(neighbor);
    std::erase_if(m_parked, [neighbor](const auto& kv) { return kv.second.nextHop == neighbor; });
    bool any = false;
    for (auto& [dst, e] : m_table)
    {
        if (dst == Id() || !e.Valid() || e.nextHop != neighbor)
        {
            continue;
        }
        e.hops = kInfinity;
        e.seqNo += 1;
        e.installedAt = Now();
        any = true;
        auto parked = m_parked.find(dst);
        if (parked != m_parked.end() && parked->second.seqNo > e.seqNo)
        {
            Install(e, parked->second, true);
            m_parked.erase(parked);
            FlushBuffered(dst);
        }
        else
        {
            MarkChanged(e);
        }
    }
    if (any)
    {
        SendIncremental();
    }
}

std::vector<PacketId>
DsdvAgent::HeldPacketIds() const
{
    std::vector<PacketId> ids;
    m_buffer.AppendIds(ids);
    return ids;
}

std::optional<DsdvEntry>
DsdvAgent::Route(NodeId dst) const
{
    auto it = m_table.find(dst);
    if (it == m_table.end())
    {
        return std::nullopt;
    }
    return it->second;
}

void
DsdvAgent::MarkChanged(DsdvEntry& e)
{
    m_changed.insert(e.dst);
    if (!e.settlingDeadline)
    {
        e.settlingDeadline = Now() + m_config.settlingTime;
    }
    ScheduleIncremental(m_config.settlingTime);
}

void
DsdvAgent::ScheduleIncremental(SimTime delay)
{
    if (Sim().IsPending(m_incrementalTimer))
    {
        return;
    }
    m_incrementalTimer = Sim().Schedule(delay, [this] { SendIncremental(); }, Id(), "dsdv-incremental");
}

void
DsdvAgent::SendIncremental()
{
    Sim().Cancel(m_incrementalTimer);
    m_incrementalTimer = {};
    if (m_changed.empty() || !Radio().IsActive(Id(), Now()))
    {
        return;
    }
    auto upd = std::make_shared<DsdvUpdate>();
    upd->kind = DsdvUpdate::Kind::Incremental;
    upd->sender = Id();
    for (NodeId dst : m_changed)
    {
        DsdvEntry& e = m_table.at(dst);
        upd->entries.push_back({dst, e.hops, e.seqNo});
        e.settlingDeadline.reset();
    }
    m_changed.clear();
    ++m_incremental;
    const std::uint32_t size = UpdateSize(upd->entries.size());
    BroadcastControl(std::move(upd), size);
}

void
DsdvAgent::Install(DsdvEntry& e, const Candidate& c, bool metricChange)
{
    e.nextHop = c.nextHop;
    e.hops = c.hops;
    e.seqNo = c.seqNo;
    e.installedAt = Now();
    if (metricChange)
    {
        MarkChanged(e);
    }
}

void
DsdvAgent::MergeUpdate(const DsdvUpdate& upd, NodeId from)
{
    for (const Advertised& adv : upd.entries)
    {
        if (adv.dst == Id())
        {
            if (adv.seqNo > m_table.at(Id()).seqNo)
            {
                ++m_bogusSelf;
            }
            continue;
        }
        const Candidate cand{from, adv.hops == kInfinity ? kInfinity : adv.hops + 1, adv.seqNo};

        auto [it, inserted] = m_table.try_emplace(adv.dst);
        DsdvEntry& e = it->second;
        if (inserted)
        {
            if (cand.hops == kInfinity)
            {
                m_table.erase(it);
                continue;
            }
            e.dst = adv.dst;
            Install(e, cand, true);
            FlushBuffered(adv.dst);
            continue;
        }

        auto parked = m_parked.find(adv.dst);
        if (cand.seqNo < e.seqNo)
        {
            continue;
        }
        if (cand.seqNo == e.seqNo)
        {
            if (cand.hops < e.hops)
            {
                const bool wasValid = e.Valid();
                Install(e, cand, true);
                if (parked != m_parked.end() && parked->second.seqNo <= e.seqNo)
                {
                    m_parked.erase(parked);
                }
                if (!wasValid)
                {
                    FlushBuffered(adv.dst);
                }
            }
            continue;
        }

        // Newer sequence number.
        const bool viaCurrent = e.nextHop == from;
        if (cand.hops == kInfinity)
        {
            if (viaCurrent || !e.Valid())
            {
                const bool metricChange = e.Valid();
                Install(e, cand, metricChange);
                if (parked != m_parked.end() && parked->second.seqNo > e.seqNo)
                {
                    Install(e, parked->second, true);
                    m_parked.erase(parked);
                    FlushBuffered(adv.dst);
                }
                else if (metricChange)
                {
                    SendIncremental();
                }
            }
            continue;
        }
        if (viaCurrent || !e.Valid() || cand.hops <= e.hops)
        {
            Candidate best = cand;
            // A parked advert with a still newer seq stays parked: promoting
            // it here would take a longer route while this one is alive.
            if (parked != m_parked.end() && parked->second.seqNo <= best.seqNo)
            {
                const Candidate& p = parked->second;
                if (p.seqNo == best.seqNo && p.hops < best.hops)
                {
                    best = p;
                }
                m_parked.erase(parked);
            }
            const bool wasValid = e.Valid();
            const bool metricChange = !wasValid || best.hops != e.hops || best.nextHop != e.nextHop;
            Install(e, best, metricChange);
            if (!wasValid)
            {
                FlushBuffered(adv.dst);
            }
            continue;
        }
        if (parked == m_parked.end() || cand.seqNo > parked->second.seqNo ||
            (cand.seqNo == parked->second.seqNo && cand.hops < parked->second.hops))
        {
            m_parked[adv.dst] = cand;
        }
    }
}

void
DsdvAgent::Receive(const Frame& frame)
{
    m_lastHeard[frame.sender] = Now();
    if (auto* upd = frame.As<DsdvUpdate>())
    {
        MergeUpdate(*upd, frame.sender);
    }
    else if (auto* data = frame.As<DataPayload>())
    {
        HandleData(data->packet);
    }
}

void
DsdvAgent::RouteOutput(PacketEnvelope pkt)
{
    auto it = m_table.find(pkt.dst);
    if (it != m_table.end() && it->second.Valid())
    {
        Forward(std::move(pkt), it->second.nextHop);
        return;
    }
    if (auto evicted = m_buffer.Push(std::move(pkt), Now()))
    {
        Drop(*evicted, DropReason::NoRoute);
    }
    Sim().Schedule(m_config.bufferTimeout, [this] { ExpireBuffered(); }, Id(), "dsdv-buffer-expiry");
}

void
DsdvAgent::ExpireBuffered()
{
    for (const auto& pkt : m_buffer.TakeQueuedBefore(Now() - m_config.bufferTimeout))
    {
        Drop(pkt, DropReason::NoRoute);
    }
}

void
DsdvAgent::FlushBuffered(NodeId dst)
{
    if (!m_buffer.HasFor(dst))
    {
        return;
    }
    for (auto& pkt : m_buffer.TakeFor(dst))
    {
        RouteOutput(std::move(pkt));
    }
}

void
DsdvAgent::HandleData(const PacketEnvelope& incoming)
{
    PacketEnvelope pkt = incoming;
    RecordHop(pkt);
    if (pkt.dst == Id())
    {
        Deliver(pkt);
        return;
    }
    if (!HasHopBudget(pkt))
    {
        Drop(pkt, DropReason::Ttl);
        return;
    }
    auto it = m_table.find(pkt.dst);
    if (it == m_table.end() || !it->second.Valid())
    {
        Drop(pkt, DropReason::NoRoute);
        return;
    }
    Forward(std::move(pkt), it->second.nextHop);
}

void
DsdvAgent::Forward(PacketEnvelope pkt, NodeId nextHop)
{
    auto payload = std::make_shared<DataPayload>(pkt);
    if (!UnicastData(pkt, std::move(payload), pkt.size, nextHop))
    {
        Drop(pkt, DropReason::LinkBreak);
    }
}

} // namespace manet::dsdv
