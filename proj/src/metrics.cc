#include "manet/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace manet {

std::string_view
ToString(DropReason r)
{
    switch (r)
    {
    case DropReason::NoRoute:
        return "no-route";
    case DropReason::Unreachable:
        return "unreachable";
    case DropReason::Ttl:
        return "ttl";
    case DropReason::LinkBreak:
        return "link-break";
    case DropReason::CorruptHeader:
        return "corrupt-header";
    }
    return "unknown";
}

void
MetricsAccumulator::OnSent(const PacketEnvelope& pkt)
{
    auto [it, inserted] = m_fate.try_emplace(pkt.id);
    if (!inserted)
    {
        throw AccountingError("packet id " + std::to_string(pkt.id) + " sent twice");
    }
    ++m_sent;
}

bool
MetricsAccumulator::OnDelivered(const PacketEnvelope& pkt, SimTime now)
{
    auto it = m_fate.find(pkt.id);
    if (it == m_fate.end())
    {
        throw AccountingError("delivery of unknown packet id " + std::to_string(pkt.id));
    }
    Record& rec = it->second;
    if (rec.fate == Fate::Delivered)
    {
        return false;
    }
    if (rec.fate == Fate::Dropped)
    {
        // Another copy was given up on earlier; this one made it.
        --m_drops[static_cast<std::size_t>(rec.reason)];
    }
    double delay = (now - pkt.createdAt).Seconds();
    if (delay < 0.0)
    {
        throw AccountingError("negative end-to-end delay");
    }
    rec.fate = Fate::Delivered;
    ++m_received;
    m_dataBytesReceived += pkt.size;
    m_latency.push_back(delay);
    return true;
}

void
MetricsAccumulator::OnDropped(PacketId id, DropReason reason)
{
    auto it = m_fate.find(id);
    if (it == m_fate.end())
    {
        throw AccountingError("drop of unknown packet id " + std::to_string(id));
    }
    if (it->second.fate != Fate::Pending)
    {
        return;
    }
    it->second = Record{Fate::Dropped, reason};
    ++m_drops[static_cast<std::size_t>(reason)];
}

std::uint64_t
MetricsAccumulator::Dropped() const
{
    return std::accumulate(m_drops.begin(), m_drops.end(), std::uint64_t{0});
}

std::vector<PacketId>
MetricsAccumulator::PendingIds() const
{
    std::vector<PacketId> ids;
    for (const auto& [id, rec] : m_fate)
    {
        if (rec.fate == Fate::Pending)
        {
            ids.push_back(id);
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

double
Pdr(std::uint64_t sent, std::uint64_t received)
{
    if (received > sent)
    {
        throw AccountingError("received exceeds sent");
    }
    if (sent == 0)
    {
        return 0.0;
    }
    return static_cast<double>(received) / static_cast<double>(sent);
}

double
SentPerReceivedPercentExact(std::uint64_t sent, std::uint64_t received)
{
    if (received == 0)
    {
        return std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(sent) / static_cast<double>(received) * 100.0;
}

double
SentPerReceivedPercent(std::uint64_t sent, std::uint64_t received)
{
    return RoundTo2(SentPerReceivedPercentExact(sent, received));
}

double
RoundTo2(double v)
{
    if (!std::isfinite(v))
    {
        return v;
    }
    return std::round(v * 100.0) / 100.0;
}

double
Throughput(std::uint64_t dataBytesReceived, double durationSeconds)
{
    if (!(durationSeconds > 0.0))
    {
        throw std::invalid_argument("throughput needs a positive duration");
    }
    return static_cast<double>(dataBytesReceived) / durationSeconds;
}

std::optional<double>
AverageDelay(std::span<const double> samples)
{
    if (samples.empty())
    {
        return std::nullopt;
    }
    double sum = 0.0;
    for (double s : samples)
    {
        if (s < 0.0)
        {
            throw AccountingError("negative delay sample");
        }
        sum += s;
    }
    return sum / static_cast<double>(samples.size());
}

double
Nrl(std::uint64_t controlTx, std::uint64_t received)
{
    if (received == 0)
    {
        return controlTx == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(controlTx) / static_cast<double>(received);
}

} // namespace manet
