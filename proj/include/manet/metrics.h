#pragma once

#include "manet/packet.h"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace manet {

enum class DropReason : std::uint8_t
{
    NoRoute,
    Unreachable,
    Ttl,
    LinkBreak,
    CorruptHeader,
};

inline constexpr std::size_t kDropReasonCount = 5;

std::string_view ToString(DropReason r);

class AccountingError : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

/**
 * Per-run counters. Data packets are tracked by id so that duplicate copies
 * (retransmissions, route flaps) are counted once: each packet ends up
 * delivered, dropped, or still pending when the run stops.
 */
class MetricsAccumulator
{
  public:
    void OnSent(const PacketEnvelope& pkt);

    /// Returns true on the first delivery of this packet id.
    bool OnDelivered(const PacketEnvelope& pkt, SimTime now);

    /// Ignored if the packet was already delivered or dropped.
    void OnDropped(PacketId id, DropReason reason);

    void OnForwarded() { ++m_forwarded; }
    void OnControlTx(std::uint32_t bytes)
    {
        ++m_controlTx;
        m_controlBytes += bytes;
    }
    void OnDataTx() { ++m_dataTx; }
    /// A data packet revisited a node it had already passed through.
    void OnLoopFlagged() { ++m_loops; }

    std::uint64_t Sent() const { return m_sent; }
    std::uint64_t Received() const { return m_received; }
    std::uint64_t Forwarded() const { return m_forwarded; }
    std::uint64_t ControlTx() const { return m_controlTx; }
    std::uint64_t ControlBytes() const { return m_controlBytes; }
    std::uint64_t DataTx() const { return m_dataTx; }
    std::uint64_t DataBytesReceived() const { return m_dataBytesReceived; }
    std::uint64_t LoopsFlagged() const { return m_loops; }
    std::uint64_t Dropped() const;
    std::uint64_t Dropped(DropReason r) const { return m_drops[static_cast<std::size_t>(r)]; }
    std::uint64_t Pending() const { return m_sent - m_received - Dropped(); }
    std::vector<PacketId> PendingIds() const;

    const std::vector<double>& LatencySamples() const { return m_latency; }

  private:
    enum class Fate : std::uint8_t
    {
        Pending,
        Delivered,
        Dropped,
    };
    struct Record
    {
        Fate fate = Fate::Pending;
        DropReason reason = DropReason::NoRoute;
    };

    std::uint64_t m_sent = 0;
    std::uint64_t m_received = 0;
    std::uint64_t m_forwarded = 0;
    std::uint64_t m_controlTx = 0;
    std::uint64_t m_controlBytes = 0;
    std::uint64_t m_dataTx = 0;
    std::uint64_t m_dataBytesReceived = 0;
    std::uint64_t m_loops = 0;
    std::array<std::uint64_t, kDropReasonCount> m_drops{};
    std::vector<double> m_latency;
    std::unordered_map<PacketId, Record> m_fate;
};

/// Conventional delivery ratio received/sent; 0 when nothing was sent.
/// Throws AccountingError if received > sent.
double Pdr(std::uint64_t sent, std::uint64_t received);

/// Inverse delivery ratio sent/received*100, unrounded; infinity when nothing
/// was received. Multiplied by Pdr it gives 100 up to floating-point error.
double SentPerReceivedPercentExact(std::uint64_t sent, std::uint64_t received);

/// SentPerReceivedPercentExact rounded to two decimals (the paper_pdr column).
double SentPerReceivedPercent(std::uint64_t sent, std::uint64_t received);

/// Rounds half away from zero to two decimals, as printed in reports.
double RoundTo2(double v);

/// Bytes per second. Throws std::invalid_argument unless duration > 0.
double Throughput(std::uint64_t dataBytesReceived, double durationSeconds);

/// Mean delay in seconds; nullopt without samples. Throws AccountingError
/// on a negative sample.
std::optional<double> AverageDelay(std::span<const double> samples);

/// Control transmissions per delivered packet; infinity when control
/// traffic was sent but nothing arrived, 0 when both are zero.
double Nrl(std::uint64_t controlTx, std::uint64_t received);

} // namespace manet
