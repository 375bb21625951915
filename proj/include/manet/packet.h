#pragma once

#include "manet/sim_time.h"
#include "manet/simulator.h"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace manet {

using PacketId = std::uint64_t;

/// Hop budget for data and control traffic.
inline constexpr std::uint32_t kDefaultTtl = 32;

/// Application data unit plus the bookkeeping that travels with it.
struct PacketEnvelope
{
    PacketId id = 0;
    NodeId src = 0;
    NodeId dst = 0;
    std::uint32_t size = 64; // payload bytes, excluding routing headers
    SimTime createdAt;
    std::optional<SimTime> deliveredAt;
    std::vector<NodeId> hopsVisited; // starts with src
    std::uint32_t ttl = kDefaultTtl;

    std::uint32_t HopsTaken() const
    {
        return hopsVisited.empty() ? 0 : static_cast<std::uint32_t>(hopsVisited.size() - 1);
    }
};

enum class FrameKind : std::uint8_t
{
    Control,
    Data,
};

/// Base for whatever a protocol puts on the air.
struct Payload
{
    virtual ~Payload() = default;
};

/// A data frame payload: the envelope as it stands at this hop.
struct DataPayload : Payload
{
    explicit DataPayload(PacketEnvelope p) : packet(std::move(p)) {}
    PacketEnvelope packet;
};

struct Frame
{
    NodeId sender = 0;
    FrameKind kind = FrameKind::Control;
    std::uint32_t size = 0; // bytes on air, headers included
    std::shared_ptr<const Payload> payload;
    SimTime sentAt;

    /// Set for data frames; lets the medium account for packets in flight.
    PacketId dataId = 0;

    template <typename T>
    const T* As() const
    {
        return dynamic_cast<const T*>(payload.get());
    }
};

} // namespace manet
