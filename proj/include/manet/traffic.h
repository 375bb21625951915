#pragma once

#include "manet/packet.h"
#include "manet/rng.h"
#include "manet/sim_time.h"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace manet {

/// Constant-bit-rate flow between fixed endpoints. Packet m is created at
/// startAt + m * interval for every such instant strictly before stopAt.
struct CbrFlow
{
    NodeId src = 0;
    NodeId dst = 0;
    std::uint32_t packetSize = 64;
    double interval = 1.0; // s
    double startAt = 0.0;  // s
    double stopAt = 0.0;   // s

    void Validate() const;
    SimTime SendTime(std::uint64_t m) const;
    std::uint64_t PacketCount() const;
};

struct FlowSpec
{
    std::size_t count = 10;
    std::uint32_t packetSize = 64;
    double aggregateRate = 488.32; // packets/s summed over all flows
    double start = 0.0;
    double stop = 0.0;
};

/**
 * Draws `spec.count` flows whose endpoints are all distinct nodes. Each
 * flow sends at aggregateRate / count; flow k is offset by k / aggregateRate
 * so the union of all flows is a uniform lattice at the aggregate rate.
 * Throws std::invalid_argument if 2 * count exceeds the node count.
 */
std::vector<CbrFlow> SpawnFlows(const FlowSpec& spec, std::size_t nodeCount, RngStream& rng);

} // namespace manet
