#pragma once

#include "manet/rng.h"
#include "manet/sim_time.h"
#include "manet/simulator.h"

#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace manet {

struct Position
{
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Position&) const = default;
};

inline double
Distance(Position a, Position b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Waypoint
{
    SimTime at;
    Position pos;
};

struct Arena
{
    double width = 867.0;
    double height = 561.0;
};

struct RandomWaypointParams
{
    std::size_t nodes = 100;
    Arena arena;
    double speedMin = 5.0; // m/s
    double speedMax = 15.0;
    double pause = 0.0; // s
    double duration = 200.0;
};

/**
 * Answers "where is node i at time t" from per-node waypoint chains.
 *
 * Positions are piecewise-linear between waypoints and held constant before
 * the first and after the last one. A node whose chain starts after t=0
 * exists for the whole run but is radio-silent until ActiveFrom().
 */
class MobilitySource
{
  public:
    enum class Kind
    {
        RandomWaypoint,
        Trace,
    };

    MobilitySource(Kind kind, Arena arena, std::vector<std::vector<Waypoint>> chains,
                   std::vector<std::string> labels = {});

    Kind GetKind() const { return m_kind; }
    const Arena& GetArena() const { return m_arena; }
    std::size_t NodeCount() const { return m_chains.size(); }

    /// Throws std::out_of_range for an unknown node.
    Position PositionAt(NodeId node, SimTime t) const;

    SimTime ActiveFrom(NodeId node) const;
    bool IsActive(NodeId node, SimTime t) const { return t >= ActiveFrom(node); }

    const std::vector<Waypoint>& Waypoints(NodeId node) const;
    const std::string& Label(NodeId node) const;

  private:
    const std::vector<Waypoint>& Chain(NodeId node) const;

    Kind m_kind;
    Arena m_arena;
    std::vector<std::vector<Waypoint>> m_chains;
    std::vector<std::string> m_labels;
};

MobilitySource GenerateRandomWaypoint(const RandomWaypointParams& params, RngStream& rng);

class FcdParseError : public std::runtime_error
{
  public:
    FcdParseError(std::size_t line, const std::string& what);
    std::size_t Line() const { return m_line; }

  private:
    std::size_t m_line;
};

/// Reads a SUMO fcd-export document. Vehicles become nodes in order of first
/// appearance; their ids are kept as labels.
MobilitySource LoadFcdTrace(std::istream& in);

/// Writes one timestep per distinct waypoint time, listing every node whose
/// chain covers that instant.
void WriteFcdTrace(const MobilitySource& source, std::ostream& out);

} // namespace manet
