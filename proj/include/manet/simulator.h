#pragma once

#include "manet/sim_time.h"

#include <cstdint>
#include <functional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace manet {

using NodeId = std::uint32_t;

/// Target of an event that is not owned by any node.
inline constexpr std::int64_t kSchedulerTarget = -1;

class SchedulingError : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

/// Opaque handle returned by Schedule(); only meaningful to Cancel().
struct EventId
{
    std::uint64_t seq = 0;
    bool IsValid() const { return seq != 0; }
};

/**
 * Single-threaded discrete-event engine.
 *
 * Events run in (fire_at, seq) order where seq is the insertion counter, so
 * two events at the same instant execute in the order they were scheduled.
 * An optional trace stream receives one `time_us,node,action_kind` line per
 * executed event.
 */
class Simulator
{
  public:
    using Action = std::function<void()>;

    SimTime Now() const { return m_now; }

    /// Schedules `action` at absolute time `at`. Throws SchedulingError if
    /// `at` lies in the past.
    EventId ScheduleAt(SimTime at, Action action, std::int64_t target = kSchedulerTarget,
                       std::string_view kind = "event");

    EventId Schedule(SimTime delay, Action action, std::int64_t target = kSchedulerTarget,
                     std::string_view kind = "event")
    {
        return ScheduleAt(m_now + delay, std::move(action), target, kind);
    }

    /// True iff the event had not fired yet; it is then guaranteed never to fire.
    bool Cancel(EventId id);

    bool IsPending(EventId id) const { return m_pending.contains(id.seq); }

    /// Executes every event with fire_at <= end, then advances the clock to end.
    std::uint64_t RunUntil(SimTime end);

    std::size_t PendingCount() const { return m_pending.size(); }
    std::uint64_t ExecutedCount() const { return m_executed; }

    void SetTrace(std::ostream* os) { m_trace = os; }

  private:
    struct Key
    {
        SimTime at;
        std::uint64_t seq;
        bool operator>(const Key& o) const
        {
            return at != o.at ? at > o.at : seq > o.seq;
        }
    };

    struct Pending
    {
        Action action;
        std::int64_t target;
        std::string_view kind;
    };

    SimTime m_now;
    std::uint64_t m_nextSeq = 1;
    std::uint64_t m_executed = 0;
    std::priority_queue<Key, std::vector<Key>, std::greater<Key>> m_queue;
    std::unordered_map<std::uint64_t, Pending> m_pending;
    std::ostream* m_trace = nullptr;
};

} // namespace manet
