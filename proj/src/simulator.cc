#include "manet/simulator.h"

#include <string>

namespace manet {

EventId
Simulator::ScheduleAt(SimTime at, Action action, std::int64_t target, std::string_view kind)
{
    if (at < m_now)
    {
        throw SchedulingError("cannot schedule at " + std::to_string(at.Micros()) +
                              "us, clock is already at " + std::to_string(m_now.Micros()) + "us");
    }
    std::uint64_t seq = m_nextSeq++;
    m_queue.push(Key{at, seq});
    m_pending.emplace(seq, Pending{std::move(action), target, kind});
    return EventId{seq};
}

bool
Simulator::Cancel(EventId id)
{
    // The heap key stays behind and is skipped when popped.
    return m_pending.erase(id.seq) > 0;
}

std::uint64_t
Simulator::RunUntil(SimTime end)
{
    if (end < m_now)
    {
        throw SchedulingError("run_until target lies in the past");
    }
    std::uint64_t executed = 0;
    while (!m_queue.empty() && m_queue.top().at <= end)
    {
        Key key = m_queue.top();
        m_queue.pop();
        auto it = m_pending.find(key.seq);
        if (it == m_pending.end())
        {
            continue;
        }
        Pending ev = std::move(it->second);
        m_pending.erase(it);
        m_now = key.at;
        if (m_trace)
        {
            *m_trace << m_now.Micros() << ',';
            if (ev.target == kSchedulerTarget)
            {
                *m_trace << "scheduler";
            }
            else
            {
                *m_trace << ev.target;
            }
            *m_trace << ',' << ev.kind << '\n';
        }
        ev.action();
        ++executed;
        ++m_executed;
    }
    m_now = end;
    return executed;
}

} // namespace manet
