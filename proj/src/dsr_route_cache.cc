#include "manet/dsr.h"

#include <algorithm>
#include <unordered_set>

namespace manet::dsr {

bool
IsSimple(const SourceRoute& route)
{
    if (route.empty())
    {
        return false;
    }
    std::unordered_set<NodeId> seen;
    for (NodeId n : route)
    {
        if (!seen.insert(n).second)
        {
            return false;
        }
    }
    return true;
}

RouteCache::RouteCache(NodeId owner, std::size_t capacity, SimTime lifetime)
    : m_owner(owner),
      m_capacity(capacity),
      m_lifetime(lifetime)
{
}

bool
RouteCache::Add(const SourceRoute& route, SimTime now)
{
    if (route.size() < 2 || route.front() != m_owner || !IsSimple(route))
    {
        return false;
    }
    for (std::size_t k = 2; k <= route.size(); ++k)
    {
        Insert(SourceRoute(route.begin(), route.begin() + static_cast<std::ptrdiff_t>(k)), now);
    }
    return true;
}

void
RouteCache::Insert(SourceRoute route, SimTime now)
{
    auto& routes = m_routes[route.back()];
    std::erase_if(routes, [&](const Cached& c) { return c.learnedAt + m_lifetime <= now; });
    auto same = std::find_if(routes.begin(), routes.end(), [&](const Cached& c) { return c.route == route; });
    if (same != routes.end())
    {
        same->learnedAt = now;
    }
    else
    {
        routes.push_back({std::move(route), now});
    }
    std::stable_sort(routes.begin(), routes.end(), [](const Cached& a, const Cached& b) {
        if (a.route.size() != b.route.size())
        {
            return a.route.size() < b.route.size();
        }
        return a.learnedAt > b.learnedAt;
    });
    if (routes.size() > m_capacity)
    {
        routes.resize(m_capacity);
    }
}

std::optional<SourceRoute>
RouteCache::Lookup(NodeId dst, SimTime now) const
{
    return LookupAvoiding(dst, now, {});
}

std::optional<SourceRoute>
RouteCache::LookupAvoiding(NodeId dst, SimTime now, const std::set<NodeId>& avoid) const
{
    auto it = m_routes.find(dst);
    if (it == m_routes.end())
    {
        return std::nullopt;
    }
    for (const Cached& c : it->second)
    {
        if (c.learnedAt + m_lifetime <= now)
        {
            continue;
        }
        bool clear = std::none_of(c.route.begin() + 1, c.route.end(), [&](NodeId n) { return avoid.contains(n); });
        if (clear)
        {
            return c.route;
        }
    }
    return std::nullopt;
}

std::size_t
RouteCache::RemoveLink(NodeId a, NodeId b)
{
    std::size_t removed = 0;
    for (auto& [dst, routes] : m_routes)
    {
        removed += std::erase_if(routes, [a, b](const Cached& c) {
            for (std::size_t i = 0; i + 1 < c.route.size(); ++i)
            {
                NodeId u = c.route[i];
                NodeId v = c.route[i + 1];
                if ((u == a && v == b) || (u == b && v == a))
                {
                    return true;
                }
            }
            return false;
        });
    }
    return removed;
}

std::vector<SourceRoute>
RouteCache::Routes(NodeId dst, SimTime now) const
{
    std::vector<SourceRoute> out;
    auto it = m_routes.find(dst);
    if (it == m_routes.end())
    {
        return out;
    }
    for (const Cached& c : it->second)
    {
        if (c.learnedAt + m_lifetime > now)
        {
            out.push_back(c.route);
        }
    }
    return out;
}

std::vector<NodeId>
RouteCache::Destinations() const
{
    std::vector<NodeId> out;
    for (const auto& [dst, routes] : m_routes)
    {
        if (!routes.empty())
        {
            out.push_back(dst);
        }
    }
    return out;
}

std::size_t
RouteCache::Size() const
{
    std::size_t n = 0;
    for (const auto& [dst, routes] : m_routes)
    {
        n += routes.size();
    }
    return n;
}

} // namespace manet::dsr
