#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.h"

#include "manet/network.h"

using namespace manet;
using aodv::AodvAgent;

namespace {

NetworkConfig
Quiet()
{
    NetworkConfig cfg;
    cfg.protocol = Protocol::Aodv;
    cfg.aodv.enableHello = false;
    return cfg;
}

} // namespace

TEST_CASE("cold start sends exactly one request and buffers the packet")
{
    Network net(oracle::StaticMobility(oracle::Chain(3, 200)), Quiet());
    net.Start();
    net.Send(0, 2);
    auto& a = net.AgentAs<AodvAgent>(0);
    CHECK(net.Metrics().ControlTx() == 1);
    CHECK(net.Metrics().ControlBytes() == aodv::kRreqSize);
    CHECK(a.RreqOriginated() == 1);
    CHECK(a.DiscoveryPending(2));
    CHECK(a.BufferedCount() == 1);
    CHECK(a.OwnSeq() == 1);

    // A second packet joins the pending discovery.
    net.Send(0, 2);
    CHECK(a.RreqOriginated() == 1);
    CHECK(a.BufferedCount() == 2);
}

TEST_CASE("packet for self is delivered without any request")
{
    Network net(oracle::StaticMobility(oracle::Chain(2, 100)), Quiet());
    net.Start();
    net.Send(0, 0);
    CHECK(net.Metrics().Received() == 1);
    CHECK(net.Metrics().ControlTx() == 0);
}

TEST_CASE("three unanswered requests make the destination unreachable")
{
    Network net(oracle::StaticMobility({{0, 0}, {900, 0}}), Quiet());
    net.Start();
    net.Send(0, 1);
    net.Send(0, 1);
    auto& a = net.AgentAs<AodvAgent>(0);
    net.RunUntil(Seconds(5.9));
    CHECK(a.RreqOriginated() == 3);
    CHECK(net.Metrics().Dropped() == 0);
    net.RunUntil(Seconds(6));
    CHECK(a.RreqOriginated() == 3);
    CHECK(net.Metrics().Dropped(DropReason::Unreachable) == 2);
    CHECK_FALSE(a.DiscoveryPending(1));
    CHECK(a.BufferedCount() == 0);
}

TEST_CASE("discovery on the chain A-B-C")
{
    Network net(oracle::StaticMobility(oracle::Chain(3, 200)), Quiet());
    std::vector<PacketId> order;
    net.SetDeliveryObserver([&](const PacketEnvelope& p, std::span<const NodeId>) { order.push_back(p.id); });
    net.Start();
    for (int i = 0; i < 3; ++i)
    {
        net.Send(0, 2);
    }
    net.RunUntil(Seconds(1));

    auto& a = net.AgentAs<AodvAgent>(0);
    auto& b = net.AgentAs<AodvAgent>(1);
    auto& c = net.AgentAs<AodvAgent>(2);

    auto ac = a.UsableRoute(2);
    REQUIRE(ac.has_value());
    CHECK(ac->nextHop == 1);
    CHECK(ac->hopCount == 2);

    auto bc = b.UsableRoute(2);
    REQUIRE(bc.has_value());
    CHECK(bc->nextHop == 2);
    CHECK(bc->hopCount == 1);

    auto ca = c.UsableRoute(0);
    REQUIRE(ca.has_value());
    CHECK(ca->nextHop == 1);
    CHECK(ca->hopCount == 2);

    CHECK(b.RreqRebroadcasts() == 1);
    CHECK(c.RreqRebroadcasts() == 0);
    CHECK(c.RrepSent() == 1);
    CHECK(b.RrepSent() == 1);
    CHECK(order == std::vector<PacketId>{1, 2, 3});
    CHECK(net.Metrics().Forwarded() == 3);
}

TEST_CASE("route present: one data transmission, no control")
{
    Network net(oracle::StaticMobility(oracle::Chain(2, 100)), Quiet());
    net.Start();
    net.Send(0, 1);
    net.RunUntil(Seconds(1));
    const auto control = net.Metrics().ControlTx();
    const auto data = net.Metrics().DataTx();
    net.Send(0, 1);
    CHECK(net.Metrics().ControlTx() == control);
    CHECK(net.Metrics().DataTx() == data + 1);
}

TEST_CASE("duplicate requests are rebroadcast at most once per node")
{
    // Dense cluster: every node hears every other, so each sees many copies.
    std::mt19937_64 gen(4);
    auto pts = oracle::RandomConnectedLayout(15, 300, 300, 250, gen);
    Network net(oracle::StaticMobility(pts), Quiet());
    net.Start();
    net.Send(0, 14);
    net.Send(3, 9);
    net.RunUntil(Seconds(1));
    for (NodeId n = 0; n < 15; ++n)
    {
        CHECK(net.AgentAs<AodvAgent>(n).MaxRebroadcastsPerRequest() <= 1);
    }
    CHECK(net.Metrics().Received() == 2);
}

TEST_CASE("broken link: error sizes and upstream invalidation")
{
    Network net(oracle::StaticMobility(oracle::Chain(3, 200)), Quiet());
    net.Start();
    net.Send(0, 2);
    net.RunUntil(Seconds(1));
    auto& a = net.AgentAs<AodvAgent>(0);
    auto& b = net.AgentAs<AodvAgent>(1);
    REQUIRE(a.UsableRoute(2).has_value());

    // B holds exactly one route through C.
    const auto bytes = net.Metrics().ControlBytes();
    b.HandleBrokenLink(2);
    CHECK(b.RerrSent() == 1);
    CHECK(net.Metrics().ControlBytes() - bytes == aodv::RerrSize(1));
    CHECK_FALSE(b.UsableRoute(2).has_value());

    net.RunUntil(Seconds(2));
    CHECK_FALSE(a.UsableRoute(2).has_value());
    CHECK(a.UsableRoute(1).has_value());
    CHECK(a.RerrSent() == 1);

    // Nothing left through C: no error goes out.
    const auto sent = b.RerrSent();
    b.HandleBrokenLink(2);
    CHECK(b.RerrSent() == sent);
}

TEST_CASE("error from a neighbor that is not the next hop is ignored")
{
    std::vector<oracle::Point> pts{{0, 0}, {200, 0}, {400, 0}, {200, 150}};
    Network net(oracle::StaticMobility(pts), Quiet());
    net.Start();
    net.Send(0, 2);
    net.RunUntil(Seconds(1));
    auto& a = net.AgentAs<AodvAgent>(0);
    auto route = a.UsableRoute(2);
    REQUIRE(route.has_value());
    const NodeId other = route->nextHop == 1 ? 3 : 1;
    net.AgentAs<AodvAgent>(other).HandleBrokenLink(2);
    net.RunUntil(Seconds(2));
    CHECK(a.UsableRoute(2).has_value());
}

TEST_CASE("routes expire without use")
{
    Network net(oracle::StaticMobility(oracle::Chain(3, 200)), Quiet());
    net.Start();
    net.Send(0, 2);
    net.RunUntil(Seconds(1));
    CHECK(net.AgentAs<AodvAgent>(0).UsableRoute(2).has_value());
    net.RunUntil(Seconds(12));
    CHECK_FALSE(net.AgentAs<AodvAgent>(0).UsableRoute(2).has_value());
}

TEST_CASE("hello beacons detect a departed neighbor")
{
    // Node 1 drives out of range at t=5 s.
    std::vector<std::vector<Waypoint>> chains{
        {{SimTime(), {0, 0}}},
        {{SimTime(), {100, 0}}, {Seconds(5), {100, 0}}, {Seconds(6), {900, 0}}},
    };
    NetworkConfig cfg;
    Network net(MobilitySource(MobilitySource::Kind::RandomWaypoint, {1000, 1000}, chains), cfg);
    net.RunUntil(Seconds(4));
    auto& a = net.AgentAs<AodvAgent>(0);
    CHECK(a.UsableRoute(1).has_value());
    net.RunUntil(Seconds(12));
    CHECK_FALSE(a.UsableRoute(1).has_value());
}

TEST_CASE("property: installed hop counts equal BFS distance on random static graphs")
{
    std::mt19937_64 gen(21);
    for (int g = 0; g < 25; ++g)
    {
        auto pts = oracle::RandomConnectedLayout(20, 700, 700, 250, gen);
        auto adj = oracle::UnitDiskGraph(pts, 250);
        for (int q = 0; q < 3; ++q)
        {
            NodeId s = static_cast<NodeId>(gen() % 20);
            NodeId d = static_cast<NodeId>(gen() % 20);
            if (s == d)
            {
                continue;
            }
            Network net(oracle::StaticMobility(pts), Quiet());
            net.Start();
            net.Send(s, d);
            net.RunUntil(Seconds(1));
            auto r = net.AgentAs<AodvAgent>(s).UsableRoute(d);
            REQUIRE(r.has_value());
            REQUIRE(r->hopCount == oracle::Bfs(adj, s)[d]);
            REQUIRE(net.Metrics().Received() == 1);
        }
    }
}
