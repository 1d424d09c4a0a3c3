#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <set>

#include "vsnsim/world.hpp"

using namespace vsnsim;

namespace {

RoadNetwork straight_net(int main_cells = 40, int exit_cells = 40) {
  static std::map<std::pair<int, int>, Topology> cache;
  auto& t = cache[{main_cells, exit_cells}];
  if (t.links.empty()) t = Topology::single_lane(main_cells, exit_cells);
  return RoadNetwork(t);
}

}  // namespace

TEST_CASE("free-flow acceleration and blocking") {
  const RoadNetwork net = straight_net();
  World w(net, {2, 0.0}, 1);  // p forced 0
  w.set_face(0, 0, Face::green);
  w.set_face(0, 1, Face::red);

  SECTION("a slow vehicle accelerates and advances") {
    const int id = w.spawn_vehicle(0, 5, 1, {0, 2});
    w.step();
    CHECK(w.vehicle(id).v == 2);
    CHECK(w.vehicle(id).cell == 7);
  }

  SECTION("gap zero pins the follower") {
    const int lead = w.spawn_vehicle(0, 6, 0, {0, 2});
    const int tail = w.spawn_vehicle(0, 5, 2, {0, 2});
    // keep the leader still: red wall far away, leader at v=0 accelerates,
    // so block it with an actual stopped chain instead: use a red face
    (void)lead;
    (void)tail;
    World w2(net, {2, 0.0}, 1);
    w2.set_face(0, 0, Face::red);
    w2.set_face(0, 1, Face::red);
    const int a = w2.spawn_vehicle(0, 39, 0, {0, 2});  // held at the stop line
    const int b = w2.spawn_vehicle(0, 38, 2, {0, 2});
    w2.step();
    CHECK(w2.vehicle(a).cell == 39);
    CHECK(w2.vehicle(b).cell == 38);
    CHECK(w2.vehicle(b).v == 0);
  }
}

TEST_CASE("long-run mean speed of a free vehicle is 2 - p") {
  const long steps = 100000;
  const RoadNetwork net = straight_net(2 * static_cast<int>(steps) + 10, 1);
  World w(net, {2, 0.15}, 42);
  w.set_face(0, 0, Face::green);
  w.set_face(0, 1, Face::red);
  const int id = w.spawn_vehicle(0, 0, 2, {0, 2});
  long travelled = 0;
  for (long t = 0; t < steps; ++t) {
    w.step();
    travelled += w.vehicle(id).v;
  }
  const double mean = static_cast<double>(travelled) / steps;
  CHECK_THAT(mean, Catch::Matchers::WithinAbs(1.85, 0.02));
}

TEST_CASE("arrivals") {
  const RoadNetwork net = straight_net();

  SECTION("lambda 0 never inserts") {
    World w(net, {2, 0.15}, 3);
    w.set_face(0, 0, Face::green);
    w.set_demand({0.0, 0.0});
    for (int t = 0; t < 500; ++t) {
      w.generate_arrivals();
      w.step();
    }
    CHECK(w.total_entered() == 0);
  }

  SECTION("lambda 1 generates one arrival per step; entry happens whenever cell 0 is free") {
    World w(net, {2, 0.0}, 3);
    w.set_face(0, 0, Face::green);
    w.set_demand({1.0, 0.0});
    for (int t = 0; t < 200; ++t) {
      const bool cell0_free = w.occupancy()[0][0] < 0;
      w.generate_arrivals();
      CHECK(w.total_entered() + w.queued_count() == t + 1);  // deterministic generation
      if (cell0_free) CHECK(w.occupancy()[0][0] >= 0);       // blocked only by occupancy
      w.step();
    }
    CHECK(w.total_entered() > 100);  // saturated entry keeps discharging
  }

  SECTION("binomial arrival count at lambda 0.2") {
    World w(net, {2, 0.15}, 7);
    w.set_face(0, 0, Face::green);
    w.set_demand({0.2, 0.0});
    for (int t = 0; t < 3600; ++t) {
      w.generate_arrivals();
      w.step();
    }
    const double generated = static_cast<double>(w.total_entered() + w.queued_count());
    const double sigma = std::sqrt(3600 * 0.2 * 0.8);
    CHECK_THAT(generated, Catch::Matchers::WithinAbs(720.0, 3 * sigma));
  }
}

TEST_CASE("delay measurement") {
  const RoadNetwork net = straight_net();

  SECTION("free traversal with p = 0 has zero delay") {
    World w(net, {2, 0.0}, 1);
    w.set_face(0, 0, Face::green);
    const int id = w.spawn_vehicle(0, 0, 2, {0, 2});
    while (w.is_active(id)) w.step();
    const auto s = w.delay_stats(0, 1);
    CHECK(s.vehicles_measured == 1);
    CHECK(s.vehicles_completed == 1);
    CHECK(s.avg_delay_s == 0.0);
  }

  SECTION("a vehicle held at red accrues exactly the hold time") {
    World w(net, {2, 0.0}, 1);
    w.set_face(0, 0, Face::red);
    w.spawn_vehicle(0, 0, 2, {0, 2});
    // red until t = 31 gives a 12 s delay on the 80-cell route
    for (int t = 0; t < 31; ++t) w.step();
    w.set_face(0, 0, Face::green);
    while (w.active_count() > 0) w.step();
    const auto s = w.delay_stats(0, 1);
    CHECK(s.avg_delay_s == 12.0);
  }

  SECTION("empty network reports zero vehicles") {
    World w(net, {2, 0.15}, 1);
    const auto s = w.delay_stats(0, 1000);
    CHECK(s.vehicles_measured == 0);
    CHECK(s.avg_delay_s == 0.0);
  }
}

TEST_CASE("world invariants under signal cycling") {
  const Topology topo = Topology::grid2x2();
  const RoadNetwork net(topo);
  World w(net, {2, 0.15}, 99);
  w.set_uniform_demand(0.2);
  for (int n = 0; n < net.node_count(); ++n) {
    w.set_face(n, 0, Face::green);
    w.set_face(n, 1, Face::red);
  }

  long crossings_during_red = 0;
  for (int t = 0; t < 2000; ++t) {
    // crude fixed-time plan with a 5 s all-red clearance
    const int phase = t % 60;
    for (int n = 0; n < net.node_count(); ++n) {
      if (phase < 25) {
        w.set_face(n, 0, Face::green);
        w.set_face(n, 1, Face::red);
      } else if (phase < 30 || phase >= 55) {
        w.set_face(n, 0, Face::intergreen);
        w.set_face(n, 1, Face::intergreen);
      } else {
        w.set_face(n, 0, Face::red);
        w.set_face(n, 1, Face::green);
      }
    }
    w.generate_arrivals();
    w.step();

    for (const auto& ev : w.take_events()) {
      if (ev.kind != WorldEvent::Kind::crossed) continue;
      const int stream = net.stream_of_link(ev.from_link);
      if (is_stop(w.face(ev.node, stream))) ++crossings_during_red;
    }

    // cell exclusivity and speed bound
    std::set<int> seen;
    for (int li = 0; li < net.link_count(); ++li) {
      for (const int id : w.vehicles_on_link(li)) {
        CHECK(seen.insert(id).second);
        CHECK(w.vehicle(id).v >= 0);
        CHECK(w.vehicle(id).v <= 2);
      }
    }
    // conservation
    REQUIRE(w.total_entered() - w.total_exited() == w.active_count());
    REQUIRE(static_cast<long>(seen.size()) == w.active_count());
  }
  CHECK(crossings_during_red == 0);
}

TEST_CASE("identical seed and config give identical trajectories") {
  const Topology topo = Topology::grid2x2();
  const RoadNetwork net(topo);
  auto run = [&net]() {
    World w(net, {2, 0.15}, 4242);
    w.set_uniform_demand(0.15);
    for (int n = 0; n < net.node_count(); ++n) w.set_face(n, 0, Face::green);
    std::vector<long> signature;
    for (int t = 0; t < 600; ++t) {
      w.generate_arrivals();
      w.step();
      long h = 0;
      for (int li = 0; li < net.link_count(); ++li)
        for (const int id : w.vehicles_on_link(li))
          h = h * 1000003 + id * 31 + w.vehicle(id).cell;
      signature.push_back(h);
    }
    return signature;
  };
  CHECK(run() == run());
}
