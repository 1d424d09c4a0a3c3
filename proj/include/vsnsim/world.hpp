#pragma once

// Nagel-Schreckenberg ground truth: one vehicle per cell, synchronous
// updates, signal-obeying motion across stop lines, Bernoulli arrivals with
// virtual entry queues, and per-trip delay bookkeeping.

#include <cassert>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "vsnsim/rng.hpp"
#include "vsnsim/topology.hpp"

namespace vsnsim {

enum class Face { green, red, intergreen };

inline bool is_stop(Face f) { return f != Face::green; }

struct NaschParams {
  int v_max = 2;
  double p_brake = 0.15;
};

struct Vehicle {
  int id = -1;
  int link = -1;
  int cell = 0;
  int v = 0;
  long requested_step = 0;  // when the arrival was generated
  long entered_step = 0;    // when it physically occupied cell 0
  std::vector<int> route;
  int route_pos = 0;
};

struct WorldEvent {
  enum class Kind { entered, crossed, exited };
  Kind kind;
  long step;
  int vehicle;
  int node = -1;       // crossed: the intersection whose stop line was passed
  int from_link = -1;  // crossed
  int to_link = -1;    // crossed: -1 when the vehicle left the network
  int cell = -1;       // entered/crossed: cell on the (new) link
  int v = 0;
};

struct TripRecord {
  long requested = 0;
  long entered = -1;
  long exited = -1;
  long route_cells = 0;
  long travelled = 0;
};

class World {
 public:
  World(const RoadNetwork& net, NaschParams params, std::uint64_t seed)
      : net_(net),
        params_(params),
        arrivals_rng_(mix_seed(seed, 1)),
        dynamics_rng_(mix_seed(seed, 2)) {
    occ_.resize(net.link_count());
    for (int li = 0; li < net.link_count(); ++li)
      occ_[li].assign(net.links()[li].cells, -1);
    faces_.assign(net.node_count(), {Face::red, Face::red});
    demand_.assign(net.entry_links().size(), 0.0);
    queues_.resize(net.entry_links().size());
    turn_probability_ = 0.5;
  }

  void set_demand(std::vector<double> lambda_per_entry) {
    if (lambda_per_entry.size() != demand_.size())
      throw std::invalid_argument("demand size mismatch");
    demand_ = std::move(lambda_per_entry);
  }

  void set_uniform_demand(double lambda) {
    for (double& d : demand_) d = lambda;
  }

  void set_turn_probability(double p) { turn_probability_ = p; }

  void set_face(int node, int stream, Face f) { faces_[node][stream] = f; }
  Face face(int node, int stream) const { return faces_[node][stream]; }

  long current_step() const { return step_; }

  // Bernoulli draw per entry, then at most one queued vehicle enters per
  // entry per step. Queue time counts toward delay.
  void generate_arrivals() {
    for (std::size_t e = 0; e < demand_.size(); ++e) {
      if (arrivals_rng_.bernoulli(demand_[e]))
        queues_[e].push_back(PendingArrival{step_, sample_route(net_.entry_links()[e])});
      const int li = net_.entry_links()[e];
      if (!queues_[e].empty() && occ_[li][0] < 0) {
        PendingArrival pa = std::move(queues_[e].front());
        queues_[e].pop_front();
        insert_vehicle(li, std::move(pa.route), pa.requested);
      }
    }
  }

  // The four NaSch rules, applied synchronously: velocities are decided from
  // the pre-step occupancy for every vehicle, then all vehicles move.
  void step() {
    order_.clear();
    for (int li = 0; li < net_.link_count(); ++li) {
      const auto& occ = occ_[li];
      for (int c = static_cast<int>(occ.size()) - 1; c >= 0; --c)
        if (occ[c] >= 0) order_.push_back(occ[c]);
    }

    new_v_.resize(vehicles_.size());
    for (const int id : order_) {
      Vehicle& veh = vehicles_[id];
      int v = std::min(veh.v + 1, params_.v_max);             // accelerate
      v = std::min(v, forward_gap(veh, v));                   // keep headway
      const bool brake = dynamics_rng_.bernoulli(params_.p_brake);
      if (brake) v = std::max(v - 1, 0);                      // random slowdown
      new_v_[id] = v;
    }

    for (const int id : order_) move_vehicle(vehicles_[id], new_v_[id]);
    ++step_;
  }

  std::vector<WorldEvent> take_events() { return std::exchange(events_, {}); }

  // Direct placement for constructed scenarios. The route must start at the
  // given link and run to a boundary.
  int spawn_vehicle(int link, int cell, int v, std::vector<int> route) {
    if (route.empty() || route.front() != link)
      throw std::invalid_argument("spawn_vehicle: route must start at link");
    if (occ_[link][cell] >= 0) throw std::invalid_argument("spawn_vehicle: cell occupied");
    Vehicle veh;
    veh.id = static_cast<int>(vehicles_.size());
    veh.link = link;
    veh.cell = cell;
    veh.v = v;
    veh.requested_step = step_;
    veh.entered_step = step_;
    veh.route = std::move(route);
    TripRecord tr;
    tr.requested = step_;
    tr.entered = step_;
    for (const int li : veh.route) tr.route_cells += net_.links()[li].cells;
    tr.route_cells -= cell;  // spawned mid-link
    trips_.push_back(tr);
    occ_[link][cell] = veh.id;
    events_.push_back({WorldEvent::Kind::entered, step_, veh.id, -1, -1, link, cell, v});
    const int id = veh.id;
    vehicles_.push_back(std::move(veh));
    alive_.push_back(1);
    ++active_count_;
    ++total_entered_;
    return id;
  }

  const Vehicle& vehicle(int id) const { return vehicles_[id]; }
  bool is_active(int id) const { return id < static_cast<int>(alive_.size()) && alive_[id]; }
  const std::vector<std::vector<int>>& occupancy() const { return occ_; }
  int active_count() const { return active_count_; }
  long total_entered() const { return total_entered_; }
  long total_exited() const { return total_exited_; }
  long queued_count() const {
    long n = 0;
    for (const auto& q : queues_) n += static_cast<long>(q.size());
    return n;
  }

  // Vehicles on link li, front (highest cell) first.
  std::vector<int> vehicles_on_link(int li) const {
    std::vector<int> out;
    for (int c = net_.links()[li].cells - 1; c >= 0; --c)
      if (occ_[li][c] >= 0) out.push_back(occ_[li][c]);
    return out;
  }

  const std::vector<TripRecord>& trips() const { return trips_; }

  struct DelayStats {
    double avg_delay_s = 0.0;
    long vehicles_measured = 0;
    long vehicles_completed = 0;
  };

  // Mean delay over vehicles requested inside [from_step, to_step); trips
  // still under way contribute the delay accumulated so far.
  DelayStats delay_stats(long from_step, long to_step, bool include_queue_wait = true) const {
    DelayStats s;
    double sum = 0.0;
    for (std::size_t id = 0; id < trips_.size(); ++id) {
      const TripRecord& tr = trips_[id];
      if (tr.requested < from_step || tr.requested >= to_step) continue;
      const long start = include_queue_wait ? tr.requested
                                            : (tr.entered >= 0 ? tr.entered : step_);
      long elapsed, free_cells;
      if (tr.exited >= 0) {
        elapsed = tr.exited - start;
        free_cells = tr.route_cells;
      } else {
        elapsed = step_ - start;
        free_cells = tr.travelled;
      }
      const long free_time = (free_cells + params_.v_max - 1) / params_.v_max;
      sum += static_cast<double>(elapsed - free_time);
      ++s.vehicles_measured;
      if (tr.exited >= 0) ++s.vehicles_completed;
    }
    if (s.vehicles_measured > 0) s.avg_delay_s = sum / s.vehicles_measured;
    return s;
  }

  const NaschParams& params() const { return params_; }
  const RoadNetwork& net() const { return net_; }

 private:
  struct PendingArrival {
    long requested;
    std::vector<int> route;
  };

  struct Crossing {
    int node;
    int from_link;
  };

  std::vector<int> sample_route(int entry_link) {
    std::vector<int> route{entry_link};
    int li = entry_link;
    while (net_.links()[li].to_node >= 0) {
      const auto& outs = net_.nodes()[net_.links()[li].to_node].out_links;
      int next;
      if (outs.size() == 1) {
        next = outs[0];
      } else if (outs.size() == 2) {
        next = arrivals_rng_.bernoulli(turn_probability_) ? outs[0] : outs[1];
      } else {
        next = outs[arrivals_rng_.below(outs.size())];
      }
      route.push_back(next);
      li = next;
    }
    return route;
  }

  void insert_vehicle(int link, std::vector<int> route, long requested) {
    Vehicle veh;
    veh.id = static_cast<int>(vehicles_.size());
    veh.link = link;
    veh.cell = 0;
    veh.v = params_.v_max;
    veh.requested_step = requested;
    veh.entered_step = step_;
    veh.route = std::move(route);
    veh.route_pos = 0;

    TripRecord tr;
    tr.requested = requested;
    tr.entered = step_;
    for (const int li : veh.route) tr.route_cells += net_.links()[li].cells;
    trips_.push_back(tr);

    occ_[link][0] = veh.id;
    events_.push_back({WorldEvent::Kind::entered, step_, veh.id, -1, -1, link, 0, veh.v});
    vehicles_.push_back(std::move(veh));
    alive_.push_back(1);
    ++active_count_;
    ++total_entered_;
  }

  // Empty cells ahead along the route, up to max_look. A red or intergreen
  // stop line bounds the gap at the last cell of the approach.
  int forward_gap(const Vehicle& veh, int max_look) const {
    int gap = 0;
    int li = veh.link;
    int pos = veh.cell;
    int rpos = veh.route_pos;
    while (gap < max_look) {
      if (pos + 1 < net_.links()[li].cells) {
        if (occ_[li][pos + 1] >= 0) return gap;
        ++gap;
        ++pos;
        continue;
      }
      // at the last cell of li
      const int tn = net_.links()[li].to_node;
      if (tn < 0) return max_look;  // network exit ahead, unbounded
      const int stream = net_.stream_of_link(li);
      if (is_stop(faces_[tn][stream])) return gap;
      if (rpos + 1 >= static_cast<int>(veh.route.size()))
        throw std::logic_error("route ends at an interior node");
      li = veh.route[rpos + 1];
      ++rpos;
      if (occ_[li][0] >= 0) return gap;
      ++gap;
      pos = 0;
    }
    return gap;
  }

  void move_vehicle(Vehicle& veh, int v) {
    veh.v = v;
    if (v == 0) return;
    occ_[veh.link][veh.cell] = -1;
    crossings_.clear();
    int remaining = v;
    bool gone = false;
    while (true) {
      const int last = net_.links()[veh.link].cells - 1;
      if (veh.cell + remaining <= last) {
        veh.cell += remaining;
        break;
      }
      remaining -= (last - veh.cell) + 1;  // consumed up to the next link's cell 0
      const int tn = net_.links()[veh.link].to_node;
      if (tn < 0) {
        gone = true;
        break;
      }
      const int stream = net_.stream_of_link(veh.link);
      if (is_stop(faces_[tn][stream]))
        throw std::logic_error("vehicle crossed a non-green stop line");
      crossings_.push_back({tn, veh.link});
      ++veh.route_pos;
      veh.link = veh.route[veh.route_pos];
      veh.cell = 0;
      if (remaining == 0) break;
    }

    if (gone) {
      trips_[veh.id].travelled = trips_[veh.id].route_cells;
      trips_[veh.id].exited = step_ + 1;
      for (const auto& c : crossings_)
        events_.push_back({WorldEvent::Kind::crossed, step_ + 1, veh.id, c.node,
                           c.from_link, veh.route[veh.route_pos], 0, v});
      events_.push_back({WorldEvent::Kind::exited, step_ + 1, veh.id, -1, veh.link, -1, -1, v});
      alive_[veh.id] = 0;
      --active_count_;
      ++total_exited_;
      veh.link = -1;
      return;
    }

    trips_[veh.id].travelled += v;
    for (const auto& c : crossings_)
      events_.push_back({WorldEvent::Kind::crossed, step_ + 1, veh.id, c.node,
                         c.from_link, veh.link, veh.cell, v});
    occ_[veh.link][veh.cell] = veh.id;
  }

  const RoadNetwork& net_;
  NaschParams params_;
  Rng arrivals_rng_;
  Rng dynamics_rng_;
  double turn_probability_;
  long step_ = 0;

  std::vector<std::vector<int>> occ_;
  std::vector<std::array<Face, 2>> faces_;
  std::vector<double> demand_;
  std::vector<std::deque<PendingArrival>> queues_;
  std::vector<Vehicle> vehicles_;
  std::vector<char> alive_;
  std::vector<TripRecord> trips_;
  std::vector<WorldEvent> events_;
  std::vector<int> order_;
  std::vector<int> new_v_;
  std::vector<Crossing> crossings_;
  int active_count_ = 0;
  long total_entered_ = 0;
  long total_exited_ = 0;
};

}  // namespace vsnsim
