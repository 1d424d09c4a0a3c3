#pragma once

// Simulated vehicle-to-infrastructure channel. A vehicle registers once, on
// network entry, with a hello message carrying its entry position and
// announced route. Position queries are addressed by vehicle id and answered
// from live ground truth with zero loss and zero latency; vehicles that have
// left the network no longer answer. One response equals one data transfer,
// the channel-load metric. An optional forwarding mode additionally emits a
// hello to the next control node whenever a vehicle physically crosses a
// stop line (a free crisp re-registration, off by default).

#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "vsnsim/world.hpp"

namespace vsnsim {

struct HelloMessage {
  int vehicle = -1;
  int link = -1;
  int cell = 0;
  int velocity = 0;
  long step = 0;
  bool handoff = false;
  std::vector<int> route;
};

struct PositionResponse {
  int vehicle = -1;
  int link = -1;
  int link_cells = 0;
  int cell = 0;
  int velocity = 0;
  long step = 0;
};

enum class MsgType { hello, handoff, query, response };

struct MessageRecord {
  long step;
  MsgType type;
  int node;
  int vehicle;
  int cell;
  int velocity;
};

inline const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::hello: return "hello";
    case MsgType::handoff: return "handoff";
    case MsgType::query: return "query";
    default: return "response";
  }
}

class VsnLink {
 public:
  explicit VsnLink(const World& world, bool forward_handoffs = false)
      : world_(world), net_(world.net()), forward_handoffs_(forward_handoffs) {
    inbox_.resize(net_.node_count());
    departures_.resize(net_.node_count());
    transfers_by_node_.assign(net_.node_count(), 0);
  }

  // --- world-event ingestion -------------------------------------------

  void on_entered(int vehicle, int link, int cell, int velocity, long step) {
    if (registered_.count(vehicle))
      throw std::invalid_argument("duplicate registration of vehicle " +
                                  std::to_string(vehicle));
    registered_[vehicle] = true;
    const int node = net_.links()[link].to_node;
    if (node < 0) return;  // the entry link runs straight to a boundary
    log_.push_back({step, MsgType::hello, node, vehicle, cell, velocity});
    ++hello_count_;
    HelloMessage h{vehicle, link, cell, velocity, step, false,
                   world_.vehicle(vehicle).route};
    inbox_[node].push_back(std::move(h));
  }

  void on_crossed(int vehicle, int from_link, int to_link, int cell, int velocity,
                  long step) {
    if (!forward_handoffs_) return;
    const int old_node = net_.links()[from_link].to_node;
    const int new_node = to_link >= 0 ? net_.links()[to_link].to_node : -1;
    if (old_node >= 0) departures_[old_node].push_back(vehicle);
    if (new_node >= 0) {
      log_.push_back({step, MsgType::handoff, new_node, vehicle, cell, velocity});
      ++hello_count_;
      HelloMessage h{vehicle, to_link, cell, velocity, step, true,
                     world_.vehicle(vehicle).route};
      inbox_[new_node].push_back(std::move(h));
    }
  }

  void on_exited(int vehicle, long step) {
    (void)vehicle;
    (void)step;
  }

  void ingest(const std::vector<WorldEvent>& events) {
    for (const auto& ev : events) {
      switch (ev.kind) {
        case WorldEvent::Kind::entered:
          on_entered(ev.vehicle, ev.to_link, ev.cell, ev.v, ev.step);
          break;
        case WorldEvent::Kind::crossed:
          on_crossed(ev.vehicle, ev.from_link, ev.to_link, ev.cell, ev.v, ev.step);
          break;
        case WorldEvent::Kind::exited:
          on_exited(ev.vehicle, ev.step);
          break;
      }
    }
  }

  // --- node side ---------------------------------------------------------

  std::vector<HelloMessage> take_inbox(int node) { return std::exchange(inbox_[node], {}); }
  std::vector<int> take_departures(int node) { return std::exchange(departures_[node], {}); }

  // One response per queried vehicle that is still on the road, carrying its
  // exact current link, cell and velocity. Vehicles that already left the
  // network do not answer. Each response counts as one data transfer.
  std::vector<PositionResponse> query_positions(int node, std::span<const int> ids,
                                                long step) {
    std::vector<PositionResponse> out;
    if (ids.empty()) return out;
    log_.push_back({step, MsgType::query, node, -1, static_cast<int>(ids.size()), 0});
    out.reserve(ids.size());
    for (const int id : ids) {
      if (!registered_.count(id))
        throw std::invalid_argument("query for unregistered vehicle " + std::to_string(id));
      if (!world_.is_active(id)) continue;  // left the network, no answer
      const Vehicle& veh = world_.vehicle(id);
      out.push_back({id, veh.link, net_.links()[veh.link].cells, veh.cell, veh.v, step});
      log_.push_back({step, MsgType::response, node, id, veh.cell, veh.v});
      ++transfer_count_;
      ++transfers_by_node_[node];
    }
    return out;
  }

  long transfer_count() const { return transfer_count_; }
  long transfers_at(int node) const { return transfers_by_node_[node]; }
  long hello_count() const { return hello_count_; }
  const std::vector<MessageRecord>& log() const { return log_; }

  long response_records() const {
    long n = 0;
    for (const auto& r : log_)
      if (r.type == MsgType::response) ++n;
    return n;
  }

  // Line-delimited JSON trace, one record per message.
  void dump_trace(std::ostream& os) const {
    for (const auto& r : log_) {
      nlohmann::json j{{"step", r.step},
                       {"type", to_string(r.type)},
                       {"intersection", r.node},
                       {"vehicle", r.vehicle},
                       {"payload", {{"cell", r.cell}, {"velocity", r.velocity}}}};
      os << j.dump() << '\n';
    }
  }

 private:
  const World& world_;
  const RoadNetwork& net_;
  bool forward_handoffs_;
  std::map<int, bool> registered_;
  std::vector<std::vector<HelloMessage>> inbox_;
  std::vector<std::vector<int>> departures_;
  std::vector<MessageRecord> log_;
  std::vector<long> transfers_by_node_;
  long transfer_count_ = 0;
  long hello_count_ = 0;
};

}  // namespace vsnsim
