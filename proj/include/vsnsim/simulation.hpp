#pragma once

// One scenario cell: the ground-truth world, the sensor channel, one
// controller per intersection and the selected data-collection policy, all
// advanced in lock-step seconds. Also hosts the safety monitor used by the
// verification suite (dual greens, clearance separation, service waits).

#include <cstdint>
#include <memory>
#include <vector>

#include "vsnsim/collection.hpp"
#include "vsnsim/scenario.hpp"
#include "vsnsim/vsn_link.hpp"

namespace vsnsim {

struct RunRecord {
  double saturation = 0.0;
  int algorithm = 1;
  double threshold = 0.0;
  double avg_delay_s = 0.0;
  long transfers_total = 0;
  double transfers_per_vehicle = 0.0;
  long vehicles_completed = 0;
  std::uint64_t seed = 0;
};

struct SafetyStats {
  long dual_green_steps = 0;
  long separation_violations = 0;  // switches whose all-stop gap != tau
  long max_demanded_wait_s = 0;    // longest red with at least one waiting vehicle
  long held_steps = 0;             // policy-3 holds
};

class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, double saturation, std::uint64_t seed)
      : cfg_(cfg),
        saturation_(saturation),
        seed_(seed),
        topo_(cfg.load_topology()),
        net_(topo_),
        world_(net_, cfg.nasch, seed),
        vsn_(world_, cfg.handoff_forwarding),
        policy_(cfg.policy()) {
    world_.set_uniform_demand(cfg.entry_lambda(saturation));
    world_.set_turn_probability(cfg.turn_probability);
    for (int n = 0; n < net_.node_count(); ++n) {
      const std::array<int, 2> in_links = net_.nodes()[n].in_links;
      const std::array<int, 2> cells{net_.links()[in_links[0]].cells,
                                     net_.links()[in_links[1]].cells};
      controllers_.emplace_back(
          std::make_unique<IntersectionController>(cells, cfg.controller, 0, 0, in_links, &net_));
    }
    ledgers_.resize(net_.node_count());
    monitors_.resize(net_.node_count());
    results_.resize(net_.node_count());
    pending_handoffs_.resize(net_.link_count());
    staged_handoffs_.resize(net_.link_count());
    pending_retractions_.resize(net_.link_count());
    staged_retractions_.resize(net_.link_count());
    push_faces();
  }

  void step() {
    const long t = world_.current_step();
    world_.generate_arrivals();
    vsn_.ingest(world_.take_events());

    for (int n = 0; n < net_.node_count(); ++n) {
      NodeInputs in;
      in.step = t;
      for (const HelloMessage& h : vsn_.take_inbox(n)) {
        const int stream = net_.stream_of_link(h.link);
        in.lanes[stream].hellos.push_back(h);
      }
      for (int s = 0; s < 2; ++s) {
        const int li = net_.nodes()[n].in_links[s];
        in.lanes[s].handoffs = std::exchange(pending_handoffs_[li], {});
        in.lanes[s].departures = std::exchange(pending_retractions_[li], {});
      }
      if (cfg_.handoff_forwarding) {
        const std::vector<int> departures = vsn_.take_departures(n);
        in.lanes[0].departures = departures;
        in.lanes[1].departures = departures;  // removal is a no-op on the other lane
      }

      auto query = [this, n, t](int, const std::vector<int>& ids) {
        return vsn_.query_positions(n, ids, t);
      };
      results_[n] = run_step(policy_, *controllers_[n], in, query, ledgers_[n]);
      if (!results_[n].executed) ++safety_.held_steps;

      // fuzzy states announced across this node's stop lines move to the
      // models of their next lanes at the start of the next second;
      // withdrawn announcements are removed there the same way
      for (int s = 0; s < 2; ++s) {
        for (LaneTransfer& tr : controllers_[n]->lane(s).take_handoffs()) {
          if (cfg_.handoff_forwarding) continue;  // crisp hello arrives instead
          if (tr.dest_link < 0 || net_.links()[tr.dest_link].to_node < 0) continue;
          staged_handoffs_[tr.dest_link].push_back(std::move(tr.vehicle));
        }
        for (const LaneRetraction& r : controllers_[n]->lane(s).take_retractions()) {
          if (cfg_.handoff_forwarding) continue;
          if (r.dest_link < 0 || net_.links()[r.dest_link].to_node < 0) continue;
          staged_retractions_[r.dest_link].push_back(r.vehicle);
        }
      }
    }
    push_faces();
    monitor(t);

    world_.step();
    vsn_.ingest(world_.take_events());
    for (int n = 0; n < net_.node_count(); ++n) controllers_[n]->tick();
    push_faces();
    pending_handoffs_.swap(staged_handoffs_);
    pending_retractions_.swap(staged_retractions_);
  }

  void run() {
    while (world_.current_step() < cfg_.duration_s) step();
    finalize();
  }

  RunRecord record() const {
    RunRecord r;
    r.saturation = saturation_;
    r.algorithm = cfg_.algorithm;
    r.threshold = cfg_.threshold();
    r.seed = seed_;
    const auto d = world_.delay_stats(cfg_.warmup_s, cfg_.duration_s, cfg_.include_queue_wait);
    r.avg_delay_s = d.avg_delay_s;
    r.vehicles_completed = d.vehicles_completed;
    for (const auto& l : ledgers_)
      r.transfers_total += l.total_in_window(cfg_.warmup_s, cfg_.duration_s);
    if (cfg_.count_hellos_as_transfers) {
      for (const auto& m : vsn_.log())
        if ((m.type == MsgType::hello || m.type == MsgType::handoff) &&
            m.step >= cfg_.warmup_s && m.step < cfg_.duration_s)
          ++r.transfers_total;
    }
    r.transfers_per_vehicle =
        r.vehicles_completed > 0
            ? static_cast<double>(r.transfers_total) / static_cast<double>(r.vehicles_completed)
            : 0.0;
    return r;
  }

  const SafetyStats& safety() const { return safety_; }
  World& world() { return world_; }
  const World& world() const { return world_; }
  VsnLink& vsn() { return vsn_; }
  const VsnLink& vsn() const { return vsn_; }
  IntersectionController& controller(int n) { return *controllers_[n]; }
  const TransferLedger& ledger(int n) const { return ledgers_[n]; }
  const StepResult& last_result(int n) const { return results_[n]; }
  const RoadNetwork& net() const { return net_; }
  const ScenarioConfig& config() const { return cfg_; }

 private:
  void push_faces() {
    for (int n = 0; n < net_.node_count(); ++n)
      for (int s = 0; s < 2; ++s) world_.set_face(n, s, controllers_[n]->face(s));
  }

  // Tracks the faces the world is about to move under.
  void monitor(long t) {
    for (int n = 0; n < net_.node_count(); ++n) {
      NodeMonitor& m = monitors_[n];
      int greens = 0;
      for (int s = 0; s < 2; ++s)
        if (world_.face(n, s) == Face::green) ++greens;
      if (greens > 1) ++safety_.dual_green_steps;

      for (int s = 0; s < 2; ++s) {
        const bool green = world_.face(n, s) == Face::green;
        const bool was_green = m.was_green[s];
        if (was_green && !green) {
          m.green_end[s] = t;
          m.red_onset[s] = t;
          m.demanded[s] = false;
        }
        if (!was_green && green) {
          const int other = 1 - s;
          if (m.green_end[other] >= 0 &&
              t - m.green_end[other] != static_cast<long>(cfg_.controller.tau))
            ++safety_.separation_violations;
        }
        if (!green) {
          if (!world_.vehicles_on_link(net_.nodes()[n].in_links[s]).empty())
            m.demanded[s] = true;
          if (m.demanded[s] && m.red_onset[s] >= 0)
            safety_.max_demanded_wait_s =
                std::max(safety_.max_demanded_wait_s, t - m.red_onset[s]);
        }
        m.was_green[s] = green;
      }
    }
  }

  void finalize() {}

  struct NodeMonitor {
    std::array<bool, 2> was_green{false, false};
    std::array<long, 2> green_end{-1, -1};
    std::array<long, 2> red_onset{0, 0};
    std::array<bool, 2> demanded{false, false};
  };

  ScenarioConfig cfg_;
  double saturation_;
  std::uint64_t seed_;
  Topology topo_;
  RoadNetwork net_;
  World world_;
  VsnLink vsn_;
  CollectionPolicy policy_;
  std::vector<std::unique_ptr<IntersectionController>> controllers_;
  std::vector<TransferLedger> ledgers_;
  std::vector<NodeMonitor> monitors_;
  std::vector<StepResult> results_;
  std::vector<std::vector<FuzzyVehicle>> pending_handoffs_;  // by destination link
  std::vector<std::vector<FuzzyVehicle>> staged_handoffs_;
  std::vector<std::vector<int>> pending_retractions_;
  std::vector<std::vector<int>> staged_retractions_;
  SafetyStats safety_;
};

}  // namespace vsnsim
