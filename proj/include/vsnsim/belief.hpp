#pragma once

// Controller-side fuzzy cellular lane model. Each tracked vehicle carries a
// fuzzy position X and fuzzy velocity V whose four components evolve as
// ordered scenarios of the ground-truth motion rules: every component
// accelerates and respects its scenario's headway, and the first component
// additionally brakes, so the support accumulates exactly the spread a
// random slowdown can cause. Acquired positions collapse a vehicle to a
// crisp state; otherwise uncertainty persists across the whole trip: when a
// vehicle's entire support clears the stop line its fuzzy state is handed
// over to the model of the next lane on its announced route.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vsnsim/fuzzy.hpp"
#include "vsnsim/vsn_link.hpp"
#include "vsnsim/world.hpp"

namespace vsnsim {

struct BeliefParams {
  int v_max = 2;
  double p_brake = 0.15;  // kernel calibration: expected random-slowdown loss
  double horizon_cap_s = 120.0;
};

struct FuzzyVehicle {
  int id = -1;
  FuzzyNumber X;  // cells on the model's lane; may straddle the stop line
  FuzzyNumber V;  // cells per step; scenario-paired, possibly improper
  long last_acquired = -1;
  std::vector<int> route;  // announced link sequence
  int route_pos = 0;       // index of the model's lane within the route
  bool announced = false;  // a copy of the state was handed downstream
};

struct Prediction {
  FuzzyNumber N = FuzzyNumber::crisp(0);  // vehicles
  FuzzyNumber G = FuzzyNumber::crisp(0);  // seconds
  bool capped = false;
};

// A vehicle state crossing between lane models, re-based to the
// coordinates of the destination lane.
struct LaneTransfer {
  FuzzyVehicle vehicle;
  int dest_link = -1;  // -1: past the last signal, state is discarded
};

// Withdraws a previously announced state (the kernel pulled back upstream).
struct LaneRetraction {
  int vehicle = -1;
  int dest_link = -1;
};

class LaneModel {
 public:
  LaneModel(int lane_cells, BeliefParams params, long start_step = 0, int link = -1,
            const RoadNetwork* net = nullptr)
      : cells_(lane_cells), params_(params), model_step_(start_step), link_(link),
        net_(net) {}

  long model_step() const { return model_step_; }
  int lane_cells() const { return cells_; }
  int link() const { return link_; }
  const std::vector<FuzzyVehicle>& vehicles() const { return fleet_; }

  const FuzzyVehicle* find(int id) const {
    for (const auto& v : fleet_)
      if (v.id == id) return &v;
    return nullptr;
  }

  // One bundled model update: assimilate acquired positions, take over
  // vehicles handed off by the upstream model, advance the fuzzy motion
  // until the model clock reaches the world clock, emit hand-offs for
  // vehicles whose support cleared the stop line, then insert newly
  // registered vehicles crisp.
  void update(Face face, long world_step, std::span<const PositionResponse> measurements,
              std::span<const HelloMessage> hellos,
              std::span<const FuzzyVehicle> handoffs_in = {},
              std::span<const int> drop_ids = {}) {
    for (const auto& m : measurements) assimilate(m);
    for (const auto& v : handoffs_in)
      if (!find(v.id)) fleet_.push_back(v);
    while (model_step_ < world_step) advance(face);
    for (const int id : drop_ids) remove(id);
    emit_cleared();
    for (const auto& h : hellos) insert(h);
  }

  std::vector<LaneTransfer> take_handoffs() { return std::exchange(handoffs_out_, {}); }
  std::vector<LaneRetraction> take_retractions() { return std::exchange(retractions_out_, {}); }

  // Replace the vehicle's state with the exact measured one. The response
  // may locate the vehicle one link ahead of or behind this lane; the cell
  // is re-based into this lane's coordinates.
  void assimilate(const PositionResponse& m) {
    for (auto& v : fleet_) {
      if (v.id != m.vehicle) continue;
      v.X = FuzzyNumber::crisp(rebase_cell(v, m));
      v.V = FuzzyNumber::crisp(m.velocity);
      v.last_acquired = m.step;
      return;
    }
    throw std::invalid_argument("assimilate: vehicle " + std::to_string(m.vehicle) +
                                " is not tracked by this lane");
  }

  void insert(const HelloMessage& h) {
    FuzzyVehicle v;
    v.id = h.vehicle;
    v.X = FuzzyNumber::crisp(h.cell);
    v.V = FuzzyNumber::crisp(h.velocity);
    v.last_acquired = h.step;
    v.route = h.route;
    for (std::size_t i = 0; i < h.route.size(); ++i)
      if (h.route[i] == h.link) v.route_pos = static_cast<int>(i);
    fleet_.push_back(v);  // new vehicles appear upstream of everything tracked
  }

  void remove(int id) {
    std::erase_if(fleet_, [id](const FuzzyVehicle& v) { return v.id == id; });
  }

  // Faster-than-real-time clearance forecast under an assumed green face.
  // Scenario k starts every vehicle at (X.q_k, V.q_k) and runs the
  // deterministic motion rules; the four clearance times and passage counts
  // form the quadruples of G and N.
  Prediction predict(double tau_after_green) const {
    Prediction out;
    if (fleet_.empty()) return out;

    const int cap = static_cast<int>(std::llround(params_.horizon_cap_s));
    const int horizon = cap + static_cast<int>(std::ceil(tau_after_green));
    std::array<double, 4> g{};
    std::array<double, 4> n{};

    for (int k = 0; k < 4; ++k) {
      positions_.clear();
      speeds_.clear();
      crossing_.assign(fleet_.size(), -1);
      for (const auto& veh : fleet_) {
        positions_.push_back(static_cast<int>(std::llround(veh.X.component(k))));
        speeds_.push_back(static_cast<int>(std::llround(veh.V.component(k))));
      }
      // scenario feasibility: one vehicle per cell, front first
      for (std::size_t j = 1; j < positions_.size(); ++j)
        positions_[j] = std::min(positions_[j], positions_[j - 1] - 1);

      std::size_t remaining = fleet_.size();
      in_lane_.assign(fleet_.size(), 1);
      for (std::size_t j = 0; j < positions_.size(); ++j) {
        if (positions_[j] >= cells_) {
          crossing_[j] = 0;
          in_lane_[j] = 0;  // this scenario already passed the stop line
          --remaining;
        } else if (positions_[j] < 0) {
          in_lane_[j] = 0;  // this scenario is still upstream's to count
        }
      }

      int t = 0;
      while (remaining > 0 && t < horizon) {
        ++t;
        int leader_old = 1 << 28;  // front vehicle is unconstrained under green
        for (std::size_t j = 0; j < positions_.size(); ++j) {
          const int old_pos = positions_[j];
          if (crossing_[j] >= 0) {
            // already past the stop line: accelerates away but still binds
            // the discharge headway of its follower
            speeds_[j] = std::min(speeds_[j] + 1, params_.v_max);
            positions_[j] += speeds_[j];
            leader_old = old_pos;
            continue;
          }
          int v = std::min(speeds_[j] + 1, params_.v_max);
          v = std::min(v, leader_old - old_pos - 1);
          v = std::max(v, 0);
          positions_[j] = old_pos + v;
          speeds_[j] = v;
          leader_old = old_pos;
          if (positions_[j] >= cells_) {
            crossing_[j] = t;
            --remaining;
          }
        }
      }

      int gk = 0;
      for (const int c : crossing_) gk = std::max(gk, c >= 0 ? c : cap + 1);
      if (gk > cap) {
        gk = cap;
        out.capped = true;
      }
      g[k] = gk;
      int nk = 0;
      for (std::size_t j = 0; j < crossing_.size(); ++j)
        if (in_lane_[j] && crossing_[j] >= 0 && crossing_[j] <= gk + tau_after_green) ++nk;
      n[k] = nk;
    }

    out.G = FuzzyNumber{g[0], g[1], g[2], g[3]}.normalized();
    out.N = FuzzyNumber{n[0], n[1], n[2], n[3]}.normalized();
    return out;
  }

 private:
  // Synchronous fuzzy motion for one second. The nominal velocity (the
  // kernel of V) accelerates and respects the headway like the ground-truth
  // rules; the fuzzified intent extends its support one cell of possible
  // random slowdown below the nominal and is refuzzified from the nominal
  // every step, so a stopped vehicle's pessimistic edge recovers once it can
  // move again. Headways pair scenario k of a vehicle with scenario k of
  // its leader's pre-step state; a red or intergreen face acts as a crisp
  // virtual leader at the stop line, which keeps every component at or
  // behind the last cell.
  void advance(Face face) {
    FuzzyNumber leader_old;
    bool have_leader = false;

    for (auto& veh : fleet_) {
      const FuzzyNumber x_old = veh.X;
      const double v_next =
          std::min(veh.V.q2 + 1.0, static_cast<double>(params_.v_max));
      // support edges are the single-slowdown envelope of the intent; the
      // kernel follows the expected speed so the most possible position
      // tracks the mean instead of drifting ahead of it
      const double v_kernel = std::max(v_next - params_.p_brake, 0.0);
      FuzzyNumber v{std::max(v_next - 1.0, 0.0), v_kernel, v_kernel, v_next};
      if (have_leader) {
        v = fuzzy_min(v, leader_old - veh.X - FuzzyNumber::crisp(1));
      } else if (face != Face::green) {
        v = fuzzy_min(v, FuzzyNumber::crisp(cells_) - veh.X - FuzzyNumber::crisp(1));
      }
      v = fuzzy_max(v, FuzzyNumber::crisp(0));
      veh.V = v;
      veh.X = veh.X + v;
      if (face != Face::green) {
        // a closed stop line splits a straddling state into branches: the
        // announced downstream copy keeps the crossed one, this state is
        // conditioned on not having crossed and may announce again later
        if (veh.X.q2 >= cells_) veh.announced = false;
        veh.X = fuzzy_min(veh.X, FuzzyNumber::crisp(cells_ - 1));
      }
      leader_old = x_old;
      have_leader = true;
    }
    ++model_step_;
  }

  // Boundary bookkeeping. A vehicle whose kernel passed the stop line is
  // announced to the next lane on its route with its full straddling state
  // (a negative left support records that it may still be upstream); the
  // local copy stays until the entire support clears, so this lane keeps an
  // honest "possibly still here" tail while the next lane already sees the
  // arrival. Announcements are withdrawn if an acquisition pulls the kernel
  // back, and a state whose kernel falls behind the lane start returns to
  // the previous lane wholesale.
  void emit_cleared() {
    std::size_t kept = 0;
    for (std::size_t i = 0; i < fleet_.size(); ++i) {
      FuzzyVehicle& v = fleet_[i];
      const int next_link =
          v.route_pos + 1 < static_cast<int>(v.route.size()) ? v.route[v.route_pos + 1]
                                                             : -1;
      if (!v.announced && v.X.q2 >= cells_) {
        v.announced = true;
        LaneTransfer t;
        t.vehicle = v;
        t.vehicle.X = t.vehicle.X - FuzzyNumber::crisp(cells_);
        ++t.vehicle.route_pos;
        t.vehicle.announced = false;
        t.dest_link = next_link;
        handoffs_out_.push_back(std::move(t));
      } else if (v.announced && v.X.q2 < cells_) {
        v.announced = false;
        retractions_out_.push_back({v.id, next_link});
      }

      if (v.X.q1 >= cells_) continue;  // fully cleared; downstream has the state

      if (v.X.q2 < 0 && v.route_pos > 0 && net_) {
        LaneTransfer t;
        t.vehicle = std::move(v);
        --t.vehicle.route_pos;
        t.dest_link = t.vehicle.route[t.vehicle.route_pos];
        t.vehicle.X =
            t.vehicle.X + FuzzyNumber::crisp(net_->links()[t.dest_link].cells);
        t.vehicle.announced = false;
        handoffs_out_.push_back(std::move(t));
        continue;
      }

      if (kept != i) fleet_[kept] = std::move(v);
      ++kept;
    }
    fleet_.resize(kept);
  }

  // The response may locate the vehicle on another link of its route; the
  // measured cell is expressed in this lane's coordinates (past the stop
  // line when the truth is ahead, negative when it has not arrived yet).
  double rebase_cell(const FuzzyVehicle& v, const PositionResponse& m) const {
    if (m.link == link_ || link_ < 0) return m.cell;
    double off = cells_;
    for (int i = v.route_pos + 1; i < static_cast<int>(v.route.size()); ++i) {
      if (v.route[i] == m.link) return off + m.cell;
      if (!net_) break;
      off += net_->links()[v.route[i]].cells;
    }
    off = 0.0;
    for (int i = v.route_pos - 1; i >= 0; --i) {
      off -= net_ ? net_->links()[v.route[i]].cells : m.link_cells;
      if (v.route[i] == m.link) return off + m.cell;
      if (!net_) break;
    }
    throw std::logic_error("assimilate: response link is not on the tracked route");
  }

  int cells_;
  BeliefParams params_;
  long model_step_;
  int link_;
  const RoadNetwork* net_;
  std::vector<FuzzyVehicle> fleet_;  // front (nearest the stop line) first
  std::vector<LaneTransfer> handoffs_out_;
  std::vector<LaneRetraction> retractions_out_;

  mutable std::vector<int> positions_;
  mutable std::vector<int> speeds_;
  mutable std::vector<int> crossing_;
  mutable std::vector<char> in_lane_;
};

inline double position_uncertainty(const FuzzyVehicle& v) {
  return uncertainty(v.X.normalized());
}

}  // namespace vsnsim
