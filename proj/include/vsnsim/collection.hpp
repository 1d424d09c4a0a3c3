#pragma once

// The three uncertainty-dependent data collection policies. Each one runs a
// full control step for one intersection: bring the lane models up to the
// current second, decide what to acquire from the sensor network, fold the
// responses back in, predict, decide and (except for a held step under
// policy 3) execute. Acquisition is abstracted behind a query callable so
// the same flows run against the real channel and against test stubs.

#include <array>
#include <vector>

#include "vsnsim/controller.hpp"
#include "vsnsim/vsn_link.hpp"

namespace vsnsim {

enum class Algorithm { alg1 = 1, alg2 = 2, alg3 = 3 };

struct CollectionPolicy {
  Algorithm kind = Algorithm::alg1;
  double threshold = 0.0;  // ut_pos cells | ut_pred seconds | ut_dec unitless
};

struct TransferLedger {
  long total = 0;
  long hellos = 0;
  std::vector<std::pair<long, long>> per_step;  // (step, responses received)

  void add_transfers(long step, long n) {
    if (n <= 0) return;
    total += n;
    if (!per_step.empty() && per_step.back().first == step)
      per_step.back().second += n;
    else
      per_step.emplace_back(step, n);
  }

  void add_hellos(long n) { hellos += n; }

  long total_in_window(long from_step, long to_step) const {
    long sum = 0;
    for (const auto& [step, n] : per_step)
      if (step >= from_step && step < to_step) sum += n;
    return sum;
  }
};

struct LaneInbox {
  std::vector<HelloMessage> hellos;
  std::vector<FuzzyVehicle> handoffs;  // fuzzy states inherited from upstream
  std::vector<int> departures;         // forwarding mode only
};

struct NodeInputs {
  long step = 0;
  std::array<LaneInbox, 2> lanes;
};

struct StepResult {
  Decision decision;
  DecisionUncertainty uncertainty;
  bool executed = true;
  long acquisitions = 0;
};

namespace detail {

inline void update_models(IntersectionController& ctl, const NodeInputs& in) {
  for (int i = 0; i < 2; ++i)
    ctl.lane(i).update(ctl.motion_face(i), in.step, {}, in.lanes[i].hellos,
                       in.lanes[i].handoffs, in.lanes[i].departures);
}

template <class QueryFn>
long acquire(IntersectionController& ctl, int lane, std::vector<int> ids, QueryFn& query,
             long step, TransferLedger& ledger) {
  if (ids.empty()) return 0;
  const std::vector<PositionResponse> rs = query(lane, ids);
  ledger.add_transfers(step, static_cast<long>(rs.size()));
  // queried vehicles that no longer answer have left the network
  std::vector<int> gone;
  if (rs.size() != ids.size()) {
    for (const int id : ids) {
      bool seen = false;
      for (const auto& r : rs) seen = seen || r.vehicle == id;
      if (!seen) gone.push_back(id);
    }
  }
  ctl.lane(lane).update(ctl.motion_face(lane), step, rs, {}, {}, gone);
  return static_cast<long>(rs.size());
}

inline std::vector<int> ids_above(const LaneModel& lane, double ut_pos) {
  std::vector<int> ids;
  for (const auto& v : lane.vehicles())
    if (position_uncertainty(v) > ut_pos) ids.push_back(v.id);
  return ids;
}

}  // namespace detail

// Acquire every vehicle whose position uncertainty exceeds ut_pos.
template <class QueryFn>
StepResult run_step_alg1(IntersectionController& ctl, const NodeInputs& in, QueryFn query,
                         double ut_pos, TransferLedger& ledger) {
  detail::update_models(ctl, in);
  long acq = 0;
  for (int i = 0; i < 2; ++i)
    acq += detail::acquire(ctl, i, detail::ids_above(ctl.lane(i), ut_pos), query, in.step, ledger);
  ctl.predict_all();
  ctl.refresh_stabilization();
  const Decision d = ctl.decide();
  const DecisionUncertainty u = ctl.decision_uncertainty(d);
  ctl.execute(d.stream);
  ctl.commit_motion_faces();
  return {d, u, true, acq};
}

// Acquire whole lanes whose predicted green-time uncertainty exceeds
// ut_pred, restricted to vehicles the model cannot place exactly.
template <class QueryFn>
StepResult run_step_alg2(IntersectionController& ctl, const NodeInputs& in, QueryFn query,
                         double ut_pred, TransferLedger& ledger) {
  detail::update_models(ctl, in);
  ctl.predict_all();
  long acq = 0;
  for (int i = 0; i < 2; ++i) {
    if (uncertainty(ctl.stream(i).pred.G) > ut_pred)
      acq += detail::acquire(ctl, i, detail::ids_above(ctl.lane(i), 0.0), query, in.step, ledger);
  }
  if (acq > 0) ctl.predict_all();
  ctl.refresh_stabilization();
  const Decision d = ctl.decide();
  const DecisionUncertainty u = ctl.decision_uncertainty(d);
  ctl.execute(d.stream);
  ctl.commit_motion_faces();
  return {d, u, true, acq};
}

// Acquire everything uncertain only when the tentative control decision is
// itself too uncertain; execute only a decision whose uncertainty is within
// ut_dec, otherwise hold the current faces for this step.
template <class QueryFn>
StepResult run_step_alg3(IntersectionController& ctl, const NodeInputs& in, QueryFn query,
                         double ut_dec, TransferLedger& ledger) {
  detail::update_models(ctl, in);
  ctl.predict_all();
  ctl.refresh_stabilization();
  Decision d = ctl.decide();
  DecisionUncertainty u = ctl.decision_uncertainty(d);
  long acq = 0;
  if (u.total > ut_dec) {
    for (int i = 0; i < 2; ++i)
      acq += detail::acquire(ctl, i, detail::ids_above(ctl.lane(i), 0.0), query, in.step, ledger);
    if (acq > 0) {
      ctl.predict_all();
      ctl.refresh_stabilization();
      d = ctl.decide();
      u = ctl.decision_uncertainty(d);
    }
  }
  const bool execute = u.total <= ut_dec;
  if (execute) ctl.execute(d.stream);
  ctl.commit_motion_faces();
  return {d, u, execute, acq};
}

template <class QueryFn>
StepResult run_step(CollectionPolicy policy, IntersectionController& ctl, const NodeInputs& in,
                    QueryFn query, TransferLedger& ledger) {
  switch (policy.kind) {
    case Algorithm::alg1: return run_step_alg1(ctl, in, query, policy.threshold, ledger);
    case Algorithm::alg2: return run_step_alg2(ctl, in, query, policy.threshold, ledger);
    default: return run_step_alg3(ctl, in, query, policy.threshold, ledger);
  }
}

}  // namespace vsnsim
