#pragma once

// Self-organized two-stream intersection controller. Every second it
// refreshes the predicted service intervals Z_i = r_i + tau0 + G_i, keeps
// the FIFO set Omega of streams whose Z_i reached T_max with probability
// above one half, computes priorities pi_i = N_i / (tau_pen + tau + G_i),
// and serves head(Omega) when Omega is non-empty or the priority argmax
// otherwise. Switching always passes through a fixed intergreen clearance.

#include <deque>
#include <vector>

#include "vsnsim/belief.hpp"
#include "vsnsim/fuzzy.hpp"

namespace vsnsim {

struct ControllerParams {
  double t_max = 120.0;
  double tau = 5.0;        // intergreen after a green
  double tau0 = 5.0;       // intergreen before a green (enters Z)
  double tau_pen = 15.0;   // switching penalty when i != sigma
  double eps_denominator = 1.0;
  double min_green = 0.0;
  BeliefParams belief;
};

struct StreamState {
  long r = 0;  // seconds of red since this stream's green last ended
  Prediction pred;
  FuzzyNumber Z = FuzzyNumber::crisp(0);
  FuzzyNumber pi = FuzzyNumber::crisp(0);
};

struct Decision {
  int stream = 0;
  double confidence = 1.0;
  bool stabilized = false;  // taken from Omega rather than the priority rule
};

struct DecisionUncertainty {
  double total = 0.0;
  double stab = 0.0;
  double opt = 0.0;
};

class IntersectionController {
 public:
  IntersectionController(std::array<int, 2> lane_cells, ControllerParams params,
                         long start_step = 0, int initial_green = 0,
                         std::array<int, 2> lane_links = {-1, -1},
                         const RoadNetwork* net = nullptr)
      : params_(params),
        lanes_{LaneModel(lane_cells[0], params.belief, start_step, lane_links[0], net),
               LaneModel(lane_cells[1], params.belief, start_step, lane_links[1], net)},
        sigma_(initial_green) {
    commit_motion_faces();
  }

  LaneModel& lane(int i) { return lanes_[i]; }
  const LaneModel& lane(int i) const { return lanes_[i]; }
  const StreamState& stream(int i) const { return streams_[i]; }
  int current_stream() const { return sigma_; }
  bool switching() const { return phase_ == Phase::intergreen; }
  const std::deque<int>& omega() const { return omega_; }

  Face face(int i) const {
    if (phase_ == Phase::serving) return i == sigma_ ? Face::green : Face::red;
    return i == sigma_ ? Face::intergreen : Face::red;
  }

  // The face that governed the most recent world step; the lane models
  // advance their motion under it. Snapshotted at the end of each control
  // pass, right before the world moves.
  Face motion_face(int i) const { return motion_faces_[i]; }
  void commit_motion_faces() { motion_faces_ = {face(0), face(1)}; }

  void predict_all() {
    for (int i = 0; i < 2; ++i) streams_[i].pred = lanes_[i].predict(params_.tau);
  }

  // Direct state injection for constructed scenarios and randomized audits.
  void set_prediction(int i, const Prediction& p) { streams_[i].pred = p; }
  void set_red_time(int i, long r) { streams_[i].r = r; }

  // Service-interval refresh plus Omega maintenance. A stream joins when its
  // Z_i reaches T_max with probability above one half; the head of Omega is
  // released once its stabilized service is complete, i.e. it has held green
  // for the clearance committed at insertion or its lane has emptied.
  // Without that release the head would re-elect itself every second and its
  // green could never end.
  void refresh_stabilization() {
    if (!omega_.empty()) {
      const int head = omega_.front();
      if (face(head) == Face::green &&
          (head_green_served_ >= committed_green_[head] ||
           streams_[head].pred.G.q3 <= 0.5 || lanes_[head].vehicles().empty())) {
        omega_.pop_front();
        sync_head();
      }
    }
    const FuzzyNumber t_max = FuzzyNumber::crisp(params_.t_max);
    for (int i = 0; i < 2; ++i) {
      StreamState& s = streams_[i];
      s.Z = s.pred.G + FuzzyNumber::crisp(static_cast<double>(s.r) + params_.tau0);
      if (!in_omega(i) && prob_geq(s.Z, t_max) > 0.5) {
        omega_.push_back(i);
        committed_green_[i] = std::min(std::max(1.0, s.pred.G.q3),
                                       params_.belief.horizon_cap_s);
        sync_head();
      }
      s.pi = compute_priority(i);
    }
  }

  FuzzyNumber compute_priority(int i) const {
    const double pen = (i == sigma_) ? 0.0 : params_.tau_pen;
    FuzzyNumber den = streams_[i].pred.G + FuzzyNumber::crisp(pen + params_.tau);
    den = fuzzy_max(den, FuzzyNumber::crisp(params_.eps_denominator));
    return fuzzy_div(streams_[i].pred.N, den).normalized();
  }

  Decision decide() const {
    if (!omega_.empty()) return {omega_.front(), 1.0, true};
    const std::array<FuzzyNumber, 2> pis{streams_[0].pi, streams_[1].pi};
    const ArgmaxResult r = fuzzy_argmax(pis);
    return {static_cast<int>(r.index), r.confidence, false};
  }

  // Stabilization and optimization uncertainties of the chosen stream. The
  // optimization term is zero whenever the stabilization rule determined the
  // decision: that holds by construction for any stream whose service
  // interval reached T_max with probability above one half (it is in Omega
  // then, so the decision is the Omega head), and also for an Omega head
  // already under way whose remaining Z has dropped, where second-guessing
  // the committed service by priority comparisons would be meaningless.
  DecisionUncertainty decision_uncertainty(const Decision& d) const {
    const int sigma = d.stream;
    const FuzzyNumber t_max = FuzzyNumber::crisp(params_.t_max);
    const double p_stab = prob_geq(streams_[sigma].Z, t_max);
    DecisionUncertainty u;
    if (p_stab > 0.5) {
      u.stab = 2.0 * prob_less(streams_[sigma].Z, t_max);
    } else {
      u.stab = 2.0 * p_stab;
      if (!d.stabilized) {
        for (int i = 0; i < 2; ++i) {
          if (i == sigma) continue;
          u.opt = std::max(u.opt, 2.0 * prob_less(streams_[sigma].pi, streams_[i].pi));
        }
      }
    }
    u.total = std::clamp(std::max(u.stab, u.opt), 0.0, 1.0);
    return u;
  }

  DecisionUncertainty decision_uncertainty(int sigma) const {
    Decision d;
    d.stream = sigma;
    d.stabilized = !omega_.empty() && omega_.front() == sigma;
    return decision_uncertainty(d);
  }

  // Switching drops the current green to intergreen for tau seconds; the
  // requested stream is granted green when the clearance elapses. While the
  // clearance runs the target is locked and further requests are ignored.
  void execute(int sigma) {
    if (phase_ == Phase::intergreen) return;
    if (sigma == sigma_) return;
    // a granted green must govern at least one world step before the next
    // switch can begin; otherwise a flip within the grant second would chain
    // two clearances around a green that never existed
    if (green_elapsed_ < std::max(params_.min_green, 1.0)) return;
    remove_from_omega(sigma_);  // its green ends now
    phase_ = Phase::intergreen;
    intergreen_left_ = static_cast<int>(std::llround(params_.tau));
    target_ = sigma;
    if (intergreen_left_ == 0) grant();
  }

  // One-second timer advance, run once per simulated step.
  void tick() {
    for (int i = 0; i < 2; ++i)
      if (face(i) != Face::green) ++streams_[i].r;
    if (!omega_.empty() && face(omega_.front()) == Face::green)
      ++head_green_served_;
    if (phase_ == Phase::serving) {
      green_elapsed_ += 1.0;
    } else if (--intergreen_left_ <= 0) {
      grant();
    }
  }

 private:
  enum class Phase { serving, intergreen };

  bool in_omega(int i) const {
    for (const int x : omega_)
      if (x == i) return true;
    return false;
  }

  void remove_from_omega(int i) {
    std::erase(omega_, i);
    sync_head();
  }

  // the head-service counter follows whichever stream is at the front
  void sync_head() {
    const int h = omega_.empty() ? -1 : omega_.front();
    if (h != head_id_) {
      head_id_ = h;
      head_green_served_ = 0;
    }
  }

  void grant() {
    phase_ = Phase::serving;
    sigma_ = target_;
    streams_[sigma_].r = 0;
    green_elapsed_ = 0.0;
  }

  ControllerParams params_;
  std::array<LaneModel, 2> lanes_;
  std::array<StreamState, 2> streams_{};
  std::array<Face, 2> motion_faces_{Face::red, Face::red};
  std::deque<int> omega_;
  int sigma_;
  int target_ = 0;
  Phase phase_ = Phase::serving;
  int intergreen_left_ = 0;
  double green_elapsed_ = 1.0;  // the initial green predates the run
  std::array<double, 2> committed_green_{0.0, 0.0};
  long head_green_served_ = 0;
  int head_id_ = -1;
};

}  // namespace vsnsim
