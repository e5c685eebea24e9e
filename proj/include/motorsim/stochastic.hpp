#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "motorsim/model.hpp"

namespace motorsim {

/// Finite ensemble of M motors sharing the drift velocity
/// v_N = kappa * S / M - F with S the sum of bound displacements.
/// Bound displacements are stored relative to a shared offset so the
/// common drift shift is O(1) per event.
class EnsembleState {
 public:
  explicit EnsembleState(int n_motors);

  int n_motors() const { return static_cast<int>(eps_.size()); }
  int bound_count() const { return bound_count_; }
  double bound_sum() const { return bound_sum_; }

  bool bound(int k) const { return eps_[k] != 0; }
  double x(int k) const { return eps_[k] ? rel_x_[k] + offset_ : 0.0; }

  void bind(int k, double x_new);
  void unbind(int k);

  /// Shift every bound displacement by delta (the common drift increment).
  void apply_shift(double delta);

  int bound_at(int i) const { return order_[i]; }
  int unbound_at(int i) const { return order_[bound_count_ + i]; }

  /// Recompute the cached bound sum from scratch (bounds float drift).
  void refresh_bound_sum();

  double t = 0.0;

 private:
  std::vector<double> rel_x_;       // displacement minus offset_, bound motors only
  std::vector<std::uint8_t> eps_;
  std::vector<int> order_, pos_;    // bound motors occupy order_[0 .. bound_count_)
  double offset_ = 0.0;
  double bound_sum_ = 0.0;
  int bound_count_ = 0;
};

/// Advance the deterministic flow between jumps by dt (closed form).
void drift_flow(EnsembleState& s, const ModelParams& p, double dt);

struct Event {
  double dt;     // waiting time; +inf when no event can occur
  char kind;     // 'B' bind, 'U' unbind, 'N' none
  int motor;
  double x_new;  // binding displacement, 0 for unbind
};

/// Sample the next jump of the ensemble (constant rates between jumps).
Event next_event(const EnsembleState& s, const ModelParams& p, std::mt19937_64& rng);

struct SimConfig {
  std::uint64_t seed = 0;
  double t_end = 100.0;
  double burn_in = 0.0;
  double sample_interval = 0.1;
  int replicas = 1;
  bool record_events = false;
};

struct Sample {
  double t;
  double bound_frac;  // B / M
  double velocity;    // filament velocity F - kappa * S / M
  double mean_disp;   // S / M
};

struct EventRecord {
  double t;
  char kind;  // 'B' or 'U'
  int motor;
  double x;   // binding displacement (unused for 'U')
};

struct RunRecord {
  std::vector<Sample> samples;
  std::vector<EventRecord> events;
  std::uint64_t seed = 0;
  int n_motors = 0;
};

/// One exact trajectory: alternating closed-form drift and exponential jumps,
/// starting from the all-unbound state. Deterministic given (seed, p, M, cfg).
RunRecord simulate(const ModelParams& p, int n_motors, const SimConfig& cfg);

/// Independent replicas with disjoint streams derived from (cfg.seed, index);
/// replica r uses seed split(cfg.seed, r). Runs concurrently, result order is
/// by replica index.
std::vector<RunRecord> simulate_replicas(const ModelParams& p, int n_motors,
                                         const SimConfig& cfg);

std::uint64_t replica_seed(std::uint64_t seed, int replica);

struct StationaryStats {
  double n_mean, n_se;   // bound fraction
  double v_mean, v_se;   // filament velocity
  double x_mean, x_se;   // mean displacement
  std::size_t n_samples;
};

/// Time averages after burn_in with batch-means standard errors (20 batches).
StationaryStats stationary_stats(const RunRecord& rec, double burn_in);

}  // namespace motorsim
