#include "motorsim/stochastic.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace motorsim {

EnsembleState::EnsembleState(int n_motors)
    : rel_x_(n_motors, 0.0), eps_(n_motors, 0), order_(n_motors), pos_(n_motors) {
  std::iota(order_.begin(), order_.end(), 0);
  std::iota(pos_.begin(), pos_.end(), 0);
}

void EnsembleState::bind(int k, double x_new) {
  eps_[k] = 1;
  rel_x_[k] = x_new - offset_;
  bound_sum_ += x_new;
  // Move k into the bound prefix of order_.
  const int i = pos_[k];
  const int j = bound_count_;  // first unbound slot
  std::swap(order_[i], order_[j]);
  pos_[order_[i]] = i;
  pos_[order_[j]] = j;
  ++bound_count_;
}

void EnsembleState::unbind(int k) {
  bound_sum_ -= rel_x_[k] + offset_;
  eps_[k] = 0;
  rel_x_[k] = 0.0;
  const int i = pos_[k];
  const int j = bound_count_ - 1;  // last bound slot
  std::swap(order_[i], order_[j]);
  pos_[order_[i]] = i;
  pos_[order_[j]] = j;
  --bound_count_;
}

void EnsembleState::apply_shift(double delta) {
  offset_ += delta;
  bound_sum_ += delta * bound_count_;
}

void EnsembleState::refresh_bound_sum() {
  double s = 0.0;
  for (int i = 0; i < bound_count_; ++i) s += rel_x_[order_[i]] + offset_;
  bound_sum_ = s;
}

void drift_flow(EnsembleState& s, const ModelParams& p, double dt) {
  s.t += dt;
  const int B = s.bound_count();
  if (B == 0 || dt == 0.0) return;
  const double M = s.n_motors();
  // S' = B (F - kappa S / M); fixed point S* = F M / kappa.
  const double s_star = p.F * M / p.kappa;
  const double s_new = s_star + (s.bound_sum() - s_star) * std::exp(-p.kappa * B * dt / M);
  s.apply_shift((s_new - s.bound_sum()) / B);
}

Event next_event(const EnsembleState& s, const ModelParams& p, std::mt19937_64& rng) {
  const int M = s.n_motors();
  const int B = s.bound_count();
  const double rate_bind = p.c_b * (M - B);
  const double rate_unbind = p.c_u * B;
  const double total = rate_bind + rate_unbind;
  if (total <= 0.0) return {std::numeric_limits<double>::infinity(), 'N', -1, 0.0};
  std::exponential_distribution<double> exp_dist(total);
  const double dt = exp_dist(rng);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if (uni(rng) * total < rate_bind) {
    std::uniform_int_distribution<int> pick(0, M - B - 1);
    const int motor = s.unbound_at(pick(rng));
    return {dt, 'B', motor, p.binding.sample(rng)};
  }
  std::uniform_int_distribution<int> pick(0, B - 1);
  return {dt, 'U', s.bound_at(pick(rng)), 0.0};
}

std::uint64_t replica_seed(std::uint64_t seed, int replica) {
  // splitmix64 over (seed, replica) for disjoint per-replica streams.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(replica) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RunRecord simulate(const ModelParams& p, int n_motors, const SimConfig& cfg) {
  validate_params(p);
  if (n_motors < 1 || n_motors % 2 == 0)
    throw Error(ErrorCode::ConfigError, "motor count must be odd and >= 1");
  if (!(cfg.sample_interval > 0.0) || cfg.burn_in < 0.0 || cfg.burn_in >= cfg.t_end)
    throw Error(ErrorCode::ConfigError, "require 0 <= burn_in < t_end and sample_interval > 0");

  RunRecord rec;
  rec.seed = cfg.seed;
  rec.n_motors = n_motors;
  std::mt19937_64 rng(cfg.seed);
  EnsembleState s(n_motors);
  const double M = n_motors;

  auto record = [&](double) {
    rec.samples.push_back({s.t, s.bound_count() / M, p.F - p.kappa * s.bound_sum() / M,
                           s.bound_sum() / M});
  };

  double next_sample = 0.0;
  long events_since_refresh = 0;
  while (true) {
    const Event ev = next_event(s, p, rng);
    const double t_event = s.t + ev.dt;
    // Emit all sample points before the event (or the end of the run).
    while (next_sample <= std::min(t_event, cfg.t_end)) {
      drift_flow(s, p, next_sample - s.t);
      record(next_sample);
      next_sample += cfg.sample_interval;
    }
    if (t_event > cfg.t_end) break;
    drift_flow(s, p, t_event - s.t);
    if (ev.kind == 'B')
      s.bind(ev.motor, ev.x_new);
    else
      s.unbind(ev.motor);
    if (cfg.record_events) rec.events.push_back({s.t, ev.kind, ev.motor, ev.x_new});
    if (++events_since_refresh == 10000) {
      s.refresh_bound_sum();
      events_since_refresh = 0;
    }
  }
  return rec;
}

std::vector<RunRecord> simulate_replicas(const ModelParams& p, int n_motors,
                                         const SimConfig& cfg) {
  std::vector<RunRecord> out(cfg.replicas);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < cfg.replicas; ++r) {
    SimConfig c = cfg;
    c.seed = replica_seed(cfg.seed, r);
    out[r] = simulate(p, n_motors, c);
  }
  return out;
}

namespace {

struct MeanSe {
  double mean, se;
};

// Batch means over a correlated series.
MeanSe batch_means(const std::vector<double>& x, int n_batches) {
  const std::size_t n = x.size();
  const std::size_t bs = n / n_batches;
  double grand = 0.0;
  std::vector<double> bm(n_batches, 0.0);
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * bs; i < (b + 1) * bs; ++i) s += x[i];
    bm[b] = s / bs;
    grand += bm[b];
  }
  grand /= n_batches;
  double var = 0.0;
  for (double m : bm) var += (m - grand) * (m - grand);
  var /= n_batches - 1;
  return {grand, std::sqrt(var / n_batches)};
}

}  // namespace

StationaryStats stationary_stats(const RunRecord& rec, double burn_in) {
  std::vector<double> n, v, xbar;
  for (const Sample& s : rec.samples) {
    if (s.t < burn_in) continue;
    n.push_back(s.bound_frac);
    v.push_back(s.velocity);
    xbar.push_back(s.mean_disp);
  }
  constexpr int kBatches = 20;
  if (n.size() < kBatches)
    throw Error(ErrorCode::InsufficientData, "need at least 20 post-burn-in samples");
  const MeanSe mn = batch_means(n, kBatches);
  const MeanSe mv = batch_means(v, kBatches);
  const MeanSe mx = batch_means(xbar, kBatches);
  return {mn.mean, mn.se, mv.mean, mv.se, mx.mean, mx.se, n.size()};
}

}  // namespace motorsim
