#include "tonsim/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "tonsim/error.hpp"

namespace tonsim {

double next_injection_delay(double rate, Rng& rng) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw InvalidParameter("next_injection_delay: rate must be > 0");
  }
  return rng.exponential_mean(1.0 / rate);
}

std::vector<ScheduledFault> schedule_faults(const TonConfig& config, Rng& rng) {
  std::vector<ScheduledFault> faults;
  if (!config.fault_mean_delay) return faults;
  faults.reserve(config.n_nodes);
  for (NodeId n = 0; n < config.n_nodes; ++n) {
    faults.push_back({n, rng.exponential_mean(*config.fault_mean_delay)});
  }
  return faults;
}

std::uint64_t count_arrivals(const TonConfig& config) {
  if (config.injection_rate <= 0.0) return 0;
  Rng rng(config.seed, Stream::Arrivals);
  std::uint64_t count = 0;
  for (double t = next_injection_delay(config.injection_rate, rng); t < config.sim_duration;
       t += next_injection_delay(config.injection_rate, rng)) {
    ++count;
  }
  return count;
}

namespace {

Network build_network(const TonConfig& config) {
  validate(config);
  Rng graph(config.seed, Stream::Graph);
  return generate_network(config, graph);
}

}  // namespace

Simulator::Simulator(const TonConfig& config, RunOptions options)
    : config_(config),
      options_(options),
      network_(build_network(config)),
      ledger_(config.n_nodes, config.decay_time),
      arrivals_(config.seed, Stream::Arrivals),
      routing_(config.seed, Stream::Routing),
      hosted_(config.n_nodes) {
  validate(options_.choke);
  queue_.push(config_.sim_duration, EventKind::EndOfSim);

  Rng fault_rng(config_.seed, Stream::Faults);
  for (const auto& f : schedule_faults(config_, fault_rng)) {
    if (f.time < config_.sim_duration) queue_.push(f.time, EventKind::NodeFault, f.node);
  }
  if (config_.injection_rate > 0.0) {
    queue_.push(next_injection_delay(config_.injection_rate, arrivals_), EventKind::Inject);
  }

  const bool dead = config_.txn_length >= 2 ? network_.routable_count() == 0
                                            : network_.alive_count() == 0;
  if (dead) structural_choke_ = 0.0;
}

bool Simulator::step() {
  if (done_) return false;
  const Event e = queue_.pop();
  now_ = e.time;
  switch (e.kind) {
    case EventKind::EndOfSim:
      now_ = config_.sim_duration;
      done_ = true;
      return false;
    case EventKind::Inject:
      inject();
      break;
    case EventKind::SubtxnComplete:
      complete_subtxn(e.target);
      break;
    case EventKind::NodeFault:
      fault(static_cast<NodeId>(e.target));
      break;
  }

  switch (options_.stop) {
    case StopRule::Never:
      break;
    case StopRule::OnChoke:
      if (window_choke_) stopped_early_ = done_ = true;
      break;
    case StopRule::OnAbortCount:
      if (aborted_ >= options_.abort_budget) stopped_early_ = done_ = true;
      break;
  }
  return !done_;
}

void Simulator::inject() {
  Transaction& txn = txns_.emplace_back();
  txn.id = txns_.size() - 1;
  txn.injected_at = now_;

  queue_.push(now_ + next_injection_delay(config_.injection_rate, arrivals_), EventKind::Inject);

  if (network_.alive_count() == 0) {
    resolve(txn, TxnStatus::Aborted, AbortReason::AllNeighborsDisabled);
    return;
  }
  const NodeId source = network_.alive_at(routing_.uniform_index(network_.alive_count()));
  txn.previous_node = source;
  txn.current_index = 1;
  start_subtxn(txn, source);
}

void Simulator::start_subtxn(Transaction& txn, NodeId host) {
  txn.current_node = host;
  txn.host_slot = static_cast<std::uint32_t>(hosted_[host].size());
  hosted_[host].push_back(txn.id);
  const TxnId id = txn.id;
  if (add_subtxn_cost(ledger_, network_, host, txn.current_index, config_, now_) ==
      ChargeOutcome::NodeDied) {
    kill(host, DisableCause::Overload);
    return;
  }
  queue_.push(now_ + config_.subtxn_time, EventKind::SubtxnComplete, id);
}

void Simulator::complete_subtxn(TxnId id) {
  Transaction& txn = txns_[id];
  if (txn.status != TxnStatus::InFlight) return;  // aborted while running
  release_host(txn);
  ++txn.completed;
  if (txn.current_index == config_.txn_length) {
    resolve(txn, TxnStatus::Committed, AbortReason::None);
    return;
  }
  const NodeId from = txn.current_node;
  const auto next = route_next(network_, from, routing_);
  if (!next) {
    resolve(txn, TxnStatus::Aborted, AbortReason::AllNeighborsDisabled);
    return;
  }
  if (hop_observer_) hop_observer_(txn, from, *next);
  txn.previous_node = from;
  ++txn.current_index;
  start_subtxn(txn, *next);
}

void Simulator::fault(NodeId node) {
  if (!network_.alive(node)) return;
  network_.disable(node, DisableCause::Fault);
  kill(node, DisableCause::Fault);
}

// The node is already marked disabled; abort what it hosts and record the death.
void Simulator::kill(NodeId node, DisableCause cause) {
  deaths_.push_back({now_, cause});
  auto victims = std::move(hosted_[node]);
  hosted_[node].clear();
  for (TxnId id : victims) {
    Transaction& txn = txns_[id];
    if (txn.status == TxnStatus::InFlight) {
      resolve(txn, TxnStatus::Aborted, AbortReason::HostDied);
    }
  }
  const bool dead = config_.txn_length >= 2 ? network_.routable_count() == 0
                                            : network_.alive_count() == 0;
  if (dead && !structural_choke_) structural_choke_ = now_;
}

void Simulator::release_host(Transaction& txn) {
  auto& list = hosted_[txn.current_node];
  const std::uint32_t slot = txn.host_slot;
  const TxnId moved = list.back();
  list[slot] = moved;
  txns_[moved].host_slot = slot;
  list.pop_back();
}

void Simulator::resolve(Transaction& txn, TxnStatus status, AbortReason reason) {
  txn.status = status;
  txn.reason = reason;
  txn.resolved_at = now_;
  if (status == TxnStatus::Committed) {
    ++committed_;
  } else {
    ++aborted_;
    if (reason == AbortReason::HostDied) {
      ++aborted_host_died_;
    } else {
      ++aborted_no_route_;
    }
  }
  advance_frontier();
}

void Simulator::advance_frontier() {
  const std::size_t window = options_.choke.window;
  const double allowed = options_.choke.commit_floor * static_cast<double>(window);
  while (frontier_ < txns_.size() && txns_[frontier_].status != TxnStatus::InFlight) {
    const bool ok = txns_[frontier_].status == TxnStatus::Committed;
    commit_prefix_.push_back(commit_prefix_.back() + (ok ? 1U : 0U));
    ++frontier_;
    if (!window_choke_ && frontier_ >= window) {
      const std::uint32_t commits = commit_prefix_[frontier_] - commit_prefix_[frontier_ - window];
      if (static_cast<double>(commits) <= allowed) {
        window_choke_ = txns_[frontier_ - window].injected_at;
      }
    }
  }
}

double Simulator::disabled_fraction_at(double t) const {
  const auto it = std::upper_bound(deaths_.begin(), deaths_.end(), t,
                                   [](double v, const Death& d) { return v < d.time; });
  return static_cast<double>(it - deaths_.begin()) / static_cast<double>(config_.n_nodes);
}

double Simulator::fault_fraction_at(double t) const {
  std::size_t count = 0;
  for (const Death& d : deaths_) {
    if (d.time > t) break;
    if (d.cause == DisableCause::Fault) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(config_.n_nodes);
}

RunStats Simulator::finish() {
  run();
  RunStats s;
  s.injected = txns_.size();
  s.committed = committed_;
  s.aborted = aborted_;
  s.in_flight = s.injected - s.committed - s.aborted;
  s.aborted_all_neighbors_disabled = aborted_no_route_;
  s.aborted_host_died = aborted_host_died_;
  for (const Death& d : deaths_) {
    ++(d.cause == DisableCause::Overload ? s.nodes_disabled_overload : s.nodes_disabled_fault);
  }
  s.end_time = now_;
  s.stopped_early = stopped_early_;

  const std::size_t window = options_.choke.window;
  for (std::size_t begin = 0; begin + window <= frontier_; begin += window) {
    WindowRecord w;
    w.start_time = txns_[begin].injected_at;
    w.end_time = w.start_time;
    for (std::size_t i = begin; i < begin + window; ++i) {
      w.end_time = std::max(w.end_time, txns_[i].resolved_at);
    }
    w.commit_fraction = static_cast<double>(commit_prefix_[begin + window] - commit_prefix_[begin]) /
                        static_cast<double>(window);
    w.disabled_fraction = disabled_fraction_at(w.end_time);
    s.window_records.push_back(w);
  }

  std::optional<double> onset = window_choke_;
  if (structural_choke_ && (!onset || *structural_choke_ < *onset)) onset = structural_choke_;
  if (onset) {
    s.choke_time = *onset;
    s.disabled_fraction_at_choke = disabled_fraction_at(*onset);
    s.fault_fraction_at_choke = fault_fraction_at(*onset);
  }
  return s;
}

RunStats run_simulation(const TonConfig& config, const RunOptions& options) {
  Simulator sim(config, options);
  return sim.finish();
}

}  // namespace tonsim
