#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "tonsim/choke.hpp"
#include "tonsim/config.hpp"
#include "tonsim/cost.hpp"
#include "tonsim/network.hpp"
#include "tonsim/rng.hpp"

namespace tonsim {

using TxnId = std::uint64_t;

enum class TxnStatus : std::uint8_t { InFlight, Committed, Aborted };

enum class AbortReason : std::uint8_t {
  None,
  /// No alive node to route the next hop to (also used when no alive node is
  /// left to host the first hop).
  AllNeighborsDisabled,
  /// The node executing the current subtransaction died.
  HostDied,
};

/// A master transaction. Subtransaction `current_index` (1-based) is running
/// on `current_node` while the status is InFlight.
struct Transaction {
  TxnId id = 0;
  double injected_at = 0.0;
  double resolved_at = std::numeric_limits<double>::quiet_NaN();
  NodeId current_node = 0;
  NodeId previous_node = 0;
  std::uint32_t current_index = 0;
  std::uint32_t completed = 0;
  std::uint32_t host_slot = 0;
  TxnStatus status = TxnStatus::InFlight;
  AbortReason reason = AbortReason::None;
};

enum class EventKind : std::uint8_t { EndOfSim, Inject, SubtxnComplete, NodeFault };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::EndOfSim;
  /// Transaction id for SubtxnComplete, node id for NodeFault.
  std::uint64_t target = 0;
};

/// Min-queue on (time, seq). seq is the insertion counter, so equal-time
/// events run in the order they were scheduled.
class EventQueue {
 public:
  void push(double time, EventKind kind, std::uint64_t target = 0) {
    heap_.push(Event{time, next_seq_++, kind, target});
  }
  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
  }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

/// One tumbling window of `ChokeCriterion::window` consecutive transactions
/// (in injection order), reported once all of them are resolved.
struct WindowRecord {
  double start_time = 0.0;  // injection time of the first transaction
  double end_time = 0.0;    // latest resolution time in the window
  double commit_fraction = 0.0;
  double disabled_fraction = 0.0;  // at end_time, any cause
  bool operator==(const WindowRecord&) const = default;
};

struct RunStats {
  std::uint64_t injected = 0;
  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t aborted_all_neighbors_disabled = 0;
  std::uint64_t aborted_host_died = 0;
  std::uint64_t nodes_disabled_overload = 0;
  std::uint64_t nodes_disabled_fault = 0;
  std::vector<WindowRecord> window_records;
  /// Choke onset: injection time of the first transaction of the first
  /// sliding window at or below the commit floor, or the moment no routable
  /// node is left, whichever is earlier.
  std::optional<double> choke_time;
  /// Fraction of nodes disabled (any cause) at choke onset.
  std::optional<double> disabled_fraction_at_choke;
  /// Fraction of nodes disabled by internal faults at choke onset.
  std::optional<double> fault_fraction_at_choke;
  /// Simulation time at which the run ended (sim_duration unless stopped early).
  double end_time = 0.0;
  bool stopped_early = false;

  bool operator==(const RunStats&) const = default;
};

enum class StopRule : std::uint8_t {
  Never,
  /// Stop once a choke is certain.
  OnChoke,
  /// Stop once `abort_budget` transactions have aborted.
  OnAbortCount,
};

struct RunOptions {
  ChokeCriterion choke;
  StopRule stop = StopRule::Never;
  std::uint64_t abort_budget = 1;
};

/// Exponential inter-arrival delay with mean 1/rate. Throws InvalidParameter
/// unless rate > 0.
double next_injection_delay(double rate, Rng& rng);

struct ScheduledFault {
  NodeId node = 0;
  double time = 0.0;
  bool operator==(const ScheduledFault&) const = default;
};

/// One fault time per node, exponential with mean fault_mean_delay. Empty when
/// faults are disabled.
std::vector<ScheduledFault> schedule_faults(const TonConfig& config, Rng& rng);

/// Number of arrivals in [0, sim_duration) for this seed. The arrival stream is
/// independent of network state, so this equals RunStats::injected of a full run.
std::uint64_t count_arrivals(const TonConfig& config);

/// The event loop of a single run. Strictly single-threaded; one object per run.
class Simulator {
 public:
  explicit Simulator(const TonConfig& config, RunOptions options = {});

  /// Processes one event. Returns false once the run is over.
  bool step();
  void run() {
    while (step()) {
    }
  }
  RunStats finish();

  double now() const { return now_; }
  bool done() const { return done_; }
  const TonConfig& config() const { return config_; }
  const Network& network() const { return network_; }
  const CostLedger& ledger() const { return ledger_; }
  const std::vector<Transaction>& transactions() const { return txns_; }

  /// Called on every routed hop (transaction, from, to). Test instrumentation.
  void set_hop_observer(std::function<void(const Transaction&, NodeId, NodeId)> observer) {
    hop_observer_ = std::move(observer);
  }

 private:
  void inject();
  void start_subtxn(Transaction& txn, NodeId host);
  void complete_subtxn(TxnId id);
  void fault(NodeId node);
  void kill(NodeId node, DisableCause cause);
  void release_host(Transaction& txn);
  void resolve(Transaction& txn, TxnStatus status, AbortReason reason);
  void advance_frontier();
  double fault_fraction_at(double t) const;
  double disabled_fraction_at(double t) const;

  TonConfig config_;
  RunOptions options_;
  Network network_;
  CostLedger ledger_;
  Rng arrivals_;
  Rng routing_;
  EventQueue queue_;
  std::vector<Transaction> txns_;
  std::vector<std::vector<TxnId>> hosted_;
  struct Death {
    double time;
    DisableCause cause;
  };
  std::vector<Death> deaths_;
  std::uint64_t committed_ = 0;
  std::uint64_t aborted_ = 0;
  std::uint64_t aborted_no_route_ = 0;
  std::uint64_t aborted_host_died_ = 0;
  std::size_t frontier_ = 0;
  std::vector<std::uint32_t> commit_prefix_{0};
  std::optional<double> window_choke_;
  std::optional<double> structural_choke_;
  std::function<void(const Transaction&, NodeId, NodeId)> hop_observer_;
  double now_ = 0.0;
  bool done_ = false;
  bool stopped_early_ = false;
};

/// Runs one simulation to completion. Identical configs give identical stats.
RunStats run_simulation(const TonConfig& config, const RunOptions& options = {});

}  // namespace tonsim
