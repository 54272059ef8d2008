#pragma once

// One replication of a scenario: simulate, (split and) fit the pilot, sample
// the posterior and score it.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>

#include "bvm/scenario.hpp"
#include "bvm/truth.hpp"

namespace bvm {

// Immutable per-scenario state shared by all replications.
class ScenarioContext {
 public:
  explicit ScenarioContext(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  const ModelTruth& truth() const { return *truth_; }

 private:
  ScenarioConfig config_;
  std::shared_ptr<const ModelTruth> truth_;
};

struct ReplicationOutcome {
  ResultRow row;
  // Present when the density pipeline is enabled: same data and b-chain,
  // F replaced by the exponentiated-GP density posterior.
  std::optional<ResultRow> density_row;
};

// Deterministic in (config, rep): every random stream is derived from
// (master_seed, rep, purpose).
ReplicationOutcome run_replication(const ScenarioContext& context, int rep);

// Calls body(i) for i in [0, count) on up to `jobs` threads (0 = hardware
// concurrency). The first exception is rethrown after all workers stop.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace bvm
