#pragma once

// Ensemble driver: trajectories are fanned out in fixed-size chunks and the chunk
// results are merged in chunk order, so results do not depend on the worker count.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qfluct/trajectories.hpp"

namespace qfluct {

struct EnsembleOptions {
  std::size_t n_traj = 0;
  std::uint64_t seed = 0;
  /// Start every trajectory from this member of the initial basis instead of sampling.
  std::optional<Index> fixed_initial;
  unsigned workers = 0;  // 0 = hardware concurrency
  std::size_t chunk = 512;

  bool ft = true;               // needs an EntropyReference
  bool density = false;         // <|psi><psi|>
  bool psi_one = false;         // <exp(-Delta S_B) |psi><psi|>
  const JarzynskiReference* jarzynski = nullptr;
  bool events = false;
};

struct EnsembleResult {
  std::size_t n_traj = 0;
  std::optional<FtAccumulator> ft;
  std::optional<OperatorAccumulator> density;
  std::optional<OperatorAccumulator> psi_one;
  std::vector<RunningStats> jarzynski;  // per output time
  std::vector<std::pair<std::uint64_t, JumpEvent>> events;
};

EnsembleResult run_ensemble(const PropagationTable& table, const InitialEnsemble& initial,
                            const EntropyReference* reference, const EnsembleOptions& options);

}  // namespace qfluct
