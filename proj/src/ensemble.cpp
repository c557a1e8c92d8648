#include "qfluct/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace qfluct {

namespace {

EnsembleResult make_empty(std::size_t n_times, Index dim, const EntropyReference* reference,
                          const EnsembleOptions& o) {
  EnsembleResult r;
  if (o.ft) {
    if (!reference) throw Error("run_ensemble: fluctuation-theorem estimators need an entropy reference");
    r.ft.emplace(n_times);
  }
  if (o.density) r.density.emplace(n_times, dim, 0.0);
  if (o.psi_one) r.psi_one.emplace(n_times, dim, 1.0);
  if (o.jarzynski) r.jarzynski.resize(n_times);
  return r;
}

void merge_into(EnsembleResult& into, EnsembleResult&& part) {
  into.n_traj += part.n_traj;
  if (into.ft) into.ft->merge(*part.ft);
  if (into.density) into.density->merge(*part.density);
  if (into.psi_one) into.psi_one->merge(*part.psi_one);
  for (std::size_t k = 0; k < into.jarzynski.size(); ++k) into.jarzynski[k].merge(part.jarzynski[k]);
  into.events.insert(into.events.end(), std::make_move_iterator(part.events.begin()),
                     std::make_move_iterator(part.events.end()));
}

}  // namespace

EnsembleResult run_ensemble(const PropagationTable& table, const InitialEnsemble& initial,
                            const EntropyReference* reference, const EnsembleOptions& o) {
  const std::size_t n_times = table.grid().output_steps().size();
  if (reference && reference->size() != n_times) throw Error("run_ensemble: reference grid does not match");
  if (o.chunk == 0) throw Error("run_ensemble: chunk size must be positive");
  if (o.n_traj == 0) throw Error("run_ensemble: need at least one trajectory");
  const Index dim = table.dim();

  const std::size_t n_chunks = (o.n_traj + o.chunk - 1) / o.chunk;
  std::vector<std::optional<EnsembleResult>> parts(n_chunks);

  auto run_chunk = [&](std::size_t c) {
    EnsembleResult part = make_empty(n_times, dim, reference, o);
    const std::size_t begin = c * o.chunk;
    const std::size_t end = std::min(o.n_traj, begin + o.chunk);
    for (std::size_t i = begin; i < end; ++i) {
      TrajectoryRng rng(o.seed, i);
      const InitialDraw init = o.fixed_initial ? initial.fixed(*o.fixed_initial) : initial.draw(rng);
      Trajectory traj = run_trajectory(table, init, rng);
      traj.seed = o.seed;
      traj.index = i;
      traj.basis = initial.basis;
      if (part.ft) part.ft->add(traj, *reference);
      if (part.density) part.density->add(traj);
      if (part.psi_one) part.psi_one->add(traj);
      if (o.jarzynski) {
        for (std::size_t k = 0; k < n_times; ++k) part.jarzynski[k].add(o.jarzynski->weight(traj, k));
      }
      if (o.events) {
        for (const auto& e : traj.events) part.events.emplace_back(i, e);
      }
      ++part.n_traj;
    }
    parts[c] = std::move(part);
  };

  unsigned workers = o.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n_chunks)));

  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < n_chunks; c = next++) {
          try {
            run_chunk(c);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n_chunks;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  EnsembleResult total = make_empty(n_times, dim, reference, o);
  for (auto& p : parts) merge_into(total, std::move(*p));
  return total;
}

}  // namespace qfluct
