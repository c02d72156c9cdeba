#pragma once

#include <atomic>
#include <cstddef>
#include <functional>

namespace tonsim {

/// Number of worker threads to use when the caller passes 0: the
/// TONSIM_JOBS environment variable if set, else the hardware concurrency.
std::size_t default_jobs();

/// Calls task(i) for i in [0, n) on up to `jobs` threads. Tasks must write
/// only to their own output slot. If `cancel` is given and becomes true,
/// tasks that have not started yet are skipped.
void run_indexed(std::size_t jobs, std::size_t n, const std::function<void(std::size_t)>& task,
                 const std::atomic<bool>* cancel = nullptr);

}  // namespace tonsim
