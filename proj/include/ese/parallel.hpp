#ifndef ESE_PARALLEL_HPP
#define ESE_PARALLEL_HPP

#include <functional>

namespace ese {

// Runs fn(0..n-1) across up to `jobs` threads. Each index writes only its
// own output slot, so results are deterministic regardless of jobs.
// jobs <= 1 (or 0 for auto on a single-core box) runs inline.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

int default_jobs();

}  // namespace ese

#endif
