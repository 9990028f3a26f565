#pragma once

namespace projlens {

// Applies PROJLENS_THREADS (a positive integer) as the OpenMP thread cap.
// Returns the number of threads in effect afterwards.
int configure_threads_from_env();

int max_threads();

}  // namespace projlens
