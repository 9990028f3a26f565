#include "projlens/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace projlens {

int configure_threads_from_env() {
  if (const char* env = std::getenv("PROJLENS_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) omp_set_num_threads(n);
    } catch (const std::exception&) {
      // ignored: an unparsable value leaves the OpenMP default in place
    }
  }
  return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace projlens
