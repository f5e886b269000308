#include "ionloc/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace ionloc {

int thread_count() { return omp_get_max_threads(); }

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int apply_thread_env() {
  if (const char* env = std::getenv(kThreadEnvVar)) {
    try {
      set_thread_count(std::stoi(env));
    } catch (const std::exception&) {
      // Unparseable values leave the OpenMP default in place.
    }
  }
  return thread_count();
}

}  // namespace ionloc
