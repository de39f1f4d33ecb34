#include "billiards/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace billiards {

int worker_count() {
  int n = omp_get_num_procs();
  if (const char* env = std::getenv("BILLIARD_LAB_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) n = cap;
    } catch (const std::exception&) {
      // unparsable value: keep the default
    }
  }
  return n > 0 ? n : 1;
}

}  // namespace billiards
