#include "hsi/parallel.hpp"

#include <omp.h>

namespace hsi {

namespace {
int default_workers = omp_get_max_threads();
}

void set_worker_count(int workers) {
  omp_set_num_threads(workers > 0 ? workers : default_workers);
}

int worker_count() { return omp_get_max_threads(); }

}  // namespace hsi
