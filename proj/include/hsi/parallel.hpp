#pragma once

namespace hsi {

/// Number of OpenMP workers used by the parallel stages. 0 restores the
/// runtime default. Results never depend on this value.
void set_worker_count(int workers);
int worker_count();

}  // namespace hsi
