#pragma once

namespace qfall::parallel {

/// Caps the OpenMP team size; 0 restores the runtime default.
void set_max_threads(int n);
int max_threads();

/// Reads SIM_THREADS from the environment and applies it (0 or unset = auto).
void configure_from_environment();

}  // namespace qfall::parallel
