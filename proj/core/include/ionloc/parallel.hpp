#pragma once

namespace ionloc {

/// Environment variable read by apply_thread_env().
inline constexpr const char* kThreadEnvVar = "IONLOC_THREADS";

/// Worker threads used by the parallel loops (column blocks of U(T),
/// trajectory batches).
int thread_count();
void set_thread_count(int threads);

/// Applies IONLOC_THREADS when set to a positive integer; returns the
/// resulting thread count.
int apply_thread_env();

}  // namespace ionloc
