#pragma once

namespace billiards {

/// Worker count for parallel kernels: BILLIARD_LAB_THREADS if set and
/// positive, otherwise the available parallelism.
int worker_count();

}  // namespace billiards
