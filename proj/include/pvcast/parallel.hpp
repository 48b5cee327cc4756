#pragma once

namespace pvcast {

// Batch kernels exist in two flavors: a plain serial loop that serves as the
// reference implementation, and an OpenMP version used by default. Both must
// produce identical results; the test suite asserts this.
enum class ExecPolicy {
    Serial,
    Parallel,
};

}  // namespace pvcast
