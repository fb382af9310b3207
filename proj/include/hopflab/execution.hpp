#pragma once

namespace hopflab {

// Selects the driver for the data-parallel kernels. Both drivers run the same
// per-chunk kernel and reduce in a fixed order, so results are bit-identical.
enum class Execution { Serial, Parallel };

}  // namespace hopflab
