#pragma once

namespace pepslab {

// Keeps large freed blocks in the heap instead of returning them to the OS.
// The contraction kernels allocate and drop multi-megabyte buffers in tight loops,
// and page-faulting them back in costs more than the arithmetic.
void tune_allocator();

}  // namespace pepslab
