#pragma once

namespace ccc::cli {

/// Routes library logging to stderr at the level named by CCC_LOG_LEVEL
/// (error, info or debug; default info).
void init_logging();

/// Keeps large training buffers on the heap instead of fresh mmap pages per
/// allocation. Call once at startup, before any allocation-heavy work.
void tune_allocator();

}  // namespace ccc::cli
