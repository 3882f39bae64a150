#pragma once

namespace ccc::cli {

/// Entry point of the `ccc` tool. Returns the process exit code; failures are
/// reported on stderr as one JSON object per line.
int dispatch(int argc, const char* const* argv);

}  // namespace ccc::cli
