#include "ccc/cli/dispatch.hpp"
#include "ccc/cli/logging.hpp"

int main(int argc, char** argv) {
  ccc::cli::tune_allocator();
  return ccc::cli::dispatch(argc, argv);
}
