#include "cli.hpp"

#ifdef __GLIBC__
#include <malloc.h>
#endif

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Activation buffers are freed and reallocated every sample; keep them on
  // the heap instead of paying for fresh mmap pages each time.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  return cdae::cli::run(argc, argv);
}
