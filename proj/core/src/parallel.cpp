#include "mwl/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace mwl {
namespace {

unsigned initial_threads() {
  if (const char* env = std::getenv("MWL_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  return 1;
}

std::atomic<unsigned> g_threads{initial_threads()};

}  // namespace

void set_thread_count(unsigned n) { g_threads = n == 0 ? 1 : n; }

unsigned thread_count() { return g_threads.load(); }

}  // namespace mwl
