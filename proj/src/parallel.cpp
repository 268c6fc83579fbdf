#include "ecselect/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ecselect {

namespace {
std::atomic<std::size_t> g_limit{0};
}  // namespace

void set_worker_limit(std::size_t limit) { g_limit = limit; }

std::size_t worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  std::size_t n = hw == 0 ? 1 : hw;
  if (const std::size_t limit = g_limit.load(); limit > 0) n = limit;
  if (const char* env = std::getenv("ECSELECT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) n = std::min(n, static_cast<std::size_t>(v));
    } catch (...) {
    }
  }
  return n;
}

}  // namespace ecselect
