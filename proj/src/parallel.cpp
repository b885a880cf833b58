#include "riskprice/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace riskprice {

namespace {

std::atomic<int> g_override{0};

int env_cap() {
  static const int cap = [] {
    const char* raw = std::getenv(kThreadsEnv);
    if (raw == nullptr) return 0;
    try {
      const int value = std::stoi(raw);
      return value > 0 ? value : 0;
    } catch (...) {
      return 0;
    }
  }();
  return cap;
}

}  // namespace

int worker_count() {
  if (const int forced = g_override.load(); forced > 0) return forced;
  const int def = omp_get_max_threads();
  const int cap = env_cap();
  return cap > 0 && cap < def ? cap : def;
}

void set_worker_count(int workers) { g_override.store(workers > 0 ? workers : 0); }

}  // namespace riskprice
