#include "sbm/parallel.hpp"

#include <cstdlib>
#include <string>

namespace sbm {

namespace {

std::atomic<int> g_override{0};

int from_env() {
  if (const char* env = std::getenv("SBM_THREADS"); env && *env) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int thread_count() {
  const int forced = g_override.load(std::memory_order_relaxed);
  if (forced > 0) return forced;
  static const int env_value = from_env();
  return env_value;
}

void set_thread_count(int n) { g_override.store(n > 0 ? n : 0, std::memory_order_relaxed); }

}  // namespace sbm
