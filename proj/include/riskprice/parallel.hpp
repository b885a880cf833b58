#pragma once

#include <atomic>
#include <exception>
#include <mutex>

namespace riskprice {

/// Environment variable capping the number of OpenMP workers.
inline constexpr const char* kThreadsEnv = "RISKPRICE_THREADS";

/// Worker count used by every parallel kernel: an explicit override, else
/// the RISKPRICE_THREADS cap, else the OpenMP default.
int worker_count();

/// Overrides the worker count for the rest of the process (0 restores the
/// default).
void set_worker_count(int workers);

/// Exceptions cannot leave an OpenMP region; the first one thrown inside a
/// loop body is parked here and rethrown after the region.
class ErrorSlot {
 public:
  template <class F>
  void guard(F&& body) {
    if (failed_.load(std::memory_order_relaxed)) return;
    try {
      body();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
      failed_.store(true, std::memory_order_relaxed);
    }
  }

  void rethrow() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::atomic<bool> failed_{false};
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace riskprice
