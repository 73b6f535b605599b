#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>

namespace thor {

/// Blocking token bucket. A rate of 0 disables throttling.
class TokenBucket {
 public:
  using Clock = std::chrono::steady_clock;

  explicit TokenBucket(double tokens_per_second, double burst = 1.0);

  void acquire();
  double rate() const noexcept { return rate_; }

 private:
  void refill(Clock::time_point now);

  double rate_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mutex_;
};

/// Counting gate bounding the number of concurrent requests on one handle.
class InFlightGate {
 public:
  explicit InFlightGate(int limit);

  class Permit {
   public:
    explicit Permit(InFlightGate& gate) : gate_(&gate) { gate_->enter(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    ~Permit() { gate_->leave(); }

   private:
    InFlightGate* gate_;
  };

  int limit() const noexcept { return limit_; }
  int peak() const;

 private:
  void enter();
  void leave();

  int limit_;
  int active_ = 0;
  int peak_ = 0;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
};

}  // namespace thor
