#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>

namespace facechat::adapters {

// Millisecond time source shared by adapters and the pipeline. Fake adapters
// sleep on it, so a manual clock makes whole turns deterministic.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_ms() const = 0;
  virtual void sleep_ms(double ms) = 0;
};

class SteadyClock final : public Clock {
 public:
  double now_ms() const override;
  void sleep_ms(double ms) override;

  static std::shared_ptr<Clock> shared();

 private:
  std::chrono::steady_clock::time_point origin_ = std::chrono::steady_clock::now();
};

// Virtual time: sleeping advances the clock instead of blocking. Intended for
// one sequential caller; concurrent sleepers would see each other's advances.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(double start_ms = 0.0) : now_us_(to_us(start_ms)) {}
  double now_ms() const override { return static_cast<double>(now_us_.load()) / 1000.0; }
  void sleep_ms(double ms) override { advance_ms(ms); }
  void advance_ms(double ms) { if (ms > 0) now_us_.fetch_add(to_us(ms)); }

 private:
  static std::int64_t to_us(double ms) { return static_cast<std::int64_t>(ms * 1000.0 + 0.5); }
  std::atomic<std::int64_t> now_us_;
};

}  // namespace facechat::adapters
