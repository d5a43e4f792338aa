#include "facechat/adapters/clock.hpp"

#include <thread>

namespace facechat::adapters {

double SteadyClock::now_ms() const {
  const auto d = std::chrono::steady_clock::now() - origin_;
  return std::chrono::duration<double, std::milli>(d).count();
}

void SteadyClock::sleep_ms(double ms) {
  if (ms <= 0.0) return;
  std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
}

std::shared_ptr<Clock> SteadyClock::shared() {
  static const auto clock = std::make_shared<SteadyClock>();
  return clock;
}

}  // namespace facechat::adapters
