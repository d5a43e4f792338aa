#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "facechat/transport/media.hpp"

namespace facechat::transport {

// Kaiser-windowed sinc prototype split into polyphase branches for a rational
// rate change in_rate -> out_rate. Every branch is normalized to unit DC gain.
class PolyphaseFilter {
 public:
  struct Design {
    double passband_hz = 7000.0;
    double stopband_hz = 8000.0;
    double attenuation_db = 80.0;
  };

  PolyphaseFilter(std::uint32_t in_rate, std::uint32_t out_rate);
  PolyphaseFilter(std::uint32_t in_rate, std::uint32_t out_rate, Design design);

  std::uint32_t in_rate() const { return in_rate_; }
  std::uint32_t out_rate() const { return out_rate_; }
  // Output sample n sits at input position n * step_num / step_den.
  std::uint64_t step_num() const { return step_num_; }
  std::uint64_t step_den() const { return step_den_; }
  int half_taps() const { return half_taps_; }

  // Interpolated value at input position (base + phase / step_den); samples
  // outside [0, input.size()) read as zero. `input_offset` is the absolute index
  // of input[0].
  double evaluate(std::span<const std::int16_t> input, std::int64_t input_offset, std::int64_t base,
                  std::uint64_t phase) const;

  // Magnitude response of the phase-0 branch prototype at `hz` (input rate), in dB.
  double response_db(double hz) const;

 private:
  std::uint32_t in_rate_;
  std::uint32_t out_rate_;
  std::uint64_t step_num_ = 1;
  std::uint64_t step_den_ = 1;
  int half_taps_ = 0;
  std::vector<double> taps_;  // step_den_ rows of 2 * half_taps_ coefficients
};

// Stateless per-block conversion with zero padding at both block edges.
// Output count is round(n * 16000 / rate); 16 kHz input passes through unchanged.
AudioFrame resample_to_16k(const AudioFrame& frame);

// Continuous conversion across blocks. Cumulative output after N input samples
// is the number of output positions whose full filter support has arrived, so
// the stream lags by half the filter length; flush() drains the tail.
class StreamingResampler {
 public:
  explicit StreamingResampler(std::uint32_t in_rate);

  std::vector<std::int16_t> process(std::span<const std::int16_t> input);
  std::vector<std::int16_t> flush();

  std::uint32_t in_rate() const { return in_rate_; }

 private:
  std::vector<std::int16_t> produce(bool final);

  std::uint32_t in_rate_;
  PolyphaseFilter filter_;
  std::vector<std::int16_t> history_;
  std::int64_t history_offset_ = 0;  // absolute index of history_[0]
  std::int64_t total_in_ = 0;
  std::uint64_t next_out_ = 0;
};

}  // namespace facechat::transport
