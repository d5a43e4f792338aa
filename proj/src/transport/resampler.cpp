#include "facechat/transport/resampler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace facechat::transport {

namespace {

double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double half = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

std::int16_t clamp_to_pcm16(double v) {
  const double r = std::round(v);
  if (r > 32767.0) return 32767;
  if (r < -32768.0) return -32768;
  return static_cast<std::int16_t>(r);
}

std::uint64_t rounded_output_count(std::uint64_t in_count, std::uint64_t num, std::uint64_t den) {
  // round(in_count * den / num), halves rounded up
  return (2 * in_count * den + num) / (2 * num);
}

}  // namespace

PolyphaseFilter::PolyphaseFilter(std::uint32_t in_rate, std::uint32_t out_rate)
    : PolyphaseFilter(in_rate, out_rate, Design{}) {}

PolyphaseFilter::PolyphaseFilter(std::uint32_t in_rate, std::uint32_t out_rate, Design design)
    : in_rate_(in_rate), out_rate_(out_rate) {
  if (in_rate == 0 || out_rate == 0) throw std::invalid_argument("sample rates must be positive");
  const std::uint64_t g = std::gcd(in_rate, out_rate);
  step_num_ = in_rate / g;
  step_den_ = out_rate / g;
  if (in_rate == out_rate) {
    half_taps_ = 1;
    taps_ = {0.0, 1.0};
    return;
  }

  const double fs = in_rate;
  const double nyquist_out = std::min(in_rate, out_rate) / 2.0;
  const double pass = std::min(design.passband_hz, nyquist_out * 0.95);
  const double stop = std::min(design.stopband_hz, nyquist_out);
  const double cutoff = (pass + stop) / 2.0;
  const double transition = 2.0 * std::numbers::pi * (stop - pass) / fs;
  const double a = design.attenuation_db;
  const double beta = a > 50.0 ? 0.1102 * (a - 8.7)
                               : (a >= 21.0 ? 0.5842 * std::pow(a - 21.0, 0.4) + 0.07886 * (a - 21.0)
                                            : 0.0);
  const int length = static_cast<int>(std::ceil((a - 7.95) / (2.285 * transition)));
  half_taps_ = std::max(2, (length + 1) / 2);

  const double norm_cut = 2.0 * cutoff / fs;
  const double i0_beta = bessel_i0(beta);
  const auto width = static_cast<std::size_t>(2 * half_taps_);
  taps_.assign(step_den_ * width, 0.0);
  for (std::uint64_t p = 0; p < step_den_; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(step_den_);
    double sum = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double tau = frac + half_taps_ - 1 - static_cast<double>(j);
      const double r = tau / half_taps_;
      double w = 0.0;
      if (std::abs(r) <= 1.0) w = bessel_i0(beta * std::sqrt(1.0 - r * r)) / i0_beta;
      const double c = norm_cut * sinc(norm_cut * tau) * w;
      taps_[p * width + j] = c;
      sum += c;
    }
    for (std::size_t j = 0; j < width; ++j) taps_[p * width + j] /= sum;
  }
}

double PolyphaseFilter::evaluate(std::span<const std::int16_t> input, std::int64_t input_offset,
                                 std::int64_t base, std::uint64_t phase) const {
  const auto width = static_cast<std::size_t>(2 * half_taps_);
  const double* row = taps_.data() + phase * width;
  const std::int64_t first = base - half_taps_ + 1;
  const auto size = static_cast<std::int64_t>(input.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < width; ++j) {
    const std::int64_t idx = first + static_cast<std::int64_t>(j) - input_offset;
    if (idx < 0 || idx >= size) continue;
    acc += row[j] * input[static_cast<std::size_t>(idx)];
  }
  return acc;
}

double PolyphaseFilter::response_db(double hz) const {
  const auto width = static_cast<std::size_t>(2 * half_taps_);
  std::complex<double> acc{0.0, 0.0};
  const double w = 2.0 * std::numbers::pi * hz / in_rate_;
  for (std::size_t j = 0; j < width; ++j) {
    acc += taps_[j] * std::polar(1.0, -w * static_cast<double>(j));
  }
  return 20.0 * std::log10(std::max(std::abs(acc), 1e-300));
}

AudioFrame resample_to_16k(const AudioFrame& frame) {
  if (!is_supported_rate(frame.sample_rate_hz)) {
    throw WireException(WireError::UnsupportedRate, std::to_string(frame.sample_rate_hz) + " Hz");
  }
  if (frame.sample_rate_hz == kRate16k) return frame;

  static const PolyphaseFilter filter(kRate44k, kRate16k);
  AudioFrame out;
  out.sample_rate_hz = kRate16k;
  out.timestamp_ms = frame.timestamp_ms;
  out.seq = frame.seq;
  out.session_id = frame.session_id;
  const std::uint64_t count =
      rounded_output_count(frame.samples.size(), filter.step_num(), filter.step_den());
  out.samples.resize(count);
  for (std::uint64_t n = 0; n < count; ++n) {
    const std::uint64_t pos = n * filter.step_num();
    const auto base = static_cast<std::int64_t>(pos / filter.step_den());
    out.samples[n] = clamp_to_pcm16(filter.evaluate(frame.samples, 0, base, pos % filter.step_den()));
  }
  return out;
}

StreamingResampler::StreamingResampler(std::uint32_t in_rate)
    : in_rate_(in_rate), filter_(in_rate, kRate16k) {
  if (!is_supported_rate(in_rate)) {
    throw WireException(WireError::UnsupportedRate, std::to_string(in_rate) + " Hz");
  }
}

std::vector<std::int16_t> StreamingResampler::process(std::span<const std::int16_t> input) {
  if (in_rate_ == kRate16k) return {input.begin(), input.end()};
  history_.insert(history_.end(), input.begin(), input.end());
  total_in_ += static_cast<std::int64_t>(input.size());
  return produce(false);
}

std::vector<std::int16_t> StreamingResampler::flush() {
  if (in_rate_ == kRate16k) return {};
  return produce(true);
}

std::vector<std::int16_t> StreamingResampler::produce(bool final) {
  std::vector<std::int16_t> out;
  const std::uint64_t num = filter_.step_num();
  const std::uint64_t den = filter_.step_den();
  const std::uint64_t target =
      rounded_output_count(static_cast<std::uint64_t>(total_in_), num, den);
  for (;;) {
    const std::uint64_t pos = next_out_ * num;
    const auto base = static_cast<std::int64_t>(pos / den);
    if (final) {
      if (next_out_ >= target) break;
    } else if (base + filter_.half_taps() > total_in_ - 1) {
      break;
    }
    out.push_back(clamp_to_pcm16(filter_.evaluate(history_, history_offset_, base, pos % den)));
    ++next_out_;
  }
  const auto next_base = static_cast<std::int64_t>(next_out_ * num / den);
  const std::int64_t keep_from = next_base - filter_.half_taps() + 1;
  if (keep_from > history_offset_) {
    const auto drop = static_cast<std::size_t>(
        std::min<std::int64_t>(keep_from - history_offset_, static_cast<std::int64_t>(history_.size())));
    history_.erase(history_.begin(), history_.begin() + static_cast<std::ptrdiff_t>(drop));
    history_offset_ += static_cast<std::int64_t>(drop);
  }
  return out;
}

}  // namespace facechat::transport
