#pragma once

#include "eegscrub/error.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eegscrub {

// Uniformly sampled real waveform. Amplitudes are in microvolts by convention.
// Construction validates the invariants (nonempty, fs > 0, all finite), so a
// Signal in hand is always usable.
class Signal {
 public:
  Signal(std::vector<double> samples, double fs) : samples_(std::move(samples)), fs_(fs) {
    if (samples_.empty()) fail(ErrorKind::invalid_argument, "signal must be nonempty");
    if (!(fs_ > 0.0) || !std::isfinite(fs_)) fail(ErrorKind::invalid_argument, "sampling rate must be positive");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!std::isfinite(samples_[i])) {
        fail(ErrorKind::invalid_argument, "non-finite sample at index " + std::to_string(i));
      }
    }
  }

  std::size_t size() const noexcept { return samples_.size(); }
  double fs() const noexcept { return fs_; }
  double duration_s() const noexcept { return static_cast<double>(samples_.size()) / fs_; }
  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& values() const& noexcept { return samples_; }
  std::vector<double> values() && { return std::move(samples_); }
  double operator[](std::size_t i) const { return samples_[i]; }

  // Same sampling rate, new samples.
  Signal with_samples(std::vector<double> samples) const { return Signal(std::move(samples), fs_); }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::vector<double> samples_;
  double fs_;
};

// Multichannel recording. All channels share length and sampling rate.
class Recording {
 public:
  Recording(std::vector<Signal> channels, std::vector<std::string> names,
            std::map<std::string, std::string> subject_meta = {})
      : channels_(std::move(channels)), names_(std::move(names)), meta_(std::move(subject_meta)) {
    if (channels_.empty()) fail(ErrorKind::invalid_argument, "recording needs at least one channel");
    if (names_.size() != channels_.size()) {
      fail(ErrorKind::invalid_argument, "channel name count does not match channel count");
    }
    std::set<std::string> seen;
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      if (channels_[c].size() != channels_[0].size() || channels_[c].fs() != channels_[0].fs()) {
        fail(ErrorKind::invalid_argument, "channel '" + names_[c] + "' differs in length or fs");
      }
      if (!seen.insert(names_[c]).second) fail(ErrorKind::invalid_argument, "duplicate channel name '" + names_[c] + "'");
    }
  }

  std::size_t channel_count() const noexcept { return channels_.size(); }
  std::size_t size() const noexcept { return channels_[0].size(); }
  double fs() const noexcept { return channels_[0].fs(); }
  const std::vector<Signal>& channels() const noexcept { return channels_; }
  const Signal& channel(std::size_t c) const { return channels_.at(c); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::map<std::string, std::string>& subject_meta() const noexcept { return meta_; }

  // Index of a channel by name; throws invalid_argument when absent.
  std::size_t index_of(const std::string& name) const {
    for (std::size_t c = 0; c < names_.size(); ++c) {
      if (names_[c] == name) return c;
    }
    fail(ErrorKind::invalid_argument, "unknown channel name '" + name + "'");
  }

  Recording with_channels(std::vector<Signal> channels) const {
    return Recording(std::move(channels), names_, meta_);
  }

  friend bool operator==(const Recording&, const Recording&) = default;

 private:
  std::vector<Signal> channels_;
  std::vector<std::string> names_;
  std::map<std::string, std::string> meta_;
};

// Small numeric helpers shared across modules.
namespace detail {

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline double mean_square(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline double rms(std::span<const double> x) { return std::sqrt(mean_square(x)); }

inline constexpr double pi = 3.141592653589793238462643383279502884;

}  // namespace detail

}  // namespace eegscrub
