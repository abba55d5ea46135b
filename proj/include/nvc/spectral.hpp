#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nvc/error.hpp"
#include "nvc/parallel.hpp"
#include "nvc/seed.hpp"
#include "nvc/vector_measure.hpp"

namespace nvc {

// Multichannel recording: T samples x C channels at rate fs. Stored
// channel-major since every consumer walks one channel at a time.
class TimeSeriesMatrix {
 public:
  TimeSeriesMatrix() = default;
  TimeSeriesMatrix(std::vector<std::vector<double>> channels, double fs, std::vector<std::string> labels = {})
      : channels_(std::move(channels)), fs_(fs), labels_(std::move(labels)) {
    if (!(fs_ > 0.0) || !std::isfinite(fs_)) throw InvalidArgument("TimeSeriesMatrix: fs must be positive");
    if (labels_.empty())
      for (std::size_t c = 0; c < channels_.size(); ++c) labels_.push_back("ch" + std::to_string(c + 1));
    if (labels_.size() != channels_.size()) throw InvalidArgument("TimeSeriesMatrix: label count differs from channels");
    for (const auto& ch : channels_) {
      if (ch.size() != samples()) throw InvalidArgument("TimeSeriesMatrix: channels of unequal length");
      for (double v : ch)
        if (!std::isfinite(v)) throw InvalidArgument("TimeSeriesMatrix: non-finite sample");
    }
  }

  std::size_t samples() const noexcept { return channels_.empty() ? 0 : channels_.front().size(); }
  std::size_t channels() const noexcept { return channels_.size(); }
  double fs() const noexcept { return fs_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::span<const double> channel(std::size_t c) const { return channels_.at(c); }
  double operator()(std::size_t t, std::size_t c) const { return channels_[c][t]; }

  std::optional<std::size_t> find(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
  }

  TimeSeriesMatrix select(const std::vector<std::string>& wanted) const {
    std::vector<std::vector<double>> chans;
    for (const auto& name : wanted) {
      auto idx = find(name);
      if (!idx) throw DataError("channel '" + name + "' not present in recording");
      chans.push_back(channels_[*idx]);
    }
    return {std::move(chans), fs_, wanted};
  }

  // Drops the first `count` samples.
  TimeSeriesMatrix drop_leading(std::size_t count) const {
    std::vector<std::vector<double>> chans;
    for (const auto& ch : channels_) {
      const std::size_t k = std::min(count, ch.size());
      chans.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(k), ch.end());
    }
    return {std::move(chans), fs_, labels_};
  }

  // Each channel shifted and scaled to zero sample mean and unit sample
  // variance. Constant channels are only centered.
  TimeSeriesMatrix standardized() const {
    std::vector<std::vector<double>> chans = channels_;
    for (auto& ch : chans) standardize_in_place(ch);
    return {std::move(chans), fs_, labels_};
  }

  static void standardize_in_place(std::vector<double>& x) {
    if (x.empty()) return;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
    for (double& v : x) v = sd > 0.0 ? (v - mean) / sd : v - mean;
  }

 private:
  std::vector<std::vector<double>> channels_;
  double fs_ = 1.0;
  std::vector<std::string> labels_;
};

// Half-open frequency interval (lo_hz, hi_hz].
struct FrequencyBand {
  std::string name;
  double lo_hz = 0.0;
  double hi_hz = 0.0;

  bool contains(double f) const noexcept { return f > lo_hz && f <= hi_hz; }

  void validate(double fs) const {
    if (!(lo_hz >= 0.0 && lo_hz < hi_hz && hi_hz <= fs / 2.0))
      throw InvalidArgument("band '" + name + "' must satisfy 0 <= lo < hi <= fs/2");
  }
};

inline std::vector<FrequencyBand> canonical_bands() {
  return {{"delta", 0.5, 4.0}, {"theta", 4.0, 8.0}, {"alpha", 8.0, 12.0}, {"beta", 12.0, 30.0}, {"gamma", 30.0, 45.0}};
}

// Band name owning frequency f, or "" when none does.
inline std::string band_of(const std::vector<FrequencyBand>& bands, double f) {
  for (const auto& b : bands)
    if (b.contains(f)) return b.name;
  return {};
}

// Number of retained Fourier indices for block length B: k = 1 .. ceil(B/2)-1,
// i.e. everything strictly between DC and Nyquist.
constexpr std::size_t retained_frequency_count(std::size_t block_len) noexcept {
  return (block_len + 1) / 2 - 1;
}

// DFT table for one block length. power() evaluates
//   I(w_k) = | B^{-1/2} sum_{t=1..B} x_t exp(-i 2 pi k t / B) |^2
// directly; B is small (a second of data) so this is cheaper than planning
// an FFT per call.
class BlockDft {
 public:
  explicit BlockDft(std::size_t block_len) : len_(block_len), cos_(block_len), sin_(block_len) {
    for (std::size_t m = 0; m < block_len; ++m) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(block_len);
      cos_[m] = std::cos(angle);
      sin_[m] = std::sin(angle);
    }
  }

  std::size_t block_len() const noexcept { return len_; }

  double power(std::span<const double> block, std::size_t k) const {
    double re = 0.0;
    double im = 0.0;
    std::size_t phase = k % len_;  // k * t mod B for t = 1
    for (std::size_t t = 0; t < len_; ++t) {
      re += block[t] * cos_[phase];
      im -= block[t] * sin_[phase];
      phase += k;
      if (phase >= len_) phase -= len_;
    }
    return (re * re + im * im) / static_cast<double>(len_);
  }

  // Full grid k = 0 .. B-1.
  std::vector<double> full_power(std::span<const double> block) const {
    std::vector<double> out(len_);
    for (std::size_t k = 0; k < len_; ++k) out[k] = power(block, k);
    return out;
  }

 private:
  std::size_t len_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

// Periodogram ordinates of n non-overlapping blocks per channel, at the
// retained Fourier indices k = 1 .. K (K = ceil(B/2) - 1).
class BlockPeriodogramTensor {
 public:
  BlockPeriodogramTensor() = default;
  BlockPeriodogramTensor(std::size_t blocks, std::size_t channels, std::size_t block_len, double fs)
      : blocks_(blocks),
        channels_(channels),
        block_len_(block_len),
        freqs_(retained_frequency_count(block_len)),
        values_(blocks * channels * freqs_, 0.0),
        fs_(fs) {}

  std::size_t blocks() const noexcept { return blocks_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t frequencies() const noexcept { return freqs_; }
  std::size_t block_len() const noexcept { return block_len_; }
  double fs() const noexcept { return fs_; }

  // Fourier index k (1-based on the full grid) of retained slot `slot`.
  static constexpr std::size_t fourier_index(std::size_t slot) noexcept { return slot + 1; }
  double freq_hz(std::size_t slot) const noexcept {
    return static_cast<double>(fourier_index(slot)) * fs_ / static_cast<double>(block_len_);
  }
  std::vector<double> freqs_hz() const {
    std::vector<double> f(freqs_);
    for (std::size_t s = 0; s < freqs_; ++s) f[s] = freq_hz(s);
    return f;
  }

  double at(std::size_t block, std::size_t channel, std::size_t slot) const noexcept {
    return values_[(channel * freqs_ + slot) * blocks_ + block];
  }
  double& at(std::size_t block, std::size_t channel, std::size_t slot) noexcept {
    return values_[(channel * freqs_ + slot) * blocks_ + block];
  }

  // All blocks' ordinates for one channel and frequency slot.
  std::span<const double> series(std::size_t channel, std::size_t slot) const noexcept {
    return {values_.data() + (channel * freqs_ + slot) * blocks_, blocks_};
  }

 private:
  std::size_t blocks_ = 0;
  std::size_t channels_ = 0;
  std::size_t block_len_ = 0;
  std::size_t freqs_ = 0;
  std::vector<double> values_;
  double fs_ = 1.0;
};

inline BlockPeriodogramTensor block_periodograms(const TimeSeriesMatrix& ts, std::size_t block_len,
                                                 std::size_t threads = 1) {
  if (block_len < 4) throw InvalidArgument("block_periodograms: block length must be >= 4");
  const std::size_t blocks = ts.samples() / block_len;
  if (blocks < 2)
    throw BlockTooLong("block_periodograms: " + std::to_string(ts.samples()) + " samples give fewer than 2 blocks of " +
                       std::to_string(block_len));
  BlockPeriodogramTensor out(blocks, ts.channels(), block_len, ts.fs());
  const BlockDft dft(block_len);
  parallel_for(ts.channels() * blocks, threads, [&](std::size_t task) {
    const std::size_t c = task / blocks;
    const std::size_t j = task % blocks;
    const auto block = ts.channel(c).subspan(j * block_len, block_len);
    for (std::size_t s = 0; s < out.frequencies(); ++s)
      out.at(j, c, s) = dft.power(block, BlockPeriodogramTensor::fourier_index(s));
  });
  return out;
}

struct NvcConfig {
  std::size_t block_len = 100;
  Measure measure = Measure::TStar;
  std::size_t max_perms = kDefaultMaxPermutations;
  Seed seed = 0;
  std::size_t threads = 1;
  MeasureOptions measure_options{};
  std::optional<PlanPair> plans;  // fixed plans; default_plans(p, q, seed) when unset
};

inline constexpr std::size_t kRecommendedMinBlocks = 10;

// Per-frequency estimates; a frequency whose statistic degenerates holds
// std::nullopt instead of failing the whole profile.
struct NvcEstimates {
  std::vector<double> freqs_hz;
  std::vector<std::optional<double>> estimate;
  std::vector<std::string> failures;  // one message per degenerate frequency
  std::size_t blocks = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  PlanPair plans;
  bool few_blocks = false;  // fewer than kRecommendedMinBlocks blocks
};

// NVC statistic at every retained frequency from precomputed periodograms
// of the x group (channels of `xp`) and y group (channels of `yp`).
inline NvcEstimates nvc_profile(const BlockPeriodogramTensor& xp, const BlockPeriodogramTensor& yp, const NvcConfig& cfg) {
  if (xp.blocks() != yp.blocks() || xp.block_len() != yp.block_len() || xp.fs() != yp.fs())
    throw InvalidArgument("nvc_profile: x and y periodograms do not share a time base");
  NvcEstimates out;
  out.blocks = xp.blocks();
  out.p = xp.channels();
  out.q = yp.channels();
  out.freqs_hz = xp.freqs_hz();
  out.few_blocks = xp.blocks() < kRecommendedMinBlocks;
  out.plans = cfg.plans ? *cfg.plans : default_plans(out.p, out.q, cfg.seed, cfg.max_perms);
  if (out.plans.x.q != out.p || out.plans.y.q != out.q)
    throw InvalidArgument("nvc_profile: permutation plans do not match the channel counts");
  const std::size_t K = xp.frequencies();
  out.estimate.assign(K, std::nullopt);
  std::vector<std::string> errors(K);
  parallel_for(K, cfg.threads, [&](std::size_t s) {
    FeatureMatrixPair pair{Matrix(xp.blocks(), out.p), Matrix(yp.blocks(), out.q)};
    for (std::size_t j = 0; j < xp.blocks(); ++j) {
      for (std::size_t c = 0; c < out.p; ++c) pair.x(j, c) = xp.at(j, c, s);
      for (std::size_t c = 0; c < out.q; ++c) pair.y(j, c) = yp.at(j, c, s);
    }
    try {
      out.estimate[s] = evaluate_measure(pair, cfg.measure, out.plans, derive_seed(cfg.seed, {0x667265ULL, s}),
                                         cfg.measure_options);
    } catch (const NumericalError& e) {
      errors[s] = std::to_string(out.freqs_hz[s]) + " Hz: " + e.what();
    }
  });
  for (auto& e : errors)
    if (!e.empty()) out.failures.push_back(std::move(e));
  return out;
}

inline NvcEstimates nvc_profile(const TimeSeriesMatrix& x, const TimeSeriesMatrix& y, const NvcConfig& cfg) {
  if (x.samples() != y.samples() || x.fs() != y.fs())
    throw InvalidArgument("nvc_profile: x and y must share sampling rate and length");
  return nvc_profile(block_periodograms(x, cfg.block_len), block_periodograms(y, cfg.block_len), cfg);
}

enum class BandAggregation { Mean, Median, Max };

inline BandAggregation parse_band_aggregation(std::string_view s) {
  if (s == "mean") return BandAggregation::Mean;
  if (s == "median") return BandAggregation::Median;
  if (s == "max") return BandAggregation::Max;
  throw InvalidArgument("unknown band aggregation '" + std::string(s) + "'");
}

// Aggregate of the non-missing estimates whose frequency lies in each band.
// A band with no retained frequency throws EmptyBand; a band whose
// frequencies are all missing yields NaN.
inline std::map<std::string, double> band_summary(std::span<const double> freqs_hz,
                                                  std::span<const std::optional<double>> estimates,
                                                  const std::vector<FrequencyBand>& bands,
                                                  BandAggregation how = BandAggregation::Mean) {
  if (freqs_hz.size() != estimates.size()) throw InvalidArgument("band_summary: length mismatch");
  std::map<std::string, double> out;
  for (const auto& band : bands) {
    bool any = false;
    std::vector<double> vals;
    for (std::size_t s = 0; s < freqs_hz.size(); ++s) {
      if (!band.contains(freqs_hz[s])) continue;
      any = true;
      if (estimates[s]) vals.push_back(*estimates[s]);
    }
    if (!any) throw EmptyBand("band '" + band.name + "' contains no retained Fourier frequency");
    double v = std::numeric_limits<double>::quiet_NaN();
    if (!vals.empty()) {
      switch (how) {
        case BandAggregation::Mean: {
          double sum = 0.0;
          for (double e : vals) sum += e;
          v = sum / static_cast<double>(vals.size());
          break;
        }
        case BandAggregation::Median: {
          std::sort(vals.begin(), vals.end());
          const std::size_t m = vals.size() / 2;
          v = vals.size() % 2 ? vals[m] : 0.5 * (vals[m - 1] + vals[m]);
          break;
        }
        case BandAggregation::Max: v = *std::max_element(vals.begin(), vals.end()); break;
      }
    }
    out[band.name] = v;
  }
  return out;
}

inline std::map<std::string, double> band_summary(const NvcEstimates& est, const std::vector<FrequencyBand>& bands,
                                                  BandAggregation how = BandAggregation::Mean) {
  return band_summary(est.freqs_hz, est.estimate, bands, how);
}

}  // namespace nvc
