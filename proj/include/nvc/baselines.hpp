#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nvc/error.hpp"
#include "nvc/spectral.hpp"

namespace nvc {

// Band-pass design. `order` is the order of the band-pass filter itself
// (twice the low-pass prototype order). With zero_phase the filter runs
// forward and backward; edge_correction then widens the prototype so the
// two-pass response is -3 dB (not -6 dB) at the band edges.
struct FilterSpec {
  int order = 4;
  bool zero_phase = true;
  bool edge_correction = true;
};

// y[t] = b0 x[t] + b1 x[t-1] + b2 x[t-2] - a1 y[t-1] - a2 y[t-2]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;
};

inline std::vector<Biquad> butterworth_bandpass(double lo_hz, double hi_hz, double fs, const FilterSpec& spec = {}) {
  if (spec.order < 2 || spec.order % 2 != 0) throw InvalidArgument("butterworth_bandpass: order must be even and >= 2");
  if (!(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < fs / 2.0))
    throw InvalidArgument("butterworth_bandpass: band must satisfy 0 < lo < hi < fs/2");
  using cd = std::complex<double>;
  const int proto = spec.order / 2;
  const double two_fs = 2.0 * fs;
  const double w_lo = two_fs * std::tan(std::numbers::pi * lo_hz / fs);
  const double w_hi = two_fs * std::tan(std::numbers::pi * hi_hz / fs);
  const double w0 = std::sqrt(w_lo * w_hi);
  const double bw = w_hi - w_lo;
  double scale = 1.0;
  if (spec.zero_phase && spec.edge_correction) scale = std::pow(std::numbers::sqrt2 - 1.0, -1.0 / (2.0 * proto));

  // Band-pass pole pairs, one biquad each. A complex prototype pole p yields
  // s1, s2; its conjugate yields their conjugates. A real prototype pole
  // yields a pair that is either conjugate or real.
  std::vector<std::pair<cd, cd>> analog;
  for (int k = 0; k < proto; ++k) {
    const cd p = scale * std::polar(1.0, std::numbers::pi * (2.0 * k + proto + 1.0) / (2.0 * proto));
    if (p.imag() < -1e-12) continue;
    const cd disc = std::sqrt(p * p * bw * bw - 4.0 * w0 * w0);
    const cd s1 = (p * bw + disc) / 2.0;
    const cd s2 = (p * bw - disc) / 2.0;
    if (std::abs(p.imag()) <= 1e-12) {
      analog.emplace_back(s1, s2);
    } else {
      analog.emplace_back(s1, std::conj(s1));
      analog.emplace_back(s2, std::conj(s2));
    }
  }

  std::vector<Biquad> sos;
  for (const auto& [sa, sb] : analog) {
    const cd za = (two_fs + sa) / (two_fs - sa);
    const cd zb = (two_fs + sb) / (two_fs - sb);
    sos.push_back({1.0, 0.0, -1.0, -(za + zb).real(), (za * zb).real()});
  }
  // Unit gain at the centre frequency.
  const double theta = 2.0 * std::atan(w0 / two_fs);
  const cd e1 = std::polar(1.0, -theta);
  const cd e2 = e1 * e1;
  double gain = 1.0;
  for (const auto& q : sos) gain *= std::abs((q.b0 + q.b1 * e1 + q.b2 * e2) / (1.0 + q.a1 * e1 + q.a2 * e2));
  const double per_section = std::pow(gain, -1.0 / static_cast<double>(sos.size()));
  for (auto& q : sos) {
    q.b0 *= per_section;
    q.b1 *= per_section;
    q.b2 *= per_section;
  }
  return sos;
}

inline void sos_filter_in_place(const std::vector<Biquad>& sos, std::vector<double>& x) {
  for (const auto& q : sos) {
    double z1 = 0.0, z2 = 0.0;  // transposed direct form II
    for (double& v : x) {
      const double y = q.b0 * v + z1;
      z1 = q.b1 * v - q.a1 * y + z2;
      z2 = q.b2 * v - q.a2 * y;
      v = y;
    }
  }
}

// Forward-backward filtering with odd reflection padding at both ends.
inline std::vector<double> filtfilt(const std::vector<Biquad>& sos, std::span<const double> x, std::size_t padlen) {
  if (x.size() < 2) return {x.begin(), x.end()};
  padlen = std::min(padlen, x.size() - 1);
  std::vector<double> ext;
  ext.reserve(x.size() + 2 * padlen);
  for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x.back() - x[x.size() - 1 - i]);
  sos_filter_in_place(sos, ext);
  std::reverse(ext.begin(), ext.end());
  sos_filter_in_place(sos, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(padlen), ext.begin() + static_cast<std::ptrdiff_t>(padlen + x.size())};
}

struct BandFilteredSeries {
  TimeSeriesMatrix data;
  FrequencyBand band;
  FilterSpec filter;
};

inline BandFilteredSeries bandpass(const TimeSeriesMatrix& ts, const FrequencyBand& band, const FilterSpec& spec = {}) {
  if (!(band.lo_hz > 0.0 && band.lo_hz < band.hi_hz && band.hi_hz < ts.fs() / 2.0))
    throw InvalidArgument("bandpass: band '" + band.name + "' must lie inside (0, fs/2)");
  const auto sos = butterworth_bandpass(band.lo_hz, band.hi_hz, ts.fs(), spec);
  const std::size_t padlen = std::max<std::size_t>(3 * (static_cast<std::size_t>(spec.order) + 1),
                                                   static_cast<std::size_t>(std::ceil(3.0 * ts.fs() / (band.hi_hz - band.lo_hz))));
  std::vector<std::vector<double>> out;
  for (std::size_t c = 0; c < ts.channels(); ++c) {
    if (spec.zero_phase) {
      out.push_back(filtfilt(sos, ts.channel(c), padlen));
    } else {
      std::vector<double> x(ts.channel(c).begin(), ts.channel(c).end());
      sos_filter_in_place(sos, x);
      out.push_back(std::move(x));
    }
  }
  return {TimeSeriesMatrix(std::move(out), ts.fs(), ts.labels()), band, spec};
}

inline constexpr std::size_t kDefaultMaxLag = 50;
inline constexpr std::size_t kMinLagOverlap = 30;

// Maximum over lags h in [-max_lag, max_lag] of the squared correlation
// between x_t and y_{t+h}, each computed on the T - |h| overlapping samples.
inline double pbc(std::span<const double> x, std::span<const double> y, std::size_t max_lag = kDefaultMaxLag) {
  const std::size_t n = x.size();
  if (y.size() != n) throw InvalidArgument("pbc: series lengths differ");
  if (n < 2 * max_lag + 2 || n < max_lag + kMinLagOverlap)
    throw InvalidArgument("pbc: series too short for max lag " + std::to_string(max_lag));
  double best = 0.0;
  for (std::ptrdiff_t h = -static_cast<std::ptrdiff_t>(max_lag); h <= static_cast<std::ptrdiff_t>(max_lag); ++h) {
    const std::size_t shift = static_cast<std::size_t>(std::abs(h));
    const std::size_t m = n - shift;
    const double* xs = x.data() + (h < 0 ? shift : 0);
    const double* ys = y.data() + (h < 0 ? 0 : shift);
    double mx = 0.0, my = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      mx += xs[t];
      my += ys[t];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      const double dx = xs[t] - mx;
      const double dy = ys[t] - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw NumericalError("pbc: zero-variance input");
    best = std::max(best, std::min(1.0, (sxy * sxy) / (sxx * syy)));
  }
  return best;
}

struct RegionPbc {
  double mean = 0.0;
  std::vector<std::vector<double>> pairs;  // pairs[i][j]: x channel i vs y channel j
};

// Mean PBC over all cross-region channel pairs of band-filtered data.
inline RegionPbc region_pbc(const TimeSeriesMatrix& x_region, const TimeSeriesMatrix& y_region, const FrequencyBand& band,
                            std::size_t max_lag = kDefaultMaxLag, const FilterSpec& spec = {}) {
  if (x_region.channels() < 1 || y_region.channels() < 1) throw InvalidArgument("region_pbc: empty region");
  const auto fx = bandpass(x_region, band, spec);
  const auto fy = bandpass(y_region, band, spec);
  RegionPbc out;
  double sum = 0.0;
  for (std::size_t i = 0; i < fx.data.channels(); ++i) {
    out.pairs.emplace_back();
    for (std::size_t j = 0; j < fy.data.channels(); ++j) {
      const double v = pbc(fx.data.channel(i), fy.data.channel(j), max_lag);
      out.pairs.back().push_back(v);
      sum += v;
    }
  }
  out.mean = sum / static_cast<double>(fx.data.channels() * fy.data.channels());
  return out;
}

// Block-averaged periodogram of one channel at the retained frequencies.
inline std::vector<double> averaged_periodogram(std::span<const double> x, double fs, std::size_t block_len) {
  const std::vector<std::vector<double>> single{{x.begin(), x.end()}};
  const auto tensor = block_periodograms(TimeSeriesMatrix(single, fs), block_len);
  std::vector<double> avg(tensor.frequencies(), 0.0);
  for (std::size_t s = 0; s < tensor.frequencies(); ++s) {
    for (double v : tensor.series(0, s)) avg[s] += v;
    avg[s] /= static_cast<double>(tensor.blocks());
  }
  return avg;
}

// Relative band power of each band in `bands` against the union of
// `bands_total`: summed block-averaged periodogram over in-band Fourier
// frequencies divided by the same sum over every frequency in the union.
inline std::map<std::string, double> rbp(std::span<const double> x, double fs, const std::vector<FrequencyBand>& bands,
                                         const std::vector<FrequencyBand>& bands_total, std::size_t block_len = 100) {
  const auto avg = averaged_periodogram(x, fs, block_len);
  auto freq = [&](std::size_t s) { return static_cast<double>(s + 1) * fs / static_cast<double>(block_len); };
  double total = 0.0;
  for (std::size_t s = 0; s < avg.size(); ++s) {
    const double f = freq(s);
    if (std::any_of(bands_total.begin(), bands_total.end(), [&](const FrequencyBand& b) { return b.contains(f); }))
      total += avg[s];
  }
  std::map<std::string, double> out;
  for (const auto& band : bands) {
    double in_band = 0.0;
    bool any = false;
    for (std::size_t s = 0; s < avg.size(); ++s) {
      if (!band.contains(freq(s))) continue;
      any = true;
      in_band += avg[s];
    }
    if (!any) throw EmptyBand("rbp: band '" + band.name + "' contains no retained Fourier frequency");
    out[band.name] = total > 0.0 ? in_band / total : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

inline double rbp(std::span<const double> x, double fs, const FrequencyBand& band,
                  const std::vector<FrequencyBand>& bands_total, std::size_t block_len = 100) {
  return rbp(x, fs, std::vector<FrequencyBand>{band}, bands_total, block_len).at(band.name);
}

// Mean RBP over a region's channels.
inline std::map<std::string, double> region_rbp(const TimeSeriesMatrix& region, const std::vector<FrequencyBand>& bands,
                                                const std::vector<FrequencyBand>& bands_total, std::size_t block_len = 100) {
  std::map<std::string, double> out;
  for (std::size_t c = 0; c < region.channels(); ++c)
    for (const auto& [name, v] : rbp(region.channel(c), region.fs(), bands, bands_total, block_len)) out[name] += v;
  for (auto& [name, v] : out) v /= static_cast<double>(region.channels());
  return out;
}

}  // namespace nvc
