#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "admr/errors.hpp"

namespace admr {

enum class TraceUnit { volts, tesla };

inline const char* to_string(TraceUnit u) { return u == TraceUnit::volts ? "volts" : "tesla"; }

inline TraceUnit trace_unit_from_string(const std::string& s) {
  if (s == "volts") return TraceUnit::volts;
  if (s == "tesla") return TraceUnit::tesla;
  throw config_error("unknown trace unit '" + s + "' (volts|tesla)");
}

struct TimeTrace {
  double sample_rate = 0;  // Hz
  Eigen::ArrayXd values;
  TraceUnit unit = TraceUnit::volts;
  std::string origin = "synthetic";  // "measured" or "synthetic(seed)"
};

struct Spectrum {
  Eigen::ArrayXd freqs;  // Hz
  Eigen::ArrayXd asd;    // unit/sqrt(Hz)
};

struct AllanResult {
  Eigen::ArrayXd taus;        // s
  Eigen::ArrayXd deviations;  // same unit as the trace
  Eigen::Array<long, Eigen::Dynamic, 1> counts;
};

// Segment-averaged single-sided amplitude spectral density. Rectangular
// window, 50% overlap, segment length = round(sample_rate / resolution).
// Normalized so unit-variance white noise gives a flat sqrt(2/fs) and a
// sinusoid's spectral peak integrates (peak * bin width) to A^2/2.
inline Spectrum asd(const TimeTrace& trace, double resolution) {
  const long n = trace.values.size();
  if (n < 2) throw trace_too_short("trace has fewer than 2 samples");
  if (!(trace.sample_rate > 0)) throw bad_params("sample_rate must be > 0");
  if (!(resolution >= trace.sample_rate / double(n)))
    throw trace_too_short("resolution finer than sample_rate/length");

  const long L = std::max<long>(2, std::lround(trace.sample_rate / resolution));
  if (L > n) throw trace_too_short("segment longer than trace");
  const long hop = std::max<long>(1, L / 2);
  const long n_seg = 1 + (n - L) / hop;
  const long n_bins = L / 2 + 1;

  // one shared twiddle table; bin k sample j uses entry (k*j mod L)
  std::vector<std::complex<double>> tw(static_cast<size_t>(L));
  for (long j = 0; j < L; ++j) {
    const double ph = -2.0 * M_PI * double(j) / double(L);
    tw[static_cast<size_t>(j)] = {std::cos(ph), std::sin(ph)};
  }

  Eigen::ArrayXd psd = Eigen::ArrayXd::Zero(n_bins);
  for (long s = 0; s < n_seg; ++s) {
    const double* seg = trace.values.data() + s * hop;
    for (long k = 0; k < n_bins; ++k) {
      std::complex<double> acc = 0;
      long idx = 0;
      for (long j = 0; j < L; ++j) {
        acc += seg[j] * tw[static_cast<size_t>(idx)];
        idx += k;
        if (idx >= L) idx -= L;
      }
      psd(k) += std::norm(acc);
    }
  }
  psd /= double(n_seg);

  Spectrum out;
  out.freqs = Eigen::ArrayXd::LinSpaced(n_bins, 0.0, double(n_bins - 1)) * trace.sample_rate / double(L);
  out.asd.resize(n_bins);
  for (long k = 0; k < n_bins; ++k) {
    const bool interior = k > 0 && !(L % 2 == 0 && k == L / 2);
    const double scale = (interior ? 2.0 : 1.0) / (trace.sample_rate * double(L));
    out.asd(k) = std::sqrt(psd(k) * scale);
  }
  return out;
}

inline TimeTrace volts_to_tesla(const TimeTrace& trace, double slope_v_per_hz, double gamma_e_hz_t) {
  if (slope_v_per_hz == 0) throw zero_slope("volts_to_tesla with zero slope");
  TimeTrace out = trace;
  out.values = trace.values / (slope_v_per_hz * gamma_e_hz_t);
  out.unit = TraceUnit::tesla;
  return out;
}

// Overlapping Allan deviation on window means: with x_bar_i the mean of
// samples [i, i+m), sigma^2(tau) = sum_{i=0}^{N-2m} (x_bar_{i+m} - x_bar_i)^2
// / (2 (N - 2m + 1)). tau must be an integer multiple of the sample period.
inline AllanResult allan_overlapping(const TimeTrace& trace, const std::vector<double>& taus) {
  const long n = trace.values.size();
  if (n < 2) throw trace_too_short("trace has fewer than 2 samples");
  if (taus.empty()) throw bad_params("no tau values given");

  AllanResult out;
  out.taus.resize(static_cast<long>(taus.size()));
  out.deviations.resize(static_cast<long>(taus.size()));
  out.counts.resize(static_cast<long>(taus.size()));

  Eigen::ArrayXd prefix(n + 1);
  prefix(0) = 0;
  for (long i = 0; i < n; ++i) prefix(i + 1) = prefix(i) + trace.values(i);

  for (size_t t = 0; t < taus.size(); ++t) {
    const double tau = taus[t];
    const double m_real = tau * trace.sample_rate;
    const long m = std::lround(m_real);
    if (m < 1 || std::abs(m_real - double(m)) > 1e-9 * std::max(1.0, m_real))
      throw tau_out_of_range("tau " + std::to_string(tau) + " s is not an integer multiple of the sample period");
    if (2 * m > n)
      throw tau_out_of_range("tau " + std::to_string(tau) + " s needs 2m <= N");

    const long pairs = n - 2 * m + 1;
    double acc = 0;
    for (long i = 0; i < pairs; ++i) {
      const double mean_lo = (prefix(i + m) - prefix(i)) / double(m);
      const double mean_hi = (prefix(i + 2 * m) - prefix(i + m)) / double(m);
      const double d = mean_hi - mean_lo;
      acc += d * d;
    }
    out.taus(static_cast<long>(t)) = tau;
    out.deviations(static_cast<long>(t)) = std::sqrt(acc / (2.0 * double(pairs)));
    out.counts(static_cast<long>(t)) = pairs;
  }
  return out;
}

// Second-order low-pass magnitude with a 12 dB/octave asymptote.
inline double lowpass_response(double f, double cutoff) {
  if (!(cutoff > 0)) throw bad_params("cutoff must be > 0");
  return 1.0 / (1.0 + (f / cutoff) * (f / cutoff));
}

enum class SynthKind { white, drift, sine };

inline SynthKind synth_kind_from_string(const std::string& s) {
  if (s == "white") return SynthKind::white;
  if (s == "drift") return SynthKind::drift;
  if (s == "sine") return SynthKind::sine;
  throw config_error("unknown synth kind '" + s + "' (white|drift|sine)");
}

struct SynthParams {
  double asd = 1.0;         // white: target amplitude spectral density, unit/sqrt(Hz)
  double drift_per_s = 1.0; // drift: linear slope, unit/s
  double amplitude = 1.0;   // sine
  double freq_hz = 10.0;    // sine
};

// Deterministic generator: mt19937_64 with an explicit Box-Muller transform,
// so identical seeds give bit-identical traces on a given platform.
inline TimeTrace synth_trace(SynthKind kind, const SynthParams& p, std::uint64_t seed,
                             double sample_rate, long length) {
  if (length < 2) throw bad_params("length must be >= 2");
  if (!(sample_rate > 0)) throw bad_params("sample_rate must be > 0");

  TimeTrace out;
  out.sample_rate = sample_rate;
  out.unit = TraceUnit::volts;
  out.origin = "synthetic(" + std::to_string(seed) + ")";
  out.values.resize(length);

  switch (kind) {
    case SynthKind::white: {
      if (p.asd < 0) throw bad_params("white asd must be >= 0");
      const double sigma = p.asd * std::sqrt(sample_rate / 2.0);
      std::mt19937_64 rng(seed);
      auto uniform01 = [&rng]() {
        return (double(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);  // (0,1)
      };
      for (long i = 0; i < length; ++i) {
        const double u1 = uniform01();
        const double u2 = uniform01();
        out.values(i) = sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      }
      break;
    }
    case SynthKind::drift:
      for (long i = 0; i < length; ++i) out.values(i) = p.drift_per_s * double(i) / sample_rate;
      break;
    case SynthKind::sine:
      if (p.amplitude < 0 || p.freq_hz < 0) throw bad_params("sine amplitude and freq must be >= 0");
      for (long i = 0; i < length; ++i)
        out.values(i) = p.amplitude * std::sin(2.0 * M_PI * p.freq_hz * double(i) / sample_rate);
      break;
  }
  return out;
}

inline TimeTrace add_traces(const TimeTrace& a, const TimeTrace& b) {
  if (a.values.size() != b.values.size() || a.sample_rate != b.sample_rate)
    throw bad_params("traces differ in length or sample rate");
  TimeTrace out = a;
  out.values = a.values + b.values;
  return out;
}

}  // namespace admr
