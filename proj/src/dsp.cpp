#include "breathfair/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace breathfair {

void DspConfig::validate(int sample_rate) const
{
   if (sample_rate <= 0) throw DspError("sample rate must be positive");
   if (frame_length == 0 || hop_length == 0 || hop_length > frame_length) {
      throw DspError("need 0 < hop_length <= frame_length");
   }
   if (n_mels == 0 || n_mfcc == 0 || n_mfcc > n_mels) throw DspError("need 0 < n_mfcc <= n_mels");
   const double hi = effective_fmax(sample_rate);
   if (!(fmin >= 0.0 && fmin < hi && hi <= sample_rate / 2.0)) throw DspError("need 0 <= fmin < fmax <= sample_rate/2");
   if (!(amin > 0.0)) throw DspError("amin must be positive");
   if (!(top_db >= 0.0)) throw DspError("top_db must be non-negative");
}

namespace {

bool is_power_of_two(std::size_t n)
{
   return n != 0 && (n & (n - 1)) == 0;
}

// numpy "reflect" padding (edge sample not repeated), extended periodically for short signals.
double reflect_at(std::span<const double> x, std::ptrdiff_t i)
{
   const auto n = static_cast<std::ptrdiff_t>(x.size());
   if (n == 1) return x[0];
   const std::ptrdiff_t period = 2 * (n - 1);
   std::ptrdiff_t k = i % period;
   if (k < 0) k += period;
   if (k >= n) k = period - k;
   return x[static_cast<std::size_t>(k)];
}

} // namespace

void fft_radix2(std::vector<std::complex<double>>& a)
{
   const std::size_t n = a.size();
   for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
   }
   for (std::size_t len = 2; len <= n; len <<= 1) {
      const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
      const std::size_t half = len / 2;
      for (std::size_t k = 0; k < half; ++k) {
         const std::complex<double> w(std::cos(angle * k), std::sin(angle * k));
         for (std::size_t i = k; i < n; i += len) {
            const auto u = a[i];
            const auto v = a[i + half] * w;
            a[i] = u + v;
            a[i + half] = u - v;
         }
      }
   }
}

std::vector<double> real_power_spectrum(std::span<const double> frame)
{
   const std::size_t n = frame.size();
   const std::size_t bins = n / 2 + 1;
   std::vector<double> power(bins);
   if (is_power_of_two(n)) {
      std::vector<std::complex<double>> buf(frame.begin(), frame.end());
      fft_radix2(buf);
      for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(buf[k]);
      return power;
   }
   for (std::size_t k = 0; k < bins; ++k) {
      std::complex<double> acc{};
      for (std::size_t t = 0; t < n; ++t) {
         const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
         acc += frame[t] * std::complex<double>(std::cos(angle), std::sin(angle));
      }
      power[k] = std::norm(acc);
   }
   return power;
}

std::vector<double> hann_window(std::size_t n)
{
   std::vector<double> w(n);
   for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
   }
   return w;
}

Matrix power_spectrogram(std::span<const double> samples, const DspConfig& cfg)
{
   if (samples.empty()) throw DspError("power_spectrogram: empty signal");
   if (cfg.frame_length == 0 || cfg.hop_length == 0) throw DspError("power_spectrogram: zero frame or hop length");

   const std::size_t n_fft = cfg.frame_length;
   const auto pad = static_cast<std::ptrdiff_t>(n_fft / 2);
   const std::size_t padded_len = samples.size() + 2 * static_cast<std::size_t>(pad);
   const std::size_t n_frames = padded_len < n_fft ? 1 : 1 + (padded_len - n_fft) / cfg.hop_length;
   const auto window = hann_window(n_fft);

   Matrix spec(n_fft / 2 + 1, n_frames);
   std::vector<double> frame(n_fft);
   for (std::size_t f = 0; f < n_frames; ++f) {
      const auto start = static_cast<std::ptrdiff_t>(f * cfg.hop_length) - pad;
      for (std::size_t t = 0; t < n_fft; ++t) {
         frame[t] = reflect_at(samples, start + static_cast<std::ptrdiff_t>(t)) * window[t];
      }
      const auto power = real_power_spectrum(frame);
      for (std::size_t k = 0; k < power.size(); ++k) spec(k, f) = power[k];
   }
   return spec;
}

namespace {

constexpr double kMelLinearStep = 200.0 / 3.0;
constexpr double kMelBreakHz = 1000.0;
constexpr double kMelBreak = kMelBreakHz / kMelLinearStep;

double mel_log_step()
{
   return std::log(6.4) / 27.0;
}

} // namespace

double hz_to_mel(double hz)
{
   if (hz < kMelBreakHz) return hz / kMelLinearStep;
   return kMelBreak + std::log(hz / kMelBreakHz) / mel_log_step();
}

double mel_to_hz(double mel)
{
   if (mel < kMelBreak) return mel * kMelLinearStep;
   return kMelBreakHz * std::exp(mel_log_step() * (mel - kMelBreak));
}

std::vector<double> mel_band_edges(const DspConfig& cfg, int sample_rate)
{
   const double lo = hz_to_mel(cfg.fmin);
   const double hi = hz_to_mel(cfg.effective_fmax(sample_rate));
   const std::size_t n = cfg.n_mels + 2;
   std::vector<double> edges(n);
   for (std::size_t i = 0; i < n; ++i) {
      const double mel = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      edges[i] = mel_to_hz(mel);
   }
   return edges;
}

Matrix mel_filterbank(const DspConfig& cfg, int sample_rate, bool area_normalize)
{
   cfg.validate(sample_rate);
   const std::size_t bins = cfg.frame_length / 2 + 1;
   const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(cfg.frame_length);
   const auto edges = mel_band_edges(cfg, sample_rate);

   Matrix fb(cfg.n_mels, bins);
   for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      const double lower = edges[m];
      const double centre = edges[m + 1];
      const double upper = edges[m + 2];
      if (upper - lower < bin_hz) {
         throw DspError("mel filter " + std::to_string(m) + " spans less than one FFT bin; reduce n_mels or raise frame_length");
      }
      const double scale = area_normalize ? 2.0 / (upper - lower) : 1.0;
      bool any = false;
      for (std::size_t k = 0; k < bins; ++k) {
         const double f = bin_hz * static_cast<double>(k);
         const double rising = (f - lower) / (centre - lower);
         const double falling = (upper - f) / (upper - centre);
         const double w = std::max(0.0, std::min(rising, falling));
         fb(m, k) = w * scale;
         any = any || w > 0.0;
      }
      if (!any) throw DspError("mel filter " + std::to_string(m) + " covers no FFT bin");
   }
   return fb;
}

Matrix dct2_ortho_basis(std::size_t n_out, std::size_t n_in)
{
   Matrix basis(n_out, n_in);
   const double s0 = std::sqrt(1.0 / static_cast<double>(n_in));
   const double sk = std::sqrt(2.0 / static_cast<double>(n_in));
   for (std::size_t k = 0; k < n_out; ++k) {
      for (std::size_t n = 0; n < n_in; ++n) {
         const double angle = std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(n) + 1.0) /
                              (2.0 * static_cast<double>(n_in));
         basis(k, n) = (k == 0 ? s0 : sk) * std::cos(angle);
      }
   }
   return basis;
}

MfccMatrix mfcc(const Waveform& wave, const DspConfig& cfg)
{
   cfg.validate(wave.sample_rate);
   const Matrix spec = power_spectrogram(wave.samples, cfg);
   const Matrix fb = mel_filterbank(cfg, wave.sample_rate);
   const std::size_t frames = spec.cols();

   Matrix db(cfg.n_mels, frames);
   double peak = -std::numeric_limits<double>::infinity();
   for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      const auto weights = fb.row(m);
      for (std::size_t f = 0; f < frames; ++f) {
         double energy = 0.0;
         for (std::size_t k = 0; k < weights.size(); ++k) {
            if (weights[k] != 0.0) energy += weights[k] * spec(k, f);
         }
         const double v = 10.0 * std::log10(std::max(energy, cfg.amin));
         db(m, f) = v;
         peak = std::max(peak, v);
      }
   }
   const double floor_db = peak - cfg.top_db;
   for (double& v : db.data()) v = std::max(v, floor_db);

   const Matrix basis = dct2_ortho_basis(cfg.n_mfcc, cfg.n_mels);
   MfccMatrix out{Matrix(cfg.n_mfcc, frames), cfg};
   for (std::size_t k = 0; k < cfg.n_mfcc; ++k) {
      for (std::size_t f = 0; f < frames; ++f) {
         double acc = 0.0;
         for (std::size_t m = 0; m < cfg.n_mels; ++m) acc += basis(k, m) * db(m, f);
         out.coefficients(k, f) = acc;
      }
   }
   return out;
}

FeatureVec40 summarize(const MfccMatrix& m)
{
   if (m.coefficients.rows() != kMfccCount) throw DspError("summarize: expected 40 MFCC coefficients");
   if (m.n_frames() == 0) throw DspError("summarize: no frames");
   FeatureVec40 out{};
   for (std::size_t k = 0; k < kMfccCount; ++k) {
      double sum = 0.0;
      for (double v : m.coefficients.row(k)) sum += v;
      out[k] = sum / static_cast<double>(m.n_frames());
   }
   return out;
}

} // namespace breathfair
