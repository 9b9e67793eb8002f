#pragma once

#include "breathfair/audio.hpp"
#include "breathfair/matrix.hpp"

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace breathfair {

inline constexpr std::size_t kMfccCount = 40;

/// MFCC front-end settings. Defaults follow the usual librosa configuration;
/// only the 40-coefficient count is fixed by the experiment protocol.
struct DspConfig
{
   std::size_t frame_length = 2048; // also the FFT size
   std::size_t hop_length = 512;
   std::size_t n_mels = 128;
   std::size_t n_mfcc = kMfccCount;
   double fmin = 0.0;
   double fmax = 0.0; // 0 means sample_rate / 2
   double amin = 1e-10;
   double top_db = 80.0;

   double effective_fmax(int sample_rate) const { return fmax > 0.0 ? fmax : sample_rate / 2.0; }

   /// Throws ConfigError unless 0 < hop <= frame, n_mfcc <= n_mels and fmin < fmax <= sr/2.
   void validate(int sample_rate) const;

   friend bool operator==(const DspConfig&, const DspConfig&) = default;
};

class DspError : public ConfigError
{
public:
   using ConfigError::ConfigError;
};

struct MfccMatrix
{
   Matrix coefficients; // n_mfcc x n_frames
   DspConfig config;

   std::size_t n_frames() const { return coefficients.cols(); }
};

using FeatureVec40 = std::array<double, kMfccCount>;

/// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& data);

/// |DFT|^2 of a real frame, bins 0..n/2. Any n >= 1; powers of two take the fast path.
std::vector<double> real_power_spectrum(std::span<const double> frame);

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

/// Centered STFT power: reflect-pad by frame_length/2, Hann window, |FFT|^2.
/// Shape (frame_length/2 + 1) x (1 + len/hop).
Matrix power_spectrogram(std::span<const double> samples, const DspConfig& cfg);

/// Slaney mel scale: linear below 1 kHz (3 mels per 200 Hz), logarithmic above.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// The n_mels + 2 filter edge frequencies, evenly spaced on the mel scale.
std::vector<double> mel_band_edges(const DspConfig& cfg, int sample_rate);

/// Triangular mel filterbank, n_mels x (frame_length/2 + 1).
/// Area normalization scales filter i by 2 / (edge[i+2] - edge[i]).
/// Throws DspError when a triangle spans less than one FFT bin or covers no bin.
Matrix mel_filterbank(const DspConfig& cfg, int sample_rate, bool area_normalize = true);

/// Orthonormal DCT-II basis, n_out x n_in.
Matrix dct2_ortho_basis(std::size_t n_out, std::size_t n_in);

/// MFCC matrix: mel power -> dB (amin floor, top_db clamp below the global max) -> ortho DCT-II.
MfccMatrix mfcc(const Waveform& wave, const DspConfig& cfg = {});

/// Per-coefficient mean over frames; requires n_mfcc == 40.
FeatureVec40 summarize(const MfccMatrix& m);

} // namespace breathfair
