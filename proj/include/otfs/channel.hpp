#pragma once

#include "otfs/frame.hpp"

#include <random>
#include <span>
#include <string>
#include <vector>

namespace otfs {

/// One physical propagation path.
struct PathSpec {
    double delay_s = 0.0;
    double doppler_hz = 0.0;
    Complex gain{1.0, 0.0};
};

/// A path quantized to the delay-Doppler grid: integer delay tap, nearest
/// Doppler tap and the fractional remainder kappa in (-1/2, 1/2].
struct TapPath {
    int delay_tap = 0;
    int doppler_tap = 0;
    double frac_doppler = 0.0;
    Complex gain{1.0, 0.0};

    /// k_nu + kappa, the Doppler shift in units of 1/(NT).
    double doppler_taps() const noexcept { return doppler_tap + frac_doppler; }
};

/// Power-delay profile. Delays in ns, average powers in dB.
struct ChannelProfile {
    std::string name;
    std::vector<double> delays_ns;
    std::vector<double> powers_db;
    bool normalize = true;

    std::size_t path_count() const noexcept { return delays_ns.size(); }
    /// Linear path powers, scaled to unit sum when `normalize` is set.
    std::vector<double> linear_powers() const;
    /// Throws std::invalid_argument on empty or inconsistent tables.
    void check() const;
};

/// Built-in 3GPP LTE profiles: "EPA", "EVA", "ETU".
ChannelProfile builtin_profile(const std::string& name);
std::vector<std::string> builtin_profile_names();

/// Maximum Doppler shift (Hz) for a terminal speed in km/h.
double max_doppler_hz(double speed_kmph, double carrier_freq_hz);

/// Rayleigh path gains with the profile's powers; Doppler nu_max * cos(theta),
/// theta ~ U(0, pi). The random draws per path (gain, then angle) do not depend
/// on the speed, so realizations at different speeds are paired.
std::vector<PathSpec> generate_channel(const ChannelProfile& profile, double speed_kmph, const FrameParams& params,
                                       std::mt19937_64& rng);

TapPath quantize_taps(const PathSpec& path, const FrameParams& params);
std::vector<TapPath> quantize_taps(std::span<const PathSpec> paths, const FrameParams& params);

/// r[u] = sum_i h_i s[u - l_i] exp(j 2 pi nu_i (u - l_i) / (M df)), with zero
/// signal before the first sample. Works on any stream length.
SampleStream apply_channel_time(std::span<const Complex> s, std::span<const TapPath> taps, const FrameParams& params);

/// Noise variance per complex sample for a given SNR; +inf dB maps to 0.
double noise_variance(double snr_db);

/// Adds CN(0, 10^(-snr/10)) noise. snr_db = +infinity leaves r unchanged.
SampleStream add_awgn(std::span<const Complex> r, double snr_db, std::mt19937_64& rng);

/// In-place variant used by the simulation loops.
void add_awgn_inplace(std::span<Complex> r, double snr_db, std::mt19937_64& rng);

} // namespace otfs
