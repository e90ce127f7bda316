#pragma once

#include "otfs/channel.hpp"
#include "otfs/detector.hpp"
#include "otfs/effective_channel.hpp"
#include "otfs/frame.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace otfs {

enum class Scheme { otfs_ideal, otfs_rect_wc, otfs_rect_wo, ofdm };

/// "otfs-ideal", "otfs-rect-wc", "otfs-rect-wo" or "ofdm".
Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

/// IDI window setting: a half-width >= 0, or one of these markers.
inline constexpr int kNiDefault = -1; ///< min(10, largest symmetric half-width for N)
inline constexpr int kNiFull = -2;    ///< every Doppler tap

/// "full", "default" or a non-negative integer.
int parse_ni(const std::string& text);

struct CampaignConfig {
    Scheme scheme = Scheme::otfs_ideal;
    int n_doppler = 16;
    int m_delay = 64;
    double subcarrier_spacing_hz = 15e3;
    double carrier_freq_hz = 4e9;
    int qam = 4;
    std::vector<double> snr_db{18.0};
    std::vector<double> speeds_kmph{120.0};
    int frames = 500;
    int ni = kNiDefault;
    DetectorConfig detector;
    std::string profile = "EVA";
    std::vector<ChannelProfile> custom_profiles; ///< looked up by name before the built-in tables
    std::uint64_t seed = 1;
    std::string out; ///< CSV path; empty for no file
    bool noiseless = false;
    int threads = 0; ///< 0 = hardware concurrency
    double cp_us = 2.6;
    int b_off = 8;

    /// Throws std::invalid_argument on an inconsistent configuration.
    void check() const;

    FrameParams frame() const;
    /// Resolved half-width, or kNiFull.
    int resolved_ni() const;
    IdiWindow window() const;
    ChannelProfile channel_profile() const;
    /// OFDM cyclic prefix in samples, round(cp_us * M * df).
    int cp_samples() const;
    /// Payload bits carried by one frame.
    std::size_t bits_per_frame() const;
};

/// Noise variance handed to the detector for noiseless runs.
inline constexpr double kNoiselessDetectorVariance = 1e-5;

struct TrialResult {
    std::size_t bit_errors = 0;
    std::size_t bits = 0;
    long iterations = 0; ///< summed over every detector call in the frame
    int detections = 0;  ///< detector calls (1 for OTFS, N for OFDM)
};

/// Seed of trial `index`; it depends on the master seed and the trial index
/// only, so every scheme, SNR, speed and sweep value sees the same draws.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// One frame: channel draw, transmission, detection, bit error count.
TrialResult run_trial(const CampaignConfig& cfg, double snr_db, double speed_kmph, std::uint64_t seed);

/// cfg.frames trials at one point, in trial order. Runs on cfg.threads workers.
std::vector<TrialResult> run_trials(const CampaignConfig& cfg, double snr_db, double speed_kmph);

struct BerRecord {
    std::string scheme;
    double snr_db = 0.0;
    double speed_kmph = 0.0;
    std::string ni;
    double damping = 0.0;
    int frames = 0;
    std::size_t bit_errors = 0;
    std::size_t total_bits = 0;
    double ber = 0.0;
    double mean_iterations = 0.0;
    double wall_time_s = 0.0;
};

BerRecord aggregate(const CampaignConfig& cfg, double snr_db, double speed_kmph, const std::vector<TrialResult>& trials,
                    double wall_time_s);

extern const char* const kCsvHeader;
/// One CSV line without the trailing newline.
std::string format_csv_row(const BerRecord& r);

/// Speed-major loop over (speed, snr). Writes cfg.out when set.
std::vector<BerRecord> run_campaign(const CampaignConfig& cfg);
/// run_campaign for each n_i value (kNiFull allowed); one CSV for the whole sweep.
std::vector<BerRecord> sweep_ni(const CampaignConfig& cfg, const std::vector<int>& ni_list);
std::vector<BerRecord> sweep_damping(const CampaignConfig& cfg, const std::vector<double>& damping_list);

/// Paired comparison of two runs over the same trials. Each frame contributes
/// its BER difference; the interval is mean +- 1.96 sd / sqrt(F).
struct PairedComparison {
    double ber_a = 0.0;
    double ber_b = 0.0;
    double mean_diff = 0.0; ///< a - b
    double half_width = 0.0;
    /// a - b is significantly positive.
    bool a_worse() const noexcept { return mean_diff - half_width > 0.0; }
    bool b_worse() const noexcept { return mean_diff + half_width < 0.0; }
    /// Zero lies inside the interval.
    bool equivalent() const noexcept { return !a_worse() && !b_worse(); }
};

PairedComparison compare_paired(const std::vector<TrialResult>& a, const std::vector<TrialResult>& b);

/// Reads a JSON campaign file on top of `base`. Unknown keys are errors.
CampaignConfig load_campaign_config(const std::string& path, CampaignConfig base = {});
CampaignConfig parse_campaign_config(const std::string& json_text, CampaignConfig base = {});

} // namespace otfs
