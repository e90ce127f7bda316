#include "otfs/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace otfs {

std::vector<double> ChannelProfile::linear_powers() const
{
    std::vector<double> p(powers_db.size());
    std::transform(powers_db.begin(), powers_db.end(), p.begin(), [](double db) { return std::pow(10.0, db / 10.0); });
    if (normalize) {
        double total = 0.0;
        for (double v : p)
            total += v;
        for (double& v : p)
            v /= total;
    }
    return p;
}

void ChannelProfile::check() const
{
    if (delays_ns.empty())
        throw std::invalid_argument("channel profile '" + name + "' has no paths");
    if (delays_ns.size() != powers_db.size())
        throw std::invalid_argument("channel profile '" + name + "': delay and power tables differ in length");
    for (double d : delays_ns)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw std::invalid_argument("channel profile '" + name + "': delays must be finite and >= 0");
    for (double p : powers_db)
        if (!std::isfinite(p))
            throw std::invalid_argument("channel profile '" + name + "': powers must be finite");
}

// 3GPP TS 36.104 Annex B.2 tapped-delay-line tables.
ChannelProfile builtin_profile(const std::string& name)
{
    if (name == "EPA")
        return {"EPA", {0, 30, 70, 90, 110, 190, 410}, {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8}, true};
    if (name == "EVA")
        return {"EVA",
                {0, 30, 150, 310, 370, 710, 1090, 1730, 2510},
                {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9},
                true};
    if (name == "ETU")
        return {"ETU",
                {0, 50, 120, 200, 230, 500, 1600, 2300, 5000},
                {-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0},
                true};
    throw std::invalid_argument("unknown channel profile '" + name + "'");
}

std::vector<std::string> builtin_profile_names()
{
    return {"EPA", "EVA", "ETU"};
}

double max_doppler_hz(double speed_kmph, double carrier_freq_hz)
{
    return speed_kmph / 3.6 * carrier_freq_hz / kSpeedOfLight;
}

std::vector<PathSpec> generate_channel(const ChannelProfile& profile, double speed_kmph, const FrameParams& params,
                                       std::mt19937_64& rng)
{
    profile.check();
    if (!(speed_kmph >= 0.0))
        throw std::invalid_argument("speed must be >= 0");

    const double nu_max = max_doppler_hz(speed_kmph, params.carrier_freq());
    const auto powers = profile.linear_powers();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, kPi);

    std::vector<PathSpec> paths(profile.path_count());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const double sigma = std::sqrt(powers[i] / 2.0);
        const double re = normal(rng);
        const double im = normal(rng);
        const double theta = angle(rng);
        paths[i].delay_s = profile.delays_ns[i] * 1e-9;
        paths[i].gain = Complex(re, im) * sigma;
        paths[i].doppler_hz = nu_max * std::cos(theta);
    }
    return paths;
}

TapPath quantize_taps(const PathSpec& path, const FrameParams& params)
{
    if (!(path.delay_s >= 0.0) || !(path.delay_s < 1.0 / params.subcarrier_spacing()))
        throw std::invalid_argument("path delay outside [0, 1/df)");
    TapPath tap;
    tap.delay_tap = static_cast<int>(std::lround(path.delay_s * params.bandwidth()));
    if (tap.delay_tap >= params.m_delay())
        throw std::invalid_argument("path delay rounds to tap M, outside the delay grid");

    // kappa in (-1/2, 1/2]: a half-integer shift resolves to the lower tap.
    const double taps = path.doppler_hz * params.frame_duration();
    tap.doppler_tap = static_cast<int>(std::ceil(taps - 0.5));
    tap.frac_doppler = taps - tap.doppler_tap;
    tap.gain = path.gain;
    return tap;
}

std::vector<TapPath> quantize_taps(std::span<const PathSpec> paths, const FrameParams& params)
{
    std::vector<TapPath> taps;
    taps.reserve(paths.size());
    for (const auto& p : paths)
        taps.push_back(quantize_taps(p, params));
    return taps;
}

SampleStream apply_channel_time(std::span<const Complex> s, std::span<const TapPath> taps, const FrameParams& params)
{
    SampleStream r(s.size(), Complex{});
    const double cycles_per_sample_scale = 1.0 / static_cast<double>(params.size());
    for (const auto& tap : taps) {
        if (tap.delay_tap < 0 || tap.delay_tap >= params.m_delay())
            throw std::invalid_argument("delay tap outside [0, M)");
        const double w = 2.0 * kPi * tap.doppler_taps() * cycles_per_sample_scale;
        const auto l = static_cast<std::size_t>(tap.delay_tap);
        for (std::size_t u = l; u < s.size(); ++u) {
            const double t = static_cast<double>(u - l);
            r[u] += tap.gain * s[u - l] * std::polar(1.0, w * t);
        }
    }
    return r;
}

double noise_variance(double snr_db)
{
    if (std::isinf(snr_db) && snr_db > 0)
        return 0.0;
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("SNR must be finite or +inf");
    return std::pow(10.0, -snr_db / 10.0);
}

void add_awgn_inplace(std::span<Complex> r, double snr_db, std::mt19937_64& rng)
{
    const double var = noise_variance(snr_db);
    if (var == 0.0)
        return;
    std::normal_distribution<double> normal(0.0, std::sqrt(var / 2.0));
    for (auto& v : r) {
        const double re = normal(rng);
        const double im = normal(rng);
        v += Complex(re, im);
    }
}

SampleStream add_awgn(std::span<const Complex> r, double snr_db, std::mt19937_64& rng)
{
    SampleStream out(r.begin(), r.end());
    add_awgn_inplace(out, snr_db, rng);
    return out;
}

} // namespace otfs
