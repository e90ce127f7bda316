#include "otfs/channel.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace otfs;

namespace {

const FrameParams kFrame(16, 32, 15e3, 4e9);

std::vector<Complex> random_stream(std::size_t n, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    std::vector<Complex> s(n);
    for (auto& v : s)
        v = {nd(rng), nd(rng)};
    return s;
}

} // namespace

TEST_CASE("maximum Doppler at 500 km/h and 4 GHz")
{
    CHECK(max_doppler_hz(500.0, 4e9) == doctest::Approx(500.0 / 3.6 * 4e9 / 2.99792458e8).epsilon(1e-12));
    CHECK(max_doppler_hz(500.0, 4e9) == doctest::Approx(1853.2).epsilon(1e-3));
}

TEST_CASE("built-in profiles are normalized")
{
    for (const auto& name : builtin_profile_names()) {
        const auto p = builtin_profile(name);
        double total = 0.0;
        for (double v : p.linear_powers())
            total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto eva = builtin_profile("EVA");
    CHECK(eva.path_count() == 9);
    CHECK(eva.delays_ns.back() == 2510.0);
    CHECK_THROWS_AS(builtin_profile("XYZ"), std::invalid_argument);
    ChannelProfile empty{"none", {}, {}, true};
    CHECK_THROWS_AS(empty.check(), std::invalid_argument);
}

TEST_CASE("zero speed gives zero Doppler; speed only scales the shifts")
{
    const auto eva = builtin_profile("EVA");
    std::mt19937_64 a(3), b(3);
    const auto still = generate_channel(eva, 0.0, kFrame, a);
    const auto fast = generate_channel(eva, 500.0, kFrame, b);
    REQUIRE(still.size() == fast.size());
    const double nu_max = max_doppler_hz(500.0, 4e9);
    for (std::size_t i = 0; i < still.size(); ++i) {
        CHECK(still[i].doppler_hz == 0.0);
        CHECK(still[i].gain == fast[i].gain);
        CHECK(std::abs(fast[i].doppler_hz) <= nu_max);
        CHECK(still[i].delay_s == doctest::Approx(eva.delays_ns[i] * 1e-9));
    }
    std::mt19937_64 c(3);
    CHECK_THROWS_AS(generate_channel(eva, -1.0, kFrame, c), std::invalid_argument);
}

TEST_CASE("average total path power is one")
{
    const auto eva = builtin_profile("EVA");
    std::mt19937_64 rng(5);
    const int draws = 100000;
    double total = 0.0;
    for (int i = 0; i < draws; ++i)
        for (const auto& p : generate_channel(eva, 120.0, kFrame, rng))
            total += std::norm(p.gain);
    CHECK(total / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("quantization of delay and Doppler")
{
    const double nt = kFrame.frame_duration();
    const double b = kFrame.bandwidth();
    auto q = [&](double tau_samples, double nu_taps) {
        return quantize_taps(PathSpec{tau_samples / b, nu_taps / nt, {1.0, 0.0}}, kFrame);
    };
    auto t = q(0.0, 3.3);
    CHECK(t.doppler_tap == 3);
    CHECK(t.frac_doppler == doctest::Approx(0.3));
    t = q(0.0, -0.5);
    CHECK(t.doppler_tap == -1);
    CHECK(t.frac_doppler == doctest::Approx(0.5));
    t = q(0.0, 0.5);
    CHECK(t.doppler_tap == 0);
    CHECK(t.frac_doppler == doctest::Approx(0.5));
    CHECK(q(2.49, 0.0).delay_tap == 2);

    for (int l = 0; l < 5; ++l)
        for (int k = -3; k <= 3; ++k) {
            const auto exact = q(l, k);
            CHECK(exact.delay_tap == l);
            CHECK(exact.doppler_tap == k);
            CHECK(std::abs(exact.frac_doppler) < 1e-9);
        }
    CHECK_THROWS_AS(q(40.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(q(31.8, 0.0), std::invalid_argument);
}

TEST_CASE("apply_channel_time: identity, delay and Doppler ramp")
{
    std::mt19937_64 rng(8);
    const auto s = random_stream(kFrame.size(), rng);

    const std::vector<TapPath> identity{{0, 0, 0.0, 1.0}};
    const auto r0 = apply_channel_time(s, identity, kFrame);
    for (std::size_t u = 0; u < s.size(); ++u)
        CHECK(r0[u] == s[u]);

    const std::vector<TapPath> delay{{2, 0, 0.0, 1.0}};
    const auto r1 = apply_channel_time(s, delay, kFrame);
    CHECK(r1[0] == Complex{});
    CHECK(r1[1] == Complex{});
    for (std::size_t u = 2; u < s.size(); ++u)
        CHECK(r1[u] == s[u - 2]);

    const std::vector<TapPath> ramp{{0, 1, 0.0, 1.0}};
    const auto r2 = apply_channel_time(s, ramp, kFrame);
    const double nm = static_cast<double>(kFrame.size());
    for (std::size_t u = 0; u < s.size(); ++u)
        CHECK(std::abs(r2[u] - s[u] * std::polar(1.0, 2.0 * kPi * u / nm)) < 1e-12);

    const std::vector<TapPath> too_long{{32, 0, 0.0, 1.0}};
    CHECK_THROWS_AS(apply_channel_time(s, too_long, kFrame), std::invalid_argument);
}

TEST_CASE("apply_channel_time is linear, additive over paths and time invariant without Doppler")
{
    std::mt19937_64 rng(9);
    const auto s1 = random_stream(kFrame.size(), rng);
    const auto s2 = random_stream(kFrame.size(), rng);
    const std::vector<TapPath> taps{{1, 2, 0.3, {0.5, 0.2}}, {4, -1, -0.1, {0.1, -0.7}}};
    const Complex a(0.3, -1.1), b(2.0, 0.5);
    std::vector<Complex> mix(s1.size());
    for (std::size_t u = 0; u < mix.size(); ++u)
        mix[u] = a * s1[u] + b * s2[u];
    const auto r = apply_channel_time(mix, taps, kFrame);
    const auto r1 = apply_channel_time(s1, taps, kFrame);
    const auto r2 = apply_channel_time(s2, taps, kFrame);
    const auto p0 = apply_channel_time(s1, std::span(taps).subspan(0, 1), kFrame);
    const auto p1 = apply_channel_time(s1, std::span(taps).subspan(1, 1), kFrame);
    for (std::size_t u = 0; u < mix.size(); ++u) {
        CHECK(std::abs(r[u] - (a * r1[u] + b * r2[u])) < 1e-12);
        CHECK(std::abs(r1[u] - (p0[u] + p1[u])) < 1e-12);
    }

    const std::vector<TapPath> lti{{1, 0, 0.0, {0.5, 0.2}}, {3, 0, 0.0, {0.1, -0.7}}};
    const std::size_t shift = 5;
    std::vector<Complex> shifted(s1.size());
    for (std::size_t u = shift; u < s1.size(); ++u)
        shifted[u] = s1[u - shift];
    const auto ra = apply_channel_time(s1, lti, kFrame);
    const auto rb = apply_channel_time(shifted, lti, kFrame);
    for (std::size_t u = shift + 4; u < s1.size(); ++u)
        CHECK(std::abs(rb[u] - ra[u - shift]) < 1e-12);
}

TEST_CASE("noise variance and AWGN")
{
    CHECK(noise_variance(0.0) == 1.0);
    CHECK(noise_variance(10.0) == doctest::Approx(0.1));
    CHECK(noise_variance(std::numeric_limits<double>::infinity()) == 0.0);
    CHECK_THROWS_AS(noise_variance(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(noise_variance(-std::numeric_limits<double>::infinity()), std::invalid_argument);

    std::mt19937_64 rng(10);
    const std::vector<Complex> zeros(1000000);
    const auto noisy = add_awgn(zeros, 10.0, rng);
    double power = 0.0;
    for (const auto& v : noisy)
        power += std::norm(v);
    CHECK(power / noisy.size() == doctest::Approx(0.1).epsilon(0.01));

    const std::vector<Complex> sig(16, Complex(1.0, -1.0));
    const auto clean = add_awgn(sig, std::numeric_limits<double>::infinity(), rng);
    CHECK(clean == sig);
}
