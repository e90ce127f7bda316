#include "otfs/transforms.hpp"

#include "fft.hpp"

#include <cmath>
#include <stdexcept>

namespace otfs {

using detail::dft_cols;
using detail::dft_rows;
using detail::FftSign;

TimeFreqGrid isfft(const DelayDopplerGrid& x)
{
    const int n = x.rows();
    const int m = x.cols();
    std::vector<Complex> data(x.values().begin(), x.values().end());
    dft_cols(data, n, m, FftSign::inverse); // Doppler k -> time n
    dft_rows(data, n, m, FftSign::forward); // delay l -> subcarrier m
    const double scale = 1.0 / std::sqrt(static_cast<double>(n) * m);
    for (auto& v : data)
        v *= scale;
    return TimeFreqGrid(n, m, std::move(data));
}

DelayDopplerGrid sfft(const TimeFreqGrid& y)
{
    const int n = y.rows();
    const int m = y.cols();
    std::vector<Complex> data(y.values().begin(), y.values().end());
    dft_cols(data, n, m, FftSign::forward);
    dft_rows(data, n, m, FftSign::inverse);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n) * m);
    for (auto& v : data)
        v *= scale;
    return DelayDopplerGrid(n, m, std::move(data));
}

SampleStream heisenberg_rect(const TimeFreqGrid& x)
{
    const int n = x.rows();
    const int m = x.cols();
    SampleStream s(x.values().begin(), x.values().end());
    dft_rows(s, n, m, FftSign::inverse);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (auto& v : s)
        v *= scale;
    return s;
}

TimeFreqGrid wigner_rect(std::span<const Complex> r, int n_doppler, int m_delay)
{
    if (n_doppler <= 0 || m_delay <= 0 || r.size() != static_cast<std::size_t>(n_doppler) * m_delay)
        throw std::invalid_argument("wigner_rect: stream length must equal N * M");
    std::vector<Complex> data(r.begin(), r.end());
    dft_rows(data, n_doppler, m_delay, FftSign::forward);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_delay));
    for (auto& v : data)
        v *= scale;
    return TimeFreqGrid(n_doppler, m_delay, std::move(data));
}

SampleRange ambiguity_support(AmbiguityKind kind, int delay_tap, int m_delay)
{
    if (kind == AmbiguityKind::ici)
        return {0, m_delay - delay_tap};
    return {m_delay - delay_tap, m_delay};
}

Complex ambiguity_rect(AmbiguityKind kind, int delta_m, const TapPath& path, const FrameParams& params)
{
    const int m = params.m_delay();
    if (delta_m <= -m || delta_m >= m)
        throw std::invalid_argument("ambiguity_rect: |delta_m| must be < M");
    if (path.delay_tap < 0 || path.delay_tap >= m)
        throw std::invalid_argument("ambiguity_rect: delay tap outside [0, M)");

    // (delta_m df - nu) * (p / (M df) + tau [- T]) in cycles, with tau = l_tau/(M df)
    // and nu = (k_nu + kappa)/(NT).
    const double offset = delta_m - path.doppler_taps() / params.n_doppler();
    const int shift = kind == AmbiguityKind::ici ? path.delay_tap : path.delay_tap - m;
    const auto range = ambiguity_support(kind, path.delay_tap, m);

    Complex acc{};
    for (int p = range.first; p < range.last; ++p)
        acc += std::polar(1.0, -2.0 * kPi * offset * (p + shift) / m);
    return acc / static_cast<double>(m);
}

} // namespace otfs
