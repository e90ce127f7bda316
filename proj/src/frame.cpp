#include "otfs/frame.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace otfs {

FrameParams::FrameParams(int n_doppler, int m_delay, double subcarrier_spacing_hz, double carrier_freq_hz)
    : n_(n_doppler), m_(m_delay), df_(subcarrier_spacing_hz), fc_(carrier_freq_hz)
{
    if (n_doppler < 1)
        throw std::invalid_argument("n_doppler must be >= 1");
    if (m_delay < 1)
        throw std::invalid_argument("m_delay must be >= 1");
    if (!(subcarrier_spacing_hz > 0.0) || !std::isfinite(subcarrier_spacing_hz))
        throw std::invalid_argument("subcarrier spacing must be positive");
    if (!(carrier_freq_hz > 0.0) || !std::isfinite(carrier_freq_hz))
        throw std::invalid_argument("carrier frequency must be positive");
}

std::string ParamValidation::message() const
{
    if (valid())
        return "ok";
    std::ostringstream os;
    if (!delay_ok)
        os << "delay bound violated: tau_max exceeds 1/df by " << -delay_margin_s << " s";
    if (!doppler_ok) {
        if (!delay_ok)
            os << "; ";
        os << "Doppler bound violated: nu_max exceeds 1/T by " << -doppler_margin_hz << " Hz";
    }
    return os.str();
}

ParamValidation validate_params(const FrameParams& params, double tau_max_s, double nu_max_hz)
{
    if (tau_max_s < 0.0 || nu_max_hz < 0.0)
        throw std::invalid_argument("tau_max and nu_max must be non-negative");
    ParamValidation v;
    v.delay_margin_s = 1.0 / params.subcarrier_spacing() - tau_max_s;
    v.doppler_margin_hz = 1.0 / params.symbol_duration() - nu_max_hz;
    v.delay_ok = v.delay_margin_s > 0.0;
    v.doppler_ok = v.doppler_margin_hz > 0.0;
    return v;
}

Alphabet::Alphabet(std::vector<Complex> points_by_label) : points_(std::move(points_by_label))
{
    if (points_.size() < 2 || !std::has_single_bit(points_.size()))
        throw std::invalid_argument("alphabet size must be a power of two >= 2");
    bits_ = std::countr_zero(points_.size());
    if (std::abs(average_energy() - 1.0) > 1e-12)
        throw std::invalid_argument("alphabet must have unit average energy");
}

std::size_t Alphabet::nearest(Complex z) const noexcept
{
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < points_.size(); ++j) {
        const double d = std::norm(z - points_[j]);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

double Alphabet::average_energy() const noexcept
{
    double e = 0.0;
    for (const auto& a : points_)
        e += std::norm(a);
    return e / static_cast<double>(points_.size());
}

namespace {

unsigned gray_to_binary(unsigned g)
{
    unsigned b = g;
    while (g >>= 1)
        b ^= g;
    return b;
}

} // namespace

Alphabet make_alphabet(int q)
{
    if (q != 4 && q != 16 && q != 64)
        throw std::invalid_argument("unsupported QAM order " + std::to_string(q) + " (expected 4, 16 or 64)");

    const int bits = std::countr_zero(static_cast<unsigned>(q));
    const int axis_bits = bits / 2;
    const unsigned levels = 1u << axis_bits;
    const unsigned mask = levels - 1;
    const double scale = 1.0 / std::sqrt(2.0 * (q - 1) / 3.0);

    std::vector<Complex> points(static_cast<std::size_t>(q));
    for (unsigned label = 0; label < static_cast<unsigned>(q); ++label) {
        const unsigned gi = gray_to_binary(label >> axis_bits);
        const unsigned gq = gray_to_binary(label & mask);
        const double re = 2.0 * gi - (levels - 1.0);
        const double im = 2.0 * gq - (levels - 1.0);
        points[label] = Complex(re, im) * scale;
    }
    return Alphabet(std::move(points));
}

std::vector<Complex> map_bits(std::span<const std::uint8_t> bits, const Alphabet& alphabet,
                              std::size_t symbol_count)
{
    const auto bps = static_cast<std::size_t>(alphabet.bits_per_symbol());
    if (bits.size() != symbol_count * bps)
        throw std::invalid_argument("bit length " + std::to_string(bits.size()) + " does not match " +
                                    std::to_string(symbol_count) + " symbols x " + std::to_string(bps) +
                                    " bits");
    std::vector<Complex> out(symbol_count);
    for (std::size_t s = 0; s < symbol_count; ++s) {
        std::size_t label = 0;
        for (std::size_t b = 0; b < bps; ++b)
            label = (label << 1) | (bits[s * bps + b] & 1u);
        out[s] = alphabet[label];
    }
    return out;
}

std::vector<std::uint8_t> labels_to_bits(std::span<const std::size_t> labels, const Alphabet& alphabet)
{
    const auto bps = static_cast<std::size_t>(alphabet.bits_per_symbol());
    std::vector<std::uint8_t> bits(labels.size() * bps);
    for (std::size_t s = 0; s < labels.size(); ++s)
        for (std::size_t b = 0; b < bps; ++b)
            bits[s * bps + b] = static_cast<std::uint8_t>((labels[s] >> (bps - 1 - b)) & 1u);
    return bits;
}

std::vector<std::uint8_t> demap_symbols(std::span<const Complex> symbols, const Alphabet& alphabet)
{
    std::vector<std::size_t> labels(symbols.size());
    for (std::size_t s = 0; s < symbols.size(); ++s)
        labels[s] = alphabet.nearest(symbols[s]);
    return labels_to_bits(labels, alphabet);
}

} // namespace otfs
