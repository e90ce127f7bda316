#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace otfs {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 2.99792458e8;

/// Mathematical modulo into [0, n).
constexpr int wrap_index(long long a, int n)
{
    const long long r = a % n;
    return static_cast<int>(r < 0 ? r + n : r);
}

/// OTFS grid geometry. The symbol duration is always 1/subcarrier_spacing.
class FrameParams {
public:
    FrameParams() = default;

    /// Throws std::invalid_argument unless every field is positive.
    FrameParams(int n_doppler, int m_delay, double subcarrier_spacing_hz, double carrier_freq_hz);

    int n_doppler() const noexcept { return n_; }
    int m_delay() const noexcept { return m_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(m_); }

    double subcarrier_spacing() const noexcept { return df_; }
    double symbol_duration() const noexcept { return 1.0 / df_; }
    double carrier_freq() const noexcept { return fc_; }

    double frame_duration() const noexcept { return n_ * symbol_duration(); }
    double bandwidth() const noexcept { return m_ * df_; }
    double sample_interval() const noexcept { return 1.0 / bandwidth(); }

    /// Doppler resolution 1/(NT) and delay resolution 1/(M df).
    double doppler_resolution() const noexcept { return 1.0 / frame_duration(); }
    double delay_resolution() const noexcept { return sample_interval(); }

private:
    int n_ = 1;
    int m_ = 1;
    double df_ = 15e3;
    double fc_ = 4e9;
};

struct ParamValidation {
    bool delay_ok = false;
    bool doppler_ok = false;
    double delay_margin_s = 0.0;    ///< 1/df - tau_max
    double doppler_margin_hz = 0.0; ///< 1/T - nu_max

    bool valid() const noexcept { return delay_ok && doppler_ok; }
    std::string message() const;
};

/// Checks the supportable-spread conditions nu_max < 1/T and tau_max < 1/df.
ParamValidation validate_params(const FrameParams& params, double tau_max_s, double nu_max_hz);

/// Square QAM constellation with unit average energy. Points are stored by
/// their bit label, so points()[label] is the symbol carrying `label`.
class Alphabet {
public:
    /// Takes ownership of a custom constellation (size must be a power of two,
    /// average energy 1). Used for test alphabets such as BPSK.
    explicit Alphabet(std::vector<Complex> points_by_label);

    std::size_t size() const noexcept { return points_.size(); }
    int bits_per_symbol() const noexcept { return bits_; }
    std::span<const Complex> points() const noexcept { return points_; }
    const Complex& operator[](std::size_t label) const { return points_[label]; }

    /// Hard decision: index of the nearest point, lowest index on ties.
    std::size_t nearest(Complex z) const noexcept;

    double average_energy() const noexcept;

private:
    std::vector<Complex> points_;
    int bits_ = 0;
};

/// Gray-mapped unit-energy square QAM. q must be 4, 16 or 64.
Alphabet make_alphabet(int q);

/// Bits are MSB-first within each symbol. Throws on length mismatch.
std::vector<Complex> map_bits(std::span<const std::uint8_t> bits, const Alphabet& alphabet,
                              std::size_t symbol_count);

std::vector<std::uint8_t> labels_to_bits(std::span<const std::size_t> labels, const Alphabet& alphabet);

/// Nearest-point demapping back to bits.
std::vector<std::uint8_t> demap_symbols(std::span<const Complex> symbols, const Alphabet& alphabet);

/// Position on the N x M delay-Doppler grid; linear index c = k * M + l.
struct GridIndex {
    int doppler_k = 0;
    int delay_l = 0;

    std::size_t linear(int m_delay) const noexcept
    {
        return static_cast<std::size_t>(doppler_k) * static_cast<std::size_t>(m_delay) +
               static_cast<std::size_t>(delay_l);
    }

    static GridIndex from_linear(std::size_t c, int m_delay) noexcept
    {
        return {static_cast<int>(c / static_cast<std::size_t>(m_delay)),
                static_cast<int>(c % static_cast<std::size_t>(m_delay))};
    }

    friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Row-major N x M complex array. The tag keeps delay-Doppler and
/// time-frequency grids from being mixed up at call sites.
template <class Domain>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols)
    {
        if (rows <= 0 || cols <= 0)
            throw std::invalid_argument("grid dimensions must be positive");
    }
    Grid(int rows, int cols, std::vector<Complex> values) : rows_(rows), cols_(cols), data_(std::move(values))
    {
        if (rows <= 0 || cols <= 0 || data_.size() != static_cast<std::size_t>(rows) * cols)
            throw std::invalid_argument("grid data does not match dimensions");
    }

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    Complex& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    const Complex& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::span<Complex> values() noexcept { return data_; }
    std::span<const Complex> values() const noexcept { return data_; }
    std::vector<Complex> release() && { return std::move(data_); }

    std::span<Complex> row(int r) { return std::span<Complex>(data_).subspan(static_cast<std::size_t>(r) * cols_, cols_); }
    std::span<const Complex> row(int r) const
    {
        return std::span<const Complex>(data_).subspan(static_cast<std::size_t>(r) * cols_, cols_);
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Complex> data_;
};

struct DelayDopplerDomain {};
struct TimeFreqDomain {};

/// x[k][l]: Doppler index k (rows), delay index l (columns).
using DelayDopplerGrid = Grid<DelayDopplerDomain>;
/// X[n][m]: time slot n (rows), subcarrier m (columns).
using TimeFreqGrid = Grid<TimeFreqDomain>;

/// Baseband samples at interval 1/(M df); sample u = n * M + p belongs to
/// time slot n. An OTFS frame is exactly N * M samples (no cyclic prefix).
using SampleStream = std::vector<Complex>;

} // namespace otfs
