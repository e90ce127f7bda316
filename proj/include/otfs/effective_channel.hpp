#pragma once

#include "otfs/channel.hpp"
#include "otfs/frame.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace otfs {

/// Small dense row-major complex matrix, used by the brute-force oracles.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const Complex> values() const noexcept { return data_; }

    std::vector<Complex> multiply(std::span<const Complex> x) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

/// Square sparse matrix in CSR form with a column index (CSC view into the
/// same entries). Entries landing on the same coordinate are summed. The
/// pre-merge ("structural") entry counts per row and column are kept, since
/// the delay-Doppler builders guarantee exactly S of them.
class SparseEffectiveChannel {
public:
    struct Entry {
        std::size_t row = 0;
        std::size_t col = 0;
        Complex value{};
    };

    SparseEffectiveChannel() = default;

    /// Builds from an unordered triplet list. Throws if an index is >= dim.
    static SparseEffectiveChannel from_triplets(std::size_t dim, std::vector<Entry> entries);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    /// I(d): column indices of row d, ascending; values in the same order.
    std::span<const std::size_t> row_cols(std::size_t d) const;
    std::span<const Complex> row_values(std::size_t d) const;
    /// Position of row d's first entry in the global entry order.
    std::size_t row_offset(std::size_t d) const { return row_ptr_[d]; }

    /// J(c): row indices of column c, ascending.
    std::span<const std::size_t> col_rows(std::size_t c) const;
    /// Global entry positions (CSR order) of column c's entries, aligned with col_rows(c).
    std::span<const std::size_t> col_entries(std::size_t c) const;

    std::span<const Complex> values() const noexcept { return values_; }
    std::span<const std::size_t> entry_cols() const noexcept { return col_idx_; }

    std::size_t structural_row_count(std::size_t d) const { return structural_rows_[d]; }
    std::size_t structural_col_count(std::size_t c) const { return structural_cols_[c]; }

    /// Coefficient at (d, c), zero if not stored.
    Complex at(std::size_t d, std::size_t c) const;

    std::vector<Complex> multiply(std::span<const Complex> x) const;
    CMatrix to_dense() const;
    SparseEffectiveChannel scaled(Complex factor) const;

    /// Debug export: one "row col re im" line per stored entry.
    void write_triplets(std::ostream& os) const;

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<Complex> values_;
    std::vector<std::size_t> col_ptr_{0};
    std::vector<std::size_t> csc_rows_;
    std::vector<std::size_t> csc_entries_;
    std::vector<std::size_t> structural_rows_;
    std::vector<std::size_t> structural_cols_;

    void index_columns();
    friend class EffectiveChannelAccumulator;
};

/// Retained Doppler taps per path: q in [-n_i, n_i], or all N taps when full.
class IdiWindow {
public:
    static IdiWindow uniform(int half_width);
    static IdiWindow per_path(std::vector<int> half_widths);
    /// All N Doppler taps, q in [-floor((N-1)/2), floor(N/2)].
    static IdiWindow full();

    bool is_full() const noexcept { return full_; }
    /// Half-width for path i (uniform windows ignore i). Meaningless when full.
    int half_width(std::size_t path) const;

    struct Range {
        int first = 0;
        int last = 0; ///< inclusive
        int count() const noexcept { return last - first + 1; }
    };
    Range range(std::size_t path, int n_doppler) const;

    /// Throws std::invalid_argument if 2 n_i + 1 > N or the per-path table is short.
    void check(std::size_t path_count, int n_doppler) const;

    /// S = sum over paths of the retained tap count.
    std::size_t degree(std::size_t path_count, int n_doppler) const;

    /// "full" or the integer half-width (first entry for per-path windows).
    std::string label() const;

private:
    bool full_ = false;
    std::vector<int> half_widths_{0};
    bool uniform_ = true;
};

/// Closed form (e^{j2pi(-q-kappa)} - 1) / (e^{j(2pi/N)(-q-kappa)} - 1), and N
/// when -q-kappa is a multiple of N.
Complex beta(int q, double kappa, int n);

/// Coefficient of Doppler tap q for fractional shift kappa produced by the
/// channel and the SFFT/ISFFT pair: (1/N) sum_n e^{j 2 pi n (q + kappa) / N}.
/// Equals conj(beta(q, kappa, n)) / n.
Complex doppler_spread(int q, double kappa, int n);

/// Ideal (bi-orthogonal) pulses: y[k,l] = sum_i sum_q doppler_spread(q) h_i
/// e^{-j2pi nu_i tau_i} x[[k-k_i+q]_N, [l-l_i]_M].
SparseEffectiveChannel build_ideal(std::span<const TapPath> taps, const IdiWindow& window, const FrameParams& params);

/// Rectangular pulses without cyclic prefix: the ideal relation with the
/// position-dependent phase and the ISI correction for rows l < l_tau.
SparseEffectiveChannel build_rect(std::span<const TapPath> taps, const IdiWindow& window, const FrameParams& params);

/// Ideal-pulse channel output with every Doppler tap kept, computed as a
/// pointwise product in the time-frequency domain. Equals
/// build_ideal(taps, IdiWindow::full(), params).multiply(x).
DelayDopplerGrid apply_ideal_channel(const DelayDopplerGrid& x, std::span<const TapPath> taps,
                                     const FrameParams& params);

/// Largest N*M accepted by dense_ideal_oracle.
inline constexpr std::size_t kDenseOracleMaxSize = 4096;

/// Delay-Doppler channel of ideal pulses by direct summation over the
/// time-frequency window, no Doppler truncation.
CMatrix dense_ideal_oracle(std::span<const TapPath> taps, const FrameParams& params);

/// Delay-domain factor sum_m exp(j 2 pi m (dl - l_tau) / M) evaluated by direct summation.
Complex window_delay_factor(int delay_diff, int delay_tap, int m_delay);
/// Doppler-domain factor sum_n exp(-j 2 pi n (dk - k_nu - kappa) / N) by direct summation.
Complex window_doppler_factor(int doppler_diff, double doppler_taps, int n_doppler);

/// End-to-end sample-level response with rectangular pulses:
/// sfft(wigner(channel(heisenberg(isfft(x))))).
DelayDopplerGrid waveform_oracle(const DelayDopplerGrid& x, std::span<const TapPath> taps, const FrameParams& params);

/// OFDM symbol `symbol_index` of a frame where every symbol carries a
/// cp_samples-long cyclic prefix. Entry (p, [p-l_i]_M) of the time-domain
/// matrix carries h_i times the Doppler phase at the instant the sample left
/// the transmitter.
CMatrix ofdm_time_matrix(std::span<const TapPath> taps, const FrameParams& params, int cp_samples, int symbol_index);

/// W H_t W^H with the unitary M-point DFT W.
CMatrix ofdm_dense_channel(std::span<const TapPath> taps, const FrameParams& params, int cp_samples, int symbol_index);

/// Sparse OFDM channel: per row, the diagonal plus the 2*b_off largest
/// off-diagonal magnitudes. Throws if cp_samples < max delay tap.
SparseEffectiveChannel build_ofdm(std::span<const TapPath> taps, const FrameParams& params, int cp_samples,
                                  int symbol_index, int b_off = 8);

} // namespace otfs
