#include "otfs/effective_channel.hpp"

#include "otfs/transforms.hpp"

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace otfs {

std::vector<Complex> CMatrix::multiply(std::span<const Complex> x) const
{
    if (x.size() != cols_)
        throw std::invalid_argument("CMatrix::multiply: dimension mismatch");
    std::vector<Complex> y(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        Complex acc{};
        for (std::size_t c = 0; c < cols_; ++c)
            acc += data_[r * cols_ + c] * x[c];
        y[r] = acc;
    }
    return y;
}

// ---------------------------------------------------------------------------
// SparseEffectiveChannel

// Row-by-row builder. Rows must be filled in increasing order; duplicate
// columns within a row are merged through a dense slot table.
class EffectiveChannelAccumulator {
public:
    explicit EffectiveChannelAccumulator(std::size_t dim, std::size_t expected_row_degree = 0)
        : slot_(dim, kNoSlot)
    {
        ch_.dim_ = dim;
        ch_.row_ptr_.reserve(dim + 1);
        ch_.col_idx_.reserve(dim * expected_row_degree);
        ch_.values_.reserve(dim * expected_row_degree);
        ch_.structural_rows_.assign(dim, 0);
        ch_.structural_cols_.assign(dim, 0);
    }

    void add(std::size_t col, Complex v)
    {
        ++ch_.structural_cols_[col];
        ++row_count_;
        auto& s = slot_[col];
        if (s == kNoSlot) {
            s = touched_.size();
            touched_.push_back(col);
            acc_.push_back(v);
        } else {
            acc_[s] += v;
        }
    }

    void finish_row()
    {
        const std::size_t row = ch_.row_ptr_.size() - 1;
        ch_.structural_rows_[row] = row_count_;
        order_.resize(touched_.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return touched_[a] < touched_[b]; });
        for (std::size_t o : order_) {
            ch_.col_idx_.push_back(touched_[o]);
            ch_.values_.push_back(acc_[o]);
            slot_[touched_[o]] = kNoSlot;
        }
        ch_.row_ptr_.push_back(ch_.col_idx_.size());
        touched_.clear();
        acc_.clear();
        row_count_ = 0;
    }

    SparseEffectiveChannel finish() &&
    {
        if (ch_.row_ptr_.size() != ch_.dim_ + 1)
            throw std::logic_error("accumulator finished before every row was written");
        ch_.index_columns();
        return std::move(ch_);
    }

private:
    static constexpr std::size_t kNoSlot = std::numeric_limits<std::size_t>::max();
    SparseEffectiveChannel ch_;
    std::vector<std::size_t> slot_;
    std::vector<std::size_t> touched_;
    std::vector<Complex> acc_;
    std::vector<std::size_t> order_;
    std::size_t row_count_ = 0;
};

SparseEffectiveChannel SparseEffectiveChannel::from_triplets(std::size_t dim, std::vector<Entry> entries)
{
    for (const auto& e : entries)
        if (e.row >= dim || e.col >= dim)
            throw std::invalid_argument("triplet index outside matrix dimension");
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.row < b.row; });
    EffectiveChannelAccumulator acc(dim);
    std::size_t i = 0;
    for (std::size_t d = 0; d < dim; ++d) {
        for (; i < entries.size() && entries[i].row == d; ++i)
            acc.add(entries[i].col, entries[i].value);
        acc.finish_row();
    }
    return std::move(acc).finish();
}

void SparseEffectiveChannel::index_columns()
{
    col_ptr_.assign(dim_ + 1, 0);
    for (std::size_t c : col_idx_)
        ++col_ptr_[c + 1];
    for (std::size_t c = 0; c < dim_; ++c)
        col_ptr_[c + 1] += col_ptr_[c];
    csc_rows_.resize(col_idx_.size());
    csc_entries_.resize(col_idx_.size());
    std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
    for (std::size_t d = 0; d < dim_; ++d) {
        for (std::size_t e = row_ptr_[d]; e < row_ptr_[d + 1]; ++e) {
            const std::size_t pos = fill[col_idx_[e]]++;
            csc_rows_[pos] = d;
            csc_entries_[pos] = e;
        }
    }
}

std::span<const std::size_t> SparseEffectiveChannel::row_cols(std::size_t d) const
{
    return std::span<const std::size_t>(col_idx_).subspan(row_ptr_[d], row_ptr_[d + 1] - row_ptr_[d]);
}

std::span<const Complex> SparseEffectiveChannel::row_values(std::size_t d) const
{
    return std::span<const Complex>(values_).subspan(row_ptr_[d], row_ptr_[d + 1] - row_ptr_[d]);
}

std::span<const std::size_t> SparseEffectiveChannel::col_rows(std::size_t c) const
{
    return std::span<const std::size_t>(csc_rows_).subspan(col_ptr_[c], col_ptr_[c + 1] - col_ptr_[c]);
}

std::span<const std::size_t> SparseEffectiveChannel::col_entries(std::size_t c) const
{
    return std::span<const std::size_t>(csc_entries_).subspan(col_ptr_[c], col_ptr_[c + 1] - col_ptr_[c]);
}

Complex SparseEffectiveChannel::at(std::size_t d, std::size_t c) const
{
    const auto cols = row_cols(d);
    const auto it = std::lower_bound(cols.begin(), cols.end(), c);
    if (it == cols.end() || *it != c)
        return {};
    return values_[row_ptr_[d] + static_cast<std::size_t>(it - cols.begin())];
}

std::vector<Complex> SparseEffectiveChannel::multiply(std::span<const Complex> x) const
{
    if (x.size() != dim_)
        throw std::invalid_argument("SparseEffectiveChannel::multiply: dimension mismatch");
    std::vector<Complex> y(dim_);
    for (std::size_t d = 0; d < dim_; ++d) {
        Complex acc{};
        for (std::size_t e = row_ptr_[d]; e < row_ptr_[d + 1]; ++e)
            acc += values_[e] * x[col_idx_[e]];
        y[d] = acc;
    }
    return y;
}

CMatrix SparseEffectiveChannel::to_dense() const
{
    CMatrix m(dim_, dim_);
    for (std::size_t d = 0; d < dim_; ++d)
        for (std::size_t e = row_ptr_[d]; e < row_ptr_[d + 1]; ++e)
            m(d, col_idx_[e]) = values_[e];
    return m;
}

SparseEffectiveChannel SparseEffectiveChannel::scaled(Complex factor) const
{
    SparseEffectiveChannel out = *this;
    for (auto& v : out.values_)
        v *= factor;
    return out;
}

void SparseEffectiveChannel::write_triplets(std::ostream& os) const
{
    const auto old = os.precision(17);
    for (std::size_t d = 0; d < dim_; ++d)
        for (std::size_t e = row_ptr_[d]; e < row_ptr_[d + 1]; ++e)
            os << d << ' ' << col_idx_[e] << ' ' << values_[e].real() << ' ' << values_[e].imag() << '\n';
    os.precision(old);
}

// ---------------------------------------------------------------------------
// IdiWindow

IdiWindow IdiWindow::uniform(int half_width)
{
    if (half_width < 0)
        throw std::invalid_argument("IDI half-width must be >= 0");
    IdiWindow w;
    w.half_widths_ = {half_width};
    return w;
}

IdiWindow IdiWindow::per_path(std::vector<int> half_widths)
{
    for (int h : half_widths)
        if (h < 0)
            throw std::invalid_argument("IDI half-width must be >= 0");
    IdiWindow w;
    w.half_widths_ = std::move(half_widths);
    w.uniform_ = false;
    return w;
}

IdiWindow IdiWindow::full()
{
    IdiWindow w;
    w.full_ = true;
    return w;
}

int IdiWindow::half_width(std::size_t path) const
{
    if (uniform_)
        return half_widths_.front();
    if (path >= half_widths_.size())
        throw std::invalid_argument("IDI window has no entry for path " + std::to_string(path));
    return half_widths_[path];
}

IdiWindow::Range IdiWindow::range(std::size_t path, int n_doppler) const
{
    if (full_)
        return {-((n_doppler - 1) / 2), n_doppler / 2};
    const int h = half_width(path);
    return {-h, h};
}

void IdiWindow::check(std::size_t path_count, int n_doppler) const
{
    if (full_)
        return;
    if (!uniform_ && half_widths_.size() < path_count)
        throw std::invalid_argument("IDI window lists fewer paths than the channel has");
    for (std::size_t i = 0; i < (uniform_ ? std::size_t{1} : path_count); ++i) {
        const int h = half_width(i);
        if (2 * h + 1 > n_doppler)
            throw std::invalid_argument("IDI window 2*" + std::to_string(h) + "+1 exceeds N = " +
                                        std::to_string(n_doppler));
    }
}

std::size_t IdiWindow::degree(std::size_t path_count, int n_doppler) const
{
    std::size_t s = 0;
    for (std::size_t i = 0; i < path_count; ++i)
        s += static_cast<std::size_t>(range(i, n_doppler).count());
    return s;
}

std::string IdiWindow::label() const
{
    if (full_)
        return "full";
    return std::to_string(half_widths_.front());
}

// ---------------------------------------------------------------------------
// Coefficients

Complex beta(int q, double kappa, int n)
{
    if (n < 1)
        throw std::invalid_argument("beta: N must be >= 1");
    const double a = -q - kappa;
    const double s_den = std::sin(kPi * a / n);
    if (std::abs(s_den) < 1e-13) {
        // a is a multiple of N: every term of the geometric sum is one.
        return {static_cast<double>(n), 0.0};
    }
    // (e^{j2pi a} - 1)/(e^{j2pi a/N} - 1) = e^{j pi a (N-1)/N} sin(pi a)/sin(pi a/N)
    return std::polar(std::sin(kPi * a) / s_den, kPi * a * (n - 1) / n);
}

Complex doppler_spread(int q, double kappa, int n)
{
    return std::conj(beta(q, kappa, n)) / static_cast<double>(n);
}

namespace {

void check_taps(std::span<const TapPath> taps, const FrameParams& params)
{
    for (const auto& t : taps) {
        if (t.delay_tap < 0 || t.delay_tap >= params.m_delay())
            throw std::invalid_argument("delay tap outside [0, M)");
        if (!(t.frac_doppler > -0.5 && t.frac_doppler <= 0.5))
            throw std::invalid_argument("fractional Doppler outside (-1/2, 1/2]");
    }
}

struct PathTable {
    IdiWindow::Range range;
    std::vector<Complex> spread; ///< doppler_spread(q) for q in range
};

std::vector<PathTable> path_tables(std::span<const TapPath> taps, const IdiWindow& window, const FrameParams& params)
{
    std::vector<PathTable> tables(taps.size());
    const int n = params.n_doppler();
    for (std::size_t i = 0; i < taps.size(); ++i) {
        tables[i].range = window.range(i, n);
        for (int q = tables[i].range.first; q <= tables[i].range.last; ++q)
            tables[i].spread.push_back(doppler_spread(q, taps[i].frac_doppler, n));
    }
    return tables;
}

} // namespace

SparseEffectiveChannel build_ideal(std::span<const TapPath> taps, const IdiWindow& window, const FrameParams& params)
{
    check_taps(taps, params);
    window.check(taps.size(), params.n_doppler());
    const int n = params.n_doppler();
    const int m = params.m_delay();
    const double nm = static_cast<double>(params.size());
    const auto tables = path_tables(taps, window, params);

    // h_i e^{-j 2 pi nu_i tau_i}, nu_i tau_i = (k_nu + kappa) l_tau / (NM)
    std::vector<Complex> gain(taps.size());
    for (std::size_t i = 0; i < taps.size(); ++i)
        gain[i] = taps[i].gain * std::polar(1.0, -2.0 * kPi * taps[i].doppler_taps() * taps[i].delay_tap / nm);

    EffectiveChannelAccumulator acc(params.size(), window.degree(taps.size(), n));
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < m; ++l) {
            for (std::size_t i = 0; i < taps.size(); ++i) {
                const auto& t = tables[i];
                const auto col_l = static_cast<std::size_t>(wrap_index(l - taps[i].delay_tap, m));
                for (int q = t.range.first; q <= t.range.last; ++q) {
                    const auto col_k = static_cast<std::size_t>(wrap_index(k - taps[i].doppler_tap + q, n));
                    acc.add(col_k * m + col_l, gain[i] * t.spread[q - t.range.first]);
                }
            }
            acc.finish_row();
        }
    }
    return std::move(acc).finish();
}

SparseEffectiveChannel build_rect(std::span<const TapPath> taps, const IdiWindow& window, const FrameParams& params)
{
    check_taps(taps, params);
    window.check(taps.size(), params.n_doppler());
    const int n = params.n_doppler();
    const int m = params.m_delay();
    const double nm = static_cast<double>(params.size());
    const auto tables = path_tables(taps, window, params);

    // e^{-j 2 pi k' / N} for the ISI branch
    std::vector<Complex> slot_phase(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        slot_phase[k] = std::polar(1.0, -2.0 * kPi * k / n);

    EffectiveChannelAccumulator acc(params.size(), window.degree(taps.size(), n));
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < m; ++l) {
            for (std::size_t i = 0; i < taps.size(); ++i) {
                const auto& tap = taps[i];
                const auto& t = tables[i];
                const Complex phase =
                    tap.gain * std::polar(1.0, 2.0 * kPi * (l - tap.delay_tap) * tap.doppler_taps() / nm);
                const auto col_l = static_cast<std::size_t>(wrap_index(l - tap.delay_tap, m));
                const bool isi = l < tap.delay_tap;
                for (int q = t.range.first; q <= t.range.last; ++q) {
                    const int col_k = wrap_index(k - tap.doppler_tap + q, n);
                    Complex alpha = t.spread[q - t.range.first];
                    if (isi)
                        alpha = (alpha - 1.0 / n) * slot_phase[col_k];
                    acc.add(static_cast<std::size_t>(col_k) * m + col_l, phase * alpha);
                }
            }
            acc.finish_row();
        }
    }
    return std::move(acc).finish();
}

DelayDopplerGrid apply_ideal_channel(const DelayDopplerGrid& x, std::span<const TapPath> taps,
                                     const FrameParams& params)
{
    check_taps(taps, params);
    const int n = params.n_doppler();
    const int m = params.m_delay();
    if (x.rows() != n || x.cols() != m)
        throw std::invalid_argument("apply_ideal_channel: grid does not match frame");
    const double nm = static_cast<double>(params.size());

    // The Doppler spread kernel is N-periodic in q, so the full-window sum is
    // a circular convolution along k and a circular shift along l.
    TimeFreqGrid xf = isfft(x);
    std::vector<Complex> response(params.size());
    for (const auto& t : taps) {
        const Complex g = t.gain * std::polar(1.0, -2.0 * kPi * t.doppler_taps() * t.delay_tap / nm);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                response[static_cast<std::size_t>(i) * m + j] +=
                    g * std::polar(1.0, 2.0 * kPi * (i * t.doppler_taps() / n - static_cast<double>(j) * t.delay_tap / m));
    }
    auto values = xf.values();
    for (std::size_t u = 0; u < values.size(); ++u)
        values[u] *= response[u];
    return sfft(xf);
}

Complex window_delay_factor(int delay_diff, int delay_tap, int m_delay)
{
    Complex acc{};
    for (int mm = 0; mm < m_delay; ++mm)
        acc += std::polar(1.0, 2.0 * kPi * mm * static_cast<double>(delay_diff - delay_tap) / m_delay);
    return acc;
}

Complex window_doppler_factor(int doppler_diff, double doppler_taps, int n_doppler)
{
    Complex acc{};
    for (int nn = 0; nn < n_doppler; ++nn)
        acc += std::polar(1.0, -2.0 * kPi * nn * (doppler_diff - doppler_taps) / n_doppler);
    return acc;
}

CMatrix dense_ideal_oracle(std::span<const TapPath> taps, const FrameParams& params)
{
    if (params.size() > kDenseOracleMaxSize)
        throw std::invalid_argument("dense_ideal_oracle: N*M exceeds " + std::to_string(kDenseOracleMaxSize));
    const int n = params.n_doppler();
    const int m = params.m_delay();
    const std::size_t nm = params.size();

    struct Factors {
        Complex gain;
        std::vector<Complex> g; // indexed by [k - k']_N
        std::vector<Complex> f; // indexed by [l - l']_M
    };
    std::vector<Factors> paths;
    for (const auto& t : taps) {
        Factors p;
        p.gain = t.gain * std::polar(1.0, -2.0 * kPi * t.doppler_taps() * t.delay_tap / static_cast<double>(nm));
        for (int dk = 0; dk < n; ++dk)
            p.g.push_back(window_doppler_factor(dk, t.doppler_taps(), n));
        for (int dl = 0; dl < m; ++dl)
            p.f.push_back(window_delay_factor(dl, t.delay_tap, m));
        paths.push_back(std::move(p));
    }

    CMatrix h(nm, nm);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < m; ++l)
            for (int kp = 0; kp < n; ++kp)
                for (int lp = 0; lp < m; ++lp) {
                    Complex acc{};
                    for (const auto& p : paths)
                        acc += p.gain * p.g[wrap_index(k - kp, n)] * p.f[wrap_index(l - lp, m)];
                    h(static_cast<std::size_t>(k) * m + l, static_cast<std::size_t>(kp) * m + lp) =
                        acc / static_cast<double>(nm);
                }
    return h;
}

DelayDopplerGrid waveform_oracle(const DelayDopplerGrid& x, std::span<const TapPath> taps, const FrameParams& params)
{
    if (x.rows() != params.n_doppler() || x.cols() != params.m_delay())
        throw std::invalid_argument("waveform_oracle: grid does not match frame");
    const auto s = heisenberg_rect(isfft(x));
    const auto r = apply_channel_time(s, taps, params);
    return sfft(wigner_rect(r, params.n_doppler(), params.m_delay()));
}

// ---------------------------------------------------------------------------
// OFDM

CMatrix ofdm_time_matrix(std::span<const TapPath> taps, const FrameParams& params, int cp_samples, int symbol_index)
{
    const int m = params.m_delay();
    const double nm = static_cast<double>(params.size());
    const long long start = static_cast<long long>(symbol_index) * (m + cp_samples) + cp_samples;
    CMatrix ht(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    for (const auto& t : taps) {
        const double w = 2.0 * kPi * t.doppler_taps() / nm;
        for (int p = 0; p < m; ++p) {
            const int q = wrap_index(p - t.delay_tap, m);
            const double sent_at = static_cast<double>(start + p - t.delay_tap);
            ht(static_cast<std::size_t>(p), static_cast<std::size_t>(q)) += t.gain * std::polar(1.0, w * sent_at);
        }
    }
    return ht;
}

CMatrix ofdm_dense_channel(std::span<const TapPath> taps, const FrameParams& params, int cp_samples, int symbol_index)
{
    const int m = params.m_delay();
    const CMatrix ht = ofdm_time_matrix(taps, params, cp_samples, symbol_index);
    std::vector<Complex> a(ht.values().begin(), ht.values().end());
    detail::dft_rows(a, m, m, detail::FftSign::inverse); // H_t W^H
    detail::dft_cols(a, m, m, detail::FftSign::forward); // W (H_t W^H)
    CMatrix out(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c)
            out(r, c) = a[r * out.cols() + c] / static_cast<double>(m);
    return out;
}

SparseEffectiveChannel build_ofdm(std::span<const TapPath> taps, const FrameParams& params, int cp_samples,
                                  int symbol_index, int b_off)
{
    if (b_off < 0)
        throw std::invalid_argument("build_ofdm: b_off must be >= 0");
    if (cp_samples < 0)
        throw std::invalid_argument("build_ofdm: negative cyclic prefix");
    for (const auto& t : taps)
        if (t.delay_tap > cp_samples)
            throw std::invalid_argument("build_ofdm: cyclic prefix shorter than the maximum delay tap");

    const CMatrix h = ofdm_dense_channel(taps, params, cp_samples, symbol_index);
    const std::size_t m = h.rows();
    const std::size_t keep = std::min<std::size_t>(2 * static_cast<std::size_t>(b_off), m - 1);

    EffectiveChannelAccumulator acc(m, keep + 1);
    std::vector<std::size_t> off(m - 1);
    for (std::size_t r = 0; r < m; ++r) {
        off.clear();
        for (std::size_t c = 0; c < m; ++c)
            if (c != r)
                off.push_back(c);
        std::stable_sort(off.begin(), off.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(h(r, a)) > std::abs(h(r, b));
        });
        acc.add(r, h(r, r));
        for (std::size_t j = 0; j < keep; ++j)
            acc.add(off[j], h(r, off[j]));
        acc.finish_row();
    }
    return std::move(acc).finish();
}

} // namespace otfs
