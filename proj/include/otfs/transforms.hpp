#pragma once

#include "otfs/channel.hpp"
#include "otfs/frame.hpp"

namespace otfs {

/// Delay-Doppler -> time-frequency:
/// X[n,m] = 1/sqrt(NM) sum_k sum_l x[k,l] exp(j 2 pi (nk/N - ml/M)).
TimeFreqGrid isfft(const DelayDopplerGrid& x);

/// Time-frequency -> delay-Doppler, the inverse of isfft.
DelayDopplerGrid sfft(const TimeFreqGrid& y);

/// Rectangular-pulse modulator sampled at T/M: one unitary M-point inverse
/// DFT per time slot, slots concatenated without cyclic prefix.
SampleStream heisenberg_rect(const TimeFreqGrid& x);

/// Rectangular matched filter: unitary M-point DFT of each length-M block.
/// Throws if r.size() != n_doppler * m_delay.
TimeFreqGrid wigner_rect(std::span<const Complex> r, int n_doppler, int m_delay);

enum class AmbiguityKind { ici, isi };

/// Sampled cross-ambiguity of the rectangular pulses for one path at
/// subcarrier offset delta_m = m - m'. The ICI sum runs over
/// p = 0 .. M-1-l_tau and the ISI sum over p = M-l_tau .. M-1.
Complex ambiguity_rect(AmbiguityKind kind, int delta_m, const TapPath& path, const FrameParams& params);

/// Sample range [first, last) covered by the ICI or ISI sum for a delay tap.
struct SampleRange {
    int first = 0;
    int last = 0;
};
SampleRange ambiguity_support(AmbiguityKind kind, int delay_tap, int m_delay);

} // namespace otfs
