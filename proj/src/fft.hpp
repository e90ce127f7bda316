#pragma once

#include "otfs/frame.hpp"

#include <span>

namespace otfs::detail {

enum class FftSign { forward = -1, inverse = +1 };

/// In-place unnormalized DFT of `howmany` length-n sequences laid out with
/// element stride `stride` and sequence distance `dist`. Thread-safe.
void dft_many(std::span<Complex> data, int n, int howmany, int stride, int dist, FftSign sign);

/// Transform each row of a row-major rows x cols array.
inline void dft_rows(std::span<Complex> data, int rows, int cols, FftSign sign)
{
    dft_many(data, cols, rows, 1, cols, sign);
}

/// Transform each column of a row-major rows x cols array.
inline void dft_cols(std::span<Complex> data, int rows, int cols, FftSign sign)
{
    dft_many(data, rows, cols, cols, 1, sign);
}

} // namespace otfs::detail
