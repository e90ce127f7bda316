#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace otfs::detail {

namespace {

using PlanKey = std::tuple<int, int, int, int, int>;

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per geometry and reused.
class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(int n, int howmany, int stride, int dist, int sign)
    {
        const PlanKey key{n, howmany, stride, dist, sign};
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;

        const std::size_t extent = static_cast<std::size_t>(n - 1) * stride + static_cast<std::size_t>(howmany - 1) * dist + 1;
        auto* scratch = fftw_alloc_complex(extent);
        fftw_plan plan = fftw_plan_many_dft(1, &n, howmany, scratch, nullptr, stride, dist, scratch, nullptr, stride,
                                            dist, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        if (plan == nullptr)
            throw std::runtime_error("FFTW planning failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache instance;
    return instance;
}

} // namespace

void dft_many(std::span<Complex> data, int n, int howmany, int stride, int dist, FftSign sign)
{
    if (n <= 0 || howmany <= 0)
        throw std::invalid_argument("dft_many: sizes must be positive");
    const std::size_t extent = static_cast<std::size_t>(n - 1) * stride + static_cast<std::size_t>(howmany - 1) * dist + 1;
    if (data.size() < extent)
        throw std::invalid_argument("dft_many: buffer too small");
    if (n == 1)
        return;
    fftw_plan plan = cache().get(n, howmany, stride, dist, sign == FftSign::forward ? FFTW_FORWARD : FFTW_BACKWARD);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

} // namespace otfs::detail
