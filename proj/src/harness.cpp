#include "otfs/harness.hpp"

#include "otfs/transforms.hpp"

#include "fft.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace otfs {

Scheme parse_scheme(const std::string& name)
{
    if (name == "otfs-ideal")
        return Scheme::otfs_ideal;
    if (name == "otfs-rect-wc")
        return Scheme::otfs_rect_wc;
    if (name == "otfs-rect-wo")
        return Scheme::otfs_rect_wo;
    if (name == "ofdm")
        return Scheme::ofdm;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string to_string(Scheme scheme)
{
    switch (scheme) {
    case Scheme::otfs_ideal:
        return "otfs-ideal";
    case Scheme::otfs_rect_wc:
        return "otfs-rect-wc";
    case Scheme::otfs_rect_wo:
        return "otfs-rect-wo";
    case Scheme::ofdm:
        return "ofdm";
    }
    return "unknown";
}

int parse_ni(const std::string& text)
{
    if (text == "full")
        return kNiFull;
    if (text == "default")
        return kNiDefault;
    std::size_t used = 0;
    int v = -1;
    try {
        v = std::stoi(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || v < 0)
        throw std::invalid_argument("n_i must be 'full', 'default' or an integer >= 0, got '" + text + "'");
    return v;
}

// ---------------------------------------------------------------------------
// CampaignConfig

void CampaignConfig::check() const
{
    (void)frame();
    (void)make_alphabet(qam);
    detector.check();
    if (frames < 1)
        throw std::invalid_argument("frames must be >= 1");
    if (snr_db.empty())
        throw std::invalid_argument("SNR list is empty");
    if (speeds_kmph.empty())
        throw std::invalid_argument("speed list is empty");
    for (double s : snr_db)
        if (std::isnan(s) || (std::isinf(s) && s < 0))
            throw std::invalid_argument("SNR values must be finite");
    for (double v : speeds_kmph)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("speeds must be finite and >= 0");
    if (ni < kNiFull)
        throw std::invalid_argument("invalid n_i setting");
    window().check(1, n_doppler);
    channel_profile().check();
    if (threads < 0)
        throw std::invalid_argument("threads must be >= 0");
    if (!(cp_us >= 0.0))
        throw std::invalid_argument("cyclic prefix length must be >= 0");
    if (b_off < 0)
        throw std::invalid_argument("b_off must be >= 0");
}

FrameParams CampaignConfig::frame() const
{
    return FrameParams(n_doppler, m_delay, subcarrier_spacing_hz, carrier_freq_hz);
}

int CampaignConfig::resolved_ni() const
{
    if (ni == kNiDefault)
        return std::min(10, (n_doppler - 1) / 2);
    return ni;
}

IdiWindow CampaignConfig::window() const
{
    const int v = resolved_ni();
    return v == kNiFull ? IdiWindow::full() : IdiWindow::uniform(v);
}

ChannelProfile CampaignConfig::channel_profile() const
{
    for (const auto& p : custom_profiles)
        if (p.name == profile)
            return p;
    return builtin_profile(profile);
}

int CampaignConfig::cp_samples() const
{
    return static_cast<int>(std::lround(cp_us * 1e-6 * m_delay * subcarrier_spacing_hz));
}

std::size_t CampaignConfig::bits_per_frame() const
{
    return static_cast<std::size_t>(n_doppler) * static_cast<std::size_t>(m_delay) *
           static_cast<std::size_t>(make_alphabet(qam).bits_per_symbol());
}

// ---------------------------------------------------------------------------
// Trials

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { channel = 1, bits = 2, noise = 3 };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream s)
{
    return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s))));
}

std::vector<std::uint8_t> random_bits(std::size_t count, std::mt19937_64& rng)
{
    std::vector<std::uint8_t> bits(count);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 64 == 0)
            word = rng();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1U);
    }
    return bits;
}

std::size_t count_errors(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b)
{
    std::size_t e = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        e += a[i] != b[i];
    return e;
}

struct Detection {
    std::vector<std::size_t> labels;
    int iterations = 0;
};

Detection detect(std::span<const Complex> y, const SparseEffectiveChannel& h, const Alphabet& alphabet,
                 double noise_var, const DetectorConfig& cfg)
{
    auto r = mp_detect(y, h, alphabet, noise_var, cfg);
    return {std::move(r.labels), r.iterations};
}

} // namespace

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(splitmix64(master) ^ (index * 0xd1342543de82ef95ULL + 1));
}

TrialResult run_trial(const CampaignConfig& cfg, double snr_db, double speed_kmph, std::uint64_t seed)
{
    const FrameParams params = cfg.frame();
    const Alphabet alphabet = make_alphabet(cfg.qam);
    const int n = params.n_doppler();
    const int m = params.m_delay();

    auto channel_rng = stream_rng(seed, Stream::channel);
    auto bits_rng = stream_rng(seed, Stream::bits);
    auto noise_rng = stream_rng(seed, Stream::noise);

    const auto paths = generate_channel(cfg.channel_profile(), speed_kmph, params, channel_rng);
    const auto taps = quantize_taps(paths, params);
    const auto bits = random_bits(cfg.bits_per_frame(), bits_rng);
    const auto symbols = map_bits(bits, alphabet, params.size());

    const double snr = cfg.noiseless ? std::numeric_limits<double>::infinity() : snr_db;
    const double det_var = cfg.noiseless ? kNoiselessDetectorVariance : noise_variance(snr_db);
    const IdiWindow window = cfg.window();

    TrialResult result;
    std::vector<std::size_t> labels;

    switch (cfg.scheme) {
    case Scheme::otfs_ideal: {
        const DelayDopplerGrid x(n, m, symbols);
        auto y = std::move(apply_ideal_channel(x, taps, params)).release();
        add_awgn_inplace(y, snr, noise_rng);
        const auto h = build_ideal(taps, window, params);
        auto d = detect(y, h, alphabet, det_var, cfg.detector);
        labels = std::move(d.labels);
        result.iterations = d.iterations;
        result.detections = 1;
        break;
    }
    case Scheme::otfs_rect_wc:
    case Scheme::otfs_rect_wo: {
        const DelayDopplerGrid x(n, m, symbols);
        auto r = apply_channel_time(heisenberg_rect(isfft(x)), taps, params);
        add_awgn_inplace(r, snr, noise_rng);
        const auto y = sfft(wigner_rect(r, n, m));
        const auto h = cfg.scheme == Scheme::otfs_rect_wc ? build_rect(taps, window, params)
                                                          : build_ideal(taps, window, params);
        auto d = detect(y.values(), h, alphabet, det_var, cfg.detector);
        labels = std::move(d.labels);
        result.iterations = d.iterations;
        result.detections = 1;
        break;
    }
    case Scheme::ofdm: {
        const int cp = cfg.cp_samples();
        const std::size_t sym_len = static_cast<std::size_t>(m + cp);
        // N consecutive OFDM symbols carry the same NM payload symbols as one OTFS frame.
        SampleStream s;
        s.reserve(static_cast<std::size_t>(n) * sym_len);
        for (int k = 0; k < n; ++k) {
            std::vector<Complex> block(symbols.begin() + static_cast<std::ptrdiff_t>(k) * m,
                                       symbols.begin() + static_cast<std::ptrdiff_t>(k + 1) * m);
            detail::dft_rows(block, 1, m, detail::FftSign::inverse);
            for (auto& v : block)
                v /= std::sqrt(static_cast<double>(m));
            s.insert(s.end(), block.end() - cp, block.end());
            s.insert(s.end(), block.begin(), block.end());
        }
        auto r = apply_channel_time(s, taps, params);
        add_awgn_inplace(r, snr, noise_rng);
        labels.reserve(params.size());
        for (int k = 0; k < n; ++k) {
            const auto first = r.begin() + static_cast<std::ptrdiff_t>(k * sym_len + cp);
            std::vector<Complex> y(first, first + m);
            detail::dft_rows(y, 1, m, detail::FftSign::forward);
            for (auto& v : y)
                v /= std::sqrt(static_cast<double>(m));
            const auto h = build_ofdm(taps, params, cp, k, cfg.b_off);
            auto d = detect(y, h, alphabet, det_var, cfg.detector);
            labels.insert(labels.end(), d.labels.begin(), d.labels.end());
            result.iterations += d.iterations;
            ++result.detections;
        }
        break;
    }
    }

    const auto decided = labels_to_bits(labels, alphabet);
    result.bits = bits.size();
    result.bit_errors = count_errors(bits, decided);
    return result;
}

std::vector<TrialResult> run_trials(const CampaignConfig& cfg, double snr_db, double speed_kmph)
{
    cfg.check();
    std::vector<TrialResult> results(static_cast<std::size_t>(cfg.frames));
    unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
    workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(cfg.frames)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < results.size(); i = next++) {
            try {
                results[i] = run_trial(cfg, snr_db, speed_kmph, trial_seed(cfg.seed, i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = results.size();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

// ---------------------------------------------------------------------------
// Records and CSV

const char* const kCsvHeader =
    "scheme,snr_db,speed_kmph,ni,damping,frames,bit_errors,total_bits,ber,mean_iterations,wall_time_s";

BerRecord aggregate(const CampaignConfig& cfg, double snr_db, double speed_kmph, const std::vector<TrialResult>& trials,
                    double wall_time_s)
{
    BerRecord r;
    r.scheme = to_string(cfg.scheme);
    r.snr_db = cfg.noiseless ? std::numeric_limits<double>::infinity() : snr_db;
    r.speed_kmph = speed_kmph;
    const int ni = cfg.resolved_ni();
    r.ni = ni == kNiFull ? "full" : std::to_string(ni);
    r.damping = cfg.detector.damping;
    r.frames = static_cast<int>(trials.size());
    long iterations = 0;
    long detections = 0;
    for (const auto& t : trials) {
        r.bit_errors += t.bit_errors;
        r.total_bits += t.bits;
        iterations += t.iterations;
        detections += t.detections;
    }
    r.ber = r.total_bits ? static_cast<double>(r.bit_errors) / static_cast<double>(r.total_bits) : 0.0;
    r.mean_iterations = detections ? static_cast<double>(iterations) / static_cast<double>(detections) : 0.0;
    r.wall_time_s = wall_time_s;
    return r;
}

std::string format_csv_row(const BerRecord& r)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g,%s,%.6g,%d,%zu,%zu,%.10g,%.6g,%.3f", r.scheme.c_str(), r.snr_db,
                  r.speed_kmph, r.ni.c_str(), r.damping, r.frames, r.bit_errors, r.total_bits, r.ber,
                  r.mean_iterations, r.wall_time_s);
    return buf;
}

namespace {

class CsvSink {
public:
    explicit CsvSink(const std::string& path)
    {
        if (path.empty())
            return;
        file_.open(path, std::ios::out | std::ios::trunc);
        if (!file_)
            throw std::runtime_error("cannot open output file '" + path + "'");
        file_ << kCsvHeader << '\n' << std::flush;
    }

    void write(const BerRecord& r)
    {
        if (!file_.is_open())
            return;
        file_ << format_csv_row(r) << '\n' << std::flush;
        if (!file_)
            throw std::runtime_error("write to output file failed");
    }

private:
    std::ofstream file_;
};

void run_grid(const CampaignConfig& cfg, CsvSink& sink, std::vector<BerRecord>& out)
{
    for (double speed : cfg.speeds_kmph) {
        for (double snr : cfg.snr_db) {
            const auto start = std::chrono::steady_clock::now();
            const auto trials = run_trials(cfg, snr, speed);
            const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
            out.push_back(aggregate(cfg, snr, speed, trials, wall.count()));
            sink.write(out.back());
        }
    }
}

} // namespace

std::vector<BerRecord> run_campaign(const CampaignConfig& cfg)
{
    cfg.check();
    CsvSink sink(cfg.out);
    std::vector<BerRecord> records;
    run_grid(cfg, sink, records);
    return records;
}

std::vector<BerRecord> sweep_ni(const CampaignConfig& cfg, const std::vector<int>& ni_list)
{
    if (ni_list.empty())
        throw std::invalid_argument("n_i sweep list is empty");
    std::vector<CampaignConfig> points;
    for (int ni : ni_list) {
        CampaignConfig c = cfg;
        c.ni = ni;
        c.check();
        points.push_back(std::move(c));
    }
    CsvSink sink(cfg.out);
    std::vector<BerRecord> records;
    for (const auto& c : points)
        run_grid(c, sink, records);
    return records;
}

std::vector<BerRecord> sweep_damping(const CampaignConfig& cfg, const std::vector<double>& damping_list)
{
    if (damping_list.empty())
        throw std::invalid_argument("damping sweep list is empty");
    std::vector<CampaignConfig> points;
    for (double d : damping_list) {
        CampaignConfig c = cfg;
        c.detector.damping = d;
        c.check();
        points.push_back(std::move(c));
    }
    CsvSink sink(cfg.out);
    std::vector<BerRecord> records;
    for (const auto& c : points)
        run_grid(c, sink, records);
    return records;
}

PairedComparison compare_paired(const std::vector<TrialResult>& a, const std::vector<TrialResult>& b)
{
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("paired comparison needs two equally long, non-empty runs");
    const double f = static_cast<double>(a.size());
    std::vector<double> diff(a.size());
    PairedComparison out;
    std::size_t errors_a = 0, errors_b = 0, bits_a = 0, bits_b = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff[i] = static_cast<double>(a[i].bit_errors) / static_cast<double>(a[i].bits) -
                  static_cast<double>(b[i].bit_errors) / static_cast<double>(b[i].bits);
        out.mean_diff += diff[i] / f;
        errors_a += a[i].bit_errors;
        errors_b += b[i].bit_errors;
        bits_a += a[i].bits;
        bits_b += b[i].bits;
    }
    double ss = 0.0;
    for (double d : diff)
        ss += (d - out.mean_diff) * (d - out.mean_diff);
    const double sd = a.size() > 1 ? std::sqrt(ss / (f - 1.0)) : 0.0;
    out.half_width = 1.96 * sd / std::sqrt(f);
    out.ber_a = static_cast<double>(errors_a) / static_cast<double>(bits_a);
    out.ber_b = static_cast<double>(errors_b) / static_cast<double>(bits_b);
    return out;
}

} // namespace otfs
