#include "otfs/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace otfs;

namespace {

CampaignConfig small_config(Scheme scheme)
{
    CampaignConfig cfg;
    cfg.scheme = scheme;
    cfg.n_doppler = 8;
    cfg.m_delay = 16;
    cfg.frames = 6;
    cfg.snr_db = {18.0};
    cfg.speeds_kmph = {120.0};
    cfg.threads = 2;
    return cfg;
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Drops the last CSV column (wall time) from every line.
std::string strip_wall_time(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line))
        out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

} // namespace

TEST_CASE("scheme and window parsing")
{
    for (auto s : {Scheme::otfs_ideal, Scheme::otfs_rect_wc, Scheme::otfs_rect_wo, Scheme::ofdm})
        CHECK(parse_scheme(to_string(s)) == s);
    CHECK(to_string(Scheme::otfs_rect_wc) == "otfs-rect-wc");
    CHECK_THROWS_AS(parse_scheme("otfs"), std::invalid_argument);
    CHECK(parse_ni("full") == kNiFull);
    CHECK(parse_ni("default") == kNiDefault);
    CHECK(parse_ni("7") == 7);
    CHECK_THROWS_AS(parse_ni("-1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_ni("3x"), std::invalid_argument);
}

TEST_CASE("config derived quantities")
{
    CampaignConfig cfg;
    CHECK(cfg.resolved_ni() == 7);
    cfg.n_doppler = 64;
    CHECK(cfg.resolved_ni() == 10);
    cfg.ni = kNiFull;
    CHECK(cfg.window().is_full());
    CHECK(cfg.window().label() == "full");
    cfg = {};
    CHECK(cfg.cp_samples() == 2);
    CHECK(cfg.bits_per_frame() == 16u * 64u * 2u);
    cfg.qam = 16;
    CHECK(cfg.bits_per_frame() == 16u * 64u * 4u);
    CHECK_NOTHROW(cfg.check());
    cfg.frames = 0;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.snr_db.clear();
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.ni = 8;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.profile = "nope";
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
}

TEST_CASE("trial seeds are distinct and reproducible")
{
    CHECK(trial_seed(1, 0) == trial_seed(1, 0));
    CHECK(trial_seed(1, 0) != trial_seed(1, 1));
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("noiseless runs with a matched channel make no errors")
{
    for (auto scheme : {Scheme::otfs_ideal, Scheme::otfs_rect_wc, Scheme::ofdm}) {
        auto cfg = small_config(scheme);
        cfg.noiseless = true;
        cfg.ni = kNiFull;
        cfg.b_off = cfg.m_delay;
        for (double speed : {0.0, 120.0, 500.0}) {
            const auto trials = run_trials(cfg, 18.0, speed);
            REQUIRE(trials.size() == 6);
            std::size_t errors = 0;
            for (const auto& t : trials)
                errors += t.bit_errors;
            INFO(to_string(scheme), " at ", speed, " km/h");
            CHECK(errors == 0);
        }
    }
}

TEST_CASE("bit accounting and detector call counts")
{
    for (auto scheme : {Scheme::otfs_ideal, Scheme::otfs_rect_wo, Scheme::ofdm}) {
        auto cfg = small_config(scheme);
        cfg.qam = 16;
        const auto trials = run_trials(cfg, 10.0, 120.0);
        const auto rec = aggregate(cfg, 10.0, 120.0, trials, 0.0);
        CHECK(rec.total_bits == 6u * 8u * 16u * 4u);
        CHECK(rec.ber == doctest::Approx(static_cast<double>(rec.bit_errors) / rec.total_bits));
        CHECK(rec.ber <= 1.0);
        for (const auto& t : trials)
            CHECK(t.detections == (scheme == Scheme::ofdm ? 8 : 1));
        CHECK(rec.mean_iterations > 0.0);
    }
}

TEST_CASE("identical seeds give identical results; threads do not matter")
{
    auto cfg = small_config(Scheme::otfs_rect_wc);
    const auto a = run_trials(cfg, 12.0, 500.0);
    cfg.threads = 1;
    const auto b = run_trials(cfg, 12.0, 500.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].bit_errors == b[i].bit_errors);
        CHECK(a[i].iterations == b[i].iterations);
    }
    const auto single = run_trial(cfg, 12.0, 500.0, trial_seed(cfg.seed, 3));
    CHECK(single.bit_errors == a[3].bit_errors);
}

TEST_CASE("campaign records and CSV output")
{
    const auto dir = std::filesystem::temp_directory_path() / "otfs_harness_test";
    std::filesystem::create_directories(dir);
    auto cfg = small_config(Scheme::otfs_ideal);
    cfg.frames = 2;
    cfg.snr_db = {6.0, 12.0, 18.0};
    cfg.speeds_kmph = {30.0, 500.0};
    cfg.out = (dir / "a.csv").string();
    const auto recs = run_campaign(cfg);
    CHECK(recs.size() == 6);
    CHECK(recs[0].speed_kmph == 30.0);
    CHECK(recs[1].snr_db == 12.0);
    CHECK(recs[3].speed_kmph == 500.0);

    const auto text = read_file(cfg.out);
    CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    CHECK(std::string(kCsvHeader) ==
          "scheme,snr_db,speed_kmph,ni,damping,frames,bit_errors,total_bits,ber,mean_iterations,wall_time_s");
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);

    cfg.out = (dir / "b.csv").string();
    run_campaign(cfg);
    CHECK(strip_wall_time(read_file(dir / "a.csv")) == strip_wall_time(read_file(dir / "b.csv")));

    cfg.out = (dir / "missing" / "x.csv").string();
    CHECK_THROWS(run_campaign(cfg));
    std::filesystem::remove_all(dir);
}

TEST_CASE("single point gives one record")
{
    auto cfg = small_config(Scheme::otfs_ideal);
    cfg.frames = 1;
    const auto recs = run_campaign(cfg);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].frames == 1);
    CHECK(recs[0].scheme == "otfs-ideal");
    CHECK(recs[0].ni == "3");
}

TEST_CASE("sweeps share channel draws and label their records")
{
    auto cfg = small_config(Scheme::otfs_ideal);
    cfg.frames = 3;
    const auto ni = sweep_ni(cfg, {0, 2, kNiFull});
    REQUIRE(ni.size() == 3);
    CHECK(ni[0].ni == "0");
    CHECK(ni[2].ni == "full");
    const auto d = sweep_damping(cfg, {0.5, 1.0});
    REQUIRE(d.size() == 2);
    CHECK(d[0].damping == 0.5);
    CHECK(d[1].damping == 1.0);
}

TEST_CASE("CSV row formatting")
{
    BerRecord r;
    r.scheme = "ofdm";
    r.snr_db = 18.0;
    r.speed_kmph = 120.0;
    r.ni = "10";
    r.damping = 0.7;
    r.frames = 3;
    r.bit_errors = 5;
    r.total_bits = 1000;
    r.ber = 0.005;
    r.mean_iterations = 4.5;
    r.wall_time_s = 1.23456;
    CHECK(format_csv_row(r) == "ofdm,18,120,10,0.7,3,5,1000,0.005,4.5,1.235");
    r.snr_db = std::numeric_limits<double>::infinity();
    CHECK(format_csv_row(r).rfind("ofdm,inf,", 0) == 0);
}

TEST_CASE("paired comparison")
{
    std::vector<TrialResult> a(50), b(50);
    for (std::size_t i = 0; i < 50; ++i) {
        a[i] = {10 + i % 3, 100, 5, 1};
        b[i] = {i % 2, 100, 5, 1};
    }
    const auto c = compare_paired(a, b);
    CHECK(c.ber_a > c.ber_b);
    CHECK(c.a_worse());
    CHECK_FALSE(c.equivalent());
    const auto same = compare_paired(a, a);
    CHECK(same.mean_diff == 0.0);
    CHECK(same.equivalent());
    CHECK_THROWS_AS(compare_paired(a, std::vector<TrialResult>(3)), std::invalid_argument);
}

TEST_CASE("JSON campaign configuration")
{
    const auto cfg = parse_campaign_config(R"({
        "scheme": "otfs-rect-wc", "n": 32, "m": 16, "qam": 16,
        "snr_db": [10, 14], "speed_kmph": 500, "frames": 12, "ni": "full",
        "damping": 0.5, "gamma": 0.2, "max_iters": 9, "seed": 77, "noiseless": true,
        "profiles": [{"name": "two", "delays_ns": [0, 300], "powers_db": [0, -3]}],
        "profile": "two"
    })");
    CHECK(cfg.scheme == Scheme::otfs_rect_wc);
    CHECK(cfg.n_doppler == 32);
    CHECK(cfg.m_delay == 16);
    CHECK(cfg.qam == 16);
    CHECK(cfg.snr_db == std::vector<double>{10.0, 14.0});
    CHECK(cfg.speeds_kmph == std::vector<double>{500.0});
    CHECK(cfg.ni == kNiFull);
    CHECK(cfg.detector.damping == 0.5);
    CHECK(cfg.detector.gamma == 0.2);
    CHECK(cfg.detector.max_iters == 9);
    CHECK(cfg.seed == 77);
    CHECK(cfg.noiseless);
    CHECK(cfg.channel_profile().path_count() == 2);

    CampaignConfig base;
    base.frames = 42;
    CHECK(parse_campaign_config(R"({"n": 8})", base).frames == 42);
    CHECK_THROWS_AS(parse_campaign_config(R"({"bogus": 1})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_campaign_config(R"({"ni": "wide"})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_campaign_config(R"({"n": "eight"})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_campaign_config("{"), std::invalid_argument);
    CHECK_THROWS(load_campaign_config("/nonexistent/cfg.json"));
}
