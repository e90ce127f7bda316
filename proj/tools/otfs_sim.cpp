// Monte-Carlo BER campaigns for OTFS and OFDM over delay-Doppler channels.

#include "otfs/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::vector<int> parse_ni_list(const std::vector<std::string>& items)
{
    std::vector<int> out;
    for (const auto& s : items)
        out.push_back(otfs::parse_ni(s));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"OTFS / OFDM bit error rate simulator"};
    app.option_defaults()->always_capture_default();

    std::string config_path;
    bool table1 = false;
    std::string scheme;
    int n = 0, m = 0, qam = 0, frames = 0, max_iters = 0, threads = 0, b_off = 0;
    std::vector<double> snr, speed, sweep_damping;
    std::vector<std::string> sweep_ni;
    std::string ni, profile, out;
    double damping = 0, gamma = 0, epsilon = 0, cp_us = 0;
    std::uint64_t seed = 0;
    bool noiseless = false;

    app.add_option("--config", config_path, "JSON campaign file; flags override its values")->check(CLI::ExistingFile);
    app.add_flag("--table1", table1, "Start from the full-scale setup: N=128, M=512, 30000 frames");
    auto* o_scheme = app.add_option("--scheme", scheme, "otfs-ideal | otfs-rect-wc | otfs-rect-wo | ofdm");
    auto* o_n = app.add_option("--n", n, "Doppler bins / time slots N");
    auto* o_m = app.add_option("--m", m, "Delay bins / subcarriers M");
    auto* o_qam = app.add_option("--qam", qam, "Constellation size (4, 16, 64)");
    auto* o_snr = app.add_option("--snr", snr, "SNR points in dB (comma separated)")->delimiter(',');
    auto* o_speed = app.add_option("--speed", speed, "UE speeds in km/h (comma separated)")->delimiter(',');
    auto* o_frames = app.add_option("--frames", frames, "Frames per point");
    auto* o_ni = app.add_option("--ni", ni, "IDI half-width, 'full' or 'default'");
    auto* o_damping = app.add_option("--damping", damping, "Message damping factor");
    auto* o_gamma = app.add_option("--gamma", gamma, "Convergence threshold");
    auto* o_epsilon = app.add_option("--epsilon", epsilon, "Allowed drop of the convergence indicator");
    auto* o_iters = app.add_option("--max-iters", max_iters, "Detector iteration cap");
    auto* o_profile = app.add_option("--profile", profile, "Channel profile: EPA, EVA, ETU or one from --config");
    auto* o_seed = app.add_option("--seed", seed, "Master seed");
    auto* o_out = app.add_option("--out", out, "CSV output path");
    auto* o_noiseless = app.add_flag("--noiseless", noiseless, "Disable noise");
    auto* o_threads = app.add_option("--threads", threads, "Worker threads (0 = all cores)");
    auto* o_cp = app.add_option("--cp-us", cp_us, "OFDM cyclic prefix in microseconds");
    auto* o_boff = app.add_option("--b-off", b_off, "Off-diagonals kept per side of the OFDM channel");
    app.add_option("--sweep-ni", sweep_ni, "Run once per IDI half-width (comma separated, 'full' allowed)")
        ->delimiter(',');
    app.add_option("--sweep-damping", sweep_damping, "Run once per damping value (comma separated)")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        otfs::CampaignConfig cfg;
        if (table1) {
            cfg.n_doppler = 128;
            cfg.m_delay = 512;
            cfg.frames = 30000;
        }
        if (!config_path.empty())
            cfg = otfs::load_campaign_config(config_path, cfg);

        if (*o_scheme)
            cfg.scheme = otfs::parse_scheme(scheme);
        if (*o_n)
            cfg.n_doppler = n;
        if (*o_m)
            cfg.m_delay = m;
        if (*o_qam)
            cfg.qam = qam;
        if (*o_snr)
            cfg.snr_db = snr;
        if (*o_speed)
            cfg.speeds_kmph = speed;
        if (*o_frames)
            cfg.frames = frames;
        if (*o_ni)
            cfg.ni = otfs::parse_ni(ni);
        if (*o_damping)
            cfg.detector.damping = damping;
        if (*o_gamma)
            cfg.detector.gamma = gamma;
        if (*o_epsilon)
            cfg.detector.epsilon = epsilon;
        if (*o_iters)
            cfg.detector.max_iters = max_iters;
        if (*o_profile)
            cfg.profile = profile;
        if (*o_seed)
            cfg.seed = seed;
        if (*o_out)
            cfg.out = out;
        if (*o_noiseless)
            cfg.noiseless = noiseless;
        if (*o_threads)
            cfg.threads = threads;
        if (*o_cp)
            cfg.cp_us = cp_us;
        if (*o_boff)
            cfg.b_off = b_off;

        if (!sweep_ni.empty() && !sweep_damping.empty())
            throw std::invalid_argument("--sweep-ni and --sweep-damping are mutually exclusive");

        std::vector<otfs::BerRecord> records;
        if (!sweep_ni.empty())
            records = otfs::sweep_ni(cfg, parse_ni_list(sweep_ni));
        else if (!sweep_damping.empty())
            records = otfs::sweep_damping(cfg, sweep_damping);
        else
            records = otfs::run_campaign(cfg);

        std::cout << otfs::kCsvHeader << '\n';
        for (const auto& r : records)
            std::cout << otfs::format_csv_row(r) << '\n';
    } catch (const std::exception& e) {
        std::cerr << "otfs_sim: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
