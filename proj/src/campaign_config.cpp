#include "otfs/harness.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace otfs {

namespace {

using nlohmann::json;

template <class T>
std::vector<T> scalar_or_list(const json& v)
{
    if (v.is_array())
        return v.get<std::vector<T>>();
    return {v.get<T>()};
}

ChannelProfile profile_from_json(const json& j)
{
    ChannelProfile p;
    p.name = j.at("name").get<std::string>();
    p.delays_ns = j.at("delays_ns").get<std::vector<double>>();
    p.powers_db = j.at("powers_db").get<std::vector<double>>();
    p.normalize = j.value("normalize", true);
    p.check();
    return p;
}

} // namespace

CampaignConfig parse_campaign_config(const std::string& json_text, CampaignConfig cfg)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw std::invalid_argument("config must be a JSON object");

    try {
        for (const auto& [key, v] : doc.items()) {
            if (key == "scheme")
                cfg.scheme = parse_scheme(v.get<std::string>());
            else if (key == "n")
                cfg.n_doppler = v.get<int>();
            else if (key == "m")
                cfg.m_delay = v.get<int>();
            else if (key == "subcarrier_spacing_hz")
                cfg.subcarrier_spacing_hz = v.get<double>();
            else if (key == "carrier_freq_hz")
                cfg.carrier_freq_hz = v.get<double>();
            else if (key == "qam")
                cfg.qam = v.get<int>();
            else if (key == "snr_db")
                cfg.snr_db = scalar_or_list<double>(v);
            else if (key == "speed_kmph")
                cfg.speeds_kmph = scalar_or_list<double>(v);
            else if (key == "frames")
                cfg.frames = v.get<int>();
            else if (key == "ni")
                cfg.ni = v.is_string() ? parse_ni(v.get<std::string>()) : v.get<int>();
            else if (key == "damping")
                cfg.detector.damping = v.get<double>();
            else if (key == "gamma")
                cfg.detector.gamma = v.get<double>();
            else if (key == "epsilon")
                cfg.detector.epsilon = v.get<double>();
            else if (key == "max_iters")
                cfg.detector.max_iters = v.get<int>();
            else if (key == "profile")
                cfg.profile = v.get<std::string>();
            else if (key == "profiles") {
                cfg.custom_profiles.clear();
                for (const auto& p : v)
                    cfg.custom_profiles.push_back(profile_from_json(p));
            } else if (key == "seed")
                cfg.seed = v.get<std::uint64_t>();
            else if (key == "out")
                cfg.out = v.get<std::string>();
            else if (key == "noiseless")
                cfg.noiseless = v.get<bool>();
            else if (key == "threads")
                cfg.threads = v.get<int>();
            else if (key == "cp_us")
                cfg.cp_us = v.get<double>();
            else if (key == "b_off")
                cfg.b_off = v.get<int>();
            else
                throw std::invalid_argument("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad config value: ") + e.what());
    }
    return cfg;
}

CampaignConfig load_campaign_config(const std::string& path, CampaignConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_campaign_config(text.str(), std::move(base));
}

} // namespace otfs
