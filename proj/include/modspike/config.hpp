#ifndef MODSPIKE_CONFIG_HPP
#define MODSPIKE_CONFIG_HPP

#include <modspike/core_types.hpp>
#include <modspike/spike_sim.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace modspike {

/// Simulation settings read from `key=value` text.
struct SimulationSettings
{
    SensorConfig sensor;
    bool mosaic = true;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    std::istringstream is(text);
    T value{};
    is >> value;
    if (!is || !is.eof())
        throw Error("config: bad value for " + key + ": '" + text + "'");
    return value;
}

inline bool parse_bool(const std::string& key, const std::string& text)
{
    if (text == "1" || text == "true" || text == "yes" || text == "on")
        return true;
    if (text == "0" || text == "false" || text == "no" || text == "off")
        return false;
    throw Error("config: bad boolean for " + key + ": '" + text + "'");
}

} // namespace detail

/// Splits "a=1,b=2" or newline-separated text into pairs. '#' starts a comment.
inline std::map<std::string, std::string> parse_key_values(const std::string& text)
{
    std::map<std::string, std::string> out;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream items(line);
        std::string item;
        while (std::getline(items, item, ',')) {
            item = detail::trim(item);
            if (item.empty())
                continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw Error("config: expected key=value, got '" + item + "'");
            out[detail::trim(item.substr(0, eq))] = detail::trim(item.substr(eq + 1));
        }
    }
    return out;
}

inline SimulationSettings parse_simulation_settings(const std::string& text, SimulationSettings base = {})
{
    for (const auto& [key, value] : parse_key_values(text)) {
        SensorConfig& s = base.sensor;
        if (key == "eta" || key == "threshold")
            s.threshold = detail::parse_number<double>(key, value);
        else if (key == "q" || key == "conversion_gain")
            s.conversion_gain = detail::parse_number<double>(key, value);
        else if (key == "f" || key == "readout_rate")
            s.readout_rate = detail::parse_number<std::uint32_t>(key, value);
        else if (key == "T" || key == "total_time")
            s.total_time = detail::parse_number<double>(key, value);
        else if (key == "K" || key == "micro_intervals")
            s.micro_intervals = detail::parse_number<std::size_t>(key, value);
        else if (key == "shot_noise")
            s.shot_noise = detail::parse_bool(key, value);
        else if (key == "seed" || key == "rng_seed")
            s.rng_seed = detail::parse_number<std::uint64_t>(key, value);
        else if (key == "reset") {
            if (value == "subtract")
                s.reset = ResetMode::subtract;
            else if (value == "zero")
                s.reset = ResetMode::zero;
            else
                throw Error("config: reset must be 'subtract' or 'zero'");
        } else if (key == "mosaic")
            base.mosaic = detail::parse_bool(key, value);
        else
            throw Error("config: unknown key '" + key + "'");
    }
    if (Status st = validate(base.sensor); !st)
        throw Error("config: " + st.message);
    return base;
}

/// Accepts either a path to a key=value file or the key=value list itself.
inline SimulationSettings load_simulation_settings(const std::string& arg, SimulationSettings base = {})
{
    if (arg.empty())
        return parse_simulation_settings("", base);
    std::error_code ec;
    if (arg.find('=') == std::string::npos || std::filesystem::is_regular_file(arg, ec)) {
        std::ifstream in(arg);
        if (!in)
            throw Error("config: cannot open " + arg);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_simulation_settings(ss.str(), base);
    }
    return parse_simulation_settings(arg, base);
}

} // namespace modspike

#endif // MODSPIKE_CONFIG_HPP
