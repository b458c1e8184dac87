#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <swsearch/error.hpp>

namespace swsearch {

enum class DeviceType
{
    Discrete,
    Integrated,
};

inline const char* to_string(DeviceType t)
{
    return t == DeviceType::Discrete ? "discrete" : "integrated";
}

/// Instruction counts of one cell update, split by class.
struct InstructionMix
{
    unsigned add_sub = 5;
    unsigned max_ops = 6;
    unsigned moves = 1;

    constexpr unsigned total() const noexcept { return add_sub + max_ops + moves; }
    bool operator==(const InstructionMix&) const = default;
};

inline constexpr InstructionMix cell_update_mix{};
static_assert(cell_update_mix.total() == 12);

/// Instructions per cycle per lane for each instruction class.
struct ClassThroughput
{
    double add_sub = 0;
    double max_ops = 0;
    double moves = 0;
};

struct DeviceSpec
{
    std::string name;
    std::string vendor;
    DeviceType type = DeviceType::Discrete;
    std::string microarchitecture;
    unsigned cores = 0;
    unsigned lanes = 0;
    double throughput = 0; ///< effective instructions per cycle per lane
    std::optional<ClassThroughput> class_throughput;
    double clock_mhz = 0;

    void validate() const
    {
        if (cores == 0 || lanes == 0 || !(throughput > 0) || !(clock_mhz > 0))
            throw ConfigError("device '" + name + "': cores, lanes, throughput and clock must all be positive");
    }
};

/// Instructions per second across the whole device.
inline double capability(const DeviceSpec& spec)
{
    return static_cast<double>(spec.cores) * spec.lanes * spec.throughput * spec.clock_mhz * 1e6;
}

/// Theoretical peak in GCUPS, full precision.
inline double theo_peak(const DeviceSpec& spec, const InstructionMix& mix = cell_update_mix)
{
    if (mix.total() == 0)
        throw ConfigError("instruction mix has no instructions");
    return capability(spec) / mix.total() / 1e9;
}

/// Harmonic blend of per-class throughputs weighted by the mix.
inline double equivalent_throughput(const InstructionMix& mix, const ClassThroughput& per_class)
{
    if (!(per_class.add_sub > 0) || !(per_class.max_ops > 0) || !(per_class.moves > 0))
        throw ConfigError("class throughputs must be positive");
    if (mix.total() == 0)
        throw ConfigError("instruction mix has no instructions");
    const double cycles = mix.add_sub / per_class.add_sub + mix.max_ops / per_class.max_ops + mix.moves / per_class.moves;
    return mix.total() / cycles;
}

inline double round_to(double value, int decimals)
{
    const double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

inline DeviceSpec device_from_json(const nlohmann::json& j)
{
    try {
        DeviceSpec d;
        d.name = j.at("name").get<std::string>();
        d.vendor = j.at("vendor").get<std::string>();
        const auto type = j.value("type", std::string("discrete"));
        if (type == "discrete")
            d.type = DeviceType::Discrete;
        else if (type == "integrated")
            d.type = DeviceType::Integrated;
        else
            throw ParseError("device '" + d.name + "': unknown type '" + type + "'");
        d.microarchitecture = j.value("microarchitecture", std::string());
        d.cores = j.at("cores").get<unsigned>();
        d.lanes = j.at("lanes").get<unsigned>();
        d.throughput = j.at("throughput").get<double>();
        d.clock_mhz = j.at("clock_mhz").get<double>();
        if (j.contains("class_throughput")) {
            const auto& c = j.at("class_throughput");
            d.class_throughput = ClassThroughput{c.at("add_sub").get<double>(), c.at("max").get<double>(),
                                                 c.at("move").get<double>()};
        }
        d.validate();
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("device spec: ") + e.what());
    }
}

inline std::vector<DeviceSpec> parse_device_specs(std::istream& in)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("device spec file: ") + e.what());
    }
    if (!doc.is_array())
        throw ParseError("device spec file: expected an array of devices");
    std::vector<DeviceSpec> out;
    for (const auto& item : doc)
        out.push_back(device_from_json(item));
    return out;
}

inline std::vector<DeviceSpec> load_device_specs(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open device spec file '" + path.string() + "'");
    return parse_device_specs(in);
}

} // namespace swsearch
