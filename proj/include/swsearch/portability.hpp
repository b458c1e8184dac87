#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include <swsearch/error.hpp>
#include <swsearch/perfmodel.hpp>
#include <swsearch/seqio.hpp>

namespace swsearch {

struct EfficiencyRecord
{
    std::string platform;
    std::string implementation;
    double achieved_gcups = 0;
    double peak_gcups = 0;
    bool supported = false;

    void validate() const
    {
        if (supported && !(achieved_gcups > 0 && peak_gcups > 0))
            throw ConfigError("record " + platform + "/" + implementation +
                              ": a supported platform needs positive achieved and peak GCUPS");
    }
};

/// A named set of platforms over which portability is aggregated.
struct PortabilitySet
{
    std::string name;
    std::vector<std::string> platforms;

    void validate() const
    {
        if (platforms.empty())
            throw ConfigError("platform set '" + name + "' is empty");
        auto sorted = platforms;
        std::ranges::sort(sorted);
        if (auto dup = std::ranges::adjacent_find(sorted); dup != sorted.end())
            throw ConfigError("platform set '" + name + "' lists '" + *dup + "' twice");
    }
};

/// Achieved over peak. Values above 1 pass through; a note is appended to
/// `warnings` when given.
inline double arch_efficiency(double achieved, double peak, std::vector<std::string>* warnings = nullptr)
{
    if (!(peak > 0))
        throw ConfigError("peak performance must be positive");
    const double e = achieved / peak;
    if (e > 1 && warnings)
        warnings->push_back("efficiency " + std::to_string(e) + " exceeds 1; the peak may be underestimated");
    return e;
}

/// Achieved over the best performance observed on the same platform.
inline double app_efficiency(double achieved, double best_observed)
{
    if (!(best_observed > 0))
        throw ConfigError("no positive observation to compare against");
    return achieved / best_observed;
}

enum class EfficiencyKind
{
    Architectural,
    Application,
};

/// Mean efficiency over a set, or no value when any platform is unsupported
/// or has no record.
struct PhiBar
{
    std::optional<double> value;
    std::vector<std::string> missing;
    std::vector<std::string> unsupported;
    std::vector<std::string> warnings;

    bool applicable() const noexcept { return value.has_value(); }
};

namespace detail {

inline const EfficiencyRecord* find_record(std::span<const EfficiencyRecord> records, std::string_view platform,
                                           std::string_view implementation)
{
    const EfficiencyRecord* found = nullptr;
    for (const auto& r : records) {
        if (r.platform != platform || r.implementation != implementation)
            continue;
        if (found)
            throw ConfigError("more than one record for " + std::string(platform) + "/" + std::string(implementation));
        found = &r;
    }
    return found;
}

inline double best_observed(std::span<const EfficiencyRecord> records, std::string_view platform)
{
    double best = 0;
    for (const auto& r : records)
        if (r.platform == platform && r.supported)
            best = std::max(best, r.achieved_gcups);
    return best;
}

} // namespace detail

inline PhiBar phi_bar(std::span<const EfficiencyRecord> records, const PortabilitySet& set,
                      std::string_view implementation, EfficiencyKind kind = EfficiencyKind::Architectural)
{
    set.validate();
    PhiBar out;
    double sum = 0;
    for (const auto& platform : set.platforms) {
        const auto* r = detail::find_record(records, platform, implementation);
        if (!r) {
            out.missing.push_back(platform);
            continue;
        }
        if (!r->supported) {
            out.unsupported.push_back(platform);
            continue;
        }
        r->validate();
        sum += kind == EfficiencyKind::Architectural
                   ? arch_efficiency(r->achieved_gcups, r->peak_gcups, &out.warnings)
                   : app_efficiency(r->achieved_gcups, detail::best_observed(records, platform));
    }
    if (out.missing.empty() && out.unsupported.empty())
        out.value = sum / static_cast<double>(set.platforms.size());
    return out;
}

/// One row of a results file before peaks are attached.
struct ResultRow
{
    std::string platform;
    std::string implementation;
    std::optional<double> achieved_gcups;
    bool supported = false;
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos)
            return fields;
        start = comma + 1;
    }
}

inline bool parse_bool(std::string_view text, std::size_t line_no)
{
    std::string lower(text);
    std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "true" || lower == "yes" || lower == "1")
        return true;
    if (lower == "false" || lower == "no" || lower == "0")
        return false;
    throw ParseError("results line " + std::to_string(line_no) + ": bad boolean '" + std::string(text) + "'");
}

} // namespace detail

/// Columns platform, implementation, achieved_gcups, supported; `#` lines
/// are comments.
inline std::vector<ResultRow> parse_results(std::istream& in)
{
    const std::vector<std::string_view> expected{"platform", "implementation", "achieved_gcups", "supported"};
    std::vector<ResultRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#')
            continue;
        const auto fields = detail::split_csv_line(text);
        if (!header_seen) {
            if (fields != expected)
                throw ParseError("results line " + std::to_string(line_no) +
                                 ": expected header platform,implementation,achieved_gcups,supported");
            header_seen = true;
            continue;
        }
        if (fields.size() != 4)
            throw ParseError("results line " + std::to_string(line_no) + ": expected 4 fields");
        ResultRow row{std::string(fields[0]), std::string(fields[1]), std::nullopt,
                      detail::parse_bool(fields[3], line_no)};
        if (!fields[2].empty()) {
            double v = 0;
            auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), v);
            if (ec != std::errc{} || ptr != fields[2].data() + fields[2].size())
                throw ParseError("results line " + std::to_string(line_no) + ": bad GCUPS '" +
                                 std::string(fields[2]) + "'");
            row.achieved_gcups = v;
        }
        if (row.supported && !row.achieved_gcups)
            throw ParseError("results line " + std::to_string(line_no) + ": supported row without a GCUPS value");
        rows.push_back(std::move(row));
    }
    if (!header_seen)
        throw ParseError("results file has no header");
    return rows;
}

inline std::vector<ResultRow> load_results(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open results file '" + path.string() + "'");
    return parse_results(in);
}

inline std::vector<PortabilitySet> parse_sets(std::istream& in)
{
    std::vector<PortabilitySet> sets;
    try {
        const auto doc = nlohmann::json::parse(in);
        if (!doc.is_array())
            throw ParseError("set file: expected an array of sets");
        for (const auto& item : doc)
            sets.push_back({item.at("name").get<std::string>(), item.at("platforms").get<std::vector<std::string>>()});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("set file: ") + e.what());
    }
    for (const auto& s : sets)
        s.validate();
    return sets;
}

inline std::vector<PortabilitySet> load_sets(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open set file '" + path.string() + "'");
    return parse_sets(in);
}

/// Attaches the theoretical peak of each row's platform.
inline std::vector<EfficiencyRecord> attach_peaks(std::span<const ResultRow> rows, std::span<const DeviceSpec> devices)
{
    std::vector<EfficiencyRecord> records;
    for (const auto& row : rows) {
        auto dev = std::ranges::find(devices, row.platform, &DeviceSpec::name);
        if (dev == devices.end())
            throw ConfigError("no device spec for platform '" + row.platform + "'");
        EfficiencyRecord r{row.platform, row.implementation, row.achieved_gcups.value_or(0), theo_peak(*dev),
                           row.supported};
        r.validate();
        records.push_back(std::move(r));
    }
    return records;
}

/// Implementation names in order of first appearance.
inline std::vector<std::string> implementations(std::span<const EfficiencyRecord> records)
{
    std::vector<std::string> names;
    for (const auto& r : records)
        if (std::ranges::find(names, r.implementation) == names.end())
            names.push_back(r.implementation);
    return names;
}

struct PortabilityRow
{
    std::string set;
    std::string implementation;
    PhiBar phi;
};

inline std::vector<PortabilityRow> portability_report(std::span<const EfficiencyRecord> records,
                                                      std::span<const PortabilitySet> sets,
                                                      EfficiencyKind kind = EfficiencyKind::Architectural)
{
    std::vector<PortabilityRow> rows;
    const auto impls = implementations(records);
    for (const auto& set : sets)
        for (const auto& impl : impls)
            rows.push_back({set.name, impl, phi_bar(records, set, impl, kind)});
    return rows;
}

} // namespace swsearch
