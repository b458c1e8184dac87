#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include <swsearch/dbsearch.hpp>
#include <swsearch/error.hpp>
#include <swsearch/scheduler.hpp>
#include <swsearch/seqio.hpp>

namespace swsearch {

/// Parameters that shaped a measurement.
struct BenchConfig
{
    std::string matrix = "BLOSUM62";
    Score gap_open = 10;
    Score gap_extend = 2;
    std::string threshold = "80%";
    std::size_t lane_width = default_lane_width;
    std::size_t workers = 1;

    bool operator==(const BenchConfig&) const = default;
};

struct BenchReport
{
    std::string query_id;
    std::string db_name;
    BenchConfig config;
    std::uint64_t total_cells = 0;
    std::vector<double> run_elapsed; ///< seconds, one per repetition
    std::vector<double> run_gcups;
    double mean_elapsed = 0;
    double gcups = 0;          ///< total_cells / mean_elapsed
    double mean_run_gcups = 0; ///< arithmetic mean of run_gcups

    std::size_t repetitions() const noexcept { return run_elapsed.size(); }
};

inline double gcups(std::uint64_t cells, double seconds)
{
    if (!(seconds > 0))
        throw TimingError("elapsed time " + std::to_string(seconds) +
                          " s is below the timer resolution; use a larger query or database");
    return static_cast<double>(cells) / seconds / 1e9;
}

/// Seconds since an arbitrary epoch.
using Timer = std::function<double()>;

inline double steady_seconds()
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

/// Times `run` (which returns the number of cells it computed) `repetitions`
/// times, sequentially.
inline BenchReport measure_gcups(const std::function<std::uint64_t()>& run, std::size_t repetitions = 20,
                                 const Timer& timer = steady_seconds)
{
    if (repetitions == 0)
        throw ConfigError("at least one repetition is required");
    BenchReport report;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        const double start = timer();
        const std::uint64_t cells = run();
        const double elapsed = timer() - start;
        if (rep == 0)
            report.total_cells = cells;
        else if (cells != report.total_cells)
            throw SearchError("repetition " + std::to_string(rep) + " computed " + std::to_string(cells) +
                              " cells, expected " + std::to_string(report.total_cells));
        report.run_gcups.push_back(gcups(cells, elapsed));
        report.run_elapsed.push_back(elapsed);
    }
    const auto n = static_cast<double>(repetitions);
    report.mean_elapsed = std::accumulate(report.run_elapsed.begin(), report.run_elapsed.end(), 0.0) / n;
    report.gcups = gcups(report.total_cells, report.mean_elapsed);
    report.mean_run_gcups = std::accumulate(report.run_gcups.begin(), report.run_gcups.end(), 0.0) / n;
    return report;
}

/// Benchmarks one query against an already loaded database. Searches run
/// through the scheduler, so `workers` slices the database for one query.
inline BenchReport bench_search(const Sequence& query, const SequenceDatabase& db, const ScoringScheme& scheme,
                                const PartitionConfig& config, std::size_t workers, std::size_t repetitions = 20,
                                const Timer& timer = steady_seconds)
{
    const WorkerPlan plan = plan_distribution(1, workers, db);
    const std::span<const Sequence> queries(&query, 1);
    auto report = measure_gcups(
        [&] { return execute_plan(plan, queries, db, scheme, config).front().total_cells; }, repetitions, timer);
    report.query_id = query.id;
    report.db_name = db.name();
    report.config = {scheme.matrix.name(), scheme.gap_open, scheme.gap_extend, to_string(config.threshold),
                     config.lane_width, workers};
    return report;
}

enum class ReportFormat
{
    Csv,
    Json,
};

namespace detail {

inline std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

inline std::vector<const BenchReport*> report_order(std::span<const BenchReport> reports)
{
    std::vector<const BenchReport*> order;
    for (const auto& r : reports)
        order.push_back(&r);
    std::ranges::stable_sort(order, [](const BenchReport* a, const BenchReport* b) {
        return std::tie(a->db_name, a->query_id) < std::tie(b->db_name, b->query_id);
    });
    return order;
}

} // namespace detail

inline void emit_report(std::span<const BenchReport> reports, ReportFormat format, std::ostream& out)
{
    const auto order = detail::report_order(reports);
    if (format == ReportFormat::Csv) {
        out << "db_name,query_id,total_cells,repetitions,mean_elapsed_s,gcups,mean_run_gcups,"
               "matrix,gap_open,gap_extend,threshold,lane_width,workers,run_elapsed_s\n";
        for (const auto* r : order) {
            std::string runs;
            for (double e : r->run_elapsed)
                runs += (runs.empty() ? "" : ";") + detail::format_double(e);
            out << detail::csv_field(r->db_name) << ',' << detail::csv_field(r->query_id) << ',' << r->total_cells
                << ',' << r->repetitions() << ',' << detail::format_double(r->mean_elapsed) << ','
                << detail::format_double(r->gcups) << ',' << detail::format_double(r->mean_run_gcups) << ','
                << detail::csv_field(r->config.matrix) << ',' << r->config.gap_open << ',' << r->config.gap_extend
                << ',' << detail::csv_field(r->config.threshold) << ',' << r->config.lane_width << ','
                << r->config.workers << ',' << runs << '\n';
        }
    } else {
        auto doc = nlohmann::ordered_json::array();
        for (const auto* r : order) {
            nlohmann::ordered_json j;
            j["db_name"] = r->db_name;
            j["query_id"] = r->query_id;
            j["total_cells"] = r->total_cells;
            j["repetitions"] = r->repetitions();
            j["mean_elapsed_s"] = r->mean_elapsed;
            j["gcups"] = r->gcups;
            j["mean_run_gcups"] = r->mean_run_gcups;
            j["config"] = {{"matrix", r->config.matrix},         {"gap_open", r->config.gap_open},
                           {"gap_extend", r->config.gap_extend}, {"threshold", r->config.threshold},
                           {"lane_width", r->config.lane_width}, {"workers", r->config.workers}};
            j["run_elapsed_s"] = r->run_elapsed;
            j["run_gcups"] = r->run_gcups;
            doc.push_back(std::move(j));
        }
        out << doc.dump(2) << '\n';
    }
    if (!out)
        throw IoError("failed to write the benchmark report");
}

inline void emit_report(std::span<const BenchReport> reports, ReportFormat format, const std::filesystem::path& path)
{
    std::ostringstream buffer;
    emit_report(reports, format, buffer);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw IoError("cannot write report to '" + path.string() + "'");
    file << buffer.str();
    file.close();
    if (!file)
        throw IoError("failed writing report to '" + path.string() + "'");
}

} // namespace swsearch
