#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <swsearch/bench.hpp>
#include <swsearch/dbsearch.hpp>
#include <swsearch/error.hpp>
#include <swsearch/perfmodel.hpp>
#include <swsearch/portability.hpp>
#include <swsearch/scheduler.hpp>
#include <swsearch/seqio.hpp>

#ifndef SWSEARCH_DATA_DIR
#define SWSEARCH_DATA_DIR "data"
#endif

namespace swsearch {

inline std::filesystem::path default_data_dir()
{
    return SWSEARCH_DATA_DIR;
}

enum class OutputFormat
{
    Table,
    Csv,
    Json,
};

struct CommandConfig
{
    std::string query;
    std::string db;
    std::string matrix = "BLOSUM62";
    Score gap_open = 10;
    Score gap_extend = 2;
    std::size_t top_k = 10;
    std::size_t workers = 1;
    std::size_t lane_width = default_lane_width;
    std::string threshold = "80%";
    std::size_t repetitions = 20;
    std::string devices = (default_data_dir() / "devices.json").string();
    std::string results = (default_data_dir() / "results.csv").string();
    std::string sets = (default_data_dir() / "sets.json").string();
    OutputFormat format = OutputFormat::Table;
    std::string efficiency = "arch";
    std::string out;
};

namespace detail {

/// Left-aligned text table; numeric-looking cells and NA are right-aligned.
inline void print_table(std::ostream& out, const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows)
{
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c)
        width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], row[c].size());
    auto numeric = [](const std::string& s) {
        return s == "NA" || (!s.empty() && s.find_first_not_of("0123456789.-%") == std::string::npos);
    };
    auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c)
                out << "  ";
            if (numeric(row[c]))
                out << std::setw(static_cast<int>(width[c])) << std::right << row[c];
            else if (c + 1 == row.size())
                out << row[c];
            else
                out << std::setw(static_cast<int>(width[c])) << std::left << row[c];
        }
        out << '\n';
    };
    line(header);
    std::size_t total = 0;
    for (auto w : width)
        total += w;
    out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    for (const auto& row : rows)
        line(row);
}

inline void print_csv(std::ostream& out, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows)
{
    auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << csv_field(row[c]);
        out << '\n';
    };
    line(header);
    for (const auto& row : rows)
        line(row);
}

inline std::string fixed(double v, int decimals)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(decimals) << v;
    return s.str();
}

/// Data goes to `--out` when given, otherwise to the output stream.
class Sink
{
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}

    std::ostream& stream() { return path_.empty() ? fallback_ : buffer_; }

    void finish()
    {
        if (path_.empty())
            return;
        std::ofstream file(path_, std::ios::binary | std::ios::trunc);
        if (!file)
            throw IoError("cannot write output to '" + path_ + "'");
        file << buffer_.str();
        file.close();
        if (!file)
            throw IoError("failed writing output to '" + path_ + "'");
    }

private:
    std::string path_;
    std::ostream& fallback_;
    std::ostringstream buffer_;
};

inline ScoringScheme scheme_from(const CommandConfig& c)
{
    ScoringScheme scheme{load_score_matrix(c.matrix), c.gap_open, c.gap_extend};
    scheme.validate();
    return scheme;
}

inline PartitionConfig partition_from(const CommandConfig& c)
{
    PartitionConfig p;
    p.threshold = parse_threshold(c.threshold);
    p.lane_width = c.lane_width;
    p.top_k = c.top_k;
    p.validate();
    return p;
}

inline SequenceDatabase load_database(const std::string& path)
{
    return SequenceDatabase(read_fasta_file(path), std::filesystem::path(path).filename().string());
}

inline std::vector<Sequence> load_queries(const std::string& path)
{
    auto queries = read_fasta_file(path);
    if (queries.empty())
        throw ConfigError("query file '" + path + "' holds no sequences");
    return queries;
}

inline int run_search(const CommandConfig& c, std::ostream& out, std::ostream& err)
{
    const auto scheme = scheme_from(c);
    const auto config = partition_from(c);
    const auto queries = load_queries(c.query);
    const auto db = load_database(c.db);
    const auto plan = plan_distribution(queries.size(), c.workers, db);
    err << "searching " << queries.size() << " queries against " << db.size() << " sequences (" << db.total_residues()
        << " residues), " << c.workers << " workers, " << to_string(plan.mode) << '\n';
    const auto results = execute_plan(plan, queries, db, scheme, config);

    const std::vector<std::string> header{"query", "rank", "target", "score", "query_end", "target_end", "cigar"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : results) {
        err << r.query_id << ": " << r.total_cells << " cells in " << fixed(r.elapsed_seconds, 3) << " s\n";
        for (std::size_t rank = 0; rank < r.hits.size(); ++rank) {
            const auto& h = r.hits[rank];
            rows.push_back({r.query_id, std::to_string(rank + 1), db[h.db_index].id, std::to_string(h.score),
                            std::to_string(h.end_i), std::to_string(h.end_j), h.path ? to_cigar(*h.path) : "-"});
        }
    }

    Sink sink(c.out, out);
    if (c.format == OutputFormat::Table) {
        print_table(sink.stream(), header, rows);
    } else if (c.format == OutputFormat::Csv) {
        print_csv(sink.stream(), header, rows);
    } else {
        auto doc = nlohmann::ordered_json::array();
        for (const auto& r : results) {
            nlohmann::ordered_json q;
            q["query"] = r.query_id;
            q["total_cells"] = r.total_cells;
            q["hits"] = nlohmann::ordered_json::array();
            for (const auto& h : r.hits) {
                nlohmann::ordered_json hit;
                hit["target"] = db[h.db_index].id;
                hit["db_index"] = h.db_index;
                hit["score"] = h.score;
                hit["query_end"] = h.end_i;
                hit["target_end"] = h.end_j;
                if (h.path) {
                    hit["query_start"] = h.path->start_i;
                    hit["target_start"] = h.path->start_j;
                    hit["cigar"] = to_cigar(*h.path);
                }
                q["hits"].push_back(std::move(hit));
            }
            doc.push_back(std::move(q));
        }
        sink.stream() << doc.dump(2) << '\n';
    }
    sink.finish();
    return 0;
}

inline int run_bench(const CommandConfig& c, std::ostream& out, std::ostream& err)
{
    const auto scheme = scheme_from(c);
    const auto config = partition_from(c);
    const auto queries = load_queries(c.query);
    const auto db = load_database(c.db);
    std::vector<BenchReport> reports;
    for (const auto& q : queries) {
        reports.push_back(bench_search(q, db, scheme, config, c.workers, c.repetitions));
        err << q.id << ": " << fixed(reports.back().gcups, 3) << " GCUPS over " << c.repetitions << " runs\n";
    }
    Sink sink(c.out, out);
    if (c.format == OutputFormat::Table) {
        std::vector<std::vector<std::string>> rows;
        for (const auto* r : report_order(reports))
            rows.push_back({r->db_name, r->query_id, std::to_string(r->total_cells), std::to_string(r->repetitions()),
                            fixed(r->mean_elapsed, 6), fixed(r->gcups, 3), fixed(r->mean_run_gcups, 3)});
        print_table(sink.stream(), {"db", "query", "cells", "reps", "mean_s", "gcups", "mean_run_gcups"}, rows);
    } else {
        emit_report(reports, c.format == OutputFormat::Csv ? ReportFormat::Csv : ReportFormat::Json, sink.stream());
    }
    sink.finish();
    return 0;
}

inline int run_model(const CommandConfig& c, std::ostream& out, std::ostream& err)
{
    const auto devices = load_device_specs(c.devices);
    Sink sink(c.out, out);
    const std::vector<std::string> header{"device", "vendor", "type", "cores", "lanes", "throughput", "clock_mhz",
                                          "peak_gcups"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& d : devices) {
        if (d.class_throughput)
            err << "note: " << d.name << " class throughputs blend to "
                << fixed(equivalent_throughput(cell_update_mix, *d.class_throughput), 3) << "; the stored value "
                << format_double(d.throughput) << " is used\n";
        const double peak = theo_peak(d);
        rows.push_back({d.name, d.vendor, to_string(d.type), std::to_string(d.cores), std::to_string(d.lanes),
                        format_double(d.throughput), format_double(d.clock_mhz),
                        c.format == OutputFormat::Table ? fixed(peak, 1) : format_double(peak)});
    }
    if (c.format == OutputFormat::Table) {
        print_table(sink.stream(), header, rows);
    } else if (c.format == OutputFormat::Csv) {
        print_csv(sink.stream(), header, rows);
    } else {
        auto doc = nlohmann::ordered_json::array();
        for (const auto& d : devices)
            doc.push_back({{"device", d.name},
                           {"vendor", d.vendor},
                           {"type", to_string(d.type)},
                           {"cores", d.cores},
                           {"lanes", d.lanes},
                           {"throughput", d.throughput},
                           {"clock_mhz", d.clock_mhz},
                           {"capability", capability(d)},
                           {"peak_gcups", theo_peak(d)}});
        sink.stream() << doc.dump(2) << '\n';
    }
    sink.finish();
    return 0;
}

inline int run_portability(const CommandConfig& c, std::ostream& out, std::ostream& err)
{
    const auto devices = load_device_specs(c.devices);
    const auto rows_in = load_results(c.results);
    const auto sets = load_sets(c.sets);
    const auto records = attach_peaks(rows_in, devices);
    const auto kind = c.efficiency == "app" ? EfficiencyKind::Application : EfficiencyKind::Architectural;
    const auto report = portability_report(records, sets, kind);
    const auto impls = implementations(records);

    for (const auto& row : report) {
        for (const auto& w : row.phi.warnings)
            err << "warning: " << row.set << "/" << row.implementation << ": " << w << '\n';
        if (!row.phi.missing.empty()) {
            err << "note: " << row.set << "/" << row.implementation << " has no record for";
            for (const auto& p : row.phi.missing)
                err << ' ' << p;
            err << '\n';
        }
    }

    auto percent = [](const PhiBar& p, int decimals) {
        return p.value ? fixed(*p.value * 100, decimals) : std::string("NA");
    };
    Sink sink(c.out, out);
    if (c.format == OutputFormat::Table) {
        std::vector<std::string> header{"set"};
        for (const auto& impl : impls)
            header.push_back(impl + " (%)");
        std::vector<std::vector<std::string>> rows;
        for (const auto& set : sets) {
            std::vector<std::string> row{set.name};
            for (const auto& r : report)
                if (r.set == set.name)
                    row.push_back(percent(r.phi, 1));
            rows.push_back(std::move(row));
        }
        print_table(sink.stream(), header, rows);
    } else if (c.format == OutputFormat::Csv) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : report) {
            std::string unsupported;
            for (const auto& p : r.phi.unsupported)
                unsupported += (unsupported.empty() ? "" : ";") + p;
            std::string missing;
            for (const auto& p : r.phi.missing)
                missing += (missing.empty() ? "" : ";") + p;
            rows.push_back({r.set, r.implementation,
                            r.phi.value ? format_double(*r.phi.value * 100) : std::string("NA"), unsupported,
                            missing});
        }
        print_csv(sink.stream(), {"set", "implementation", "phi_bar_pct", "unsupported", "missing"}, rows);
    } else {
        auto doc = nlohmann::ordered_json::array();
        for (const auto& r : report) {
            nlohmann::ordered_json j;
            j["set"] = r.set;
            j["implementation"] = r.implementation;
            j["phi_bar"] = r.phi.value ? nlohmann::ordered_json(*r.phi.value) : nlohmann::ordered_json(nullptr);
            j["unsupported"] = r.phi.unsupported;
            j["missing"] = r.phi.missing;
            doc.push_back(std::move(j));
        }
        sink.stream() << doc.dump(2) << '\n';
    }
    sink.finish();
    return 0;
}

} // namespace detail

/// Entry point of the command-line tool. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CommandConfig c;
    CLI::App app{"Smith-Waterman protein database search and GPU performance-portability toolkit", "swsearch"};
    app.require_subcommand(1);

    const std::map<std::string, OutputFormat> formats{
        {"table", OutputFormat::Table}, {"csv", OutputFormat::Csv}, {"json", OutputFormat::Json}};
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", c.format, "Output format")
            ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case))
            ->option_text("table|csv|json [table]");
        sub->add_option("--out", c.out, "Write data output to this file");
    };
    auto add_search_flags = [&](CLI::App* sub) {
        sub->add_option("--query", c.query, "Query FASTA file")->required();
        sub->add_option("--db", c.db, "Database FASTA file")->required();
        sub->add_option("--matrix", c.matrix, "BLOSUM62 or a matrix file")->capture_default_str();
        sub->add_option("--gap-open", c.gap_open, "Gap open penalty")->capture_default_str();
        sub->add_option("--gap-extend", c.gap_extend, "Gap extend penalty")->capture_default_str();
        sub->add_option("--top", c.top_k, "Hits reported per query")->capture_default_str();
        sub->add_option("--workers", c.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_option("--lane-width", c.lane_width, "Targets scored side by side")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--threshold", c.threshold, "Short/long split: a length or a percentile such as 80%")
            ->capture_default_str();
        add_format(sub);
    };

    auto* search = app.add_subcommand("search", "Rank database sequences against each query");
    add_search_flags(search);
    auto* bench = app.add_subcommand("bench", "Time searches and report GCUPS");
    add_search_flags(bench);
    bench->add_option("--reps", c.repetitions, "Repetitions per query")->capture_default_str()->check(
        CLI::PositiveNumber);
    auto* model = app.add_subcommand("model", "Theoretical peak GCUPS of each device");
    model->add_option("--devices", c.devices, "Device spec JSON file")->capture_default_str();
    add_format(model);
    auto* portability = app.add_subcommand("portability", "Performance portability over platform sets");
    portability->add_option("--results", c.results, "Achieved GCUPS CSV file")->capture_default_str();
    portability->add_option("--devices", c.devices, "Device spec JSON file")->capture_default_str();
    portability->add_option("--sets", c.sets, "Platform set JSON file")->capture_default_str();
    portability->add_option("--efficiency", c.efficiency, "arch (vs. peak) or app (vs. best observed)")
        ->capture_default_str()
        ->check(CLI::IsMember({"arch", "app"}));
    add_format(portability);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        err << '\n' << app.help();
        return code == 0 ? 2 : code;
    }

    try {
        if (search->parsed())
            return detail::run_search(c, out, err);
        if (bench->parsed())
            return detail::run_bench(c, out, err);
        if (model->parsed())
            return detail::run_model(c, out, err);
        return detail::run_portability(c, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace swsearch
