#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace coldfaas {

struct SampleSet;

// Percentiles reported for every distribution.
inline constexpr std::array<int, 5> kReportedPercentiles = {1, 25, 50, 75, 99};

// Nearest-rank: the ceil(percent/100 * n)-th smallest value (1-indexed,
// rank >= 1). `values` must be non-empty; it need not be sorted.
std::int64_t nearest_rank(std::span<const std::int64_t> values, int percent);

struct Summary {
  std::uint64_t count = 0;
  std::int64_t min_ns = 0;
  std::int64_t p1_ns = 0;
  std::int64_t p25_ns = 0;
  std::int64_t p50_ns = 0;
  std::int64_t p75_ns = 0;
  std::int64_t p99_ns = 0;
  std::int64_t max_ns = 0;
  double mean_ns = 0.0;

  bool operator==(const Summary&) const = default;
};

// All-zero summary when `values` is empty.
Summary summarize_values(std::vector<std::int64_t> values);

struct BenchReport {
  std::string label;
  int parallelism = 0;
  Summary total;  // over ok samples' total_ns
  std::uint64_t failed = 0;
  double throughput_rps = 0.0;
  Summary queue_wait;
  Summary startup;
  Summary execution;
  Summary connection_setup;
  std::optional<std::int64_t> cold_p50_ns;  // split by the warm flag when present
  std::optional<std::int64_t> warm_p50_ns;

  bool operator==(const BenchReport&) const = default;
};

// Throws Error{empty_samples} when no sample has outcome ok.
BenchReport summarize(const SampleSet& samples);

struct ComparisonRow {
  std::string name;
  double cold_p50_ms = 0.0;
  std::optional<double> warm_p50_ms;
  double connection_setup_p50_ms = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::string to_table() const;
};

using NamedReport = std::pair<std::string, BenchReport>;

// Throws Error{invalid_argument} for fewer than two reports.
Comparison compare(const std::vector<NamedReport>& reports);

// Ordering assertion over report metrics in milliseconds, e.g.
//   "a.p50 < b.p50"
//   "includeos.p50 + 6.9 < lambda-warm.p50 + 50.1"
// Metrics: min p1 p25 p50 p75 p99 max mean cold_p50 warm_p50 conn_p50
// startup_p50 queue_p50 exec_p50 throughput. Operators: < <= > >=.
struct AssertionResult {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string text;
};

// Throws Error{invalid_argument} on syntax errors and Error{not_found} for an
// unknown report name or metric.
AssertionResult evaluate_assertion(std::string_view assertion, const std::vector<NamedReport>& reports);

enum class ExportFormat { json, csv, boxplot_csv };

std::optional<ExportFormat> parse_export_format(std::string_view text);

void to_json(nlohmann::json& j, const Summary& s);
void from_json(const nlohmann::json& j, Summary& s);
void to_json(nlohmann::json& j, const BenchReport& r);
void from_json(const nlohmann::json& j, BenchReport& r);

extern const char* const kCsvHeader;
extern const char* const kBoxplotCsvHeader;

std::string reports_to_json(const std::vector<BenchReport>& reports);
std::string reports_to_csv(const std::vector<BenchReport>& reports);
// One row per (label, parallelism), sorted by label then parallelism.
std::string reports_to_boxplot_csv(const std::vector<BenchReport>& reports);

std::string render(const std::vector<BenchReport>& reports, ExportFormat format);
void export_reports(const std::vector<BenchReport>& reports, ExportFormat format,
                    const std::filesystem::path& out);
std::vector<BenchReport> load_reports_json(const std::filesystem::path& path);

}  // namespace coldfaas
