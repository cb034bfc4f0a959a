#include "coldfaas/stats.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coldfaas/error.hpp"
#include "coldfaas/loadgen.hpp"

namespace coldfaas {

namespace {

std::size_t rank_for(std::size_t n, int percent) {
  // ceil(percent * n / 100), at least 1
  std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;
  return std::max<std::size_t>(1, std::min(rank, n));
}

std::string fmt_ms(std::int64_t ns) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", ns_to_ms(ns));
  return buf;
}

std::string fmt_ms(double ns) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", ns / 1e6);
  return buf;
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::int64_t nearest_rank(std::span<const std::int64_t> values, int percent) {
  if (values.empty()) throw Error(ErrorCode::empty_samples, "nearest_rank of an empty sample");
  if (percent < 0 || percent > 100) throw Error(ErrorCode::invalid_argument, "percent must be in [0, 100]");
  std::vector<std::int64_t> copy(values.begin(), values.end());
  auto nth = copy.begin() + static_cast<std::ptrdiff_t>(rank_for(copy.size(), percent) - 1);
  std::nth_element(copy.begin(), nth, copy.end());
  return *nth;
}

Summary summarize_values(std::vector<std::int64_t> values) {
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  auto at = [&](int percent) { return values[rank_for(n, percent) - 1]; };
  s.count = n;
  s.min_ns = values.front();
  s.max_ns = values.back();
  s.p1_ns = at(1);
  s.p25_ns = at(25);
  s.p50_ns = at(50);
  s.p75_ns = at(75);
  s.p99_ns = at(99);
  long double sum = 0;
  for (auto v : values) sum += static_cast<long double>(v);
  s.mean_ns = static_cast<double>(sum / static_cast<long double>(n));
  return s;
}

BenchReport summarize(const SampleSet& set) {
  std::vector<std::int64_t> total, queue, startup, execution, setup, cold, warm;
  bool any_warm_flag = false;
  BenchReport report;
  for (const auto& r : set.samples) {
    if (r.outcome != Outcome::ok) {
      ++report.failed;
      continue;
    }
    total.push_back(r.total_ns);
    queue.push_back(r.queue_wait_ns);
    startup.push_back(r.startup_ns);
    execution.push_back(r.execution_ns);
    if (r.connection_setup_ns) setup.push_back(*r.connection_setup_ns);
    if (r.warm) any_warm_flag = true;
    (r.warm.value_or(false) ? warm : cold).push_back(r.total_ns);
  }
  if (total.empty()) throw Error(ErrorCode::empty_samples, "no ok samples in '" + set.label + "'");

  report.label = set.label;
  report.parallelism = set.config.parallelism;
  const std::int64_t span = set.finished - set.started;
  report.throughput_rps = span > 0 ? static_cast<double>(total.size()) / ns_to_seconds(span) : 0.0;
  report.total = summarize_values(std::move(total));
  report.queue_wait = summarize_values(std::move(queue));
  report.startup = summarize_values(std::move(startup));
  report.execution = summarize_values(std::move(execution));
  report.connection_setup = summarize_values(std::move(setup));
  if (any_warm_flag) {
    if (!cold.empty()) report.cold_p50_ns = nearest_rank(cold, 50);
    if (!warm.empty()) report.warm_p50_ns = nearest_rank(warm, 50);
  }
  return report;
}

std::string Comparison::to_table() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-24s %14s %14s %18s\n", "environment", "cold p50 ms", "warm p50 ms",
                "conn setup p50 ms");
  out << line;
  for (const auto& row : rows) {
    std::string warm = row.warm_p50_ms ? fmt_num(*row.warm_p50_ms) : "-";
    std::snprintf(line, sizeof(line), "%-24s %14.3f %14s %18.3f\n", row.name.c_str(), row.cold_p50_ms, warm.c_str(),
                  row.connection_setup_p50_ms);
    out << line;
  }
  return out.str();
}

Comparison compare(const std::vector<NamedReport>& reports) {
  if (reports.size() < 2) throw Error(ErrorCode::invalid_argument, "compare needs at least two reports");
  Comparison table;
  for (const auto& [name, r] : reports) {
    ComparisonRow row;
    row.name = name;
    row.cold_p50_ms = ns_to_ms(r.cold_p50_ns.value_or(r.total.p50_ns));
    if (r.warm_p50_ns) row.warm_p50_ms = ns_to_ms(*r.warm_p50_ns);
    row.connection_setup_p50_ms = ns_to_ms(r.connection_setup.p50_ns);
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::optional<double> metric_ms(const BenchReport& r, std::string_view metric) {
  const Summary& t = r.total;
  if (metric == "min") return ns_to_ms(t.min_ns);
  if (metric == "p1") return ns_to_ms(t.p1_ns);
  if (metric == "p25") return ns_to_ms(t.p25_ns);
  if (metric == "p50") return ns_to_ms(t.p50_ns);
  if (metric == "p75") return ns_to_ms(t.p75_ns);
  if (metric == "p99") return ns_to_ms(t.p99_ns);
  if (metric == "max") return ns_to_ms(t.max_ns);
  if (metric == "mean") return t.mean_ns / 1e6;
  if (metric == "cold_p50") return ns_to_ms(r.cold_p50_ns.value_or(t.p50_ns));
  if (metric == "warm_p50") return r.warm_p50_ns ? std::optional<double>(ns_to_ms(*r.warm_p50_ns)) : std::nullopt;
  if (metric == "conn_p50") return ns_to_ms(r.connection_setup.p50_ns);
  if (metric == "startup_p50") return ns_to_ms(r.startup.p50_ns);
  if (metric == "queue_p50") return ns_to_ms(r.queue_wait.p50_ns);
  if (metric == "exec_p50") return ns_to_ms(r.execution.p50_ns);
  if (metric == "throughput") return r.throughput_rps;
  return std::nullopt;
}

std::optional<double> parse_number(std::string_view token) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return v;
}

double evaluate_operand(std::string_view token, const std::vector<NamedReport>& reports) {
  if (auto n = parse_number(token)) return *n;
  auto dot = token.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == token.size()) {
    throw Error(ErrorCode::invalid_argument, "expected <report>.<metric> or a number, got '" + std::string(token) + "'");
  }
  auto name = token.substr(0, dot);
  auto metric = token.substr(dot + 1);
  auto it = std::find_if(reports.begin(), reports.end(), [&](const NamedReport& r) { return r.first == name; });
  if (it == reports.end()) throw Error(ErrorCode::not_found, "unknown report '" + std::string(name) + "'");
  auto value = metric_ms(it->second, metric);
  if (!value) throw Error(ErrorCode::not_found, "metric '" + std::string(metric) + "' unavailable for '" + std::string(name) + "'");
  return *value;
}

// Terms joined by '+' (anywhere) or '-' (whitespace-delimited, since report
// names may contain dashes).
double evaluate_side(std::string_view side, const std::vector<NamedReport>& reports) {
  std::string spaced;
  for (char c : side) {
    if (c == '+') {
      spaced += " + ";
    } else {
      spaced += c;
    }
  }
  std::istringstream in(spaced);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  if (tokens.empty() || tokens.size() % 2 == 0) {
    throw Error(ErrorCode::invalid_argument, "malformed expression '" + std::string(side) + "'");
  }
  double value = evaluate_operand(tokens[0], reports);
  for (std::size_t i = 1; i + 1 < tokens.size(); i += 2) {
    double rhs = evaluate_operand(tokens[i + 1], reports);
    if (tokens[i] == "+") {
      value += rhs;
    } else if (tokens[i] == "-") {
      value -= rhs;
    } else {
      throw Error(ErrorCode::invalid_argument, "unexpected token '" + tokens[i] + "'");
    }
  }
  return value;
}

}  // namespace

AssertionResult evaluate_assertion(std::string_view assertion, const std::vector<NamedReport>& reports) {
  static constexpr std::string_view kOps[] = {"<=", ">=", "<", ">"};
  for (auto op : kOps) {
    auto pos = assertion.find(op);
    if (pos == std::string_view::npos) continue;
    AssertionResult result;
    result.text = std::string(assertion);
    result.lhs = evaluate_side(assertion.substr(0, pos), reports);
    result.rhs = evaluate_side(assertion.substr(pos + op.size()), reports);
    if (op == "<=") result.holds = result.lhs <= result.rhs;
    if (op == ">=") result.holds = result.lhs >= result.rhs;
    if (op == "<") result.holds = result.lhs < result.rhs;
    if (op == ">") result.holds = result.lhs > result.rhs;
    return result;
  }
  throw Error(ErrorCode::invalid_argument, "assertion needs one of < <= > >=: '" + std::string(assertion) + "'");
}

std::optional<ExportFormat> parse_export_format(std::string_view text) {
  if (text == "json") return ExportFormat::json;
  if (text == "csv") return ExportFormat::csv;
  if (text == "boxplot_csv" || text == "boxplot-csv") return ExportFormat::boxplot_csv;
  return std::nullopt;
}

void to_json(nlohmann::json& j, const Summary& s) {
  j = nlohmann::json{{"count", s.count},   {"min_ns", s.min_ns}, {"p1_ns", s.p1_ns},   {"p25_ns", s.p25_ns},
                     {"p50_ns", s.p50_ns}, {"p75_ns", s.p75_ns}, {"p99_ns", s.p99_ns}, {"max_ns", s.max_ns},
                     {"mean_ns", s.mean_ns}};
}

void from_json(const nlohmann::json& j, Summary& s) {
  s.count = j.at("count").get<std::uint64_t>();
  s.min_ns = j.at("min_ns").get<std::int64_t>();
  s.p1_ns = j.at("p1_ns").get<std::int64_t>();
  s.p25_ns = j.at("p25_ns").get<std::int64_t>();
  s.p50_ns = j.at("p50_ns").get<std::int64_t>();
  s.p75_ns = j.at("p75_ns").get<std::int64_t>();
  s.p99_ns = j.at("p99_ns").get<std::int64_t>();
  s.max_ns = j.at("max_ns").get<std::int64_t>();
  s.mean_ns = j.at("mean_ns").get<double>();
}

void to_json(nlohmann::json& j, const BenchReport& r) {
  j = nlohmann::json{{"label", r.label},
                     {"parallelism", r.parallelism},
                     {"total", r.total},
                     {"failed", r.failed},
                     {"throughput_rps", r.throughput_rps},
                     {"breakdown",
                      {{"queue_wait", r.queue_wait},
                       {"startup", r.startup},
                       {"execution", r.execution},
                       {"connection_setup", r.connection_setup}}}};
  if (r.cold_p50_ns) j["cold_p50_ns"] = *r.cold_p50_ns;
  if (r.warm_p50_ns) j["warm_p50_ns"] = *r.warm_p50_ns;
}

void from_json(const nlohmann::json& j, BenchReport& r) {
  r = BenchReport{};
  r.label = j.at("label").get<std::string>();
  r.parallelism = j.at("parallelism").get<int>();
  r.total = j.at("total").get<Summary>();
  r.failed = j.at("failed").get<std::uint64_t>();
  r.throughput_rps = j.at("throughput_rps").get<double>();
  const auto& b = j.at("breakdown");
  r.queue_wait = b.at("queue_wait").get<Summary>();
  r.startup = b.at("startup").get<Summary>();
  r.execution = b.at("execution").get<Summary>();
  r.connection_setup = b.at("connection_setup").get<Summary>();
  if (j.contains("cold_p50_ns")) r.cold_p50_ns = j.at("cold_p50_ns").get<std::int64_t>();
  if (j.contains("warm_p50_ns")) r.warm_p50_ns = j.at("warm_p50_ns").get<std::int64_t>();
}

const char* const kCsvHeader =
    "label,parallelism,count,failed,throughput_rps,min_ms,p1_ms,p25_ms,p50_ms,p75_ms,p99_ms,max_ms,mean_ms,"
    "queue_wait_p50_ms,startup_p50_ms,execution_p50_ms,connection_setup_p50_ms";

const char* const kBoxplotCsvHeader = "environment,parallelism,min_ms,p1_ms,p25_ms,p50_ms,p75_ms,p99_ms,max_ms";

std::string reports_to_json(const std::vector<BenchReport>& reports) {
  return nlohmann::json(reports).dump(2) + "\n";
}

std::string reports_to_csv(const std::vector<BenchReport>& reports) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : reports) {
    const auto& t = r.total;
    out += r.label + "," + std::to_string(r.parallelism) + "," + std::to_string(t.count) + "," +
           std::to_string(r.failed) + "," + fmt_num(r.throughput_rps) + "," + fmt_ms(t.min_ns) + "," +
           fmt_ms(t.p1_ns) + "," + fmt_ms(t.p25_ns) + "," + fmt_ms(t.p50_ns) + "," + fmt_ms(t.p75_ns) + "," +
           fmt_ms(t.p99_ns) + "," + fmt_ms(t.max_ns) + "," + fmt_ms(t.mean_ns) + "," +
           fmt_ms(r.queue_wait.p50_ns) + "," + fmt_ms(r.startup.p50_ns) + "," + fmt_ms(r.execution.p50_ns) + "," +
           fmt_ms(r.connection_setup.p50_ns) + "\n";
  }
  return out;
}

std::string reports_to_boxplot_csv(const std::vector<BenchReport>& reports) {
  std::vector<const BenchReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const BenchReport* a, const BenchReport* b) {
    return a->label != b->label ? a->label < b->label : a->parallelism < b->parallelism;
  });
  std::string out = std::string(kBoxplotCsvHeader) + "\n";
  for (const auto* r : sorted) {
    const auto& t = r->total;
    out += r->label + "," + std::to_string(r->parallelism) + "," + fmt_ms(t.min_ns) + "," + fmt_ms(t.p1_ns) + "," +
           fmt_ms(t.p25_ns) + "," + fmt_ms(t.p50_ns) + "," + fmt_ms(t.p75_ns) + "," + fmt_ms(t.p99_ns) + "," +
           fmt_ms(t.max_ns) + "\n";
  }
  return out;
}

std::string render(const std::vector<BenchReport>& reports, ExportFormat format) {
  switch (format) {
    case ExportFormat::json: return reports_to_json(reports);
    case ExportFormat::csv: return reports_to_csv(reports);
    case ExportFormat::boxplot_csv: return reports_to_boxplot_csv(reports);
  }
  return {};
}

void export_reports(const std::vector<BenchReport>& reports, ExportFormat format, const std::filesystem::path& out) {
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::io_error, "cannot write " + out.string());
  file << render(reports, format);
  if (!file) throw Error(ErrorCode::io_error, "write failed for " + out.string());
}

std::vector<BenchReport> load_reports_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  auto doc = nlohmann::json::parse(in);
  if (doc.is_object()) return {doc.get<BenchReport>()};
  return doc.get<std::vector<BenchReport>>();
}

}  // namespace coldfaas
