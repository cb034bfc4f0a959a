#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "coldfaas/error.hpp"

using namespace coldfaas::cli;

namespace {

void add_bench_options(CLI::App& cmd, BenchOptions& o, bool with_parallelism) {
  cmd.add_option("--url", o.url, "Target URL, e.g. http://127.0.0.1:8080/invoke/echo");
  cmd.add_option("--n", o.n, "Total requests")->check(CLI::PositiveNumber);
  if (with_parallelism) cmd.add_option("--c", o.c, "Requests in flight")->check(CLI::PositiveNumber);
  cmd.add_option("--conn", o.conn, "Connection mode")->check(CLI::IsMember({"per-request", "keep-alive"}));
  cmd.add_option("--seed", o.seed, "Schedule seed");
  cmd.add_option("--payload", o.payload, "Request body");
  cmd.add_option("--payload-file", o.payload_file, "Request body read from a file");
  cmd.add_option("--payload-size", o.payload_size, "Random request body of this many bytes");
  cmd.add_option("--method", o.method, "HTTP method (default: POST for /invoke, else GET)");
  cmd.add_flag("--virtual", o.virtual_time, "Simulate the run in virtual time against a runtime profile");
  cmd.add_option("--profile", o.profile, "Runtime profile for --virtual");
  cmd.add_option("--profiles", o.profiles_file, "Profiles JSON file (default: built-in table)");
  cmd.add_option("--workers", o.workers, "Dispatcher workers modeled by --virtual")->check(CLI::PositiveNumber);
  cmd.add_option("--execution-ms", o.execution_ms, "Function body time modeled by --virtual");
  cmd.add_option("--label", o.label, "Environment label stored with the samples");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coldfaas: cold-start-only FaaS platform and benchmark harness"};
  app.require_subcommand(1);

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the gateway");
  serve_cmd->add_option("--listen", serve.listen, "host:port");
  serve_cmd->add_option("--workers", serve.workers, "Dispatcher worker count")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--queue-capacity", serve.queue_capacity, "Bound the dispatch queue (default unbounded)");
  serve_cmd->add_option("--profiles", serve.profiles_file, "Runtime profiles JSON file");
  serve_cmd->add_option("--registry-dir", serve.registry_dir, "Function registry directory");
  serve_cmd->add_option("--sim-mode", serve.sim_mode, "Simulated driver timing")
      ->check(CLI::IsMember({"realtime", "virtual"}));
  serve_cmd->add_option("--seed", serve.seed, "Simulated driver seed");
  serve_cmd->add_option("--warm-idle-timeout-s", serve.warm_idle_timeout_s, "Warm-pool idle timeout");
  serve_cmd->add_option("--warm-resume-ms", serve.warm_resume_ms, "Warm-pool resume latency");
  serve_cmd->add_option("--warm-inner-profile", serve.warm_inner_profile,
                        "Simulated profile for warm-pool cold starts (default: run the process image)");
  serve_cmd->add_option("--http-threads", serve.http_threads, "Connection handler threads");
  serve_cmd->add_option("--max-body-bytes", serve.max_body_bytes, "Largest accepted invoke body");
  serve_cmd->add_flag("--no-keep-alive", serve.no_keep_alive, "Close connections after each response");

  DeployOptions deploy;
  auto* deploy_cmd = app.add_subcommand("deploy", "Deploy a function to a running gateway");
  deploy_cmd->add_option("--url", deploy.url, "Gateway base URL");
  deploy_cmd->add_option("--spec", deploy.spec_file, "FunctionSpec JSON file");
  deploy_cmd->add_option("--name", deploy.name, "Function name");
  deploy_cmd->add_option("--driver", deploy.driver, "process | simulated | warmpool");
  deploy_cmd->add_option("--image", deploy.image, "Executable to upload");
  deploy_cmd->add_option("--profile", deploy.profile, "Runtime profile (simulated driver)");
  deploy_cmd->add_option("--timeout-ms", deploy.timeout_ms, "Invocation timeout");
  deploy_cmd->add_option("--memory-mb", deploy.memory_mb, "Reserved memory (warm-pool accounting)");
  deploy_cmd->add_flag("--overwrite", deploy.overwrite, "Replace an existing deployment");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Closed-loop load run");
  add_bench_options(*bench_cmd, bench, true);
  bench_cmd->add_option("--out", bench.out, "Samples output (JSON lines)");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run bench at several parallelism levels");
  add_bench_options(*sweep_cmd, sweep.bench, false);
  sweep_cmd->add_option("--levels", sweep.levels, "Parallelism levels")->delimiter(',');
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "Directory for c<level>.json sample files");
  sweep_cmd->add_option("--cooldown-ms", sweep.cooldown_ms, "Pause between levels");

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Summarize sample files");
  report_cmd->add_option("--in", report.inputs, "Sample files")->required();
  report_cmd->add_option("--format", report.format, "json | csv | boxplot_csv")
      ->check(CLI::IsMember({"json", "csv", "boxplot_csv"}));
  report_cmd->add_option("--out", report.out, "Output file (default stdout)");

  CompareOptions compare;
  auto* compare_cmd = app.add_subcommand("compare", "Compare runs and check ordering assertions");
  compare_cmd->add_option("--in", compare.inputs, "Sample or report files, optionally name=path")->required();
  compare_cmd->add_option("--assert", compare.assertions, "e.g. \"a.p50 < b.p50\" (ms); exit 1 on violation");

  ProfilesOptions profiles;
  auto* profiles_cmd = app.add_subcommand("profiles", "Print the built-in runtime profile table");
  profiles_cmd->add_option("--out", profiles.out, "Write to a file instead of stdout");

  SizesOptions sizes;
  auto* sizes_cmd = app.add_subcommand("sizes", "Image sizes of deployed functions, largest first");
  sizes_cmd->add_option("--registry-dir", sizes.registry_dir, "Function registry directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return run_serve(serve);
    if (*deploy_cmd) return run_deploy(deploy);
    if (*bench_cmd) return run_bench(bench);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*report_cmd) return run_report(report);
    if (*compare_cmd) return run_compare(compare);
    if (*profiles_cmd) return run_profiles(profiles);
    if (*sizes_cmd) return run_sizes(sizes);
  } catch (const coldfaas::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
