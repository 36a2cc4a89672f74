#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

#include "activemeasure/activemeasure.h"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kIo = 3 };

int exit_code(am_status s) {
  switch (s) {
    case AM_OK: return kOk;
    case AM_ERR_INVALID_ARGUMENT:
    case AM_ERR_CONFIG:
    case AM_ERR_PARSE:
    case AM_ERR_VALIDATION: return kUsage;
    case AM_ERR_IO: return kIo;
    default: return kCheckFailed;
  }
}

int report_error(const char* what, am_status s) {
  std::cerr << "active_measure " << what << ": " << am_status_name(s) << ": " << am_last_error_message() << '\n';
  return exit_code(s);
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { am_string_free(p); }
};

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  std::string format;
  std::vector<std::string> set;

  std::vector<std::string> overrides() const {
    std::vector<std::string> o;
    if (seed) o.push_back("seed=" + std::to_string(*seed));
    if (trials) o.push_back("trials=" + std::to_string(*trials));
    if (!format.empty()) o.push_back("format=" + format);
    for (const auto& kv : set) o.push_back(kv);
    return o;
  }
};

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

int run_simulate(const CommonOptions& o) {
  const auto overrides = o.overrides();
  const auto argv = c_strings(overrides);
  OwnedString text;
  const am_status s = am_simulate(o.config.c_str(), argv.data(), argv.size(),
                                  o.out.empty() ? nullptr : o.out.c_str(), &text.p);
  if (s != AM_OK) return report_error("simulate", s);
  if (text.p) std::cout << text.p;
  return kOk;
}

int run_report(const CommonOptions& o, std::size_t steps) {
  const auto overrides = o.overrides();
  const auto argv = c_strings(overrides);
  am_run* run = nullptr;
  am_status s = am_run_create(o.config.empty() ? nullptr : o.config.c_str(), argv.data(), argv.size(), &run);
  if (s != AM_OK) return report_error("report", s);
  std::unique_ptr<am_run, void (*)(am_run*)> guard(run, am_run_free);
  if (steps == 0) steps = am_run_pool_size(run);
  if (steps > am_run_pool_size(run)) {
    std::cerr << "active_measure report: --steps " << steps << " exceeds the pool size " << am_run_pool_size(run)
              << '\n';
    return kUsage;
  }
  am_report rep{};
  for (std::size_t i = 0; i < steps && !am_run_exhausted(run); ++i) {
    s = am_run_step(run, &rep);
    if (s != AM_OK) return report_error("report", s);
    if (o.out.empty())
      std::printf("t=%zu estimate=%.17g ci=[%.17g, %.17g] var_cond=%.17g var_simp=%.17g\n", rep.t, rep.estimate,
                  rep.ci_lo, rep.ci_hi, rep.var_cond, rep.var_simp);
  }
  if (!o.out.empty()) {
    s = am_run_export(run, o.out.c_str(), o.format.empty() ? "csv" : o.format.c_str());
    if (s != AM_OK) return report_error("report", s);
  }
  return kOk;
}

int run_verify(const std::string& suite, std::size_t trials, std::uint64_t seed) {
  OwnedString text;
  const am_status s = am_verify(suite.c_str(), trials, seed, &text.p);
  if (text.p) std::cout << text.p;
  if (s == AM_ERR_CHECK_FAILED) return kCheckFailed;
  if (s != AM_OK) return report_error("verify", s);
  return kOk;
}

int run_replay(const std::string& log) {
  OwnedString text;
  const am_status s = am_replay(log.c_str(), &text.p);
  if (s != AM_OK) return report_error("replay", s);
  std::cout << text.p << '\n';
  return kOk;
}

int run_serve(const std::string& bind, const std::string& pools, const std::string& ui, const std::string& store) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  am_server* server = nullptr;
  am_status s = am_server_create(store.empty() ? nullptr : store.c_str(), pools.empty() ? nullptr : pools.c_str(),
                                 ui.empty() ? nullptr : ui.c_str(), &server);
  if (s != AM_OK) return report_error("serve", s);
  std::unique_ptr<am_server, void (*)(am_server*)> guard(server, am_server_free);
  int port = 0;
  s = am_server_bind(server, bind.c_str(), &port);
  if (s != AM_OK) return report_error("serve", s);
  std::cerr << "active_measure: listening on port " << port << '\n';

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    am_server_stop(server);
  });
  s = am_server_run(server);
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  if (s != AM_OK) return report_error("serve", s);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active measurement: unbiased totals from adaptively sampled human labels"};
  app.require_subcommand(1);

  CommonOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment and write metrics");
  simulate->add_option("--config", sim.config, "Experiment config file (key = value)")->required();
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--trials", sim.trials, "Number of trials M");
  simulate->add_option("--out", sim.out, "Results file (default: stdout)");
  simulate->add_option("--format", sim.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  simulate->add_option("--set", sim.set, "Override any config key (key=value)");

  CommonOptions rep;
  std::size_t steps = 0;
  auto* report = app.add_subcommand("report", "Run one active-measurement trajectory and print its reports");
  report->add_option("--config", rep.config, "Experiment config file");
  report->add_option("--seed", rep.seed, "Run seed");
  report->add_option("--steps", steps, "Number of labels (default: until exhausted)");
  report->add_option("--out", rep.out, "Trajectory file (default: stdout)");
  report->add_option("--format", rep.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  report->add_option("--set", rep.set, "Override any config key (key=value)");

  std::string suite = "all";
  std::size_t verify_trials = 0;
  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "Run property suites; exit 0 iff all checks pass");
  verify->add_option("--suite", suite, "bound, unbiased, streaming, coverage, ordering or all")
      ->check(CLI::IsMember({"bound", "unbiased", "streaming", "coverage", "ordering", "all"}));
  verify->add_option("--trials", verify_trials, "Override the Monte Carlo trial count");
  verify->add_option("--seed", verify_seed, "Master seed");

  std::string bind = "127.0.0.1:8080", pools, ui, store = "sessions";
  auto* serve = app.add_subcommand("serve", "Serve the session API and the labeling UI");
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--pools", pools, "Directory of pool files offered to new sessions");
  serve->add_option("--ui", ui, "Directory with the UI bundle");
  serve->add_option("--store", store, "Directory for session event logs");

  std::string log;
  auto* replay = app.add_subcommand("replay", "Replay a session event log and print its reports");
  replay->add_option("log", log, "Event log (JSON lines)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*simulate) return run_simulate(sim);
  if (*report) return run_report(rep, steps);
  if (*verify) return run_verify(suite, verify_trials, verify_seed);
  if (*serve) return run_serve(bind, pools, ui, store);
  if (*replay) return run_replay(log);
  return kUsage;
}
