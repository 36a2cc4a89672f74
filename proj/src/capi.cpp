#include "activemeasure/activemeasure.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "harness.hpp"
#include "http_server.hpp"
#include "service.hpp"
#include "verify.hpp"

struct am_pool {
  std::shared_ptr<const am::UnitPool> pool;
};

struct am_run {
  std::unique_ptr<am::ActiveRun> run;
};

struct am_server {
  std::unique_ptr<am::SessionManager> sessions;
  std::unique_ptr<am::HttpServer> http;
};

namespace {

thread_local std::string last_error;

am_status status_for(am::ErrorCode code) {
  using am::ErrorCode;
  switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::Duplicate:
    case ErrorCode::Mode: return AM_ERR_PARSE;
    case ErrorCode::Config: return AM_ERR_CONFIG;
    case ErrorCode::Io: return AM_ERR_IO;
    case ErrorCode::Validation:
    case ErrorCode::Label:
    case ErrorCode::Shape: return AM_ERR_VALIDATION;
    case ErrorCode::Conflict: return AM_ERR_CONFLICT;
    case ErrorCode::NotFound: return AM_ERR_NOT_FOUND;
    case ErrorCode::Exhaustion: return AM_ERR_EXHAUSTED;
    case ErrorCode::Coverage: return AM_ERR_COVERAGE;
    case ErrorCode::Domain:
    case ErrorCode::Singularity:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::Normalization:
    case ErrorCode::Precondition: return AM_ERR_DOMAIN;
    case ErrorCode::State:
    case ErrorCode::Sequencing:
    case ErrorCode::NoEstimate:
    case ErrorCode::Unavailable: return AM_ERR_STATE;
  }
  return AM_ERR_INTERNAL;
}

template <class F>
am_status guard(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const am::Error& e) {
    last_error = e.what();
    return status_for(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return AM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return AM_ERR_INTERNAL;
  }
}

am_status invalid(const char* what) {
  last_error = what;
  return AM_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void fill(const am::EstimateReport& r, am_report* out) {
  if (!out) return;
  out->t = r.t;
  out->estimate = r.estimate;
  out->var_cond = r.var_cond;
  out->var_simp = r.var_simp;
  out->ci_lo = r.ci_lo;
  out->ci_hi = r.ci_hi;
  out->level = r.level;
  out->caveat = r.caveat ? 1 : 0;
}

am::ExperimentConfig build_config(const char* path, const char* const* overrides, std::size_t n) {
  am::ExperimentConfig cfg = path ? am::load_config(path) : am::ExperimentConfig{};
  for (std::size_t i = 0; i < n; ++i) {
    if (!overrides || !overrides[i]) am::fail(am::ErrorCode::Config, "null override");
    const std::string kv = overrides[i];
    const auto eq = kv.find('=');
    if (eq == std::string::npos) am::fail(am::ErrorCode::Config, "override must be key=value: " + kv);
    std::string key = kv.substr(0, eq);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    am::apply_override(cfg, key, kv.substr(eq + 1));
  }
  return cfg;
}

am::PredictionTable table_from(const double* values, std::size_t n, std::size_t pool_size) {
  if (n != pool_size)
    am::fail(am::ErrorCode::Shape, "expected " + std::to_string(pool_size) + " predictions, got " + std::to_string(n));
  return am::PredictionTable(std::vector<double>(values, values + n));
}

}  // namespace

extern "C" {

const char* am_version(void) { return "1.0.0"; }

const char* am_status_name(am_status status) {
  switch (status) {
    case AM_OK: return "ok";
    case AM_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case AM_ERR_PARSE: return "parse_error";
    case AM_ERR_CONFIG: return "config_error";
    case AM_ERR_IO: return "io_error";
    case AM_ERR_VALIDATION: return "validation_error";
    case AM_ERR_CONFLICT: return "conflict";
    case AM_ERR_NOT_FOUND: return "not_found";
    case AM_ERR_EXHAUSTED: return "exhausted";
    case AM_ERR_COVERAGE: return "coverage_error";
    case AM_ERR_DOMAIN: return "domain_error";
    case AM_ERR_STATE: return "state_error";
    case AM_ERR_CHECK_FAILED: return "check_failed";
    case AM_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* am_last_error_message(void) { return last_error.c_str(); }

void am_string_free(char* s) { std::free(s); }

am_status am_pool_load(const char* path, am_pool** out) {
  if (!path || !out) return invalid("path and out are required");
  return guard([&] {
    *out = new am_pool{std::make_shared<const am::UnitPool>(am::load_pool(path))};
    return AM_OK;
  });
}

void am_pool_free(am_pool* pool) { delete pool; }

size_t am_pool_size(const am_pool* pool) { return pool ? pool->pool->size() : 0; }

const char* am_pool_unit_id(const am_pool* pool, size_t index) {
  if (!pool || index >= pool->pool->size()) return nullptr;
  return pool->pool->unit(index).id.c_str();
}

am_status am_pool_total(const am_pool* pool, double* out) {
  if (!pool || !out) return invalid("pool and out are required");
  return guard([&] {
    *out = am::total_true(*pool->pool);
    return AM_OK;
  });
}

void am_run_options_default(am_run_options* options) {
  if (!options) return;
  options->scheme = "comb";
  options->gamma = 0.5;
  options->clamp = "floor";
  options->clamp_value = 1.0;
  options->level = 0.95;
  options->seed = 1;
}

am_status am_run_create(const char* config_path, const char* const* overrides, size_t n_overrides, am_run** out) {
  if (!out) return invalid("out is required");
  return guard([&] {
    const am::ExperimentConfig cfg = build_config(config_path, overrides, n_overrides);
    if (cfg.method != am::Method::Active)
      am::fail(am::ErrorCode::Config, "interactive runs support method=active only");
    auto pool = am::make_pool(cfg.pool);
    am::RunConfig rc;
    rc.scheme = cfg.scheme;
    rc.clamp = cfg.clamp;
    rc.level = cfg.level;
    rc.retrain_every = cfg.retrain_every;
    auto predictor = am::make_predictor(cfg.predictor, *pool);
    *out = new am_run{std::make_unique<am::ActiveRun>(pool, predictor, rc, cfg.seed)};
    return AM_OK;
  });
}

am_status am_run_create_live(const am_pool* pool, const double* predictions, size_t n_predictions,
                             const am_run_options* options, am_run** out) {
  if (!pool || !out) return invalid("pool and out are required");
  return guard([&] {
    am_run_options o;
    am_run_options_default(&o);
    if (options) o = *options;
    am::RunConfig rc;
    rc.scheme = am::WeightScheme::parse(o.scheme ? o.scheme : "comb", o.gamma);
    rc.clamp = am::ClampPolicy::parse(o.clamp ? o.clamp : "floor", o.clamp_value);
    rc.level = o.level;
    const std::size_t n = pool->pool->size();
    am::PredictionTable table = predictions ? table_from(predictions, n_predictions, n)
                                            : am::PredictionTable(std::vector<double>(n, 1.0));
    *out = new am_run{std::make_unique<am::ActiveRun>(pool->pool, std::move(table), rc, o.seed)};
    return AM_OK;
  });
}

void am_run_free(am_run* run) { delete run; }

am_status am_run_next_sample(am_run* run, size_t* unit, double* q) {
  if (!run) return invalid("run is required");
  return guard([&] {
    const auto& d = run->run->draw();
    if (unit) *unit = d.unit;
    if (q) *q = d.q;
    return AM_OK;
  });
}

am_status am_run_submit_label(am_run* run, size_t unit, double value, am_report* out) {
  if (!run) return invalid("run is required");
  return guard([&] {
    fill(run->run->observe(unit, value), out);
    return AM_OK;
  });
}

am_status am_run_step(am_run* run, am_report* out) {
  if (!run) return invalid("run is required");
  return guard([&] {
    fill(run->run->step(), out);
    return AM_OK;
  });
}

am_status am_run_push_predictions(am_run* run, const double* predictions, size_t n) {
  if (!run || !predictions) return invalid("run and predictions are required");
  return guard([&] {
    run->run->push_predictions(table_from(predictions, n, run->run->pool().size()));
    return AM_OK;
  });
}

am_status am_run_report(const am_run* run, am_report* out) {
  if (!run || !out) return invalid("run and out are required");
  return guard([&] {
    fill(run->run->report(), out);
    return AM_OK;
  });
}

size_t am_run_t(const am_run* run) { return run ? run->run->t() : 0; }

int am_run_exhausted(const am_run* run) { return run && run->run->exhausted() ? 1 : 0; }

size_t am_run_pool_size(const am_run* run) { return run ? run->run->pool().size() : 0; }

am_status am_run_export(const am_run* run, const char* path, const char* format) {
  if (!run || !path) return invalid("run and path are required");
  return guard([&] {
    const std::string fmt = format ? format : "csv";
    if (fmt != "csv" && fmt != "jsonl") am::fail(am::ErrorCode::Config, "format must be csv or jsonl");
    std::ofstream file(path, std::ios::binary);
    if (!file) am::fail(am::ErrorCode::Io, std::string("cannot write ") + path);
    if (fmt == "csv") am::write_trajectory_csv(file, *run->run);
    else am::write_trajectory_jsonl(file, *run->run);
    file.flush();
    if (!file) am::fail(am::ErrorCode::Io, std::string("failed writing ") + path);
    return AM_OK;
  });
}

am_status am_simulate(const char* config_path, const char* const* overrides, size_t n_overrides,
                      const char* out_path, char** text_out) {
  return guard([&] {
    am::ExperimentConfig cfg = build_config(config_path, overrides, n_overrides);
    if (out_path) cfg.out = out_path;
    if (cfg.out.empty() && !text_out) am::fail(am::ErrorCode::Config, "no output path given");
    if (text_out) *text_out = nullptr;
    const auto rows = am::run_trials(cfg);
    const std::string header = am::config_to_text(cfg);
    if (!cfg.out.empty()) {
      am::export_results(rows, std::filesystem::path(cfg.out), cfg.format, header);
    } else {
      std::ostringstream o;
      am::export_results(rows, o, cfg.format, header);
      *text_out = dup_string(o.str());
    }
    return AM_OK;
  });
}

am_status am_config_effective(const char* config_path, const char* const* overrides, size_t n_overrides,
                              char** text_out) {
  if (!text_out) return invalid("text_out is required");
  return guard([&] {
    *text_out = dup_string(am::config_to_text(build_config(config_path, overrides, n_overrides)));
    return AM_OK;
  });
}

am_status am_verify(const char* suite, size_t trials, uint64_t seed, char** report_out) {
  return guard([&] {
    am::CheckOptions opt;
    opt.trials = trials;
    if (seed != 0) opt.seed = seed;
    const auto results = am::run_suite(suite ? suite : "all", opt);
    if (report_out) *report_out = dup_string(am::format_results(results));
    for (const auto& r : results)
      if (!r.passed) {
        last_error = "check failed: " + r.name;
        return AM_ERR_CHECK_FAILED;
      }
    return AM_OK;
  });
}

am_status am_replay(const char* log_path, char** json_out) {
  if (!log_path || !json_out) return invalid("log_path and json_out are required");
  return guard([&] {
    std::ifstream in(log_path);
    if (!in) am::fail(am::ErrorCode::Io, std::string("cannot open ") + log_path);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : am::replay_log(in)) out.push_back(am::report_to_json(r));
    *json_out = dup_string(out.dump());
    return AM_OK;
  });
}

am_status am_server_create(const char* store_dir, const char* pool_dir, const char* ui_dir, am_server** out) {
  if (!out) return invalid("out is required");
  return guard([&] {
    auto server = std::make_unique<am_server>();
    server->sessions = std::make_unique<am::SessionManager>(store_dir ? store_dir : "", pool_dir ? pool_dir : "");
    server->http = std::make_unique<am::HttpServer>(*server->sessions, ui_dir ? ui_dir : "");
    *out = server.release();
    return AM_OK;
  });
}

am_status am_server_bind(am_server* server, const char* address, int* port_out) {
  if (!server || !address) return invalid("server and address are required");
  return guard([&] {
    auto [host, port] = am::parse_bind_address(address);
    const int bound = server->http->bind(host, port);
    if (port_out) *port_out = bound;
    return AM_OK;
  });
}

am_status am_server_run(am_server* server) {
  if (!server) return invalid("server is required");
  return guard([&] {
    server->http->run();
    return AM_OK;
  });
}

void am_server_stop(am_server* server) {
  if (server) server->http->stop();
}

void am_server_free(am_server* server) {
  if (!server) return;
  server->http.reset();
  delete server;
}

}  // extern "C"
