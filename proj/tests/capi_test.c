#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "activemeasure/activemeasure.h"

static int failures = 0;

#define EXPECT(cond)                                                \
  do {                                                              \
    if (!(cond)) {                                                  \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                   \
    }                                                               \
  } while (0)

static const char* scratch_file(const char* name, const char* content) {
  static char path[512];
  const char* dir = getenv("TMPDIR");
  snprintf(path, sizeof path, "%s/%s", dir ? dir : "/tmp", name);
  FILE* f = fopen(path, "w");
  if (!f) return NULL;
  fputs(content, f);
  fclose(f);
  return path;
}

static void test_pool(void) {
  am_pool* pool = NULL;
  const char* path = scratch_file("am_capi_pool.tsv", "a\timg/a\t1\nb\timg/b\t2\nc\timg/c\t3\n");
  EXPECT(am_pool_load(path, &pool) == AM_OK);
  EXPECT(am_pool_size(pool) == 3);
  EXPECT(strcmp(am_pool_unit_id(pool, 1), "b") == 0);
  EXPECT(am_pool_unit_id(pool, 9) == NULL);
  double total = 0.0;
  EXPECT(am_pool_total(pool, &total) == AM_OK);
  EXPECT(total == 6.0);
  am_pool_free(pool);

  EXPECT(am_pool_load("/nonexistent/pool.tsv", &pool) == AM_ERR_IO);
  EXPECT(strlen(am_last_error_message()) > 0);
  path = scratch_file("am_capi_dup.tsv", "a\tx\t1\na\ty\t2\n");
  EXPECT(am_pool_load(path, &pool) == AM_ERR_PARSE || am_pool_load(path, &pool) == AM_ERR_VALIDATION);
  EXPECT(strstr(am_last_error_message(), "a") != NULL);
  EXPECT(am_pool_load(NULL, &pool) == AM_ERR_INVALID_ARGUMENT);
}

static void test_live_run(void) {
  am_pool* pool = NULL;
  const char* path = scratch_file("am_capi_live.tsv", "a\timg/a\nb\timg/b\n");
  EXPECT(am_pool_load(path, &pool) == AM_OK);
  double total;
  EXPECT(am_pool_total(pool, &total) == AM_ERR_STATE);

  am_run_options opt;
  am_run_options_default(&opt);
  EXPECT(strcmp(opt.scheme, "comb") == 0);
  EXPECT(opt.level == 0.95);
  am_run* run = NULL;
  EXPECT(am_run_create_live(pool, NULL, 0, &opt, &run) == AM_OK);
  am_pool_free(pool);

  am_report rep;
  EXPECT(am_run_report(run, &rep) != AM_OK);
  size_t unit = 99, again = 98;
  double q = 0.0, q2 = 0.0;
  EXPECT(am_run_next_sample(run, &unit, &q) == AM_OK);
  EXPECT(am_run_next_sample(run, &again, &q2) == AM_OK);
  EXPECT(unit == again && q == 0.5 && q2 == 0.5);
  EXPECT(am_run_submit_label(run, 1 - unit, 3.0, &rep) == AM_ERR_CONFLICT);
  EXPECT(am_run_submit_label(run, unit, -3.0, &rep) == AM_ERR_VALIDATION);
  EXPECT(am_run_submit_label(run, unit, 3.0, &rep) == AM_OK);
  EXPECT(rep.t == 1 && rep.estimate == 6.0);
  EXPECT(am_run_t(run) == 1);
  EXPECT(!am_run_exhausted(run));

  const double preds[] = {2.0, 2.0};
  EXPECT(am_run_push_predictions(run, preds, 1) != AM_OK);
  EXPECT(am_run_push_predictions(run, preds, 2) == AM_OK);
  EXPECT(am_run_step(run, &rep) == AM_ERR_STATE);
  am_run_free(run);
}

static void test_config_run(void) {
  const char* overrides[] = {"pool_n=12", "predictor=oracle", "seed=3"};
  am_run* run = NULL;
  EXPECT(am_run_create(NULL, overrides, 3, &run) == AM_OK);
  EXPECT(am_run_pool_size(run) == 12);
  am_report rep;
  size_t steps = 0;
  while (!am_run_exhausted(run)) {
    EXPECT(am_run_step(run, &rep) == AM_OK);
    ++steps;
  }
  EXPECT(steps == 12);
  EXPECT(rep.ci_lo == rep.ci_hi);
  size_t unit;
  double q;
  EXPECT(am_run_next_sample(run, &unit, &q) == AM_ERR_EXHAUSTED);

  const char* dir = getenv("TMPDIR");
  char out[512];
  snprintf(out, sizeof out, "%s/am_capi_traj.csv", dir ? dir : "/tmp");
  EXPECT(am_run_export(run, out, "csv") == AM_OK);
  EXPECT(am_run_export(run, out, "xml") != AM_OK);
  am_run_free(run);

  const char* bad[] = {"colour=red"};
  EXPECT(am_run_create(NULL, bad, 1, &run) == AM_ERR_CONFIG);
  const char* wor[] = {"method=mc"};
  EXPECT(am_run_create(NULL, wor, 1, &run) == AM_ERR_CONFIG);
  EXPECT(am_run_create("/nonexistent.cfg", NULL, 0, &run) == AM_ERR_CONFIG);
}

static void test_simulate(void) {
  const char* overrides[] = {"pool_n=20", "t=5,10", "trials=30", "predictor=oracle"};
  char* text = NULL;
  EXPECT(am_simulate(NULL, overrides, 4, NULL, &text) == AM_OK);
  EXPECT(text != NULL && strstr(text, "method,scheme,t,") != NULL);
  am_string_free(text);

  char* cfg = NULL;
  EXPECT(am_config_effective(NULL, overrides, 4, &cfg) == AM_OK);
  EXPECT(strstr(cfg, "trials = 30") != NULL);
  am_string_free(cfg);
}

static void test_verify_and_replay(void) {
  char* report = NULL;
  EXPECT(am_verify("bound", 0, 0, &report) == AM_OK);
  EXPECT(report && strstr(report, "PASS") != NULL);
  am_string_free(report);
  report = NULL;
  EXPECT(am_verify("nonsense", 0, 0, &report) != AM_OK);
  am_string_free(report);

  char* json = NULL;
  EXPECT(am_replay("/nonexistent.jsonl", &json) == AM_ERR_IO);
  const char* empty = scratch_file("am_capi_empty.jsonl", "");
  EXPECT(am_replay(empty, &json) == AM_OK);
  EXPECT(strcmp(json, "[]") == 0);
  am_string_free(json);
  const char* broken = scratch_file("am_capi_broken.jsonl", "{nope\n");
  EXPECT(am_replay(broken, &json) == AM_ERR_PARSE);
  EXPECT(strstr(am_last_error_message(), "line 1") != NULL);
}

static void test_server(void) {
  am_server* s = NULL;
  EXPECT(am_server_create(NULL, NULL, NULL, &s) == AM_OK);
  int port = 0;
  EXPECT(am_server_bind(s, "127.0.0.1:0", &port) == AM_OK);
  EXPECT(port > 0);
  am_server* dup = NULL;
  EXPECT(am_server_create(NULL, NULL, NULL, &dup) == AM_OK);
  char addr[64];
  snprintf(addr, sizeof addr, "127.0.0.1:%d", port);
  EXPECT(am_server_bind(dup, addr, &port) == AM_ERR_IO);
  am_server_free(dup);
  am_server_stop(s);
  am_server_free(s);
}

int main(void) {
  EXPECT(am_version() != NULL);
  EXPECT(strcmp(am_status_name(AM_ERR_CONFLICT), "") != 0);
  test_pool();
  test_live_run();
  test_config_run();
  test_simulate();
  test_verify_and_replay();
  test_server();
  if (failures) {
    fprintf(stderr, "%d C API expectation(s) failed\n", failures);
    return 1;
  }
  printf("C API: all expectations passed\n");
  return 0;
}
