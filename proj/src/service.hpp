#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "estimator.hpp"

namespace am {

struct SessionOptions {
  RunConfig config;
  std::uint64_t seed = 1;
  bool uniform_fallback = true;  // all-ones predictions when none are given
};

struct SampleView {
  std::size_t t = 0;  // step the sample belongs to
  std::string unit_id;
  std::string payload_ref;
  double q = 0.0;
};

struct NextResult {
  bool exhausted = false;
  std::optional<SampleView> sample;
  std::optional<EstimateReport> final_report;
};

struct SessionInfo {
  std::string id;
  std::string state;  // created | sampled | labeled | exhausted
  std::string pool_name;
  std::size_t t = 0;
  std::size_t pool_size = 0;
  std::int64_t created_ms = 0;
  std::int64_t updated_ms = 0;
};

nlohmann::json report_to_json(const EstimateReport& r);
EstimateReport report_from_json(const nlohmann::json& j);

/// One live run plus its event log. Not synchronized; SessionManager locks.
class Session {
 public:
  /// Starts a new session and emits its `created` event.
  Session(std::string id, std::shared_ptr<const UnitPool> pool, std::optional<PredictionTable> predictions,
          const SessionOptions& options, std::string pool_name = {});

  /// Rebuilds a session by folding an event log. Replayed draws and reports
  /// must match the recorded ones bit for bit.
  static std::unique_ptr<Session> replay(std::istream& log);

  NextResult next_sample();
  EstimateReport submit_label(const std::string& unit_id, double value);
  void push_predictions(PredictionTable table);

  const std::string& id() const noexcept { return id_; }
  const std::vector<EstimateReport>& trajectory() const noexcept { return run_->history(); }
  const std::vector<std::string>& events() const noexcept { return events_; }
  const ActiveRun& run() const noexcept { return *run_; }
  SessionInfo info() const;

  /// Receives each new event line; used for persistence.
  void set_sink(std::ofstream* sink) noexcept { sink_ = sink; }

 private:
  Session() = default;
  void init(std::string id, std::shared_ptr<const UnitPool> pool, PredictionTable table,
            const SessionOptions& options, std::string pool_name, std::int64_t time_ms);
  void emit(nlohmann::json event);
  void apply(const nlohmann::json& event, std::size_t line);

  std::string id_;
  std::string pool_name_;
  SessionOptions options_;
  std::unique_ptr<ActiveRun> run_;
  std::vector<std::string> events_;
  std::ofstream* sink_ = nullptr;
  std::int64_t created_ms_ = 0;
  std::int64_t updated_ms_ = 0;
};

/// Reports reproduced from an event log; an empty log gives an empty list.
std::vector<EstimateReport> replay_log(std::istream& log);

/// Session table with per-session serialization. With a store directory,
/// every event is appended to <store>/<id>.jsonl and sessions found there are
/// restored on construction.
class SessionManager {
 public:
  explicit SessionManager(std::filesystem::path store_dir = {}, std::filesystem::path pool_dir = {});

  /// Creates a session from a JSON request (pool name or inline units,
  /// optional predictions, scheme, clamp, level, seed).
  std::string create(const nlohmann::json& request);
  std::string create(std::shared_ptr<const UnitPool> pool, std::optional<PredictionTable> predictions,
                     const SessionOptions& options, std::string pool_name = {});

  NextResult next_sample(const std::string& id);
  EstimateReport submit_label(const std::string& id, const std::string& unit_id, double value);
  std::vector<EstimateReport> trajectory(const std::string& id);
  void push_predictions(const std::string& id, const nlohmann::json& predictions);
  void push_predictions(const std::string& id, PredictionTable table);
  std::string export_log(const std::string& id);
  SessionInfo info(const std::string& id);
  std::vector<SessionInfo> list();
  std::vector<std::string> pools() const;

  /// Sessions that could not be restored, with the reason.
  const std::vector<std::string>& restore_errors() const noexcept { return restore_errors_; }

 private:
  struct Entry {
    std::mutex mutex;
    std::unique_ptr<Session> session;
    std::unique_ptr<std::ofstream> sink;
  };
  std::shared_ptr<Entry> find(const std::string& id);
  std::string add(std::unique_ptr<Session> session);
  std::string new_id();
  std::shared_ptr<const UnitPool> load_named_pool(const std::string& name) const;

  std::filesystem::path store_dir_;
  std::filesystem::path pool_dir_;
  std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::vector<std::string> restore_errors_;
  std::uint64_t counter_ = 0;
};

/// Prediction table from a JSON array (pool order, null = missing) or an
/// object keyed by unit id.
PredictionTable predictions_from_json(const nlohmann::json& j, const UnitPool& pool);

}  // namespace am
