#include "service.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <random>
#include <sstream>

#include "errors.hpp"

namespace am {

using nlohmann::json;

namespace {

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_report(const EstimateReport& a, const EstimateReport& b) {
  return a.t == b.t && same_bits(a.estimate, b.estimate) && same_bits(a.var_cond, b.var_cond) &&
         same_bits(a.var_simp, b.var_simp) && same_bits(a.ci_lo, b.ci_lo) && same_bits(a.ci_hi, b.ci_hi) &&
         same_bits(a.level, b.level) && a.caveat == b.caveat;
}

std::shared_ptr<const UnitPool> live_copy(const UnitPool& pool) {
  std::vector<Unit> units;
  units.reserve(pool.size());
  for (const Unit& u : pool.units()) units.push_back({u.id, u.payload_ref, std::nullopt});
  return std::make_shared<const UnitPool>(std::move(units));
}

json table_to_json(const PredictionTable& table) {
  json out = json::array();
  for (double g : table.values()) out.push_back(std::isnan(g) ? json(nullptr) : json(g));
  return out;
}

json config_to_json(const SessionOptions& o) {
  return {{"scheme", o.config.scheme.name()},
          {"gamma", o.config.scheme.gamma},
          {"clamp", o.config.clamp.mode_name()},
          {"clamp_value", o.config.clamp.value},
          {"level", o.config.level},
          {"seed", o.seed},
          {"uniform_fallback", o.uniform_fallback}};
}

SessionOptions options_from_json(const json& j) {
  SessionOptions o;
  const double gamma = j.value("gamma", 0.5);
  o.config.scheme = WeightScheme::parse(j.value("scheme", std::string("comb")), gamma);
  o.config.clamp = ClampPolicy::parse(j.value("clamp", std::string("floor")), j.value("clamp_value", 1.0));
  o.config.level = j.value("level", 0.95);
  o.seed = j.value("seed", std::uint64_t{1});
  o.uniform_fallback = j.value("uniform_fallback", true);
  return o;
}

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

json report_to_json(const EstimateReport& r) {
  return {{"t", r.t},         {"estimate", r.estimate}, {"var_cond", r.var_cond},
          {"var_simp", r.var_simp}, {"ci_lo", r.ci_lo}, {"ci_hi", r.ci_hi},
          {"level", r.level}, {"caveat", r.caveat}};
}

EstimateReport report_from_json(const json& j) {
  EstimateReport r;
  r.t = j.at("t").get<std::size_t>();
  r.estimate = j.at("estimate").get<double>();
  r.var_cond = j.at("var_cond").get<double>();
  r.var_simp = j.at("var_simp").get<double>();
  r.ci_lo = j.at("ci_lo").get<double>();
  r.ci_hi = j.at("ci_hi").get<double>();
  r.level = j.at("level").get<double>();
  r.caveat = j.at("caveat").get<bool>();
  return r;
}

PredictionTable predictions_from_json(const json& j, const UnitPool& pool) {
  PredictionTable table(pool.size());
  if (j.is_array()) {
    if (j.size() != pool.size())
      fail(ErrorCode::Validation, "prediction array has " + std::to_string(j.size()) + " entries for a pool of " +
                                      std::to_string(pool.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (j[i].is_null()) continue;
      if (!j[i].is_number()) fail(ErrorCode::Validation, "predictions must be numbers or null");
      table.set(i, j[i].get<double>());
    }
  } else if (j.is_object()) {
    for (const auto& [id, g] : j.items()) {
      auto idx = pool.index_of(id);
      if (!idx) fail(ErrorCode::Validation, "prediction for unknown unit " + id);
      if (g.is_null()) continue;
      if (!g.is_number()) fail(ErrorCode::Validation, "predictions must be numbers or null");
      table.set(*idx, g.get<double>());
    }
  } else {
    fail(ErrorCode::Validation, "predictions must be an array or an object keyed by unit id");
  }
  return table;
}

Session::Session(std::string id, std::shared_ptr<const UnitPool> pool,
                 std::optional<PredictionTable> predictions, const SessionOptions& options,
                 std::string pool_name) {
  if (!pool || pool->size() == 0) fail(ErrorCode::Validation, "a nonempty pool is required");
  PredictionTable table;
  if (predictions) {
    table = std::move(*predictions);
  } else if (options.uniform_fallback) {
    table = PredictionTable(std::vector<double>(pool->size(), 1.0));
  } else {
    fail(ErrorCode::Coverage, "no predictions given and the uniform fallback is disabled");
  }
  auto live = live_copy(*pool);
  const std::int64_t t0 = now_ms();
  init(std::move(id), live, table, options, std::move(pool_name), t0);

  json units = json::array();
  for (const Unit& u : live->units()) units.push_back({{"id", u.id}, {"payload_ref", u.payload_ref}});
  emit({{"event", "created"},
        {"session", id_},
        {"pool_name", pool_name_},
        {"config", config_to_json(options_)},
        {"units", std::move(units)},
        {"predictions", table_to_json(table)}});
}

void Session::init(std::string id, std::shared_ptr<const UnitPool> pool, PredictionTable table,
                   const SessionOptions& options, std::string pool_name, std::int64_t time_ms) {
  id_ = std::move(id);
  pool_name_ = std::move(pool_name);
  options_ = options;
  created_ms_ = updated_ms_ = time_ms;
  run_ = std::make_unique<ActiveRun>(std::move(pool), std::move(table), options.config, options.seed);
}

void Session::emit(json event) {
  updated_ms_ = now_ms();
  event["time"] = updated_ms_;
  events_.push_back(event.dump());
  if (sink_) {
    *sink_ << events_.back() << '\n';
    sink_->flush();
    if (!*sink_) fail(ErrorCode::Io, "failed to persist event for session " + id_);
  }
}

NextResult Session::next_sample() {
  NextResult out;
  if (run_->exhausted()) {
    out.exhausted = true;
    if (!run_->history().empty()) out.final_report = run_->history().back();
    return out;
  }
  const bool fresh = !run_->pending();
  const ActiveRun::Draw d = run_->draw();
  const Unit& u = run_->pool().unit(d.unit);
  out.sample = SampleView{run_->t() + 1, u.id, u.payload_ref, d.q};
  if (fresh) emit({{"event", "sampled"}, {"t", out.sample->t}, {"unit", u.id}, {"q", d.q}});
  return out;
}

EstimateReport Session::submit_label(const std::string& unit_id, double value) {
  if (!std::isfinite(value) || value < 0.0)
    fail(ErrorCode::Validation, "label must be a finite number >= 0");
  auto idx = run_->pool().index_of(unit_id);
  if (!idx) fail(ErrorCode::Validation, "unknown unit " + unit_id);
  if (!run_->pending()) fail(ErrorCode::Conflict, "no sample is pending; fetch the next sample first");
  const EstimateReport rep = run_->observe(*idx, value);
  emit({{"event", "labeled"}, {"t", rep.t}, {"unit", unit_id}, {"value", value}, {"report", report_to_json(rep)}});
  return rep;
}

void Session::push_predictions(PredictionTable table) {
  try {
    run_->push_predictions(table);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Coverage || e.code() == ErrorCode::Shape) fail(ErrorCode::Validation, e.what());
    throw;
  }
  emit({{"event", "predictions"}, {"predictions", table_to_json(table)}});
}

SessionInfo Session::info() const {
  SessionInfo i;
  i.id = id_;
  i.pool_name = pool_name_;
  i.t = run_->t();
  i.pool_size = run_->pool().size();
  i.created_ms = created_ms_;
  i.updated_ms = updated_ms_;
  if (run_->exhausted()) i.state = "exhausted";
  else if (run_->pending()) i.state = "sampled";
  else if (run_->t() > 0) i.state = "labeled";
  else i.state = "created";
  return i;
}

void Session::apply(const json& ev, std::size_t line) {
  const std::string kind = ev.at("event").get<std::string>();
  if (kind == "created") {
    if (run_) fail(ErrorCode::Parse, line_prefix(line) + "duplicate created event");
    std::vector<Unit> units;
    for (const auto& u : ev.at("units")) units.push_back({u.at("id").get<std::string>(), u.value("payload_ref", std::string()), std::nullopt});
    auto pool = std::make_shared<const UnitPool>(std::move(units));
    PredictionTable table = predictions_from_json(ev.at("predictions"), *pool);
    const std::int64_t time = ev.value("time", std::int64_t{0});
    init(ev.at("session").get<std::string>(), pool, std::move(table), options_from_json(ev.at("config")),
         ev.value("pool_name", std::string()), time);
    return;
  }
  if (!run_) fail(ErrorCode::Parse, line_prefix(line) + "log does not start with a created event");
  if (kind == "sampled") {
    const ActiveRun::Draw d = run_->draw();
    const std::string& got = run_->pool().unit(d.unit).id;
    if (got != ev.at("unit").get<std::string>() || !same_bits(d.q, ev.at("q").get<double>()) ||
        run_->t() + 1 != ev.at("t").get<std::size_t>())
      fail(ErrorCode::State, line_prefix(line) + "replayed draw (" + got + ") differs from the recorded sample");
  } else if (kind == "labeled") {
    auto idx = run_->pool().index_of(ev.at("unit").get<std::string>());
    if (!idx) fail(ErrorCode::Parse, line_prefix(line) + "unknown unit");
    const EstimateReport rep = run_->observe(*idx, ev.at("value").get<double>());
    if (ev.contains("report") && !same_report(rep, report_from_json(ev.at("report"))))
      fail(ErrorCode::State, line_prefix(line) + "replayed report differs from the recorded one");
  } else if (kind == "predictions") {
    run_->push_predictions(predictions_from_json(ev.at("predictions"), run_->pool()));
  } else {
    fail(ErrorCode::Parse, line_prefix(line) + "unknown event " + kind);
  }
  updated_ms_ = ev.value("time", updated_ms_);
}

std::unique_ptr<Session> Session::replay(std::istream& log) {
  std::unique_ptr<Session> s(new Session());
  std::string text;
  std::size_t line = 0;
  while (std::getline(log, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json ev = json::parse(text, nullptr, false);
    if (ev.is_discarded() || !ev.is_object()) fail(ErrorCode::Parse, line_prefix(line) + "invalid JSON");
    try {
      s->apply(ev, line);
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, line_prefix(line) + e.what());
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      fail(e.code(), line_prefix(line) + msg);
    }
    s->events_.push_back(ev.dump());
  }
  if (!s->run_) return nullptr;
  return s;
}

std::vector<EstimateReport> replay_log(std::istream& log) {
  auto s = Session::replay(log);
  if (!s) return {};
  return s->trajectory();
}

SessionManager::SessionManager(std::filesystem::path store_dir, std::filesystem::path pool_dir)
    : store_dir_(std::move(store_dir)), pool_dir_(std::move(pool_dir)) {
  if (store_dir_.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(store_dir_, ec);
  if (ec) fail(ErrorCode::Io, "cannot create session store " + store_dir_.string() + ": " + ec.message());
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(store_dir_))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") logs.push_back(entry.path());
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    try {
      std::ifstream in(path);
      auto session = Session::replay(in);
      if (!session) continue;
      auto entry = std::make_shared<Entry>();
      entry->sink = std::make_unique<std::ofstream>(path, std::ios::app | std::ios::binary);
      session->set_sink(entry->sink.get());
      const std::string id = session->id();
      entry->session = std::move(session);
      sessions_[id] = std::move(entry);
    } catch (const std::exception& e) {
      restore_errors_.push_back(path.filename().string() + ": " + e.what());
    }
  }
}

std::string SessionManager::new_id() {
  static thread_local std::random_device rd;
  char buf[17];
  std::string id;
  do {
    const std::uint64_t x = mix64((static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^ ++counter_);
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
    id = buf;
  } while (sessions_.count(id));
  return id;
}

std::string SessionManager::add(std::unique_ptr<Session> session) {
  auto entry = std::make_shared<Entry>();
  if (!store_dir_.empty()) {
    const auto path = store_dir_ / (session->id() + ".jsonl");
    entry->sink = std::make_unique<std::ofstream>(path, std::ios::trunc | std::ios::binary);
    if (!*entry->sink) fail(ErrorCode::Io, "cannot write " + path.string());
    for (const std::string& ev : session->events()) *entry->sink << ev << '\n';
    entry->sink->flush();
    session->set_sink(entry->sink.get());
  }
  const std::string id = session->id();
  entry->session = std::move(session);
  sessions_[id] = std::move(entry);
  return id;
}

std::string SessionManager::create(std::shared_ptr<const UnitPool> pool, std::optional<PredictionTable> predictions,
                                   const SessionOptions& options, std::string pool_name) {
  std::unique_lock lock(mutex_);
  auto session = std::make_unique<Session>(new_id(), std::move(pool), std::move(predictions), options,
                                           std::move(pool_name));
  return add(std::move(session));
}

std::shared_ptr<const UnitPool> SessionManager::load_named_pool(const std::string& name) const {
  if (pool_dir_.empty()) fail(ErrorCode::NotFound, "no pool directory is configured");
  if (name.empty() || name.find("..") != std::string::npos ||
      name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") != std::string::npos)
    fail(ErrorCode::Validation, "invalid pool name " + name);
  for (const auto& candidate : {pool_dir_ / name, pool_dir_ / (name + ".tsv")})
    if (std::filesystem::is_regular_file(candidate)) return std::make_shared<const UnitPool>(load_pool(candidate));
  fail(ErrorCode::NotFound, "no pool named " + name);
}

std::string SessionManager::create(const json& req) {
  if (!req.is_object()) fail(ErrorCode::Validation, "request body must be a JSON object");
  std::shared_ptr<const UnitPool> pool;
  std::string pool_name;
  if (req.contains("pool")) {
    pool_name = req.at("pool").get<std::string>();
    pool = load_named_pool(pool_name);
  } else if (req.contains("units")) {
    std::vector<Unit> units;
    for (const auto& u : req.at("units")) {
      Unit unit{u.at("id").get<std::string>(), u.value("payload_ref", std::string()), std::nullopt};
      if (u.contains("value") && !u.at("value").is_null()) unit.true_value = u.at("value").get<double>();
      units.push_back(std::move(unit));
    }
    if (units.empty()) fail(ErrorCode::Validation, "units must be nonempty");
    pool = std::make_shared<const UnitPool>(std::move(units));
  } else {
    fail(ErrorCode::Validation, "request needs a pool name or inline units");
  }
  std::optional<PredictionTable> table;
  if (req.contains("predictions") && !req.at("predictions").is_null()) {
    const json& p = req.at("predictions");
    if (p.is_string() && p.get<std::string>() == "oracle") {
      if (!pool->simulation_mode()) fail(ErrorCode::Validation, "oracle predictions need a pool with values");
      table = PredictionTable(std::vector<double>(pool->truths().begin(), pool->truths().end()));
    } else {
      table = predictions_from_json(p, *pool);
    }
  }
  return create(pool, std::move(table), options_from_json(req), pool_name);
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::NotFound, "no session " + id);
  return it->second;
}

NextResult SessionManager::next_sample(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->session->next_sample();
}

EstimateReport SessionManager::submit_label(const std::string& id, const std::string& unit_id, double value) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->session->submit_label(unit_id, value);
}

std::vector<EstimateReport> SessionManager::trajectory(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->session->trajectory();
}

void SessionManager::push_predictions(const std::string& id, const json& predictions) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  e->session->push_predictions(predictions_from_json(predictions, e->session->run().pool()));
}

void SessionManager::push_predictions(const std::string& id, PredictionTable table) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  e->session->push_predictions(std::move(table));
}

std::string SessionManager::export_log(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  std::string out;
  for (const std::string& ev : e->session->events()) out += ev + '\n';
  return out;
}

SessionInfo SessionManager::info(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->session->info();
}

std::vector<SessionInfo> SessionManager::list() {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  std::vector<SessionInfo> out;
  for (const auto& e : entries) {
    std::lock_guard lock(e->mutex);
    out.push_back(e->session->info());
  }
  return out;
}

std::vector<std::string> SessionManager::pools() const {
  std::vector<std::string> out;
  if (pool_dir_.empty() || !std::filesystem::is_directory(pool_dir_)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(pool_dir_))
    if (entry.is_regular_file())
      out.push_back(entry.path().extension() == ".tsv" ? entry.path().stem().string()
                                                       : entry.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace am
