#include "resid/session_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <json.hpp>

#include "resid/errors.hpp"

namespace resid {

namespace {

constexpr const char* kSessionFile = "session.json";
constexpr const char* kRecordsFile = "records.log";
constexpr const char* kChunkDbFile = "chunks.db";
constexpr const char* kLockFile = ".lock";
constexpr const char* kRecordsHeader = R"({"format":"resid-records","version":1})";

}  // namespace

void SessionStore::acquire_lock() {
  const std::filesystem::path lock = dir_ / kLockFile;
  const int fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw StoreError("session '" + dir_.string() +
                     "' is locked by another process (remove " + lock.string() +
                     " if that process is gone)");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] ssize_t n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
  locked_ = true;
}

void SessionStore::release_lock() {
  if (locked_) {
    std::error_code ec;
    std::filesystem::remove(dir_ / kLockFile, ec);
    locked_ = false;
  }
}

SessionStore::SessionStore(SessionStore&& other) noexcept { *this = std::move(other); }

SessionStore& SessionStore::operator=(SessionStore&& other) noexcept {
  if (this != &other) {
    release_lock();
    dir_ = std::move(other.dir_);
    params_ = std::move(other.params_);
    solver_ = other.solver_;
    chunk_db_ = std::move(other.chunk_db_);
    state_ = std::move(other.state_);
    locked_ = other.locked_;
    other.locked_ = false;
  }
  return *this;
}

SessionStore::~SessionStore() { release_lock(); }

SessionStore SessionStore::create(const std::filesystem::path& dir, ModelParams params,
                                  SolverConfig solver,
                                  const std::optional<ChunkDb>& chunk_db) {
  params.validate();
  solver.validate();
  if (params.variant != Variant::homogeneous && !chunk_db) {
    throw StoreError(std::string("the ") + to_string(params.variant) +
                     " variant needs a chunk database");
  }
  std::filesystem::create_directories(dir);
  if (std::filesystem::exists(dir / kSessionFile)) {
    throw StoreError("a session already exists in '" + dir.string() + "'");
  }

  SessionStore store;
  store.dir_ = dir;
  store.params_ = std::move(params);
  store.solver_ = solver;
  store.chunk_db_ = chunk_db;
  store.acquire_lock();

  nlohmann::json j;
  j["format"] = "resid-session";
  j["version"] = 1;
  j["alpha"] = store.params_.alpha;
  j["variant"] = to_string(store.params_.variant);
  j["class_alphas"] = store.params_.class_alphas;
  j["epsilon"] = solver.epsilon;
  j["tolerance"] = solver.tolerance;
  j["max_iterations"] = solver.max_iterations;
  j["chunk_db"] = chunk_db.has_value();
  std::ofstream meta(dir / kSessionFile);
  meta << j.dump(2) << "\n";
  if (!meta) throw StoreError("cannot write " + (dir / kSessionFile).string());

  std::ofstream log(dir / kRecordsFile);
  log << kRecordsHeader << "\n";
  if (!log) throw StoreError("cannot write " + (dir / kRecordsFile).string());

  if (chunk_db) save_chunk_db(*chunk_db, dir / kChunkDbFile);
  return store;
}

SessionStore SessionStore::open(const std::filesystem::path& dir) {
  const std::filesystem::path meta_path = dir / kSessionFile;
  std::ifstream meta(meta_path);
  if (!meta) {
    throw StoreError("no session found in '" + dir.string() + "' (missing " +
                     std::string(kSessionFile) + ")");
  }
  nlohmann::json j;
  try {
    meta >> j;
  } catch (const nlohmann::json::exception& e) {
    throw StoreError(meta_path.string() + " is corrupt: " + e.what());
  }
  if (j.value("format", "") != "resid-session" || j.value("version", 0) != 1) {
    throw StoreError(meta_path.string() + ": unsupported session format");
  }

  SessionStore store;
  store.dir_ = dir;
  store.params_.alpha = j.at("alpha").get<double>();
  store.params_.variant = variant_from_string(j.at("variant").get<std::string>());
  store.params_.class_alphas =
      j.value("class_alphas", std::map<std::string, double>{});
  store.solver_.epsilon = j.at("epsilon").get<double>();
  store.solver_.tolerance = j.at("tolerance").get<double>();
  store.solver_.max_iterations = j.at("max_iterations").get<int>();
  store.params_.validate();
  store.solver_.validate();
  if (j.value("chunk_db", false)) {
    store.chunk_db_ = load_chunk_db(dir / kChunkDbFile);
  }
  store.acquire_lock();

  // replay the log; the state is a pure fold over the records
  try {
    std::ifstream log(dir / kRecordsFile);
    if (!log) throw StoreError("missing " + (dir / kRecordsFile).string());
    std::string line;
    if (!std::getline(log, line) || line != kRecordsHeader) {
      throw StoreError((dir / kRecordsFile).string() + ": bad or missing header");
    }
    std::uint64_t expected = 1;
    while (std::getline(log, line)) {
      if (line.empty()) continue;
      RunRecord rec = parse_run_record(line);
      if (rec.seq && *rec.seq != expected) {
        throw StoreError((dir / kRecordsFile).string() + ": record out of order (got " +
                         std::to_string(*rec.seq) + ", expected " +
                         std::to_string(expected) + ")");
      }
      store.state_ = process_run(store.state_, rec, store.params_,
                                 store.chunk_db_ ? &*store.chunk_db_ : nullptr);
      ++expected;
    }
  } catch (...) {
    store.release_lock();
    throw;
  }
  return store;
}

void SessionStore::ingest(RunRecord record) {
  if (record.seq && *record.seq != next_sequence()) {
    throw StoreError("record sequence " + std::to_string(*record.seq) +
                     " is out of order; expected " + std::to_string(next_sequence()));
  }
  record.seq = next_sequence();
  // may throw MalformedRecordError; nothing is persisted in that case
  SessionState next = process_run(state_, record, params_,
                                  chunk_db_ ? &*chunk_db_ : nullptr);

  std::ofstream log(records_path(), std::ios::app);
  log << run_record_to_json(record) << "\n";
  log.flush();
  if (!log) throw StoreError("cannot append to " + records_path().string());
  state_ = std::move(next);
}

}  // namespace resid
