#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "resid/chunker.hpp"
#include "resid/estimator.hpp"
#include "resid/records.hpp"

namespace resid {

// On-disk debugging session: model parameters fixed at creation, an
// append-only run-record log, and the chunk database the ids refer to.
// State is replayed from the log on open, so reopening reproduces
// debug counts and statistics exactly. A lock file serializes writers.
class SessionStore {
 public:
  static SessionStore create(const std::filesystem::path& dir, ModelParams params,
                             SolverConfig solver,
                             const std::optional<ChunkDb>& chunk_db = std::nullopt);
  static SessionStore open(const std::filesystem::path& dir);

  SessionStore(SessionStore&&) noexcept;
  SessionStore& operator=(SessionStore&&) noexcept;
  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;
  ~SessionStore();

  // Validates the sequence number (next in line; absent means "assign"),
  // folds the record into the state and appends it to the log.
  // Nothing is persisted if the record is rejected.
  void ingest(RunRecord record);

  const SessionState& state() const { return state_; }
  const ModelParams& params() const { return params_; }
  const SolverConfig& solver() const { return solver_; }
  const std::optional<ChunkDb>& chunk_db() const { return chunk_db_; }
  std::uint64_t next_sequence() const { return state_.processed_runs + 1; }
  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path records_path() const { return dir_ / "records.log"; }
  std::filesystem::path estimate_path() const { return dir_ / "estimate.json"; }

 private:
  SessionStore() = default;
  void acquire_lock();
  void release_lock();

  std::filesystem::path dir_;
  ModelParams params_;
  SolverConfig solver_;
  std::optional<ChunkDb> chunk_db_;
  SessionState state_;
  bool locked_ = false;
};

}  // namespace resid
