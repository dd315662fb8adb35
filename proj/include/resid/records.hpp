#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "resid/chunker.hpp"
#include "resid/model.hpp"

namespace resid {

struct BugReport {
  std::set<std::string> chunks;  // non-empty; every chunk appears in visits
  bool removed = true;
};

// One debugging run: the logged chunk visits in execution order (with
// multiplicity) and the outcome reported by the programmer.
struct RunRecord {
  std::string run_id;
  std::vector<std::string> visits;
  std::optional<BugReport> bug;  // nullopt means the run succeeded
  std::optional<std::uint64_t> seq;

  bool success() const { return !bug.has_value(); }
};

// Evolving per-chunk debug counts and accumulated statistics for a session.
struct SessionState {
  std::map<std::string, std::uint32_t> debug_counts;
  SufficientStats stats;
  PerLineStats per_line;    // filled only under the per_line variant
  PerClassStats per_class;  // filled only under the per_class variant
  std::uint64_t processed_runs = 0;
  std::uint64_t bug_events_removed = 0;
  std::uint64_t bug_events_unremoved = 0;
};

// Visits up to and including the first occurrence of any reported buggy
// chunk; everything after a bug is unreliable and discarded. Success runs
// pass through unchanged. Throws MalformedRecordError when the record is
// internally inconsistent.
std::vector<std::string> truncate_visits(const RunRecord& record);

// Folds one run into the session. Per deduplicated surviving visit: a
// non-buggy chunk books a perfect traversal at its current debug count; a
// buggy chunk books a bug observation (m). Removed bugs advance the debug
// count of every reported chunk. The input state is not modified.
// chunk_db may be null for the homogeneous variant; the per_line and
// per_class variants need it for line counts and class labels.
SessionState process_run(const SessionState& state, const RunRecord& record,
                         const ModelParams& params, const ChunkDb* chunk_db = nullptr);

// The accumulated sufficient statistics (m, k, n_i).
SufficientStats extract_statistics(const SessionState& state);

// Line-delimited record format used by the session log and the CLI:
//   {"seq":1,"run_id":"r1","visits":["f:1","f:2"],"outcome":"ok"}
//   {"seq":2,"run_id":"r2","visits":["f:1"],"outcome":{"bugs":["f:1"],"removed":true}}
RunRecord parse_run_record(const std::string& json_line);
std::string run_record_to_json(const RunRecord& record);

}  // namespace resid
