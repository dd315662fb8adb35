#include "resid/records.hpp"

#include <json.hpp>

#include "resid/errors.hpp"

namespace resid {

namespace {

const Chunk& require_chunk(const ChunkDb* db, const std::string& id, const char* need) {
  if (db == nullptr) {
    throw MalformedRecordError(std::string("no chunk database available but the ") +
                               need + " of chunk '" + id + "' is required");
  }
  const Chunk* c = db->find(id);
  if (c == nullptr) {
    throw MalformedRecordError("unknown chunk '" + id + "': " + need +
                               " not found in the chunk database");
  }
  return *c;
}

}  // namespace

std::vector<std::string> truncate_visits(const RunRecord& record) {
  if (record.visits.empty()) {
    throw MalformedRecordError("run '" + record.run_id + "' has an empty visit list");
  }
  if (!record.bug) return record.visits;
  if (record.bug->chunks.empty()) {
    throw MalformedRecordError("run '" + record.run_id +
                               "' reports a bug with no chunks");
  }
  for (std::size_t i = 0; i < record.visits.size(); ++i) {
    if (record.bug->chunks.count(record.visits[i]) != 0) {
      return {record.visits.begin(), record.visits.begin() + i + 1};
    }
  }
  throw MalformedRecordError("run '" + record.run_id +
                             "': no reported buggy chunk appears in the visit list");
}

SessionState process_run(const SessionState& state, const RunRecord& record,
                         const ModelParams& params, const ChunkDb* chunk_db) {
  const std::vector<std::string> surviving = truncate_visits(record);

  SessionState out = state;

  // dedup, first occurrence wins
  std::vector<std::string> unique;
  std::set<std::string> seen;
  for (const std::string& id : surviving) {
    if (seen.insert(id).second) unique.push_back(id);
  }

  static const std::set<std::string> no_bugs;
  const std::set<std::string>& buggy = record.bug ? record.bug->chunks : no_bugs;

  for (const std::string& id : unique) {
    const std::uint32_t i = out.debug_counts[id];
    if (buggy.count(id) == 0) {
      out.stats.add_success(i);
      if (params.variant == Variant::per_line) {
        const Chunk& c = require_chunk(chunk_db, id, "line count");
        out.per_line.successes.push_back(
            {i, static_cast<std::uint32_t>(c.line_count < 1 ? 1 : c.line_count)});
      } else if (params.variant == Variant::per_class) {
        const Chunk& c = require_chunk(chunk_db, id, "class label");
        out.per_class[c.class_label].add_success(i);
      }
    } else {
      // a bug observed before truncation contributes a p factor
      out.stats.m += 1;
      if (params.variant == Variant::per_line) {
        out.per_line.m += 1;
      } else if (params.variant == Variant::per_class) {
        const Chunk& c = require_chunk(chunk_db, id, "class label");
        out.per_class[c.class_label].m += 1;
      }
      if (record.bug->removed) {
        out.bug_events_removed += 1;
      } else {
        out.bug_events_unremoved += 1;
      }
    }
  }

  // Fixing a bug changes the software, so every reported chunk is scaled by
  // alpha from now on, whether or not its factor survived truncation. A bug
  // detected but not removed leaves the counts alone.
  if (record.bug && record.bug->removed) {
    for (const std::string& id : record.bug->chunks) {
      out.debug_counts[id] += 1;
    }
  }

  out.processed_runs += 1;
  return out;
}

SufficientStats extract_statistics(const SessionState& state) { return state.stats; }

RunRecord parse_run_record(const std::string& json_line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_line);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedRecordError(std::string("record is not valid JSON: ") + e.what());
  }
  try {
    RunRecord rec;
    if (j.contains("seq")) rec.seq = j.at("seq").get<std::uint64_t>();
    if (j.contains("run_id")) rec.run_id = j.at("run_id").get<std::string>();
    rec.visits = j.at("visits").get<std::vector<std::string>>();
    const auto& outcome = j.at("outcome");
    if (outcome.is_string()) {
      if (outcome.get<std::string>() != "ok") {
        throw MalformedRecordError("outcome string must be \"ok\", got \"" +
                                   outcome.get<std::string>() + "\"");
      }
    } else {
      BugReport bug;
      for (const auto& id : outcome.at("bugs")) {
        bug.chunks.insert(id.get<std::string>());
      }
      bug.removed = outcome.value("removed", true);
      rec.bug = std::move(bug);
    }
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecordError(std::string("record has a bad shape: ") + e.what());
  }
}

std::string run_record_to_json(const RunRecord& record) {
  nlohmann::json j;
  if (record.seq) j["seq"] = *record.seq;
  j["run_id"] = record.run_id;
  j["visits"] = record.visits;
  if (record.bug) {
    j["outcome"] = {{"bugs", std::vector<std::string>(record.bug->chunks.begin(),
                                                      record.bug->chunks.end())},
                    {"removed", record.bug->removed}};
  } else {
    j["outcome"] = "ok";
  }
  return j.dump();
}

}  // namespace resid
