#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace resid {

struct SourceFile {
  std::string path;  // as given; the file stem seeds chunk ids
  std::string text;
};

// A maximal straight-line run of statements. first_line/last_line are
// 1-based and bound the statement lines; line_count is the number of
// non-blank source lines in that range (the K of the per-line variant).
struct Chunk {
  std::string id;  // "<file-stem>:<ordinal>", ordinal 1-based in source order
  std::string file;
  int first_line = 0;
  int last_line = 0;
  int line_count = 0;
  std::string class_label = "default";
  std::string text;  // source text of the range; kept in memory, not serialized
};

struct ChunkDb {
  std::vector<Chunk> chunks;
  std::string source_digest;

  const Chunk* find(const std::string& id) const;
};

// Splits sources into chunks. The supported grammar is a C-like subset:
// one statement per line, if/else, while, for, function definitions, line
// and block comments, string and character literals. Braces are required
// around every body. A chunk ends at (and includes) the line holding a
// branch or loop condition; each branch arm, loop body, function body and
// post-join statement run starts a new chunk.
// Throws ParseError with file, line and column on malformed input.
ChunkDb identify_chunks(const std::vector<SourceFile>& sources);

// Emits a copy of each source with `RESID_LOG("<chunk-id>");` inserted on
// its own line before each chunk's first statement. The db must have been
// produced from exactly these sources; throws StaleDatabaseError otherwise.
std::vector<SourceFile> instrument(const std::vector<SourceFile>& sources,
                                   const ChunkDb& db);

struct ClassRule {
  std::string label;
  std::string pattern;  // ECMAScript regex, matched against chunk text
};

// Annotates every chunk with the label of the first matching rule, or
// "default" when none matches. Throws ConfigError on an invalid pattern.
ChunkDb classify_chunks(ChunkDb db, const std::vector<ClassRule>& rules);

// FNV-1a over path and content of every file, in sorted path order.
std::string compute_digest(const std::vector<SourceFile>& sources);

// Chunk db file: a version header, the source digest, then one chunk per
// line (tab-separated id, file, first_line, last_line, line_count, label).
void save_chunk_db(const ChunkDb& db, std::ostream& out);
void save_chunk_db(const ChunkDb& db, const std::filesystem::path& path);
ChunkDb load_chunk_db(std::istream& in, const std::string& name = "<stream>");
ChunkDb load_chunk_db(const std::filesystem::path& path);

// Classification rules file: optional comment lines, then one rule per
// line: a label, whitespace, a regex covering the rest of the line.
std::vector<ClassRule> load_class_rules(const std::filesystem::path& path);

}  // namespace resid
