#include "resid/chunker.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "resid/errors.hpp"

namespace resid {

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool line_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return is_space(c); });
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) lines.push_back(current);
  return lines;
}

bool ends_with_newline(const std::string& text) {
  return !text.empty() && text.back() == '\n';
}

struct ScannedLine {
  std::string raw;
  std::string code;  // comments and literal contents blanked, columns preserved
};

// Strips comments and the contents of string/char literals so that the
// structural pass only ever sees real braces and parentheses.
std::vector<ScannedLine> scan_lines(const SourceFile& src) {
  const std::vector<std::string> lines = split_lines(src.text);
  std::vector<ScannedLine> out;
  out.reserve(lines.size());
  bool in_block = false;
  int block_line = 0;
  int block_col = 0;
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const std::string& raw = lines[idx];
    const int ln = static_cast<int>(idx) + 1;
    std::string code;
    code.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
      const char c = raw[i];
      if (in_block) {
        if (c == '*' && i + 1 < raw.size() && raw[i + 1] == '/') {
          in_block = false;
          code += "  ";
          i += 2;
        } else {
          code += ' ';
          ++i;
        }
        continue;
      }
      if (c == '/' && i + 1 < raw.size() && raw[i + 1] == '/') {
        code.append(raw.size() - i, ' ');
        break;
      }
      if (c == '/' && i + 1 < raw.size() && raw[i + 1] == '*') {
        in_block = true;
        block_line = ln;
        block_col = static_cast<int>(i) + 1;
        code += "  ";
        i += 2;
        continue;
      }
      if (c == '"' || c == '\'') {
        const char quote = c;
        const std::size_t start = i;
        code += quote;
        ++i;
        bool closed = false;
        while (i < raw.size()) {
          const char d = raw[i];
          if (d == '\\' && i + 1 < raw.size()) {
            code += "  ";
            i += 2;
            continue;
          }
          if (d == quote) {
            code += quote;
            ++i;
            closed = true;
            break;
          }
          code += ' ';
          ++i;
        }
        if (!closed) {
          throw ParseError(src.path, ln, static_cast<int>(start) + 1,
                           quote == '"' ? "unterminated string literal"
                                        : "unterminated character literal");
        }
        continue;
      }
      code += c;
      ++i;
    }
    out.push_back({raw, std::move(code)});
  }
  if (in_block) {
    throw ParseError(src.path, block_line, block_col, "unterminated block comment");
  }
  return out;
}

enum class LineKind {
  blank,
  statement,
  if_header,
  loop_header,
  else_header,
  close_brace,
  function_header,
};

std::size_t skip_ws(const std::string& s, std::size_t i) {
  while (i < s.size() && is_space(s[i])) ++i;
  return i;
}

bool keyword_at(const std::string& s, std::size_t i, const char* kw) {
  const std::size_t n = std::strlen(kw);
  if (i + n > s.size() || s.compare(i, n, kw) != 0) return false;
  if (i + n < s.size() && ident_char(s[i + n])) return false;
  if (i > 0 && ident_char(s[i - 1])) return false;
  return true;
}

// Index just past the ')' matching the '(' at `open`.
std::size_t match_parens(const std::string& file, int ln, const std::string& code,
                         std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < code.size(); ++i) {
    if (code[i] == '(') ++depth;
    if (code[i] == ')') {
      --depth;
      if (depth == 0) return i + 1;
    }
  }
  throw ParseError(file, ln, static_cast<int>(open) + 1, "unbalanced parentheses");
}

LineKind classify_line(const std::string& file, int ln, const std::string& code) {
  const std::size_t i = skip_ws(code, 0);
  if (i == code.size()) return LineKind::blank;

  if (code[i] == '}') {
    const std::size_t j = skip_ws(code, i + 1);
    if (j == code.size()) return LineKind::close_brace;
    if (keyword_at(code, j, "else")) {
      const std::size_t k = skip_ws(code, j + 4);
      if (k < code.size() && code[k] == '{' && skip_ws(code, k + 1) == code.size()) {
        return LineKind::else_header;
      }
      if (k < code.size() && keyword_at(code, k, "if")) {
        throw ParseError(file, ln, static_cast<int>(k) + 1,
                         "'else if' on one line is not supported; nest the if inside "
                         "'else { ... }'");
      }
      throw ParseError(file, ln, static_cast<int>(k) + 1, "expected '{' after 'else'");
    }
    throw ParseError(file, ln, static_cast<int>(j) + 1, "unexpected text after '}'");
  }

  for (const char* kw : {"if", "while", "for"}) {
    if (!keyword_at(code, i, kw)) continue;
    const std::size_t after = i + std::strlen(kw);
    const std::size_t op = skip_ws(code, after);
    if (op == code.size() || code[op] != '(') {
      throw ParseError(file, ln, static_cast<int>(op) + 1,
                       std::string("expected '(' after '") + kw + "'");
    }
    const std::size_t close = match_parens(file, ln, code, op);
    const std::size_t brace = skip_ws(code, close);
    if (brace == code.size() || code[brace] != '{') {
      throw ParseError(file, ln, static_cast<int>(brace) + 1,
                       std::string("expected '{' after ") + kw +
                           " condition (braces are required)");
    }
    if (skip_ws(code, brace + 1) != code.size()) {
      throw ParseError(file, ln, static_cast<int>(brace) + 2,
                       "one statement per line: nothing may follow '{'");
    }
    return std::strcmp(kw, "if") == 0 ? LineKind::if_header : LineKind::loop_header;
  }

  if (keyword_at(code, i, "else")) {
    throw ParseError(file, ln, static_cast<int>(i) + 1,
                     "'else' must follow '}' on the same line");
  }
  for (const char* kw : {"goto", "switch", "case", "default", "do"}) {
    if (keyword_at(code, i, kw)) {
      throw ParseError(file, ln, static_cast<int>(i) + 1,
                       std::string("unsupported construct '") + kw + "'");
    }
  }

  std::size_t last = code.size();
  while (last > 0 && is_space(code[last - 1])) --last;
  if (last > 0 && code[last - 1] == '{') {
    const std::size_t op = code.find('(', i);
    if (op == std::string::npos) {
      throw ParseError(file, ln, static_cast<int>(last), "unexpected '{'");
    }
    const std::size_t close = match_parens(file, ln, code, op);
    if (skip_ws(code, close) != last - 1) {
      throw ParseError(file, ln, static_cast<int>(close) + 1,
                       "malformed function definition");
    }
    return LineKind::function_header;
  }

  const std::size_t bad = code.find_first_of("{}", i);
  if (bad != std::string::npos) {
    throw ParseError(file, ln, static_cast<int>(bad) + 1,
                     "braces may only appear on block structure lines");
  }
  return LineKind::statement;
}

struct Frame {
  enum class Kind { function, if_arm, else_arm, loop_body } kind;
  int open_line;
};

std::vector<Chunk> chunk_file(const SourceFile& src) {
  const std::vector<ScannedLine> lines = scan_lines(src);
  std::vector<Chunk> chunks;
  std::vector<Frame> stack;
  int run_first = 0;
  int run_last = 0;

  auto close_run = [&]() {
    if (run_first == 0) return;
    Chunk c;
    c.file = src.path;
    c.first_line = run_first;
    c.last_line = run_last;
    for (int ln = run_first; ln <= run_last; ++ln) {
      const std::string& raw = lines[ln - 1].raw;
      if (!line_blank(raw)) ++c.line_count;
      if (ln > run_first) c.text += '\n';
      c.text += raw;
    }
    chunks.push_back(std::move(c));
    run_first = run_last = 0;
  };
  auto extend_run = [&](int ln) {
    if (run_first == 0) run_first = ln;
    run_last = ln;
  };

  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const int ln = static_cast<int>(idx) + 1;
    switch (classify_line(src.path, ln, lines[idx].code)) {
      case LineKind::blank:
        break;
      case LineKind::statement:
        extend_run(ln);
        break;
      case LineKind::if_header:
        extend_run(ln);
        close_run();
        stack.push_back({Frame::Kind::if_arm, ln});
        break;
      case LineKind::loop_header:
        extend_run(ln);
        close_run();
        stack.push_back({Frame::Kind::loop_body, ln});
        break;
      case LineKind::else_header:
        if (stack.empty() || stack.back().kind != Frame::Kind::if_arm) {
          throw ParseError(src.path, ln, 1, "'else' without a matching 'if'");
        }
        close_run();
        stack.pop_back();
        stack.push_back({Frame::Kind::else_arm, ln});
        break;
      case LineKind::close_brace:
        close_run();
        if (stack.empty()) {
          throw ParseError(src.path, ln, 1, "unbalanced '}'");
        }
        stack.pop_back();
        break;
      case LineKind::function_header:
        if (!stack.empty()) {
          throw ParseError(src.path, ln, 1,
                           "function definitions must be at the top level");
        }
        close_run();
        stack.push_back({Frame::Kind::function, ln});
        break;
    }
  }
  close_run();
  if (!stack.empty()) {
    throw ParseError(src.path, stack.back().open_line, 1,
                     "unclosed block (missing '}')");
  }
  return chunks;
}

std::string file_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

std::vector<SourceFile> sorted_by_path(std::vector<SourceFile> sources) {
  std::sort(sources.begin(), sources.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
  return sources;
}

}  // namespace

const Chunk* ChunkDb::find(const std::string& id) const {
  for (const Chunk& c : chunks) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::string compute_digest(const std::vector<SourceFile>& sources) {
  // FNV-1a 64
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const SourceFile& f : sorted_by_path(sources)) {
    mix(f.path);
    mix(f.text);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ChunkDb identify_chunks(const std::vector<SourceFile>& sources) {
  const std::vector<SourceFile> files = sorted_by_path(sources);
  std::set<std::string> paths;
  std::set<std::string> stems;
  for (const SourceFile& f : files) {
    if (!paths.insert(f.path).second) {
      throw ConfigError("duplicate source path '" + f.path + "'");
    }
    if (!stems.insert(file_stem(f.path)).second) {
      throw ConfigError("duplicate file stem '" + file_stem(f.path) +
                        "'; chunk ids would collide");
    }
  }
  ChunkDb db;
  db.source_digest = compute_digest(files);
  for (const SourceFile& f : files) {
    std::vector<Chunk> file_chunks = chunk_file(f);
    const std::string stem = file_stem(f.path);
    int ordinal = 0;
    for (Chunk& c : file_chunks) {
      c.id = stem + ":" + std::to_string(++ordinal);
      db.chunks.push_back(std::move(c));
    }
  }
  return db;
}

std::vector<SourceFile> instrument(const std::vector<SourceFile>& sources,
                                   const ChunkDb& db) {
  if (compute_digest(sources) != db.source_digest) {
    throw StaleDatabaseError(
        "chunk database was built from different sources (digest mismatch); re-run "
        "chunk identification");
  }
  std::vector<SourceFile> out;
  out.reserve(sources.size());
  for (const SourceFile& src : sources) {
    std::map<int, std::string> log_at;  // first_line -> chunk id
    for (const Chunk& c : db.chunks) {
      if (c.file == src.path) log_at[c.first_line] = c.id;
    }
    const std::vector<std::string> lines = split_lines(src.text);
    std::string text;
    for (std::size_t idx = 0; idx < lines.size(); ++idx) {
      const int ln = static_cast<int>(idx) + 1;
      auto it = log_at.find(ln);
      if (it != log_at.end()) {
        const std::string& raw = lines[idx];
        std::size_t indent_end = 0;
        while (indent_end < raw.size() && is_space(raw[indent_end])) ++indent_end;
        text += raw.substr(0, indent_end);
        text += "RESID_LOG(\"" + it->second + "\");\n";
      }
      text += lines[idx];
      if (idx + 1 < lines.size() || ends_with_newline(src.text)) text += '\n';
    }
    out.push_back({src.path, std::move(text)});
  }
  return out;
}

ChunkDb classify_chunks(ChunkDb db, const std::vector<ClassRule>& rules) {
  std::vector<std::pair<std::regex, const ClassRule*>> compiled;
  compiled.reserve(rules.size());
  for (const ClassRule& rule : rules) {
    try {
      compiled.emplace_back(std::regex(rule.pattern), &rule);
    } catch (const std::regex_error& e) {
      throw ConfigError("invalid classification pattern '" + rule.pattern +
                        "': " + e.what());
    }
  }
  for (Chunk& c : db.chunks) {
    c.class_label = "default";
    for (const auto& [re, rule] : compiled) {
      if (std::regex_search(c.text, re)) {
        c.class_label = rule->label;
        break;
      }
    }
  }
  return db;
}

void save_chunk_db(const ChunkDb& db, std::ostream& out) {
  out << "# resid-chunkdb v1\n";
  out << "# digest " << db.source_digest << "\n";
  for (const Chunk& c : db.chunks) {
    out << c.id << '\t' << c.file << '\t' << c.first_line << '\t' << c.last_line << '\t'
        << c.line_count << '\t' << c.class_label << '\n';
  }
}

void save_chunk_db(const ChunkDb& db, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write chunk db to '" + path.string() + "'");
  save_chunk_db(db, out);
}

ChunkDb load_chunk_db(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line) || line != "# resid-chunkdb v1") {
    throw ConfigError(name + ": not a chunk db file (missing '# resid-chunkdb v1')");
  }
  if (!std::getline(in, line) || line.rfind("# digest ", 0) != 0) {
    throw ConfigError(name + ": missing digest header");
  }
  ChunkDb db;
  db.source_digest = line.substr(std::strlen("# digest "));
  int row = 2;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 6) {
      throw ConfigError(name + ": line " + std::to_string(row) +
                        ": expected 6 tab-separated fields");
    }
    Chunk c;
    c.id = fields[0];
    c.file = fields[1];
    try {
      c.first_line = std::stoi(fields[2]);
      c.last_line = std::stoi(fields[3]);
      c.line_count = std::stoi(fields[4]);
    } catch (const std::exception&) {
      throw ConfigError(name + ": line " + std::to_string(row) + ": bad line numbers");
    }
    c.class_label = fields[5];
    db.chunks.push_back(std::move(c));
  }
  return db;
}

ChunkDb load_chunk_db(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read chunk db '" + path.string() + "'");
  return load_chunk_db(in, path.string());
}

std::vector<ClassRule> load_class_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read rules file '" + path.string() + "'");
  std::vector<ClassRule> rules;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::size_t ws = line.find_first_of(" \t", first);
    if (ws == std::string::npos) {
      throw ConfigError(path.string() + ": line " + std::to_string(row) +
                        ": expected '<label> <pattern>'");
    }
    const std::size_t pat = line.find_first_not_of(" \t", ws);
    if (pat == std::string::npos) {
      throw ConfigError(path.string() + ": line " + std::to_string(row) +
                        ": empty pattern");
    }
    rules.push_back({line.substr(first, ws - first), line.substr(pat)});
  }
  return rules;
}

}  // namespace resid
