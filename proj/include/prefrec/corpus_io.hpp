#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefrec/common.hpp"
#include "prefrec/types.hpp"

namespace prefrec {

// Corpus files are JSON Lines: a header object, then one record per line.
//
//   {"format":"prefrec.corpus","version":1,"dim":64,"name":"..."}
//   {"id":0,"day":0,"clicks":123,"embedding":[...],"text":"..."}
//
// `text` is optional. Doubles survive a write/load cycle bit-exactly.

inline constexpr const char* kCorpusFormat = "prefrec.corpus";
inline constexpr int kCorpusVersion = 1;

inline void write_corpus(const Corpus& corpus, const std::string& path,
                         const std::string& name = "") {
  std::ofstream os(path, std::ios::binary);  // binary: keep '\n' endings everywhere
  if (!os) throw ParseError("corpus: cannot open for writing: " + path);

  nlohmann::json header;
  header["format"] = kCorpusFormat;
  header["version"] = kCorpusVersion;
  header["dim"] = corpus.dim();
  if (!name.empty()) header["name"] = name;
  os << header.dump() << '\n';

  for (const Headline& h : corpus) {
    nlohmann::json rec;
    rec["id"] = h.id;
    rec["day"] = h.day;
    rec["clicks"] = h.clicks;
    rec["embedding"] = h.embedding;
    if (!h.text.empty()) rec["text"] = h.text;
    os << rec.dump() << '\n';
  }
  if (!os) throw ParseError("corpus: write failed: " + path);
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("corpus: cannot open: " + path);

  auto fail = [&](std::size_t lineno, const std::string& what) -> ParseError {
    return ParseError("corpus: " + path + ":" + std::to_string(lineno) + ": " + what);
  };
  auto parse_line = [&](const std::string& line, std::size_t lineno) {
    try {
      return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(lineno, e.what());
    }
  };

  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(is, line)) throw fail(1, "missing header line");
  ++lineno;
  const nlohmann::json header = parse_line(line, lineno);
  if (!header.is_object() || header.value("format", "") != kCorpusFormat)
    throw fail(lineno, "not a corpus header (expected format \"" + std::string(kCorpusFormat) +
                           "\")");
  if (header.value("version", -1) != kCorpusVersion)
    throw fail(lineno, "unsupported corpus version");
  if (!header.contains("dim") || !header["dim"].is_number_unsigned())
    throw fail(lineno, "header missing a non-negative \"dim\"");
  const auto dim = header["dim"].get<std::size_t>();

  std::vector<Headline> items;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const nlohmann::json rec = parse_line(line, lineno);
    if (!rec.is_object()) throw fail(lineno, "record is not an object");
    for (const char* field : {"id", "day", "clicks"}) {
      if (!rec.contains(field) || !rec[field].is_number_integer())
        throw fail(lineno, std::string("record missing integer \"") + field + "\"");
    }
    if (!rec.contains("embedding") || !rec["embedding"].is_array())
      throw fail(lineno, "record missing \"embedding\" array");

    Headline h;
    h.id = rec["id"].get<std::int64_t>();
    h.day = rec["day"].get<int>();
    h.clicks = rec["clicks"].get<std::int64_t>();
    h.embedding.reserve(rec["embedding"].size());
    for (const auto& v : rec["embedding"]) {
      if (!v.is_number()) throw fail(lineno, "embedding entry is not a number");
      h.embedding.push_back(v.get<double>());
    }
    if (h.embedding.size() != dim)
      throw fail(lineno, "embedding has " + std::to_string(h.embedding.size()) +
                             " entries, header says " + std::to_string(dim));
    if (rec.contains("text")) {
      if (!rec["text"].is_string()) throw fail(lineno, "\"text\" is not a string");
      h.text = rec["text"].get<std::string>();
    }
    items.push_back(std::move(h));
  }
  return Corpus(std::move(items));  // id/value invariants checked here
}

}  // namespace prefrec
