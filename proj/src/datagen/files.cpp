// Copyright 2026 The sidrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sidrec/datagen/files.hpp"

#include <charconv>
#include <fstream>

#include "sidrec/common/binary_io.hpp"
#include "sidrec/common/error.hpp"

namespace sidrec {
namespace {

constexpr char kEmbeddingMagic[] = "PLUMEMB1";

// Shortest text that parses back to the same double.
void put_number(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

void put_number(std::string& out, std::uint64_t v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

// Splits on `sep`, keeping empty fields.
std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(sep, pos);
    out.push_back(text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) return out;
    pos = next + 1;
  }
}

class LineReader {
 public:
  LineReader(const std::string& path, const char* what) : path_(path), in_(path) {
    if (!in_) fail(ErrorKind::kIo, std::string("cannot open ") + what + " " + path);
  }
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty()) return true;
    }
    return false;
  }
  [[noreturn]] void bad(const std::string& why) const {
    fail(ErrorKind::kData, path_ + ":" + std::to_string(line_no_) + ": " + why);
  }
  template <typename T>
  T number(std::string_view field, const char* name) const {
    T v{};
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || end != field.data() + field.size()) bad(std::string("malformed ") + name);
    return v;
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

std::ofstream open_out(const std::string& path, const char* what, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) fail(ErrorKind::kIo, std::string("cannot write ") + what + " " + path);
  return out;
}

}  // namespace

void write_embeddings(const std::string& path, const EmbeddingCorpus& corpus) {
  auto out = open_out(path, "embeddings", true);
  binio::write_magic(out, kEmbeddingMagic);
  binio::write_u32(out, static_cast<std::uint32_t>(corpus.size()));
  binio::write_u32(out, static_cast<std::uint32_t>(corpus.modality_count()));
  for (auto d : corpus.dims) binio::write_u32(out, static_cast<std::uint32_t>(d));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    binio::write_u64(out, corpus.item_ids[i]);
    for (const auto& m : corpus.modalities) {
      for (float v : m.row(i)) binio::write_f32(out, v);
    }
  }
  if (!out) fail(ErrorKind::kIo, "failed writing embeddings " + path);
}

EmbeddingCorpus read_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open embeddings " + path);
  binio::expect_magic(in, kEmbeddingMagic, "embeddings file " + path);
  const std::uint32_t n = binio::read_u32(in);
  const std::uint32_t m = binio::read_u32(in);
  if (m == 0) fail(ErrorKind::kData, "embeddings file " + path + " declares no modalities");
  EmbeddingCorpus corpus;
  for (std::uint32_t k = 0; k < m; ++k) {
    const std::uint32_t d = binio::read_u32(in);
    if (d == 0) fail(ErrorKind::kData, "embeddings file " + path + " declares an empty modality");
    corpus.dims.push_back(d);
  }
  if (n == 0) return corpus;
  for (auto d : corpus.dims) corpus.modalities.emplace_back(Shape{n, d});
  for (std::uint32_t i = 0; i < n; ++i) {
    corpus.item_ids.push_back(binio::read_u64(in));
    for (auto& t : corpus.modalities) {
      for (float& v : t.row(i)) v = binio::read_f32(in);
    }
  }
  return corpus;
}

void write_sessions(const std::string& path, const std::vector<Session>& sessions) {
  auto out = open_out(path, "sessions");
  std::string line;
  for (const auto& s : sessions) {
    line.clear();
    put_number(line, s.user_id);
    line += '\t';
    for (std::size_t k = 0; k < s.events.size(); ++k) {
      const auto& e = s.events[k];
      if (k) line += ';';
      put_number(line, e.item_id);
      for (double v : {e.watch_ratio, e.watch_seconds, e.hours_since_final_watch, e.reward}) {
        line += ':';
        put_number(line, v);
      }
    }
    line += '\n';
    out << line;
  }
  if (!out) fail(ErrorKind::kIo, "failed writing sessions " + path);
}

std::vector<Session> read_sessions(const std::string& path) {
  LineReader reader(path, "sessions");
  std::vector<Session> sessions;
  std::string line;
  while (reader.next(line)) {
    const auto fields = split(line, '\t');
    if (fields.size() != 2) reader.bad("expected user_id<TAB>events");
    Session s;
    s.user_id = reader.number<std::uint64_t>(fields[0], "user_id");
    for (auto ev : split(fields[1], ';')) {
      const auto parts = split(ev, ':');
      if (parts.size() != 5) reader.bad("expected item:ratio:secs:hours:reward");
      WatchEvent e;
      e.item_id = reader.number<std::uint64_t>(parts[0], "item id");
      e.watch_ratio = reader.number<double>(parts[1], "watch ratio");
      e.watch_seconds = reader.number<double>(parts[2], "watch seconds");
      e.hours_since_final_watch = reader.number<double>(parts[3], "hours since final watch");
      e.reward = reader.number<double>(parts[4], "reward");
      if (!(e.watch_ratio >= 0 && e.watch_ratio <= 1) || e.watch_seconds < 0 || e.hours_since_final_watch < 0 ||
          e.reward < 0) {
        reader.bad("event value out of range");
      }
      if (!s.events.empty() && e.hours_since_final_watch > s.events.back().hours_since_final_watch) {
        reader.bad("events are not in chronological order");
      }
      s.events.push_back(e);
    }
    if (s.events.size() < 2) reader.bad("a session needs at least 2 events");
    sessions.push_back(std::move(s));
  }
  return sessions;
}

void write_item_meta(const std::string& path, const std::vector<ItemMeta>& meta) {
  auto out = open_out(path, "item metadata");
  std::string line;
  for (const auto& m : meta) {
    line.clear();
    put_number(line, m.item_id);
    line += '\t';
    put_number(line, static_cast<std::uint64_t>(m.channel));
    line += '\t';
    put_number(line, m.duration_secs);
    line += '\t';
    for (std::size_t i = 0; i < m.topics.size(); ++i) {
      if (i) line += ',';
      put_number(line, static_cast<std::uint64_t>(m.topics[i]));
    }
    line += '\t';
    for (std::size_t i = 0; i < m.title.size(); ++i) {
      if (i) line += ' ';
      put_number(line, static_cast<std::uint64_t>(m.title[i]));
    }
    line += '\n';
    out << line;
  }
  if (!out) fail(ErrorKind::kIo, "failed writing item metadata " + path);
}

std::vector<ItemMeta> read_item_meta(const std::string& path) {
  LineReader reader(path, "item metadata");
  std::vector<ItemMeta> meta;
  std::string line;
  while (reader.next(line)) {
    const auto fields = split(line, '\t');
    if (fields.size() != 5) reader.bad("expected 5 tab-separated fields");
    ItemMeta m;
    m.item_id = reader.number<std::uint64_t>(fields[0], "item id");
    m.channel = reader.number<std::uint32_t>(fields[1], "channel");
    m.duration_secs = reader.number<double>(fields[2], "duration");
    for (auto t : split(fields[3], ',')) m.topics.push_back(reader.number<std::uint32_t>(t, "topic"));
    for (auto w : split(fields[4], ' ')) m.title.push_back(reader.number<std::uint32_t>(w, "title word"));
    meta.push_back(std::move(m));
  }
  return meta;
}

}  // namespace sidrec
