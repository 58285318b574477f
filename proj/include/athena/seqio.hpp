// Copyright 2026 The Athena Authors.
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

// Reads and read sets: FASTQ/FASTA parsing (plain or gzip), FASTQ writing,
// and uniform subsampling.

#pragma once

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <streambuf>
#include <string>
#include <string_view>
#include <vector>

#include "athena/errors.hpp"
#include "athena/rng.hpp"

namespace athena::seqio {

struct Read {
  std::string id;
  std::string sequence;
  std::optional<std::string> quality;

  friend bool operator==(const Read&, const Read&) = default;
};

/// Reads in ingest order. Immutable once built; share freely across threads.
struct ReadSet {
  std::vector<Read> reads;
  std::string source = "generated";

  std::size_t size() const { return reads.size(); }
  bool empty() const { return reads.empty(); }
  auto begin() const { return reads.begin(); }
  auto end() const { return reads.end(); }
  const Read& operator[](std::size_t i) const { return reads[i]; }

  /// Equality ignores the provenance label.
  friend bool operator==(const ReadSet& a, const ReadSet& b) { return a.reads == b.reads; }
};

inline bool is_nucleotide(char c) { return c == 'A' || c == 'C' || c == 'G' || c == 'T'; }

/// Uppercases in place; returns false if a symbol outside {A,C,G,T,N} remains.
inline bool normalize_sequence(std::string& seq) {
  for (char& c : seq) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (!is_nucleotide(c) && c != 'N') return false;
  }
  return true;
}

namespace detail {

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

class GzInputBuffer : public std::streambuf {
 public:
  explicit GzInputBuffer(const std::string& path) : file_(gzopen(path.c_str(), "rb")) {
    if (file_ == nullptr) throw InputError("input not found: " + path);
    gzbuffer(file_, 1 << 17);
  }
  ~GzInputBuffer() override {
    if (file_ != nullptr) gzclose(file_);
  }
  GzInputBuffer(const GzInputBuffer&) = delete;
  GzInputBuffer& operator=(const GzInputBuffer&) = delete;

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    const int n = gzread(file_, buffer_, sizeof(buffer_));
    if (n < 0) throw InputError("gzip read error");
    if (n == 0) return traits_type::eof();
    setg(buffer_, buffer_, buffer_ + n);
    return traits_type::to_int_type(*gptr());
  }

 private:
  gzFile file_;
  char buffer_[1 << 16];
};

class GzOutputBuffer : public std::streambuf {
 public:
  explicit GzOutputBuffer(const std::string& path) : file_(gzopen(path.c_str(), "wb")) {
    if (file_ == nullptr) throw InputError("cannot open for writing: " + path);
    setp(buffer_, buffer_ + sizeof(buffer_));
  }
  ~GzOutputBuffer() override {
    sync();
    gzclose(file_);
  }
  GzOutputBuffer(const GzOutputBuffer&) = delete;
  GzOutputBuffer& operator=(const GzOutputBuffer&) = delete;

 protected:
  int_type overflow(int_type ch) override {
    if (sync() != 0) return traits_type::eof();
    if (!traits_type::eq_int_type(ch, traits_type::eof())) {
      *pptr() = traits_type::to_char_type(ch);
      pbump(1);
    }
    return traits_type::not_eof(ch);
  }

  int sync() override {
    const auto n = static_cast<unsigned>(pptr() - pbase());
    if (n > 0 && gzwrite(file_, pbase(), n) != static_cast<int>(n)) return -1;
    setp(buffer_, buffer_ + sizeof(buffer_));
    return 0;
  }

 private:
  gzFile file_;
  char buffer_[1 << 16];
};

inline bool has_suffix(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace detail

/// Record-at-a-time FASTQ reader (4-line records, single-line sequences).
class FastqReader {
 public:
  explicit FastqReader(std::istream& in) : in_(in) {}

  std::optional<Read> next() {
    std::string header;
    if (!next_line(header)) return std::nullopt;
    // Tolerate trailing blank lines at end of file.
    while (header.empty()) {
      if (!next_line(header)) return std::nullopt;
    }
    ++record_;
    if (header.front() != '@') fail("expected '@' header");
    Read read;
    read.id = header.substr(1);
    if (!next_line(read.sequence)) fail("truncated record");
    if (read.sequence.empty()) fail("empty sequence");
    if (!normalize_sequence(read.sequence)) fail("invalid nucleotide");
    std::string plus;
    if (!next_line(plus)) fail("truncated record");
    if (plus.empty() || plus.front() != '+') fail("expected '+' separator");
    std::string quality;
    if (!next_line(quality)) fail("truncated record");
    if (quality.size() != read.sequence.size()) fail("quality length mismatch");
    read.quality = std::move(quality);
    return read;
  }

  std::size_t records() const { return record_; }

 private:
  bool next_line(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    detail::strip_cr(line);
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, record_, line_); }

  std::istream& in_;
  std::size_t record_ = 0;
  std::size_t line_ = 0;
};

/// Record-at-a-time FASTA reader; wrapped sequence lines are joined.
class FastaReader {
 public:
  explicit FastaReader(std::istream& in) : in_(in) {}

  std::optional<Read> next() {
    std::string line;
    if (!pending_header_) {
      while (next_line(line)) {
        if (line.empty()) continue;
        if (line.front() != '>') throw ParseError("sequence data before '>' header", record_ + 1, line_);
        pending_header_ = line.substr(1);
        break;
      }
      if (!pending_header_) return std::nullopt;
    }
    ++record_;
    Read read;
    read.id = std::move(*pending_header_);
    pending_header_.reset();
    const std::size_t header_line = line_;
    while (next_line(line)) {
      if (line.empty()) continue;
      if (line.front() == '>') {
        pending_header_ = line.substr(1);
        break;
      }
      read.sequence += line;
    }
    if (read.sequence.empty()) throw ParseError("empty sequence", record_, header_line);
    if (!normalize_sequence(read.sequence)) throw ParseError("invalid nucleotide", record_, header_line);
    return read;
  }

 private:
  bool next_line(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    detail::strip_cr(line);
    return true;
  }

  std::istream& in_;
  std::optional<std::string> pending_header_;
  std::size_t record_ = 0;
  std::size_t line_ = 0;
};

inline ReadSet parse_fastq(std::istream& in, std::string source = "stream") {
  ReadSet set{{}, std::move(source)};
  FastqReader reader(in);
  while (auto read = reader.next()) set.reads.push_back(std::move(*read));
  return set;
}

inline ReadSet parse_fasta(std::istream& in, std::string source = "stream") {
  ReadSet set{{}, std::move(source)};
  FastaReader reader(in);
  while (auto read = reader.next()) set.reads.push_back(std::move(*read));
  return set;
}

inline void write_fastq(const ReadSet& set, std::ostream& out) {
  for (const Read& read : set) {
    out << '@' << read.id << '\n' << read.sequence << "\n+\n";
    if (read.quality) {
      out << *read.quality << '\n';
    } else {
      out << std::string(read.sequence.size(), 'I') << '\n';
    }
  }
  out.flush();
  if (!out) throw Error("write failed");
}

/// Opens path for reading, transparently decompressing names ending ".gz".
class InputFile {
 public:
  explicit InputFile(const std::filesystem::path& path) {
    const std::string name = path.string();
    if (!std::filesystem::exists(path)) throw InputError("input not found: " + name);
    if (detail::has_suffix(name, ".gz")) {
      gz_ = std::make_unique<detail::GzInputBuffer>(name);
      stream_ = std::make_unique<std::istream>(gz_.get());
    } else {
      auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (!*file) throw InputError("cannot open: " + name);
      stream_ = std::move(file);
    }
  }

  std::istream& stream() { return *stream_; }

 private:
  std::unique_ptr<detail::GzInputBuffer> gz_;
  std::unique_ptr<std::istream> stream_;
};

/// True when the (possibly compressed) file name has a FASTA extension.
inline bool looks_like_fasta(std::string name) {
  if (detail::has_suffix(name, ".gz")) name.resize(name.size() - 3);
  for (std::string_view ext : {".fa", ".fasta", ".fna", ".fas"}) {
    if (detail::has_suffix(name, ext)) return true;
  }
  return false;
}

/// Streams every read of a file through fn without materializing the set.
inline void for_each_read(const std::filesystem::path& path, const std::function<void(Read&&)>& fn) {
  InputFile file(path);
  std::istream& in = file.stream();
  // Sniff the first non-blank character to pick the format.
  int c;
  while ((c = in.peek()) != EOF && std::isspace(c)) in.get();
  const bool fasta = c == '>' || (c == EOF && looks_like_fasta(path.string()));
  if (fasta) {
    FastaReader reader(in);
    while (auto read = reader.next()) fn(std::move(*read));
  } else {
    FastqReader reader(in);
    while (auto read = reader.next()) fn(std::move(*read));
  }
}

inline ReadSet read_file(const std::filesystem::path& path) {
  ReadSet set{{}, path.string()};
  for_each_read(path, [&](Read&& r) { set.reads.push_back(std::move(r)); });
  return set;
}

inline void write_fastq_file(const ReadSet& set, const std::filesystem::path& path) {
  const std::string name = path.string();
  if (detail::has_suffix(name, ".gz")) {
    detail::GzOutputBuffer buffer(name);
    std::ostream out(&buffer);
    write_fastq(set, out);
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + name);
    write_fastq(set, out);
  }
}

/// min(n, |set|) reads drawn uniformly without replacement, kept in ingest
/// order (selection sampling).
inline ReadSet sample_reads(const ReadSet& set, std::size_t n, std::uint64_t seed) {
  if (n >= set.size()) return set;
  ReadSet out{{}, set.source};
  out.reads.reserve(n);
  Rng rng(seed);
  std::size_t remaining = set.size();
  std::size_t needed = n;
  for (const Read& read : set) {
    if (needed == 0) break;
    if (rng.below(remaining) < needed) {
      out.reads.push_back(read);
      --needed;
    }
    --remaining;
  }
  return out;
}

}  // namespace athena::seqio
