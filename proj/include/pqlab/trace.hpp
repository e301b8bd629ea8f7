#pragma once

// Trace files. Binary form (.pqtr), all integers little-endian:
//
//   "PQTR" u32 version u32 flags(bit0 = expected answers present)
//   u64 total u64 inserts u64 deletes u64 decreases u64 max_live
//   u32 param_count { u16 len, bytes (name) ; u16 len, bytes (value) }*
//   records: u8 opcode, then
//     INSERT / DECREASE_KEY : u32 id, u64 key
//     DELETE_MIN            : u32 id, u64 key   only when bit0 is set
//
// Text form (.pqtrt) carries the same content one item per line.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/oracle.hpp"

namespace pqlab {

enum class OpCode : std::uint8_t { insert = 0, delete_min = 1, decrease_key = 2 };

struct TraceRecord {
  OpCode op = OpCode::insert;
  ItemId id = 0;  // DELETE_MIN: expected id
  Key64 key;      // DELETE_MIN: expected key
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct TraceHeader {
  std::uint32_t version = 1;
  bool has_expected = true;
  std::uint64_t total = 0;
  std::uint64_t inserts = 0;
  std::uint64_t deletes = 0;
  std::uint64_t decreases = 0;
  std::uint64_t max_live = 0;
  std::vector<std::pair<std::string, std::string>> params;

  std::string param(std::string_view name, std::string fallback = {}) const {
    for (const auto& [k, v] : params) {
      if (k == name) return v;
    }
    return fallback;
  }
  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct Trace {
  TraceHeader header;
  std::vector<TraceRecord> records;
  friend bool operator==(const Trace&, const Trace&) = default;
};

inline constexpr std::uint32_t kTraceVersion = 1;
inline constexpr char kTraceMagic[4] = {'P', 'Q', 'T', 'R'};

class format_error : public pq_error {
 public:
  format_error(const std::string& what, std::uint64_t offset)
      : pq_error("trace format error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class trace_invalid_error : public pq_error {
 public:
  trace_invalid_error(const std::string& what, std::uint64_t index)
      : pq_error("invalid trace at record " + std::to_string(index) + ": " + what), index_(index) {}
  std::uint64_t index() const { return index_; }

 private:
  std::uint64_t index_;
};

/// Recomputes the header's counts and max-live size from the records.
inline void fill_counts(Trace& t) {
  TraceHeader& h = t.header;
  h.total = t.records.size();
  h.inserts = h.deletes = h.decreases = h.max_live = 0;
  std::uint64_t live = 0;
  for (const TraceRecord& r : t.records) {
    switch (r.op) {
      case OpCode::insert:
        ++h.inserts;
        h.max_live = std::max(h.max_live, ++live);
        break;
      case OpCode::delete_min:
        ++h.deletes;
        if (live > 0) --live;
        break;
      case OpCode::decrease_key:
        ++h.decreases;
        break;
    }
  }
}

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void bytes(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1, "u8")); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2, "u16")); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4, "u32")); }
  std::uint64_t u64() { return le(8, "u64"); }
  std::string_view bytes(std::size_t n) {
    need(n, "string");
    std::string_view s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t offset() const { return pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (data_.size() - pos_ < n) throw format_error(std::string("truncated ") + what, pos_);
  }
  std::uint64_t le(int n, const char* what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

inline TraceHeader read_header(ByteReader& in) {
  std::string_view magic = in.bytes(4);
  if (std::memcmp(magic.data(), kTraceMagic, 4) != 0) throw format_error("bad magic", 0);
  TraceHeader h;
  std::size_t at = in.offset();
  h.version = in.u32();
  if (h.version != kTraceVersion) throw format_error("unsupported version " + std::to_string(h.version), at);
  at = in.offset();
  std::uint32_t flags = in.u32();
  if ((flags & ~1u) != 0) throw format_error("unknown flags", at);
  h.has_expected = (flags & 1u) != 0;
  h.total = in.u64();
  h.inserts = in.u64();
  h.deletes = in.u64();
  h.decreases = in.u64();
  h.max_live = in.u64();
  std::uint32_t n = in.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string k(in.bytes(in.u16()));
    std::string v(in.bytes(in.u16()));
    h.params.emplace_back(std::move(k), std::move(v));
  }
  if (h.total != h.inserts + h.deletes + h.decreases) throw format_error("header counts do not sum to total", 8);
  return h;
}

inline TraceRecord read_record(ByteReader& in, bool has_expected) {
  std::size_t at = in.offset();
  std::uint8_t op = in.u8();
  TraceRecord r;
  switch (op) {
    case 0:
    case 2:
      r.op = static_cast<OpCode>(op);
      r.id = in.u32();
      r.key = Key64{in.u64()};
      break;
    case 1:
      r.op = OpCode::delete_min;
      if (has_expected) {
        r.id = in.u32();
        r.key = Key64{in.u64()};
      }
      break;
    default:
      throw format_error("unknown opcode " + std::to_string(op), at);
  }
  return r;
}

}  // namespace detail

inline std::string encode_trace(const Trace& t) {
  detail::ByteWriter w;
  w.bytes(std::string_view(kTraceMagic, 4));
  w.u32(t.header.version);
  w.u32(t.header.has_expected ? 1u : 0u);
  w.u64(t.header.total);
  w.u64(t.header.inserts);
  w.u64(t.header.deletes);
  w.u64(t.header.decreases);
  w.u64(t.header.max_live);
  w.u32(static_cast<std::uint32_t>(t.header.params.size()));
  for (const auto& [k, v] : t.header.params) {
    w.u16(static_cast<std::uint16_t>(k.size()));
    w.bytes(k);
    w.u16(static_cast<std::uint16_t>(v.size()));
    w.bytes(v);
  }
  for (const TraceRecord& r : t.records) {
    w.u8(static_cast<std::uint8_t>(r.op));
    if (r.op != OpCode::delete_min || t.header.has_expected) {
      w.u32(r.id);
      w.u64(r.key.raw());
    }
  }
  return w.take();
}

inline Trace decode_trace(std::string_view bytes) {
  detail::ByteReader in(bytes);
  Trace t;
  t.header = detail::read_header(in);
  t.records.reserve(t.header.total);
  while (!in.at_end()) t.records.push_back(detail::read_record(in, t.header.has_expected));
  if (t.records.size() != t.header.total) {
    throw format_error("header promises " + std::to_string(t.header.total) + " records, found " +
                           std::to_string(t.records.size()),
                       in.offset());
  }
  return t;
}

/// Streams records straight from an encoded buffer. Used by every timed
/// replay (including the dummy driver) so parsing cost is identical.
template <typename F>
std::uint64_t for_each_record(std::string_view bytes, F&& f) {
  detail::ByteReader in(bytes);
  TraceHeader h = detail::read_header(in);
  std::uint64_t n = 0;
  while (!in.at_end()) {
    f(detail::read_record(in, h.has_expected));
    ++n;
  }
  return n;
}

inline std::string to_text(const Trace& t) {
  std::ostringstream out;
  const TraceHeader& h = t.header;
  out << "PQTR " << h.version << " expected=" << (h.has_expected ? 1 : 0) << "\n";
  out << "counts " << h.total << ' ' << h.inserts << ' ' << h.deletes << ' ' << h.decreases << ' ' << h.max_live << "\n";
  for (const auto& [k, v] : h.params) out << "param " << k << ' ' << v << "\n";
  for (const TraceRecord& r : t.records) {
    switch (r.op) {
      case OpCode::insert:
        out << "I " << r.id << ' ' << r.key.raw() << "\n";
        break;
      case OpCode::decrease_key:
        out << "K " << r.id << ' ' << r.key.raw() << "\n";
        break;
      case OpCode::delete_min:
        if (h.has_expected) {
          out << "D " << r.id << ' ' << r.key.raw() << "\n";
        } else {
          out << "D\n";
        }
        break;
    }
  }
  return out.str();
}

/// Parses the text form; errors carry the 1-based line number in place of
/// a byte offset.
inline Trace from_text(std::string_view text) {
  Trace t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::uint64_t lineno = 0;
  auto fail = [&](const std::string& what) -> format_error {
    return format_error(what + " (line " + std::to_string(lineno) + ")", lineno);
  };
  bool seen_magic = false;
  bool seen_counts = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (!seen_magic) {
      std::string expected;
      if (tag != "PQTR" || !(ls >> t.header.version >> expected)) throw fail("missing PQTR header");
      if (t.header.version != kTraceVersion) throw fail("unsupported version");
      if (expected == "expected=1") {
        t.header.has_expected = true;
      } else if (expected == "expected=0") {
        t.header.has_expected = false;
      } else {
        throw fail("bad expected flag");
      }
      seen_magic = true;
      continue;
    }
    if (tag == "counts") {
      TraceHeader& h = t.header;
      if (!(ls >> h.total >> h.inserts >> h.deletes >> h.decreases >> h.max_live)) throw fail("bad counts line");
      seen_counts = true;
    } else if (tag == "param") {
      std::string k, v;
      if (!(ls >> k)) throw fail("bad param line");
      std::getline(ls, v);
      if (!v.empty() && v[0] == ' ') v.erase(0, 1);
      t.header.params.emplace_back(k, v);
    } else if (tag == "I" || tag == "K" || tag == "D") {
      TraceRecord r;
      r.op = tag == "I" ? OpCode::insert : tag == "K" ? OpCode::decrease_key : OpCode::delete_min;
      if (r.op != OpCode::delete_min || t.header.has_expected) {
        std::uint64_t raw = 0;
        if (!(ls >> r.id >> raw)) throw fail("bad record");
        r.key = Key64{raw};
      }
      t.records.push_back(r);
    } else {
      throw fail("unknown line tag '" + tag + "'");
    }
  }
  if (!seen_magic || !seen_counts) throw fail("incomplete header");
  if (t.records.size() != t.header.total) throw fail("record count does not match header");
  return t;
}

inline bool is_text_trace_path(const std::string& path) {
  return path.size() >= 6 && path.compare(path.size() - 6, 6, ".pqtrt") == 0;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pq_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_trace(const std::string& path, const Trace& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pq_error("cannot write " + path);
  std::string bytes = is_text_trace_path(path) ? to_text(t) : encode_trace(t);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw pq_error("write failed: " + path);
}

inline Trace read_trace(const std::string& path) {
  std::string bytes = read_file_bytes(path);
  return is_text_trace_path(path) ? from_text(bytes) : decode_trace(bytes);
}

/// Drops embedded DELETE_MIN answers (pure timing runs).
inline Trace strip_expected(Trace t) {
  t.header.has_expected = false;
  for (TraceRecord& r : t.records) {
    if (r.op == OpCode::delete_min) {
      r.id = 0;
      r.key = Key64{};
    }
  }
  return t;
}

/// Replays on the reference structure; throws trace_invalid_error naming the
/// record index for any malformed operation.
inline std::vector<Entry> oracle_replay(const Trace& t) {
  OracleHeap o;
  std::vector<Entry> out;
  out.reserve(t.header.deletes);
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const TraceRecord& r = t.records[i];
    try {
      switch (r.op) {
        case OpCode::insert:
          o.insert(r.id, r.key);
          break;
        case OpCode::delete_min:
          if (o.empty()) throw trace_invalid_error("delete_min on an empty heap", i);
          out.push_back(o.delete_min());
          break;
        case OpCode::decrease_key:
          if (!o.is_live(r.id)) throw trace_invalid_error("decrease_key on dead id " + std::to_string(r.id), i);
          o.decrease_item(r.id, r.key);
          break;
      }
    } catch (const trace_invalid_error&) {
      throw;
    } catch (const pq_error& e) {
      throw trace_invalid_error(e.what(), i);
    }
  }
  return out;
}

struct TraceViolation {
  std::uint64_t index;  // record index, or header position for header issues
  std::string message;
};

/// Checks every record invariant against the oracle without throwing.
inline std::vector<TraceViolation> validate_trace(const Trace& t) {
  std::vector<TraceViolation> out;
  constexpr std::uint64_t kHeader = ~std::uint64_t{0};
  Trace counted;
  counted.records = t.records;
  fill_counts(counted);
  const TraceHeader& h = t.header;
  const TraceHeader& c = counted.header;
  if (h.total != c.total || h.inserts != c.inserts || h.deletes != c.deletes || h.decreases != c.decreases) {
    out.push_back({kHeader, "header counts do not match records"});
  }
  if (h.max_live < c.max_live) out.push_back({kHeader, "header max_live " + std::to_string(h.max_live) + " below actual " + std::to_string(c.max_live)});

  OracleHeap o;
  ItemId next_id = 0;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const TraceRecord& r = t.records[i];
    switch (r.op) {
      case OpCode::insert:
        if (r.id != next_id) out.push_back({i, "insert id " + std::to_string(r.id) + " is not the insertion ordinal " + std::to_string(next_id)});
        next_id = std::max(next_id, r.id) + 1;
        if (o.is_live(r.id) || o.contains_key(r.key)) {
          out.push_back({i, "insert duplicates a live id or key"});
          break;
        }
        o.insert(r.id, r.key);
        break;
      case OpCode::delete_min: {
        if (o.empty()) {
          out.push_back({i, "delete_min on an empty heap"});
          break;
        }
        Entry e = o.delete_min();
        if (h.has_expected && (e.item != r.id || e.key != r.key)) {
          out.push_back({i, "expected (" + std::to_string(r.id) + ", " + std::to_string(r.key.raw()) + ") but the oracle gives (" +
                                std::to_string(e.item) + ", " + std::to_string(e.key.raw()) + ")"});
        }
        break;
      }
      case OpCode::decrease_key:
        if (!o.is_live(r.id)) {
          out.push_back({i, "decrease_key on dead id " + std::to_string(r.id)});
        } else if (!(r.key < o.key_of(r.id))) {
          out.push_back({i, "decrease_key to " + std::to_string(r.key.raw()) + " is not below " + std::to_string(o.key_of(r.id).raw())});
        } else if (o.contains_key(r.key)) {
          out.push_back({i, "decrease_key duplicates a live key"});
        } else {
          o.decrease_item(r.id, r.key);
        }
        break;
    }
  }
  return out;
}

struct DummyResult {
  std::uint64_t records = 0;
  std::uint64_t checksum = 0;
};

/// Parses every record and folds every field into a checksum; performs no
/// heap operation.
inline DummyResult dummy_parse(std::string_view bytes) {
  DummyResult d;
  d.records = for_each_record(bytes, [&](const TraceRecord& r) {
    d.checksum = d.checksum * 31 + static_cast<std::uint64_t>(r.op) + r.id + r.key.raw();
  });
  return d;
}

}  // namespace pqlab
