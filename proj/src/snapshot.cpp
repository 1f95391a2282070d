#include "vsi/snapshot.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace vsi {

namespace {

class Writer {
 public:
  explicit Writer(std::ostream &out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void pad(int n) {
    for (int i = 0; i < n; ++i) u8(0);
  }
  void bytes(const void *p, std::size_t n) {
    out_.write(static_cast<const char *>(p), static_cast<std::streamsize>(n));
  }

 private:
  std::ostream &out_;
};

class Reader {
 public:
  explicit Reader(std::istream &in) : in_(in) {}

  std::uint8_t u8() {
    const int c = in_.get();
    if (c == std::char_traits<char>::eof())
      throw std::runtime_error("snapshot truncated");
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{u8()} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{u8()} << (8 * i);
    return v;
  }
  void skip(int n) {
    for (int i = 0; i < n; ++i) u8();
  }
  void bytes(void *p, std::size_t n) {
    in_.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw std::runtime_error("snapshot truncated");
  }

 private:
  std::istream &in_;
};

}  // namespace

Snapshot capture(const Engine &eng) {
  Snapshot s;
  auto records = eng.save_records();
  {
    auto lock = eng.read_lock();
    s.latest = eng.latest();
    s.mode = eng.config().query_mode;
  }
  s.records = std::move(records);
  return s;
}

void write_snapshot(std::ostream &out, const Snapshot &s) {
  Writer w(out);
  w.bytes(kSnapshotMagic, sizeof kSnapshotMagic);
  w.u32(kSnapshotFormat);
  w.u32(kRecordWidth);
  w.u64(s.latest.id);
  w.u8(s.mode == QueryMode::succ_pointers ? 1 : 0);
  w.pad(7);
  std::uint64_t total = 0;
  for (const auto &r : s.records) total += r.elems.size();
  w.u64(s.records.size());
  w.u64(total);

  std::uint64_t first = 0;
  for (const auto &r : s.records) {
    w.u32(static_cast<std::uint32_t>(r.level));
    w.u8(r.status == RecordStatus::dummy ? 1 : 0);
    w.pad(3);
    w.u64(r.interval.lo.id);
    w.u64(r.interval.hi.id);
    w.u64(r.succ ? *r.succ + 1 : 0);
    w.u64(first);
    w.u64(r.elems.size());
    first += r.elems.size();
  }
  for (const auto &r : s.records) {
    for (const auto &e : r.elems) {
      w.u64(e.key);
      w.u64(e.version.id);
      w.bytes(e.payload.data(), e.payload.size());
      w.u8(e.tombstone ? 1 : 0);
      w.pad(7);
    }
  }
  if (!out) throw std::runtime_error("snapshot write failed");
}

void save_snapshot(const std::string &path, const Snapshot &s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot " + path);
  write_snapshot(out, s);
}

Snapshot read_snapshot(std::istream &in) {
  Reader r(in);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0)
    throw std::runtime_error("not a snapshot file (bad magic)");
  if (const auto f = r.u32(); f != kSnapshotFormat)
    throw std::runtime_error("unsupported snapshot format " + std::to_string(f));
  if (const auto width = r.u32(); width != kRecordWidth)
    throw std::runtime_error("unexpected record width " + std::to_string(width));

  Snapshot s;
  s.latest = Version{r.u64()};
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw std::runtime_error("bad query mode in snapshot");
  s.mode = mode == 1 ? QueryMode::succ_pointers : QueryMode::aux_index;
  r.skip(7);
  const std::uint64_t entries = r.u64();
  const std::uint64_t total = r.u64();

  struct Row {
    std::uint64_t first, count;
  };
  std::vector<Row> rows;
  std::uint64_t expect = 0;
  for (std::uint64_t i = 0; i < entries; ++i) {
    SavedRecord rec;
    rec.level = static_cast<int>(r.u32());
    const std::uint8_t status = r.u8();
    if (status > 1) throw std::runtime_error("bad record status in snapshot");
    rec.status = status == 1 ? RecordStatus::dummy : RecordStatus::live;
    r.skip(3);
    rec.interval.lo = Version{r.u64()};
    rec.interval.hi = Version{r.u64()};
    if (const auto succ = r.u64(); succ != 0) {
      if (succ > entries) throw std::runtime_error("succ index out of range");
      rec.succ = succ - 1;
    }
    Row row{r.u64(), r.u64()};
    if (row.first != expect) throw std::runtime_error("extent table not contiguous");
    expect += row.count;
    rows.push_back(row);
    s.records.push_back(std::move(rec));
  }
  if (expect != total) throw std::runtime_error("record count mismatch");

  for (std::size_t i = 0; i < s.records.size(); ++i) {
    auto &elems = s.records[i].elems;
    elems.reserve(rows[i].count);
    for (std::uint64_t j = 0; j < rows[i].count; ++j) {
      Element e;
      e.key = r.u64();
      e.version = Version{r.u64()};
      r.bytes(e.payload.data(), e.payload.size());
      e.tombstone = (r.u8() & 1) != 0;
      r.skip(7);
      elems.push_back(e);
    }
  }
  return s;
}

Snapshot load_snapshot(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot " + path);
  return read_snapshot(in);
}

std::unique_ptr<Engine> restore_engine(BlockIo &io, EngineConfig cfg,
                                       const Snapshot &s) {
  cfg.query_mode = s.mode;
  return Engine::restore(io, cfg, s.latest, s.records);
}

}  // namespace vsi
