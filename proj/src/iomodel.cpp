#include "vsi/iomodel.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vsi {

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::update: return "update";
    case Phase::merge: return "merge";
    case Phase::subdivide: return "subdivide";
    case Phase::query: return "query";
    case Phase::aux: return "aux";
  }
  return "?";
}

std::uint64_t IoReport::update_cost(bool include_aux) const {
  std::uint64_t n = (*this)[Phase::update].total() +
                    (*this)[Phase::merge].total() +
                    (*this)[Phase::subdivide].total();
  if (include_aux) n += (*this)[Phase::aux].total();
  return n;
}

std::string IoReport::to_json() const {
  nlohmann::ordered_json j;
  j["reads"] = reads;
  j["writes"] = writes;
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    const auto name = std::string(phase_name(static_cast<Phase>(i)));
    j["phases"][name] = {{"reads", phases[i].reads},
                         {"writes", phases[i].writes}};
  }
  return j.dump();
}

BlockDevice::BlockDevice(DeviceGeometry g) : geom_(g) {
  if (g.block_records == 0) throw std::invalid_argument("block size must be > 0");
  if (g.cache_blocks == 0) throw std::invalid_argument("cache must hold a block");
}

ExtentId BlockDevice::alloc_extent(std::uint64_t n_records) {
  std::lock_guard lock(mu_);
  const ExtentId id = next_extent_++;
  const std::uint64_t blocks =
      n_records == 0 ? 1 : (n_records + geom_.block_records - 1) / geom_.block_records;
  extents_.emplace(id, Extent{next_block_, n_records, 0});
  next_block_ += blocks;
  return id;
}

void BlockDevice::free_extent(ExtentId id) {
  std::lock_guard lock(mu_);
  auto it = extents_.find(id);
  if (it == extents_.end()) throw std::out_of_range("free of unknown extent");
  for (auto f = lru_.begin(); f != lru_.end();) {
    if (f->extent == id) {
      where_.erase(f->block);
      f = lru_.erase(f);
    } else {
      ++f;
    }
  }
  extents_.erase(it);
}

const BlockDevice::Extent &BlockDevice::extent_at(ExtentId id,
                                                  std::uint64_t offset,
                                                  std::uint64_t len) const {
  auto it = extents_.find(id);
  if (it == extents_.end()) {
    std::ostringstream os;
    os << "access to unknown extent " << id;
    throw std::out_of_range(os.str());
  }
  if (offset > it->second.n_records || len > it->second.n_records - offset) {
    std::ostringstream os;
    os << "extent " << id << " access [" << offset << ',' << offset + len
       << ") beyond " << it->second.n_records << " records";
    throw std::out_of_range(os.str());
  }
  return it->second;
}

void BlockDevice::count_read(ExtentId id) {
  ++report_.reads;
  ++report_.phases[static_cast<std::size_t>(phase_)].reads;
  if (auto it = extents_.find(id); it != extents_.end()) ++it->second.transfers;
}

void BlockDevice::count_write(const Frame &f) {
  ++report_.writes;
  ++report_.phases[static_cast<std::size_t>(f.dirtied_by)].writes;
  if (auto it = extents_.find(f.extent); it != extents_.end())
    ++it->second.transfers;
}

void BlockDevice::evict_one() {
  const Frame &victim = lru_.back();
  if (victim.dirty) count_write(victim);
  where_.erase(victim.block);
  lru_.pop_back();
}

void BlockDevice::touch_block(ExtentId id, std::uint64_t block, bool write) {
  auto it = where_.find(block);
  if (it != where_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    Frame &f = lru_.front();
    if (write && !f.dirty) {
      f.dirty = true;
      f.dirtied_by = phase_;
    }
    return;
  }
  if (!write) count_read(id);
  if (lru_.size() >= geom_.cache_blocks) evict_one();
  lru_.push_front(Frame{block, id, write, phase_});
  where_[block] = lru_.begin();
}

void BlockDevice::touch(ExtentId id, std::uint64_t first_record,
                        std::uint64_t len, bool write) {
  const Extent &e = extent_at(id, first_record, len);
  if (len == 0) return;
  const std::uint64_t b0 = first_record / geom_.block_records;
  const std::uint64_t b1 = (first_record + len - 1) / geom_.block_records;
  for (std::uint64_t b = b0; b <= b1; ++b)
    touch_block(id, e.first_block + b, write);
}

void BlockDevice::read_seq(ExtentId id, std::uint64_t offset,
                           std::uint64_t len) {
  std::lock_guard lock(mu_);
  touch(id, offset, len, false);
}

void BlockDevice::write_seq(ExtentId id, std::uint64_t offset,
                            std::uint64_t len) {
  std::lock_guard lock(mu_);
  touch(id, offset, len, true);
}

void BlockDevice::read_record(ExtentId id, std::uint64_t index) {
  std::lock_guard lock(mu_);
  touch(id, index, 1, false);
}

void BlockDevice::write_record(ExtentId id, std::uint64_t index) {
  std::lock_guard lock(mu_);
  touch(id, index, 1, true);
}

std::uint64_t BlockDevice::extent_transfers(ExtentId id) const {
  std::lock_guard lock(mu_);
  auto it = extents_.find(id);
  return it == extents_.end() ? 0 : it->second.transfers;
}

Phase BlockDevice::set_phase(Phase p) {
  std::lock_guard lock(mu_);
  const Phase prev = phase_;
  phase_ = p;
  return prev;
}

void BlockDevice::flush() {
  std::lock_guard lock(mu_);
  for (auto &f : lru_) {
    if (f.dirty) {
      count_write(f);
      f.dirty = false;
    }
  }
}

void BlockDevice::drop_cache() {
  flush();
  std::lock_guard lock(mu_);
  lru_.clear();
  where_.clear();
}

IoReport BlockDevice::snapshot_report() const {
  std::lock_guard lock(mu_);
  return report_;
}

IoReport BlockDevice::reset_counters() {
  std::lock_guard lock(mu_);
  IoReport old = report_;
  report_ = IoReport{};
  return old;
}

std::size_t BlockDevice::resident_blocks() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

std::size_t BlockDevice::live_extents() const {
  std::lock_guard lock(mu_);
  return extents_.size();
}

}  // namespace vsi
