#ifndef VSI_TYPES_HPP
#define VSI_TYPES_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace vsi {

using Key = std::uint64_t;

// Versions are numbered in creation order. Version 0 is the empty root and
// the i-th update creates version i, so ancestry on the version path is plain
// integer order.
struct Version {
  std::uint64_t id = 0;

  constexpr Version() = default;
  constexpr explicit Version(std::uint64_t v) : id(v) {}

  constexpr auto operator<=>(const Version &) const = default;

  [[nodiscard]] constexpr Version next() const { return Version{id + 1}; }
  [[nodiscard]] constexpr Version prev() const { return Version{id - 1}; }
};

// u is an ancestor of v (inclusive).
[[nodiscard]] constexpr bool is_ancestor(Version u, Version v) {
  return u.id <= v.id;
}

inline std::ostream &operator<<(std::ostream &os, Version v) {
  return os << 'v' << v.id;
}

// Inclusive version interval [lo, hi].
struct Interval {
  Version lo;
  Version hi;

  [[nodiscard]] constexpr bool empty() const { return lo > hi; }
  [[nodiscard]] constexpr bool contains(Version v) const {
    return lo <= v && v <= hi;
  }
  [[nodiscard]] constexpr std::uint64_t size() const {
    return empty() ? 0 : hi.id - lo.id + 1;
  }
  [[nodiscard]] constexpr bool intersects(const Interval &o) const {
    return !empty() && !o.empty() && lo <= o.hi && o.lo <= hi;
  }
  [[nodiscard]] constexpr Interval hull(const Interval &o) const {
    return {lo < o.lo ? lo : o.lo, hi > o.hi ? hi : o.hi};
  }

  constexpr bool operator==(const Interval &) const = default;
};

inline std::ostream &operator<<(std::ostream &os, const Interval &w) {
  return os << '[' << w.lo.id << ',' << w.hi.id << ']';
}

inline constexpr std::size_t kPayloadBytes = 16;
using Payload = std::array<std::uint8_t, kPayloadBytes>;

// A (key, version, payload) triple. Deletes are stored as tombstones and take
// part in every accounting rule like any other element.
struct Element {
  Key key = 0;
  Version version;
  Payload payload{};
  bool tombstone = false;

  [[nodiscard]] static Element put(Key k, Version v, const Payload &p) {
    return Element{k, v, p, false};
  }
  [[nodiscard]] static Element erase(Key k, Version v) {
    return Element{k, v, Payload{}, true};
  }

  // Same (key, version) identity; payloads are not compared.
  [[nodiscard]] bool same_slot(const Element &o) const {
    return key == o.key && version == o.version;
  }

  bool operator==(const Element &) const = default;
};

// Array order: key ascending, then version descending.
struct ElementOrder {
  bool operator()(const Element &a, const Element &b) const {
    if (a.key != b.key) return a.key < b.key;
    return a.version > b.version;
  }
};

std::ostream &operator<<(std::ostream &os, const Element &e);

// One visible (key, version, payload) of a dictionary D_v.
struct Entry {
  Key key = 0;
  Version version;
  Payload payload{};

  bool operator==(const Entry &) const = default;
};

std::ostream &operator<<(std::ostream &os, const Entry &e);

// Payload helpers used by the tooling and tests.
[[nodiscard]] Payload payload_from_u64(std::uint64_t a, std::uint64_t b = 0);
[[nodiscard]] std::string payload_to_hex(const Payload &p);
[[nodiscard]] Payload payload_from_hex(const std::string &hex);

// Raised when an internal structural invariant is found broken.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace vsi

#endif  // VSI_TYPES_HPP
