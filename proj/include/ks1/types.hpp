#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ks1 {

/// Strongly typed integer identifier. Tag distinguishes vertex ids from edge ids.
template <class Tag>
struct Id {
  using value_type = std::uint32_t;
  static constexpr value_type kInvalid = std::numeric_limits<value_type>::max();

  value_type value = kInvalid;

  constexpr Id() = default;
  constexpr explicit Id(value_type v) : value(v) {}

  constexpr bool valid() const { return value != kInvalid; }
  constexpr std::size_t index() const { return value; }

  friend constexpr auto operator<=>(Id, Id) = default;
  friend std::ostream& operator<<(std::ostream& os, Id id) { return os << id.value; }
};

struct VertexTag {};
struct EdgeTag {};

/// Vertex identifier. Original vertices are 0..n-1; contractions allocate fresh ids.
using VertexId = Id<VertexTag>;
/// Edge identifier, one per configuration pair, stable across contractions.
using EdgeId = Id<EdgeTag>;

/// Malformed external input (bad file, loop in edge list, out-of-range endpoint).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API misuse: dead ids, empty degree class, precondition violations.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A trace, matching or certificate is inconsistent with the graph it claims to describe.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ks1

template <class Tag>
struct std::hash<ks1::Id<Tag>> {
  std::size_t operator()(ks1::Id<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
