// Core scalar types, sentinels and error classes shared by every module.
#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace edgeroute {

/// Dense vertex index in [0, n).
using NodeId = std::int32_t;

/// Travel cost / simulated time in milli-units (1 time unit == 1000 ticks).
using Cost = std::int64_t;

inline constexpr Cost kCostScale = 1000;

/// Stored in the weight matrix where two vertices are not adjacent.
template <typename Scalar>
inline constexpr Scalar kNoEdgeOf = Scalar(-1);
inline constexpr Cost kNoEdge = kNoEdgeOf<Cost>;

/// Distance of an unreachable vertex.
template <typename Scalar>
inline constexpr Scalar kInfinityOf = std::numeric_limits<Scalar>::has_infinity
                                          ? std::numeric_limits<Scalar>::infinity()
                                          : std::numeric_limits<Scalar>::max();
inline constexpr Cost kInfinity = kInfinityOf<Cost>;

inline constexpr NodeId kNoNode = -1;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses a non-negative or negative decimal ("12", "0.25", "-2") into
/// milli-units exactly. At most three fractional digits are accepted.
/// Throws std::invalid_argument on malformed input.
Cost parse_milli(std::string_view text);

/// Inverse of parse_milli: 5000 -> "5", 1250 -> "1.25".
std::string format_milli(Cost value);

}  // namespace edgeroute
