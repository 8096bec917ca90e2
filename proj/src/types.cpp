#include "edgeroute/types.hpp"

#include <charconv>

namespace edgeroute {

Cost parse_milli(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw std::invalid_argument("malformed number '" + std::string(text) + "'");
  if (frac.size() > 3) throw std::invalid_argument("more than three fractional digits in '" + std::string(text) + "'");

  auto digits = [&](std::string_view part) -> Cost {
    if (part.empty()) return 0;
    Cost value = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size())
      throw std::invalid_argument("malformed number '" + std::string(text) + "'");
    return value;
  };

  Cost milli = digits(frac);
  for (std::size_t i = frac.size(); i < 3; ++i) milli *= 10;
  const Cost units = digits(whole);
  if (units > std::numeric_limits<Cost>::max() / (4 * kCostScale))
    throw std::invalid_argument("number out of range '" + std::string(text) + "'");
  const Cost value = units * kCostScale + milli;
  return negative ? -value : value;
}

std::string format_milli(Cost value) {
  std::string out;
  if (value < 0) {
    out.push_back('-');
    value = -value;
  }
  out += std::to_string(value / kCostScale);
  Cost frac = value % kCostScale;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 3 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    out += '.' + digits;
  }
  return out;
}

}  // namespace edgeroute
