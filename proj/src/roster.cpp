#include "colphys/roster.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace colphys {

std::optional<MoistureMode> parse_mode(std::string_view text) noexcept {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "warm") return MoistureMode::Warm;
  if (lower == "cold") return MoistureMode::Cold;
  return std::nullopt;
}

}  // namespace colphys
