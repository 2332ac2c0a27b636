#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace colphys {

enum class MoistureMode { Warm, Cold };

enum class FieldKind { Mass, Number, Shape };

// Enumerator order is the cold roster order.
enum class FieldId : int {
  VapourMass,
  CloudMass,
  RainMass,
  IceMass,
  SnowMass,
  GraupelMass,
  CloudNumber,
  RainNumber,
  IceNumber,
  SnowNumber,
  GraupelNumber,
  RainShape,
  IceShape,
  SnowShape,
  AerosolAccumulationMass,
  AerosolCoarseMass,
  AerosolCloudBorneMass,
  AerosolRainBorneMass,
};

inline constexpr std::size_t kFieldIdCount = 18;

namespace detail {

inline constexpr std::array<FieldId, 5> kWarmRoster = {
    FieldId::VapourMass, FieldId::CloudMass, FieldId::RainMass, FieldId::CloudNumber,
    FieldId::RainNumber,
};

inline constexpr std::array<FieldId, 18> kColdRoster = {
    FieldId::VapourMass,          FieldId::CloudMass,
    FieldId::RainMass,            FieldId::IceMass,
    FieldId::SnowMass,            FieldId::GraupelMass,
    FieldId::CloudNumber,         FieldId::RainNumber,
    FieldId::IceNumber,           FieldId::SnowNumber,
    FieldId::GraupelNumber,       FieldId::RainShape,
    FieldId::IceShape,            FieldId::SnowShape,
    FieldId::AerosolAccumulationMass, FieldId::AerosolCoarseMass,
    FieldId::AerosolCloudBorneMass,   FieldId::AerosolRainBorneMass,
};

constexpr std::array<int, kFieldIdCount> make_slots(std::span<const FieldId> roster) {
  std::array<int, kFieldIdCount> slots{};
  for (auto& s : slots) s = -1;
  for (std::size_t i = 0; i < roster.size(); ++i) slots[static_cast<std::size_t>(roster[i])] = static_cast<int>(i);
  return slots;
}

inline constexpr auto kWarmSlots = make_slots(kWarmRoster);
inline constexpr auto kColdSlots = make_slots(kColdRoster);

}  // namespace detail

/// Ordered q-field list for a mode. Slot i of a state's q vector holds roster(mode)[i].
constexpr std::span<const FieldId> roster(MoistureMode mode) noexcept {
  if (mode == MoistureMode::Warm) return detail::kWarmRoster;
  return detail::kColdRoster;
}

constexpr std::size_t roster_size(MoistureMode mode) noexcept { return roster(mode).size(); }

/// Roster slot of `id`, or -1 when the mode does not carry it.
constexpr int slot_of(MoistureMode mode, FieldId id) noexcept {
  const auto& slots = mode == MoistureMode::Warm ? detail::kWarmSlots : detail::kColdSlots;
  return slots[static_cast<std::size_t>(id)];
}

constexpr bool carries(MoistureMode mode, FieldId id) noexcept { return slot_of(mode, id) >= 0; }

constexpr FieldKind field_kind(FieldId id) noexcept {
  switch (id) {
    case FieldId::CloudNumber:
    case FieldId::RainNumber:
    case FieldId::IceNumber:
    case FieldId::SnowNumber:
    case FieldId::GraupelNumber:
      return FieldKind::Number;
    case FieldId::RainShape:
    case FieldId::IceShape:
    case FieldId::SnowShape:
      return FieldKind::Shape;
    default:
      return FieldKind::Mass;
  }
}

/// True for the hydrometeor and vapour mass fields (aerosol mass is not water).
constexpr bool is_water(FieldId id) noexcept {
  return static_cast<int>(id) <= static_cast<int>(FieldId::GraupelMass);
}

constexpr std::string_view field_name(FieldId id) noexcept {
  constexpr std::array<std::string_view, kFieldIdCount> names = {
      "qv", "qc", "qr", "qi", "qs", "qg", "nc", "nr", "ni", "ns", "ng",
      "mur", "mui", "mus", "aer_accum", "aer_coarse", "aer_cloud", "aer_rain",
  };
  return names[static_cast<std::size_t>(id)];
}

constexpr std::string_view mode_name(MoistureMode mode) noexcept {
  return mode == MoistureMode::Warm ? "warm" : "cold";
}

/// Accepts "warm"/"cold" in any letter case.
std::optional<MoistureMode> parse_mode(std::string_view text) noexcept;

}  // namespace colphys
