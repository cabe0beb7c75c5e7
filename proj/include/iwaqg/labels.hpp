// SPDX-License-Identifier: Apache-2.0
//
// Interrogative-word classes and answer entity types.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace iwaqg {

enum class IWClass : std::uint8_t { What = 0, Which, Where, When, Who, Why, How, Others };

inline constexpr std::size_t kNumIWClasses = 8;
inline constexpr std::array<IWClass, kNumIWClasses> kAllIWClasses = {
    IWClass::What, IWClass::Which, IWClass::Where, IWClass::When,
    IWClass::Who,  IWClass::Why,   IWClass::How,   IWClass::Others};

std::string_view to_string(IWClass c);
std::optional<IWClass> parse_iw_class(std::string_view name);
// The word inserted into the QG input; Others has none.
std::optional<std::string_view> surface_form(IWClass c);
constexpr std::size_t code(IWClass c) { return static_cast<std::size_t>(c); }
IWClass iw_class_from_code(std::size_t code);

enum class EntityType : std::uint8_t { Person = 0, LocationGpe, Org, DateTime, Numeric, Misc, None };

inline constexpr std::size_t kNumEntityTypes = 7;

std::string_view to_string(EntityType e);
constexpr std::size_t code(EntityType e) { return static_cast<std::size_t>(e); }
EntityType entity_type_from_code(std::size_t code);

}  // namespace iwaqg
