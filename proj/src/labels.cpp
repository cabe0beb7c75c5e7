// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/labels.hpp"

#include <stdexcept>

namespace iwaqg {

namespace {

constexpr std::array<std::string_view, kNumIWClasses> kIWNames = {"what", "which", "where", "when",
                                                                  "who",  "why",   "how",   "others"};
constexpr std::array<std::string_view, kNumEntityTypes> kEntityNames = {"Person",  "LocationGpe", "Org", "DateTime",
                                                                        "Numeric", "Misc",        "None"};

}  // namespace

std::string_view to_string(IWClass c) { return kIWNames[code(c)]; }

std::optional<IWClass> parse_iw_class(std::string_view name) {
    for (std::size_t i = 0; i < kIWNames.size(); ++i) {
        if (kIWNames[i] == name) {
            return static_cast<IWClass>(i);
        }
    }
    return std::nullopt;
}

std::optional<std::string_view> surface_form(IWClass c) {
    if (c == IWClass::Others) {
        return std::nullopt;
    }
    return kIWNames[code(c)];
}

IWClass iw_class_from_code(std::size_t code) {
    if (code >= kNumIWClasses) {
        throw std::out_of_range("interrogative class code out of range");
    }
    return static_cast<IWClass>(code);
}

std::string_view to_string(EntityType e) { return kEntityNames[code(e)]; }

EntityType entity_type_from_code(std::size_t code) {
    if (code >= kNumEntityTypes) {
        throw std::out_of_range("entity type code out of range");
    }
    return static_cast<EntityType>(code);
}

}  // namespace iwaqg
