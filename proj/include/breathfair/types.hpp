#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace breathfair {

// Numeric values are the model encodings (male=1, covid=1 is the positive class).
enum class Sex : int { female = 0, male = 1 };
enum class Label : int { copd = 0, covid = 1 };

std::string_view to_string(Sex sex);
std::string_view to_string(Label label);

// Case-insensitive parsers; nullopt on anything outside the two-valued enum.
std::optional<Sex> parse_sex(std::string_view text);
std::optional<Label> parse_label(std::string_view text);

} // namespace breathfair
