#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biasaudit {

using Vector = std::vector<double>;

enum class Role { AttributeA, AttributeB, Target };
enum class Modality { Image, Text };
enum class Category { Occupation, Sport, Object, Scene };
enum class Dominance { MaleDominated, FemaleDominated };

// Attribute side. A is always the male side, B the female side.
enum class Gender { A, B };

std::string_view to_string(Role r);
std::string_view to_string(Modality m);
std::string_view to_string(Category c);
std::string_view to_string(Dominance d);
std::string_view to_string(Gender g);

std::optional<Role> parse_role(std::string_view s);
std::optional<Modality> parse_modality(std::string_view s);
std::optional<Category> parse_category(std::string_view s);
std::optional<Dominance> parse_dominance(std::string_view s);
std::optional<Gender> parse_gender(std::string_view s);

/// Canonical concept key: surrounding whitespace trimmed, ASCII case-folded.
std::string concept_key(std::string_view raw);

}  // namespace biasaudit
