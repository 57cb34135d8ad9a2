#include "biasaudit/types.hpp"

#include <algorithm>
#include <cctype>

namespace biasaudit {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::AttributeA: return "attribute_A";
    case Role::AttributeB: return "attribute_B";
    case Role::Target: return "target";
  }
  return "";
}

std::string_view to_string(Modality m) {
  return m == Modality::Image ? "image" : "text";
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Occupation: return "occupation";
    case Category::Sport: return "sport";
    case Category::Object: return "object";
    case Category::Scene: return "scene";
  }
  return "";
}

std::string_view to_string(Dominance d) {
  return d == Dominance::MaleDominated ? "male_dominated" : "female_dominated";
}

std::string_view to_string(Gender g) { return g == Gender::A ? "A" : "B"; }

std::optional<Role> parse_role(std::string_view s) {
  if (s == "attribute_A") return Role::AttributeA;
  if (s == "attribute_B") return Role::AttributeB;
  if (s == "target") return Role::Target;
  return std::nullopt;
}

std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "image") return Modality::Image;
  if (s == "text") return Modality::Text;
  return std::nullopt;
}

std::optional<Category> parse_category(std::string_view s) {
  if (s == "occupation") return Category::Occupation;
  if (s == "sport") return Category::Sport;
  if (s == "object") return Category::Object;
  if (s == "scene") return Category::Scene;
  return std::nullopt;
}

std::optional<Dominance> parse_dominance(std::string_view s) {
  if (s == "male_dominated") return Dominance::MaleDominated;
  if (s == "female_dominated") return Dominance::FemaleDominated;
  return std::nullopt;
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "A") return Gender::A;
  if (s == "B") return Gender::B;
  return std::nullopt;
}

std::string concept_key(std::string_view raw) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  auto first = std::find_if_not(raw.begin(), raw.end(), is_space);
  auto last = std::find_if_not(raw.rbegin(), raw.rend(), is_space).base();
  std::string out;
  if (first < last) out.assign(first, last);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace biasaudit
