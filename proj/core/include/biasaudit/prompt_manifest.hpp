#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/types.hpp"

namespace biasaudit {

struct AttributePrompt {
  std::string prompt;
  Gender gender;
  int images_per_prompt;
};

struct TargetPrompt {
  std::string prompt;
  std::string concept_name;  // canonical concept key
  Category category;
  Dominance dominance;
  int images_per_prompt;
};

struct TextAttribute {
  std::string word;
  Gender gender;
};

// Keyword used verbatim as the textual form of a target concept.
struct TextTarget {
  std::string keyword;
  std::string concept_name;
};

// Which text-to-image model's wording of the young-adult attribute prompts
// to use; the two models were prompted slightly differently.
enum class PromptVariant { Dalle2, StableDiffusion2 };

std::string_view to_string(PromptVariant v);

/// The catalog of prompts and text terms that defines a study: which
/// attribute images and target images were generated, and which words stand
/// for each gender and each target in the text modality.
struct PromptManifest {
  PromptVariant variant = PromptVariant::Dalle2;
  std::vector<AttributePrompt> attribute_prompts;
  std::vector<TargetPrompt> target_prompts;
  std::vector<TextAttribute> text_attributes;
  std::vector<TextTarget> text_targets;

  int attribute_image_total() const;
  int target_image_total() const;

  /// Concept keys in catalog order.
  std::vector<std::string> concepts() const;

  const TargetPrompt* find_target(std::string_view concept_name) const;
  const TextTarget* find_keyword(std::string_view concept_name) const;
};

/// Built-in catalog: 8 attribute prompts x 16 images, 28 target prompts x 20
/// images over four categories, and 10 + 10 gendered text terms.
PromptManifest default_prompt_manifest(
    PromptVariant variant = PromptVariant::Dalle2);

/// Checks structural invariants: unique concept keys after folding, one
/// keyword per target concept, positive image counts, both genders present.
/// Throws Error(InvalidManifest).
void validate_manifest(const PromptManifest& manifest);

/// TOML override. Any list present in the document replaces the built-in one;
/// `variant = "dalle2" | "sd2"` selects the built-in base.
PromptManifest parse_prompt_manifest(std::string_view toml_text);
PromptManifest load_prompt_manifest(const std::filesystem::path& path);
std::string to_toml(const PromptManifest& manifest);

}  // namespace biasaudit
