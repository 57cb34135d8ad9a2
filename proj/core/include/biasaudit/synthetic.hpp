#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/embedding_store.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/prompt_manifest.hpp"

namespace biasaudit {

struct SyntheticConcept {
  std::string name;  // display keyword; the concept key is its folded form
  Category category = Category::Occupation;
  Dominance dominance = Dominance::MaleDominated;
  double planted_bias = 0.0;  // in [-1, 1]; +1 sits on the male anchor
  std::optional<std::string> prompt;  // defaults to "an image of <name>"
};

struct SyntheticConfig {
  std::string model_name = "synthetic";
  int dim = 512;
  std::vector<std::string> encoders;
  std::vector<SyntheticConcept> concepts;
  int attribute_count = 10;  // per side, per modality
  int target_image_count = 20;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
};

/// The six CLIP image encoders, 28 catalog concepts with biases spread over
/// [-1, 1] (female-dominated concepts negative, male-dominated positive),
/// dimension 512, no noise.
SyntheticConfig default_synthetic_config();

/// Throws InvalidConfig.
void validate_config(const SyntheticConfig& config);

SyntheticConfig parse_synthetic_config(std::string_view toml_text);
SyntheticConfig load_synthetic_config(const std::filesystem::path& path);

struct SyntheticBundle {
  Bundle bundle;                              // records in canonical order
  PromptManifest manifest;                    // matches the generated concepts
  std::vector<AssociationSuite> ground_truth; // noise-free suites, encoder "mean"
};

/// Per encoder: two orthonormal anchors u_A, u_B from Gram-Schmidt on seeded
/// Gaussian draws; attribute vectors are the anchor plus noise; a concept with
/// planted bias b gets targets normalize((1+b)/2 u_A + (1-b)/2 u_B) plus
/// noise. Image targets, prompt text and keyword text share that geometry.
SyntheticBundle generate(const SyntheticConfig& config);

/// Closed-form suite for one concept at zero noise: every component equals
/// b / sqrt((1 + b^2) / 2). Throws NoiseNotZero or InvalidArgument for an
/// unknown concept.
AssociationSuite ground_truth_suite(const SyntheticConfig& config,
                                    std::string_view concept_name);

/// Prompt manifest describing the concepts of `config`.
PromptManifest synthetic_manifest(const SyntheticConfig& config);

/// Writes the bundle files plus `ground_truth.json` and `prompt_manifest.toml`.
void write_synthetic(const std::filesystem::path& dir,
                     const SyntheticBundle& synthetic,
                     const SyntheticConfig& config);

}  // namespace biasaudit
