#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biasaudit/errors.hpp"
#include "biasaudit/prompt_manifest.hpp"
#include "biasaudit/types.hpp"

namespace biasaudit {

inline constexpr int kBundleFormatVersion = 1;

struct EncoderSpec {
  std::string name;
  int dim = 0;
};

struct BundleManifest {
  std::string model_name;
  std::vector<EncoderSpec> encoders;
  std::size_t record_count = 0;
  int format_version = kBundleFormatVersion;

  const EncoderSpec* find_encoder(std::string_view name) const;
};

/// One embedding vector tagged with where it came from. Vectors are kept as
/// read (not normalized).
struct EmbeddingRecord {
  std::string id;
  std::string encoder;
  Role role = Role::Target;
  Modality modality = Modality::Image;
  std::string concept_name;
  std::optional<Category> category;
  std::optional<Dominance> dominance;
  std::optional<std::string> prompt;
  Vector vector;
};

struct Bundle {
  BundleManifest manifest;
  std::vector<EmbeddingRecord> records;
};

/// Reads `manifest.json` and `embeddings.jsonl` from `dir`, checking every
/// record invariant. Stops at the first violation.
Bundle load_bundle(const std::filesystem::path& dir);

/// Writes the two bundle files. Records are written in the order given; use
/// `sort_canonical` first for a canonical file. record_count is taken from
/// `bundle.records`.
void write_bundle(const std::filesystem::path& dir, const Bundle& bundle);

/// Canonical order: ascending record id.
void sort_canonical(std::vector<EmbeddingRecord>& records);

/// Serializes one record as a single JSON object with fixed key order and
/// shortest round-trip decimals, without trailing newline.
std::string format_record(const EmbeddingRecord& record);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

struct Finding {
  ErrorKind kind;
  std::string subject;
  std::size_t line = 0;
  std::string message;
};

struct ValidationReport {
  std::filesystem::path bundle;
  std::size_t records_read = 0;
  std::size_t study_sets = 0;
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
};

/// Lenient variant of load_bundle + partition: keeps going after a bad record
/// so that every problem in the bundle is itemized.
ValidationReport validate_bundle(const std::filesystem::path& dir,
                                 const PromptManifest& manifest);

/// Attribute sets for one encoder, shared by all study sets of that encoder.
/// Each list is sorted by record id.
struct AttributePool {
  std::string encoder;
  int dim = 0;
  std::vector<std::string> a_image_ids, b_image_ids, a_text_ids, b_text_ids;
  std::vector<Vector> a_images, b_images, a_texts, b_texts;
};

/// Everything needed to score one target concept under one encoder.
struct StudySet {
  std::string concept_name;
  std::string encoder;
  std::shared_ptr<const AttributePool> attributes;
  std::vector<std::string> target_image_ids;  // sorted
  std::vector<Vector> target_images;
  std::string target_prompt_id;
  Vector target_prompt_text;
  std::string target_keyword_id;
  Vector target_keyword_text;
};

/// Groups validated records into one StudySet per (concept, encoder), ordered
/// by concept then encoder.
///
/// Target text records are told apart by their `prompt` field: a record whose
/// prompt is null or folds to the concept's keyword is the keyword embedding,
/// any other is the prompt embedding.
std::vector<StudySet> partition(std::span<const EmbeddingRecord> records,
                                const PromptManifest& manifest);

}  // namespace biasaudit
