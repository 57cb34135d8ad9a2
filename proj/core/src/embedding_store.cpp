#include "biasaudit/embedding_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace biasaudit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kRecordsFile = "embeddings.jsonl";

BundleManifest parse_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestFile;
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "missing " + path.string(),
                path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidManifest,
                std::string(kManifestFile) + ": " + e.what(), path.string());
  }

  BundleManifest m;
  try {
    m.model_name = doc.at("model_name").get<std::string>();
    m.format_version = doc.at("format_version").get<int>();
    m.record_count = doc.at("record_count").get<std::size_t>();
    for (const auto& e : doc.at("encoders")) {
      m.encoders.push_back(
          {e.at("name").get<std::string>(), e.at("dim").get<int>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidManifest,
                std::string(kManifestFile) + ": " + e.what(), path.string());
  }
  if (m.format_version != kBundleFormatVersion) {
    throw Error(ErrorKind::InvalidManifest,
                "unsupported format_version " +
                    std::to_string(m.format_version),
                path.string());
  }
  if (m.encoders.empty()) {
    throw Error(ErrorKind::InvalidManifest, "no encoders declared",
                path.string());
  }
  std::set<std::string> names;
  for (const auto& e : m.encoders) {
    if (e.dim < 2) {
      throw Error(ErrorKind::InvalidManifest,
                  "encoder '" + e.name + "' has dimension < 2", path.string());
    }
    if (!names.insert(e.name).second) {
      throw Error(ErrorKind::InvalidManifest,
                  "encoder '" + e.name + "' declared twice", path.string());
    }
  }
  return m;
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorKind::MalformedRecord,
                std::string("field '") + key + "' must be a string or null",
                {}, line);
  }
  return it->get<std::string>();
}

EmbeddingRecord parse_record(std::string_view text, std::size_t line,
                             const BundleManifest& manifest) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedRecord,
                "line " + std::to_string(line) + ": " + e.what(), {}, line);
  }
  if (!obj.is_object()) {
    throw Error(ErrorKind::MalformedRecord,
                "line " + std::to_string(line) + ": not a JSON object", {},
                line);
  }

  auto required = [&](const char* key) -> std::string {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
      throw Error(ErrorKind::MalformedRecord,
                  "line " + std::to_string(line) + ": missing string field '" +
                      key + "'",
                  {}, line);
    }
    return it->get<std::string>();
  };
  auto malformed = [&](const std::string& what) {
    return Error(ErrorKind::MalformedRecord,
                 "line " + std::to_string(line) + ": " + what, {}, line);
  };

  EmbeddingRecord r;
  r.id = required("id");
  r.encoder = required("encoder");
  auto role = parse_role(required("role"));
  if (!role) throw malformed("unknown role");
  r.role = *role;
  auto modality = parse_modality(required("modality"));
  if (!modality) throw malformed("unknown modality");
  r.modality = *modality;
  r.concept_name = concept_key(required("concept"));
  if (r.concept_name.empty()) throw malformed("empty concept");

  if (auto c = optional_string(obj, "category", line)) {
    r.category = parse_category(*c);
    if (!r.category) throw malformed("unknown category '" + *c + "'");
  }
  if (auto d = optional_string(obj, "dominance", line)) {
    r.dominance = parse_dominance(*d);
    if (!r.dominance) throw malformed("unknown dominance '" + *d + "'");
  }
  r.prompt = optional_string(obj, "prompt", line);

  const bool is_target = r.role == Role::Target;
  if (is_target && (!r.category || !r.dominance)) {
    throw malformed("target record '" + r.id +
                    "' needs category and dominance");
  }
  if (!is_target && (r.category || r.dominance)) {
    throw malformed("attribute record '" + r.id +
                    "' must not carry category or dominance");
  }

  auto vit = obj.find("vector");
  if (vit == obj.end() || !vit->is_array()) {
    throw malformed("missing numeric array 'vector'");
  }
  r.vector.reserve(vit->size());
  for (const auto& x : *vit) {
    if (!x.is_number()) throw malformed("non-numeric vector entry");
    const double v = x.get<double>();
    if (!std::isfinite(v)) throw malformed("non-finite vector entry");
    r.vector.push_back(v);
  }

  const EncoderSpec* enc = manifest.find_encoder(r.encoder);
  if (!enc) {
    throw Error(ErrorKind::UnknownEncoder,
                "record '" + r.id + "' uses undeclared encoder '" + r.encoder +
                    "'",
                r.id, line);
  }
  if (r.vector.size() != static_cast<std::size_t>(enc->dim)) {
    throw Error(ErrorKind::DimensionMismatch,
                "record '" + r.id + "' has " + std::to_string(r.vector.size()) +
                    " components, encoder '" + r.encoder + "' declares " +
                    std::to_string(enc->dim),
                r.id, line);
  }
  double sq = 0.0;
  for (double v : r.vector) sq += v * v;
  if (!(sq > 0.0)) {
    throw Error(ErrorKind::ZeroVector, "record '" + r.id + "' is a zero vector",
                r.id, line);
  }
  return r;
}

// Reads every record. With `sink` set, record-level errors are reported and
// scanning continues; otherwise the first error is thrown.
template <typename Sink>
std::vector<EmbeddingRecord> scan_records(const fs::path& dir,
                                          const BundleManifest& manifest,
                                          Sink* sink) {
  const fs::path path = dir / kRecordsFile;
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "missing " + path.string(),
                path.string());
  }
  std::vector<EmbeddingRecord> records;
  std::unordered_set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  std::size_t non_empty = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    ++non_empty;
    try {
      EmbeddingRecord r = parse_record(text, line, manifest);
      if (!ids.insert(r.id).second) {
        throw Error(ErrorKind::DuplicateId,
                    "record id '" + r.id + "' appears more than once", r.id,
                    line);
      }
      records.push_back(std::move(r));
    } catch (const Error& e) {
      if (!sink) throw;
      (*sink)(e);
    }
  }
  if (non_empty != manifest.record_count) {
    Error e(ErrorKind::InvalidManifest,
            "record_count is " + std::to_string(manifest.record_count) +
                " but " + std::string(kRecordsFile) + " holds " +
                std::to_string(non_empty) + " records",
            (dir / kManifestFile).string());
    if (!sink) throw e;
    (*sink)(e);
  }
  return records;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write " + path.string(),
                path.string());
  }
  out << content;
  if (!out) {
    throw Error(ErrorKind::IoError, "write failed for " + path.string(),
                path.string());
  }
}

}  // namespace

const EncoderSpec* BundleManifest::find_encoder(std::string_view name) const {
  for (const auto& e : encoders) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

Bundle load_bundle(const fs::path& dir) {
  Bundle b;
  b.manifest = parse_manifest(dir);
  using NoSink = void (*)(const Error&);
  b.records = scan_records<NoSink>(dir, b.manifest, nullptr);
  return b;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    throw Error(ErrorKind::IoError, "cannot format number");
  }
  return std::string(buf, end);
}

std::string format_record(const EmbeddingRecord& r) {
  auto str = [](std::string_view s) { return json(std::string(s)).dump(); };
  auto opt = [&](const auto& o, auto&& f) -> std::string {
    return o ? str(f(*o)) : "null";
  };
  auto ident = [](const std::string& s) -> std::string_view { return s; };
  auto enum_name = [](auto e) { return to_string(e); };

  std::string out;
  out.reserve(256 + r.vector.size() * 24);
  out += "{\"id\":" + str(r.id);
  out += ",\"encoder\":" + str(r.encoder);
  out += ",\"role\":" + str(to_string(r.role));
  out += ",\"modality\":" + str(to_string(r.modality));
  out += ",\"concept\":" + str(r.concept_name);
  out += ",\"category\":" + opt(r.category, enum_name);
  out += ",\"dominance\":" + opt(r.dominance, enum_name);
  out += ",\"prompt\":" + opt(r.prompt, ident);
  out += ",\"vector\":[";
  for (std::size_t i = 0; i < r.vector.size(); ++i) {
    if (i) out += ',';
    out += format_double(r.vector[i]);
  }
  out += "]}";
  return out;
}

void sort_canonical(std::vector<EmbeddingRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
}

void write_bundle(const fs::path& dir, const Bundle& bundle) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::IoError, "cannot create " + dir.string(),
                dir.string());
  }
  json m;
  m["model_name"] = bundle.manifest.model_name;
  m["format_version"] = bundle.manifest.format_version;
  m["encoders"] = json::array();
  for (const auto& e : bundle.manifest.encoders) {
    m["encoders"].push_back({{"name", e.name}, {"dim", e.dim}});
  }
  m["record_count"] = bundle.records.size();
  write_text(dir / kManifestFile, m.dump(2) + "\n");

  std::string lines;
  for (const auto& r : bundle.records) {
    lines += format_record(r);
    lines += '\n';
  }
  write_text(dir / kRecordsFile, lines);
}

std::vector<StudySet> partition(std::span<const EmbeddingRecord> records,
                                const PromptManifest& manifest) {
  validate_manifest(manifest);

  struct TargetGroup {
    std::vector<const EmbeddingRecord*> images;
    const EmbeddingRecord* prompt = nullptr;
    const EmbeddingRecord* keyword = nullptr;
  };
  struct EncoderGroup {
    std::vector<const EmbeddingRecord*> a_img, b_img, a_txt, b_txt;
    std::map<std::string, TargetGroup> targets;
  };
  std::map<std::string, EncoderGroup> by_encoder;

  for (const auto& r : records) {
    EncoderGroup& g = by_encoder[r.encoder];
    const bool image = r.modality == Modality::Image;
    if (r.role == Role::AttributeA) {
      (image ? g.a_img : g.a_txt).push_back(&r);
      continue;
    }
    if (r.role == Role::AttributeB) {
      (image ? g.b_img : g.b_txt).push_back(&r);
      continue;
    }
    const TargetPrompt* tp = manifest.find_target(r.concept_name);
    if (!tp) {
      throw Error(ErrorKind::UnexpectedConcept,
                  "record '" + r.id + "' names concept '" + r.concept_name +
                      "' which the prompt manifest does not define",
                  r.id);
    }
    if (r.category != tp->category || r.dominance != tp->dominance) {
      throw Error(ErrorKind::MalformedRecord,
                  "record '" + r.id +
                      "' disagrees with the prompt manifest on category or "
                      "dominance",
                  r.id);
    }
    TargetGroup& t = g.targets[r.concept_name];
    if (image) {
      t.images.push_back(&r);
      continue;
    }
    const TextTarget* kw = manifest.find_keyword(r.concept_name);
    const bool is_keyword =
        !r.prompt || concept_key(*r.prompt) == concept_key(kw->keyword);
    const EmbeddingRecord*& slot = is_keyword ? t.keyword : t.prompt;
    if (slot) {
      throw Error(ErrorKind::AmbiguousTargetText,
                  "concept '" + r.concept_name + "' has two " +
                      (is_keyword ? "keyword" : "prompt") +
                      " text records under encoder '" + r.encoder + "'",
                  r.id);
    }
    slot = &r;
  }

  std::vector<std::string> concepts = manifest.concepts();
  std::sort(concepts.begin(), concepts.end());

  std::vector<StudySet> out;
  out.reserve(concepts.size() * by_encoder.size());
  for (auto& [encoder, g] : by_encoder) {
    auto missing_side = [&](const char* side, const char* modality) {
      return Error(ErrorKind::MissingAttributeSide,
                   std::string("no attribute_") + side + " " + modality +
                       " records for encoder '" + encoder + "'",
                   encoder);
    };
    if (g.a_img.empty()) throw missing_side("A", "image");
    if (g.b_img.empty()) throw missing_side("B", "image");
    if (g.a_txt.empty()) throw missing_side("A", "text");
    if (g.b_txt.empty()) throw missing_side("B", "text");

    auto pool = std::make_shared<AttributePool>();
    pool->encoder = encoder;
    pool->dim = static_cast<int>(g.a_img.front()->vector.size());
    auto fill = [](std::vector<const EmbeddingRecord*>& src,
                   std::vector<std::string>& ids, std::vector<Vector>& vecs) {
      std::sort(src.begin(), src.end(),
                [](const auto* a, const auto* b) { return a->id < b->id; });
      for (const auto* r : src) {
        ids.push_back(r->id);
        vecs.push_back(r->vector);
      }
    };
    fill(g.a_img, pool->a_image_ids, pool->a_images);
    fill(g.b_img, pool->b_image_ids, pool->b_images);
    fill(g.a_txt, pool->a_text_ids, pool->a_texts);
    fill(g.b_txt, pool->b_text_ids, pool->b_texts);
    std::shared_ptr<const AttributePool> shared = pool;

    for (const auto& concept_name : concepts) {
      auto it = g.targets.find(concept_name);
      auto missing = [&](const char* what) {
        return Error(ErrorKind::MissingConcept,
                     "concept '" + concept_name + "' has no " + what +
                         " under encoder '" + encoder + "'",
                     concept_name);
      };
      if (it == g.targets.end() || it->second.images.empty()) {
        throw missing("target images");
      }
      TargetGroup& t = it->second;
      if (!t.prompt) throw missing("prompt text record");
      if (!t.keyword) throw missing("keyword text record");

      StudySet s;
      s.concept_name = concept_name;
      s.encoder = encoder;
      s.attributes = shared;
      fill(t.images, s.target_image_ids, s.target_images);
      s.target_prompt_id = t.prompt->id;
      s.target_prompt_text = t.prompt->vector;
      s.target_keyword_id = t.keyword->id;
      s.target_keyword_text = t.keyword->vector;
      out.push_back(std::move(s));
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.concept_name != b.concept_name ? a.concept_name < b.concept_name
                                  : a.encoder < b.encoder;
  });
  return out;
}

ValidationReport validate_bundle(const fs::path& dir,
                                 const PromptManifest& manifest) {
  ValidationReport report;
  report.bundle = dir;
  auto record = [&](const Error& e) {
    report.findings.push_back({e.kind(), e.subject(), e.line(), e.message()});
  };
  try {
    BundleManifest m = parse_manifest(dir);
    auto sink = record;
    std::vector<EmbeddingRecord> records = scan_records(dir, m, &sink);
    report.records_read = records.size();
    if (report.ok()) {
      report.study_sets = partition(records, manifest).size();
    }
  } catch (const Error& e) {
    record(e);
  }
  return report;
}

}  // namespace biasaudit
