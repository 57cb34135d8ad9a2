#include "biasaudit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_HEADER_ONLY 1
#define TOML_EXCEPTIONS 1
#include <toml.hpp>
#include <nlohmann/json.hpp>

#include "biasaudit/errors.hpp"
#include "biasaudit/philox.hpp"

namespace biasaudit {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMalePrompt = "an image of a man";
constexpr const char* kFemalePrompt = "an image of a woman";

[[noreturn]] void bad_config(const std::string& what) {
  throw Error(ErrorKind::InvalidConfig, what);
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(Vector& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

Vector gaussian(NormalStream& rng, int dim) {
  Vector v(static_cast<std::size_t>(dim));
  for (double& x : v) x = rng.next();
  return v;
}

// Orthonormal pair via Gram-Schmidt on two Gaussian draws.
std::pair<Vector, Vector> anchors(NormalStream& rng, int dim) {
  Vector a = gaussian(rng, dim);
  normalize(a);
  Vector b = gaussian(rng, dim);
  const double proj = dot(a, b);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] -= proj * a[i];
  normalize(b);
  return {std::move(a), std::move(b)};
}

Vector target_direction(const Vector& ua, const Vector& ub, double bias) {
  const double wa = (1.0 + bias) / 2.0;
  const double wb = (1.0 - bias) / 2.0;
  Vector t(ua.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = wa * ua[i] + wb * ub[i];
  normalize(t);
  return t;
}

Vector with_noise(Vector v, NormalStream& rng, double scale) {
  if (scale > 0.0) {
    for (double& x : v) x += scale * rng.next();
  }
  return v;
}

// Value of `key` if present; a present value of the wrong type is an error.
template <typename T>
std::optional<T> typed(const toml::table& t, std::string_view key, const char* what) {
  const auto node = t[key];
  if (!node) return std::nullopt;
  auto v = node.value<T>();
  if (!v) bad_config(std::string(key) + " must be " + what);
  return v;
}

std::string padded(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03zu", i);
  return buf;
}

std::vector<std::string> text_terms(const SyntheticConfig& config, Gender g) {
  const PromptManifest base = default_prompt_manifest();
  std::vector<std::string> words;
  for (const auto& t : base.text_attributes) {
    if (t.gender == g) words.push_back(t.word);
  }
  std::vector<std::string> out;
  for (int i = 0; i < config.attribute_count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out.push_back(k < words.size()
                      ? words[k]
                      : std::string(g == Gender::A ? "male_term_" : "female_term_") +
                            std::to_string(i));
  }
  return out;
}

std::string prompt_of(const SyntheticConcept& c) {
  return c.prompt ? *c.prompt : "an image of " + c.name;
}

double closed_form_score(double bias) {
  return bias / std::sqrt((1.0 + bias * bias) / 2.0);
}

}  // namespace

SyntheticConfig default_synthetic_config() {
  SyntheticConfig config;
  config.encoders = {"RN101", "RN50", "RN50x16", "RN50x4", "ViT-B/16",
                     "ViT-B/32"};
  const PromptManifest m = default_prompt_manifest();
  const auto count = [&](Dominance d) {
    return static_cast<double>(std::count_if(
        m.target_prompts.begin(), m.target_prompts.end(),
        [&](const auto& t) { return t.dominance == d; }));
  };
  const double male_n = count(Dominance::MaleDominated);
  const double female_n = count(Dominance::FemaleDominated);
  // Catalog order is kept. Male-dominated concepts get biases 0.1 .. 1.0 and
  // female-dominated ones -1.0 .. -0.1, both evenly spaced.
  double male_i = 0, female_i = 0;
  for (const auto& t : m.target_prompts) {
    const bool male = t.dominance == Dominance::MaleDominated;
    const double n = male ? male_n : female_n;
    double& i = male ? male_i : female_i;
    const double lo = male ? 0.1 : -1.0;
    const double hi = male ? 1.0 : -0.1;
    const double bias = i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
    ++i;
    config.concepts.push_back(
        {m.find_keyword(t.concept_name)->keyword, t.category, t.dominance, bias,
         t.prompt});
  }
  return config;
}

void validate_config(const SyntheticConfig& c) {
  if (c.dim < 4) bad_config("dim must be >= 4");
  if (c.encoders.empty()) bad_config("at least one encoder is required");
  std::set<std::string> names(c.encoders.begin(), c.encoders.end());
  if (names.size() != c.encoders.size()) bad_config("duplicate encoder name");
  if (c.concepts.empty()) bad_config("at least one concept is required");
  if (c.attribute_count < 1) bad_config("attribute_count must be >= 1");
  if (c.target_image_count < 1) bad_config("target_image_count must be >= 1");
  if (!(c.noise_scale >= 0.0) || !std::isfinite(c.noise_scale)) {
    bad_config("noise_scale must be a finite value >= 0");
  }
  std::set<std::string> keys;
  for (const auto& item : c.concepts) {
    if (!(std::abs(item.planted_bias) <= 1.0)) {
      bad_config("planted_bias of '" + item.name + "' is outside [-1, 1]");
    }
    const std::string key = concept_key(item.name);
    if (key.empty()) bad_config("empty concept name");
    if (!keys.insert(key).second) {
      bad_config("concept key collision: '" + key + "'");
    }
  }
}

SyntheticConfig parse_synthetic_config(std::string_view toml_text) {
  toml::table doc;
  try {
    doc = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    bad_config(std::string("TOML parse error: ") + std::string(e.description()));
  }
  for (const auto& [key, node] : doc) {
    static const std::set<std::string_view> known = {
        "model_name", "dim",  "attribute_count", "target_image_count",
        "noise_scale", "seed", "encoders",       "concepts"};
    if (!known.count(key.str())) bad_config("unknown key '" + std::string(key.str()) + "'");
  }
  SyntheticConfig c = default_synthetic_config();
  if (auto v = typed<std::string>(doc, "model_name", "a string")) c.model_name = *v;
  if (auto v = typed<int64_t>(doc, "dim", "an integer")) c.dim = static_cast<int>(*v);
  if (auto v = typed<int64_t>(doc, "attribute_count", "an integer")) {
    c.attribute_count = static_cast<int>(*v);
  }
  if (auto v = typed<int64_t>(doc, "target_image_count", "an integer")) {
    c.target_image_count = static_cast<int>(*v);
  }
  if (auto v = typed<double>(doc, "noise_scale", "a number")) c.noise_scale = *v;
  if (auto v = typed<int64_t>(doc, "seed", "an integer")) {
    if (*v < 0) bad_config("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(*v);
  }
  if (doc.contains("encoders")) {
    const auto* arr = doc["encoders"].as_array();
    if (!arr) bad_config("encoders must be an array of strings");
    c.encoders.clear();
    for (const auto& n : *arr) {
      auto s = n.value<std::string>();
      if (!s) bad_config("encoders must be an array of strings");
      c.encoders.push_back(*s);
    }
  }
  if (doc.contains("concepts")) {
    const auto* arr = doc["concepts"].as_array();
    if (!arr) bad_config("concepts must be an array of tables");
    c.concepts.clear();
    for (const auto& n : *arr) {
      const auto* t = n.as_table();
      if (!t) bad_config("concepts must be an array of tables");
      SyntheticConcept sc;
      auto name = (*t)["name"].value<std::string>();
      auto cat = parse_category((*t)["category"].value_or(std::string()));
      auto dom = parse_dominance((*t)["dominance"].value_or(std::string()));
      auto bias = (*t)["planted_bias"].value<double>();
      if (!name || !cat || !dom || !bias) {
        bad_config("each concept needs name, category, dominance, planted_bias");
      }
      sc.name = *name;
      sc.category = *cat;
      sc.dominance = *dom;
      sc.planted_bias = *bias;
      if (auto p = (*t)["prompt"].value<std::string>()) sc.prompt = *p;
      c.concepts.push_back(std::move(sc));
    }
  }
  validate_config(c);
  return c;
}

SyntheticConfig load_synthetic_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open " + path.string(),
                path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_synthetic_config(ss.str());
}

PromptManifest synthetic_manifest(const SyntheticConfig& c) {
  PromptManifest m;
  m.attribute_prompts = {{kMalePrompt, Gender::A, c.attribute_count},
                         {kFemalePrompt, Gender::B, c.attribute_count}};
  for (const auto& item : c.concepts) {
    const std::string key = concept_key(item.name);
    m.target_prompts.push_back({prompt_of(item), key, item.category,
                                item.dominance, c.target_image_count});
    m.text_targets.push_back({item.name, key});
  }
  for (const auto& w : text_terms(c, Gender::A)) {
    m.text_attributes.push_back({w, Gender::A});
  }
  for (const auto& w : text_terms(c, Gender::B)) {
    m.text_attributes.push_back({w, Gender::B});
  }
  return m;
}

SyntheticBundle generate(const SyntheticConfig& config) {
  validate_config(config);
  SyntheticBundle out;
  out.manifest = synthetic_manifest(config);
  Bundle& bundle = out.bundle;
  bundle.manifest.model_name = config.model_name;
  for (const auto& e : config.encoders) {
    bundle.manifest.encoders.push_back({e, config.dim});
  }

  const auto male_terms = text_terms(config, Gender::A);
  const auto female_terms = text_terms(config, Gender::B);

  for (std::size_t e = 0; e < config.encoders.size(); ++e) {
    const std::string& encoder = config.encoders[e];
    NormalStream rng(config.seed, static_cast<std::uint32_t>(e));
    const auto [ua, ub] = anchors(rng, config.dim);

    auto add = [&](std::string id, Role role, Modality modality,
                   std::string concept_name, std::optional<std::string> prompt,
                   Vector v, const SyntheticConcept* target) {
      EmbeddingRecord r;
      r.id = encoder + "/" + id;
      r.encoder = encoder;
      r.role = role;
      r.modality = modality;
      r.concept_name = std::move(concept_name);
      r.prompt = std::move(prompt);
      if (target) {
        r.category = target->category;
        r.dominance = target->dominance;
      }
      r.vector = std::move(v);
      bundle.records.push_back(std::move(r));
    };

    for (int i = 0; i < config.attribute_count; ++i) {
      const auto k = static_cast<std::size_t>(i);
      add("attr_A_image_" + padded(k), Role::AttributeA, Modality::Image, "man",
          kMalePrompt, with_noise(ua, rng, config.noise_scale), nullptr);
      add("attr_B_image_" + padded(k), Role::AttributeB, Modality::Image,
          "woman", kFemalePrompt, with_noise(ub, rng, config.noise_scale),
          nullptr);
      add("attr_A_text_" + padded(k), Role::AttributeA, Modality::Text,
          male_terms[k], male_terms[k], with_noise(ua, rng, config.noise_scale),
          nullptr);
      add("attr_B_text_" + padded(k), Role::AttributeB, Modality::Text,
          female_terms[k], female_terms[k],
          with_noise(ub, rng, config.noise_scale), nullptr);
    }

    for (const auto& c : config.concepts) {
      const std::string key = concept_key(c.name);
      std::string slug = key;
      for (char& ch : slug) {
        if (ch == ' ' || ch == '/') ch = '_';
      }
      const Vector dir = target_direction(ua, ub, c.planted_bias);
      for (int i = 0; i < config.target_image_count; ++i) {
        add("target_" + slug + "_image_" + padded(static_cast<std::size_t>(i)),
            Role::Target, Modality::Image, key, prompt_of(c),
            with_noise(dir, rng, config.noise_scale), &c);
      }
      add("target_" + slug + "_prompt", Role::Target, Modality::Text, key,
          prompt_of(c), with_noise(dir, rng, config.noise_scale), &c);
      add("target_" + slug + "_keyword", Role::Target, Modality::Text, key,
          c.name, with_noise(dir, rng, config.noise_scale), &c);
    }
  }
  sort_canonical(bundle.records);
  bundle.manifest.record_count = bundle.records.size();

  for (const auto& c : config.concepts) {
    const double s = closed_form_score(c.planted_bias);
    out.ground_truth.push_back({concept_key(c.name), "mean", s, s, s, s});
  }
  return out;
}

AssociationSuite ground_truth_suite(const SyntheticConfig& config,
                                    std::string_view concept_name) {
  if (config.noise_scale != 0.0) {
    throw Error(ErrorKind::NoiseNotZero,
                "exact ground truth requires noise_scale = 0");
  }
  const std::string key = concept_key(concept_name);
  for (const auto& c : config.concepts) {
    if (concept_key(c.name) == key) {
      const double s = closed_form_score(c.planted_bias);
      return {key, "mean", s, s, s, s};
    }
  }
  throw Error(ErrorKind::InvalidArgument,
              "unknown concept '" + std::string(concept_name) + "'", key);
}

void write_synthetic(const fs::path& dir, const SyntheticBundle& synthetic,
                     const SyntheticConfig& config) {
  write_bundle(dir, synthetic.bundle);

  nlohmann::json truth;
  truth["exact"] = config.noise_scale == 0.0;
  truth["noise_scale"] = config.noise_scale;
  truth["seed"] = config.seed;
  truth["suites"] = nlohmann::json::array();
  for (const auto& s : synthetic.ground_truth) {
    const auto alpha = bias_amplification(s);
    truth["suites"].push_back({{"concept", s.concept_name},
                               {"ii", s.ii},
                               {"itp", s.itp},
                               {"it", s.it},
                               {"tt", s.tt},
                               {"mcas", mcas(s)},
                               {"delta", diffusion_bias(s)},
                               {"alpha", alpha ? nlohmann::json(*alpha)
                                               : nlohmann::json(nullptr)}});
  }
  {
    std::ofstream out(dir / "ground_truth.json", std::ios::trunc);
    out << truth.dump(2) << "\n";
    if (!out) throw Error(ErrorKind::IoError, "cannot write ground_truth.json");
  }
  {
    std::ofstream out(dir / "prompt_manifest.toml", std::ios::trunc);
    out << to_toml(synthetic.manifest);
    if (!out) {
      throw Error(ErrorKind::IoError, "cannot write prompt_manifest.toml");
    }
  }
}

}  // namespace biasaudit
