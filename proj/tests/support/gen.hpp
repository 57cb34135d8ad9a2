#pragma once

// Random instance generators for property and oracle tests.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "biasaudit/embedding_store.hpp"
#include "oracle.hpp"

namespace gen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  // Nonzero vector with entries in [-1, 1].
  oracle::Vec vec(int dim) {
    oracle::Vec v(dim);
    for (;;) {
      double norm = 0;
      for (auto& x : v) {
        x = uniform(-1, 1);
        norm += x * x;
      }
      if (norm > 1e-6) return v;
    }
  }

  std::vector<oracle::Vec> vecs(int count, int dim) {
    std::vector<oracle::Vec> out;
    for (int i = 0; i < count; ++i) out.push_back(vec(dim));
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline oracle::Instance instance(Rng& rng, int max_set = 10, int max_dim = 8) {
  const int dim = rng.uniform_int(2, max_dim);
  auto n = [&] { return rng.uniform_int(1, max_set); };
  oracle::Instance in;
  in.a_img = rng.vecs(n(), dim);
  in.b_img = rng.vecs(n(), dim);
  in.a_txt = rng.vecs(n(), dim);
  in.b_txt = rng.vecs(n(), dim);
  in.targets = rng.vecs(n(), dim);
  in.prompt = rng.vec(dim);
  in.keyword = rng.vec(dim);
  return in;
}

inline std::vector<std::string> ids(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string num = std::to_string(i);
    out.push_back(prefix + std::string(3 - std::min<std::size_t>(3, num.size()), '0') + num);
  }
  return out;
}

inline biasaudit::StudySet study_set(const oracle::Instance& in,
                                     const std::string& concept_name = "c",
                                     const std::string& encoder = "enc") {
  auto pool = std::make_shared<biasaudit::AttributePool>();
  pool->encoder = encoder;
  pool->dim = static_cast<int>(in.prompt.size());
  pool->a_images = in.a_img;
  pool->b_images = in.b_img;
  pool->a_texts = in.a_txt;
  pool->b_texts = in.b_txt;
  pool->a_image_ids = ids("ai", in.a_img.size());
  pool->b_image_ids = ids("bi", in.b_img.size());
  pool->a_text_ids = ids("at", in.a_txt.size());
  pool->b_text_ids = ids("bt", in.b_txt.size());
  biasaudit::StudySet set;
  set.concept_name = concept_name;
  set.encoder = encoder;
  set.attributes = pool;
  set.target_images = in.targets;
  set.target_image_ids = ids("t", in.targets.size());
  set.target_prompt_id = "p";
  set.target_prompt_text = in.prompt;
  set.target_keyword_id = "k";
  set.target_keyword_text = in.keyword;
  return set;
}

}  // namespace gen
