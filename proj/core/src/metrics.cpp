#include "biasaudit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "biasaudit/errors.hpp"

namespace biasaudit {

namespace {

// Terms are summed in ascending order so that the result does not depend on
// the order in which set members were supplied.
double order_free_mean(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum / static_cast<double>(terms.size());
}

double mean_cosine(VectorView w, VectorSet set) {
  std::vector<double> terms;
  terms.reserve(set.size());
  for (const auto& x : set) terms.push_back(cosine(w, x));
  return order_free_mean(terms);
}

}  // namespace

double cosine(VectorView u, VectorView v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "cosine of vectors with " + std::to_string(u.size()) +
                    " and " + std::to_string(v.size()) + " components");
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (!(uu > 0.0) || !(vv > 0.0)) {
    throw Error(ErrorKind::ZeroVector, "cosine with a zero vector");
  }
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double differential_association(VectorView w, VectorSet a, VectorSet b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::EmptyAttributeSet,
                "differential association needs non-empty A and B");
  }
  return mean_cosine(w, a) - mean_cosine(w, b);
}

double association_score(VectorSet w, VectorSet a, VectorSet b) {
  if (w.empty()) {
    throw Error(ErrorKind::EmptyTargetSet,
                "association score needs at least one target");
  }
  std::vector<double> terms;
  terms.reserve(w.size());
  for (const auto& x : w) terms.push_back(differential_association(x, a, b));
  return order_free_mean(terms);
}

AssociationSuite compute_suite(const StudySet& set) {
  const AttributePool& pool = *set.attributes;
  AssociationSuite s;
  s.concept_name = set.concept_name;
  s.encoder = set.encoder;
  s.ii = association_score(set.target_images, pool.a_images, pool.b_images);
  s.itp = differential_association(set.target_prompt_text, pool.a_images,
                                   pool.b_images);
  s.it = association_score(set.target_images, pool.a_texts, pool.b_texts);
  s.tt = differential_association(set.target_keyword_text, pool.a_texts,
                                  pool.b_texts);
  return s;
}

double mcas(const AssociationSuite& s) { return s.ii + s.itp + s.it + s.tt; }

double diffusion_bias(const AssociationSuite& s) {
  return std::abs(std::abs(s.ii) - std::abs(s.tt));
}

std::optional<double> bias_amplification(const AssociationSuite& s,
                                         double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  }
  if (std::abs(s.tt) < epsilon) return std::nullopt;
  return std::abs((s.itp + s.it) / (2.0 * s.tt));
}

}  // namespace biasaudit
