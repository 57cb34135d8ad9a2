#pragma once

#include <optional>
#include <span>
#include <string>

#include "biasaudit/embedding_store.hpp"
#include "biasaudit/types.hpp"

namespace biasaudit {

inline constexpr double kDefaultAlphaEpsilon = 1e-9;

using VectorView = std::span<const double>;
using VectorSet = std::span<const Vector>;

/// The four component association scores of one target concept.
/// A positive component means the target sits closer to the male (A) side.
struct AssociationSuite {
  std::string concept_name;
  std::string encoder;  // "mean" once aggregated across encoders
  double ii = 0.0;      // target images vs attribute images
  double itp = 0.0;     // target prompt text vs attribute images
  double it = 0.0;      // target images vs attribute texts
  double tt = 0.0;      // target keyword text vs attribute texts
};

/// Cosine similarity in double precision, clamped to [-1, 1].
/// Throws DimensionMismatch or ZeroVector.
double cosine(VectorView u, VectorView v);

/// Mean cosine of `w` to the members of `a` minus its mean cosine to `b`.
double differential_association(VectorView w, VectorSet a, VectorSet b);

/// Mean of differential_association over every target vector in `w`.
double association_score(VectorSet w, VectorSet a, VectorSet b);

AssociationSuite compute_suite(const StudySet& set);

double mcas(const AssociationSuite& s);

/// Magnitude of image-side bias left after removing text-encoder bias:
/// | |ii| - |tt| |.
double diffusion_bias(const AssociationSuite& s);

/// |(itp + it) / (2 tt)|, or nullopt when |tt| < epsilon (the ratio is not
/// determined for a text encoder that shows no bias).
std::optional<double> bias_amplification(
    const AssociationSuite& s, double epsilon = kDefaultAlphaEpsilon);

}  // namespace biasaudit
