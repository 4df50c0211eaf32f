#pragma once

#include <string>
#include <vector>

#include "flowsynth/core.hpp"

namespace flowsynth {

/// Intersection over union; 1 when both masks are empty.
double region_j(const BinaryMask &pred, const BinaryMask &gt);

/// One-pixel boundary map: a pixel is on the boundary when it differs from
/// its east, south or south-east neighbour. The last row compares east
/// only, the last column south only, and the bottom-right pixel is never a
/// boundary pixel.
BinaryMask boundary_map(const BinaryMask &mask);

/// ceil(0.008 * image diagonal)
int boundary_tolerance(int width, int height);

/// Boundary F-measure. Boundary pixels match when a boundary pixel of the
/// other mask lies within a disk of radius `boundary_tolerance`.
double boundary_f(const BinaryMask &pred, const BinaryMask &gt);

double g_mean(double j, double f);

double mae(const SaliencyMap &pred, const BinaryMask &gt);

inline constexpr double kBetaSquared = 0.3;
inline constexpr int kFBetaThresholds = 255;

/// Max over thresholds t_k = k/255, k = 0..254, of the F-beta score of
/// the binarization pred > t_k.
double f_beta(const SaliencyMap &pred, const BinaryMask &gt, double beta_sq = kBetaSquared);

/// F-beta of one binarization (pred > threshold).
double f_beta_at(const SaliencyMap &pred, const BinaryMask &gt, double threshold, double beta_sq = kBetaSquared);

/// Otsu split of the per-pixel flow radius; the higher-radius side is
/// foreground. A field with a single radius value yields an empty mask.
BinaryMask baseline_segment(const MotionField &flow);

SaliencyMap to_saliency(const BinaryMask &mask);

} // namespace flowsynth
