#pragma once

#include <span>
#include <vector>

#include "agnostic/dataset.hpp"
#include "agnostic/network.hpp"

namespace agnostic {

// Where the feature extractor responds most strongly, at input resolution.
struct ActivationMap {
  Tensor values;  // [H, W], in [0, 1]
};

// [C, h, w] -> [h, w], elementwise maximum over channels.
Tensor channel_max(const Tensor& feature_map);
// [h, w] -> [H, W]; pixel (y, x) takes source (y * h / H, x * w / W).
Tensor upsample_nearest(const Tensor& plane, std::size_t height, std::size_t width);
// Clamps negatives to 0, then divides by the maximum. An all-zero map stays zero.
Tensor normalize_max(const Tensor& plane);

// Builds the map from one feature-extractor output [C, h, w].
ActivationMap map_from_features(const Tensor& feature_map, std::size_t height, std::size_t width);

// Eval-mode map for a single image [C, H, W] (already cropped to the network
// input size).
ActivationMap activation_map(const Network& net, const Tensor& image);
// Maps for the centre crops of a whole split, evaluated in chunks.
std::vector<ActivationMap> activation_maps(const Network& net, std::span<const Example> examples,
                                           std::size_t crop);

// Fraction of the most active pixels that fall on the mask. The selected set
// is every pixel whose value is at least the k-th largest, k = ceil(top * H * W),
// so ties at the threshold are all included. A zero map gives 0.
double in_mask_mass(const ActivationMap& map, const Tensor& mask, double top = 0.1);

// Pearson correlation over pixels; 0 when either map has zero variance.
double compare_maps(const ActivationMap& a, const ActivationMap& b);

// Indices of the k example pairs whose maps correlate least, most
// dissimilar first (ties by lower index).
std::vector<std::size_t> least_correlated(std::span<const ActivationMap> a,
                                          std::span<const ActivationMap> b, std::size_t k);

}  // namespace agnostic
