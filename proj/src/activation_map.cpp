#include "agnostic/activation_map.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "agnostic/batching.hpp"

namespace agnostic {

Tensor channel_max(const Tensor& feature_map) {
  if (feature_map.rank() != 3) {
    throw ShapeError("channel_max: expected [C, h, w], got " + shape_string(feature_map.shape()));
  }
  const std::size_t c = feature_map.dim(0), h = feature_map.dim(1), w = feature_map.dim(2);
  if (c == 0) throw ShapeError("channel_max: no channels");
  auto src = feature_map.data();
  Tensor out({h, w}, std::vector<double>(src.begin(), src.begin() + h * w));
  auto dst = out.mutable_data();
  for (std::size_t ch = 1; ch < c; ++ch)
    for (std::size_t i = 0; i < h * w; ++i) dst[i] = std::max(dst[i], src[ch * h * w + i]);
  return out;
}

Tensor upsample_nearest(const Tensor& plane, std::size_t height, std::size_t width) {
  if (plane.rank() != 2) {
    throw ShapeError("upsample_nearest: expected [h, w], got " + shape_string(plane.shape()));
  }
  const std::size_t h = plane.dim(0), w = plane.dim(1);
  Tensor out({height, width});
  auto src = plane.data();
  auto dst = out.mutable_data();
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) dst[y * width + x] = src[(y * h / height) * w + x * w / width];
  return out;
}

Tensor normalize_max(const Tensor& plane) {
  Tensor out = plane.clone();
  auto v = out.mutable_data();
  double peak = 0.0;
  for (double& x : v) {
    x = std::max(x, 0.0);
    peak = std::max(peak, x);
  }
  if (peak > 0.0)
    for (double& x : v) x /= peak;
  return out;
}

ActivationMap map_from_features(const Tensor& feature_map, std::size_t height, std::size_t width) {
  return {normalize_max(upsample_nearest(channel_max(feature_map), height, width))};
}

ActivationMap activation_map(const Network& net, const Tensor& image) {
  if (image.rank() != 3) {
    throw ShapeError("activation_map: expected [C, H, W], got " + shape_string(image.shape()));
  }
  Shape batched{1};
  batched.insert(batched.end(), image.shape().begin(), image.shape().end());
  const Tensor x(batched, std::vector<double>(image.data().begin(), image.data().end()));
  Rng unused(0);
  const Tensor maps = net.feature_maps(x, Mode::eval, unused);
  Shape one(maps.shape().begin() + 1, maps.shape().end());
  const Tensor fm(one, std::vector<double>(maps.data().begin(), maps.data().end()));
  return map_from_features(fm, image.dim(1), image.dim(2));
}

std::vector<ActivationMap> activation_maps(const Network& net, std::span<const Example> examples,
                                           std::size_t crop) {
  std::vector<ActivationMap> out;
  out.reserve(examples.size());
  constexpr std::size_t kChunk = 128;
  Rng unused(0);
  for (std::size_t start = 0; start < examples.size(); start += kChunk) {
    const std::size_t end = std::min(examples.size(), start + kChunk);
    std::vector<const Example*> ptrs;
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(&examples[i]);
    const LabeledBatch batch = make_batch(ptrs, crop, nullptr);
    const Tensor maps = net.feature_maps(batch.images, Mode::eval, unused);
    const Shape one(maps.shape().begin() + 1, maps.shape().end());
    const std::size_t per = element_count(one);
    for (std::size_t i = 0; i < end - start; ++i) {
      auto first = maps.data().begin() + static_cast<std::ptrdiff_t>(i * per);
      const Tensor fm(one, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(per)));
      out.push_back(map_from_features(fm, crop, crop));
    }
  }
  return out;
}

double in_mask_mass(const ActivationMap& map, const Tensor& mask, double top) {
  if (map.values.shape() != mask.shape()) {
    throw ShapeError("in_mask_mass: map " + shape_string(map.values.shape()) + " vs mask " +
                     shape_string(mask.shape()));
  }
  if (!(top > 0.0 && top <= 1.0)) throw std::invalid_argument("in_mask_mass: top must be in (0, 1]");
  auto v = map.values.data();
  if (v.empty() || *std::max_element(v.begin(), v.end()) <= 0.0) return 0.0;
  const auto k = static_cast<std::size_t>(std::ceil(top * static_cast<double>(v.size()) - 1e-9));
  std::vector<double> sorted(v.begin(), v.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                   std::greater<>());
  const double threshold = sorted[k - 1];
  auto m = mask.data();
  std::size_t selected = 0, inside = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < threshold) continue;
    ++selected;
    if (m[i] > 0.5) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(selected);
}

double compare_maps(const ActivationMap& a, const ActivationMap& b) {
  if (a.values.shape() != b.values.shape()) {
    throw ShapeError("compare_maps: " + shape_string(a.values.shape()) + " vs " +
                     shape_string(b.values.shape()));
  }
  auto x = a.values.data();
  auto y = b.values.data();
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::size_t> least_correlated(std::span<const ActivationMap> a,
                                          std::span<const ActivationMap> b, std::size_t k) {
  if (a.size() != b.size()) throw std::invalid_argument("least_correlated: map counts differ");
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = compare_maps(a[i], b[i]);
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&r](std::size_t i, std::size_t j) { return r[i] < r[j]; });
  order.resize(std::min(k, order.size()));
  return order;
}

}  // namespace agnostic
