#include "crossover/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "crossover/error.hpp"

namespace crossover {

Layout::Layout(std::vector<LayerShape> shapes) : shapes_(std::move(shapes)) {
  if (shapes_.empty()) {
    throw Error(ErrorCode::kInvalidPlan, "layout has no layers");
  }
  offsets_.reserve(shapes_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    if (shapes_[i].layer_index != i) {
      throw Error(ErrorCode::kInvalidPlan,
                  "layer indices must be contiguous from 0; got " +
                      std::to_string(shapes_[i].layer_index) + " at position " + std::to_string(i));
    }
    if (shapes_[i].length == 0) {
      throw Error(ErrorCode::kInvalidPlan, "layer " + std::to_string(i) + " has zero length");
    }
    offsets_.push_back(offsets_.back() + shapes_[i].length);
  }
}

std::shared_ptr<const Layout> Layout::from_lengths(std::span<const std::size_t> lengths) {
  std::vector<LayerShape> shapes;
  shapes.reserve(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) shapes.push_back({i, lengths[i]});
  return std::make_shared<const Layout>(std::move(shapes));
}

std::shared_ptr<const Layout> Layout::even_split(std::size_t total, std::size_t num_layers) {
  if (num_layers == 0 || total < num_layers) {
    throw Error(ErrorCode::kInvalidPlan, "cannot split " + std::to_string(total) +
                                             " elements into " + std::to_string(num_layers) +
                                             " nonempty layers");
  }
  std::vector<std::size_t> lengths(num_layers, total / num_layers);
  for (std::size_t i = 0; i < total % num_layers; ++i) ++lengths[i];
  return from_lengths(lengths);
}

bool same_layout(const LayoutPtr& a, const LayoutPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

ParamVector::ParamVector(LayoutPtr layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (!layout_ || values_.size() != layout_->total_size()) {
    throw Error(ErrorCode::kCorruptState, "parameter vector length does not match its layout");
  }
}

ParamVector ParamVector::zeros(LayoutPtr layout) {
  const std::size_t n = layout->total_size();
  return ParamVector(std::move(layout), std::vector<double>(n, 0.0));
}

std::span<const double> ParamVector::layer(std::size_t index) const {
  return std::span<const double>(values_).subspan(layout_->layer_offset(index),
                                                  layout_->layer_length(index));
}

std::span<double> ParamVector::layer(std::size_t index) {
  return std::span<double>(values_).subspan(layout_->layer_offset(index),
                                            layout_->layer_length(index));
}

bool ParamVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

SegmentPlan::SegmentPlan(LayoutPtr layout, std::vector<LayerRange> ranges)
    : layout_(std::move(layout)), ranges_(std::move(ranges)) {
  if (!layout_) throw Error(ErrorCode::kInvalidPlan, "segment plan without a layout");
  if (ranges_.empty()) throw Error(ErrorCode::kInvalidPlan, "segment plan has no segments");
  std::size_t expected = 0;
  for (const auto& r : ranges_) {
    if (r.first != expected || r.end <= r.first) {
      throw Error(ErrorCode::kInvalidPlan, "segments must be contiguous, disjoint and nonempty");
    }
    expected = r.end;
  }
  if (expected != layout_->num_layers()) {
    throw Error(ErrorCode::kInvalidPlan, "segments do not cover every layer");
  }
}

const LayerRange& SegmentPlan::range(std::size_t segment) const {
  if (segment >= ranges_.size()) {
    throw Error(ErrorCode::kInvalidSegment, "segment index " + std::to_string(segment) +
                                                " out of range for plan with " +
                                                std::to_string(ranges_.size()) + " segments");
  }
  return ranges_[segment];
}

std::size_t SegmentPlan::element_offset(std::size_t segment) const {
  return layout_->layer_offset(range(segment).first);
}

std::size_t SegmentPlan::element_count(std::size_t segment) const {
  const auto& r = range(segment);
  return layout_->layer_offset(r.end - 1) + layout_->layer_length(r.end - 1) -
         layout_->layer_offset(r.first);
}

namespace {

// Greedy left-to-right packing under `capacity`, forced to produce exactly
// `num_segments` nonempty segments. Returns an empty vector when the
// capacity is too small.
std::vector<LayerRange> pack(const Layout& layout, std::size_t num_segments,
                             std::size_t capacity) {
  const std::size_t layers = layout.num_layers();
  std::vector<LayerRange> out;
  std::size_t next = 0;
  for (std::size_t seg = 0; seg < num_segments; ++seg) {
    const std::size_t segments_after = num_segments - seg - 1;
    LayerRange r{next, next};
    std::size_t load = 0;
    if (segments_after == 0) {
      r.end = layers;
      for (std::size_t l = next; l < layers; ++l) load += layout.layer_length(l);
      if (load > capacity) return {};
    } else {
      while (r.end < layers && layers - (r.end + 1) >= segments_after &&
             (r.end == r.first || load + layout.layer_length(r.end) <= capacity)) {
        load += layout.layer_length(r.end);
        ++r.end;
      }
      if (load > capacity) return {};
    }
    out.push_back(r);
    next = r.end;
  }
  return out;
}

}  // namespace

SegmentPlan build_segment_plan(const LayoutPtr& layout, std::size_t num_segments) {
  if (!layout) throw Error(ErrorCode::kInvalidPlan, "no layout given");
  if (num_segments == 0 || num_segments > layout->num_layers()) {
    throw Error(ErrorCode::kInvalidPlan, "cannot form " + std::to_string(num_segments) +
                                             " segments from " +
                                             std::to_string(layout->num_layers()) + " layers");
  }
  std::size_t lo = 0;
  for (const auto& s : layout->shapes()) lo = std::max(lo, s.length);
  std::size_t hi = layout->total_size();
  // Smallest capacity for which the greedy packing succeeds.
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (pack(*layout, num_segments, mid).empty()) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return SegmentPlan(layout, pack(*layout, num_segments, lo));
}

FlatSegment flatten_tensors(const ParamVector& params, const SegmentPlan& plan,
                            std::size_t segment_index) {
  if (!same_layout(params.layout(), plan.layout())) {
    throw Error(ErrorCode::kCorruptState, "parameters do not conform to the segment plan");
  }
  const std::size_t offset = plan.element_offset(segment_index);
  const std::size_t count = plan.element_count(segment_index);
  const auto src = params.values().subspan(offset, count);
  return FlatSegment{segment_index, std::vector<double>(src.begin(), src.end())};
}

std::vector<std::vector<double>> unflatten_tensors(const FlatSegment& flat,
                                                   const SegmentPlan& plan) {
  if (flat.segment_index >= plan.num_segments()) {
    throw Error(ErrorCode::kInvalidSegment, "segment index " +
                                                std::to_string(flat.segment_index) +
                                                " out of range");
  }
  if (flat.values.size() != plan.element_count(flat.segment_index)) {
    throw Error(ErrorCode::kCorruptSegment,
                "flat segment has " + std::to_string(flat.values.size()) + " elements, expected " +
                    std::to_string(plan.element_count(flat.segment_index)));
  }
  const auto& r = plan.range(flat.segment_index);
  std::vector<std::vector<double>> layers;
  layers.reserve(r.layer_count());
  auto it = flat.values.begin();
  for (std::size_t l = r.first; l < r.end; ++l) {
    const auto len = static_cast<std::ptrdiff_t>(plan.layout()->layer_length(l));
    layers.emplace_back(it, it + len);
    it += len;
  }
  return layers;
}

}  // namespace crossover
