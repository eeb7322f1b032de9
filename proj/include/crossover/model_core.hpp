#pragma once

// Flat parameter vectors over a layered model, and the segment view used
// for communication: contiguous runs of layers fused into a single buffer.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace crossover {

struct LayerShape {
  std::size_t layer_index = 0;
  std::size_t length = 0;

  bool operator==(const LayerShape&) const = default;
};

// Immutable description of a model's layers. Shared by every ParamVector
// that conforms to it.
class Layout {
 public:
  // Throws kInvalidPlan for an empty list, a zero-length layer, or indices
  // that are not 0, 1, 2, ... in order.
  explicit Layout(std::vector<LayerShape> shapes);

  static std::shared_ptr<const Layout> from_lengths(std::span<const std::size_t> lengths);
  // Splits `total` elements into `num_layers` layers whose lengths differ by
  // at most one, larger layers first.
  static std::shared_ptr<const Layout> even_split(std::size_t total, std::size_t num_layers);

  std::size_t num_layers() const { return shapes_.size(); }
  std::size_t total_size() const { return offsets_.back(); }
  std::size_t layer_length(std::size_t layer) const { return shapes_.at(layer).length; }
  std::size_t layer_offset(std::size_t layer) const { return offsets_.at(layer); }
  std::span<const LayerShape> shapes() const { return shapes_; }

  bool operator==(const Layout& other) const { return shapes_ == other.shapes_; }

 private:
  std::vector<LayerShape> shapes_;
  std::vector<std::size_t> offsets_;  // num_layers + 1 prefix sums
};

using LayoutPtr = std::shared_ptr<const Layout>;

bool same_layout(const LayoutPtr& a, const LayoutPtr& b);

class ParamVector {
 public:
  ParamVector() = default;
  // Throws kCorruptState if values.size() != layout->total_size().
  ParamVector(LayoutPtr layout, std::vector<double> values);

  static ParamVector zeros(LayoutPtr layout);

  const LayoutPtr& layout() const { return layout_; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const double> layer(std::size_t index) const;
  std::span<double> layer(std::size_t index);

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool all_finite() const;
  bool conforms_to(const ParamVector& other) const { return same_layout(layout_, other.layout_); }

  bool operator==(const ParamVector& other) const {
    return conforms_to(other) && values_ == other.values_;
  }

 private:
  LayoutPtr layout_;
  std::vector<double> values_;
};

struct LayerRange {
  std::size_t first = 0;  // first layer in the segment
  std::size_t end = 0;    // one past the last layer

  std::size_t layer_count() const { return end - first; }
  bool operator==(const LayerRange&) const = default;
};

class SegmentPlan {
 public:
  // Throws kInvalidPlan unless `ranges` is a contiguous, nonempty cover of
  // the layout's layers.
  SegmentPlan(LayoutPtr layout, std::vector<LayerRange> ranges);

  const LayoutPtr& layout() const { return layout_; }
  std::size_t num_segments() const { return ranges_.size(); }
  std::size_t total_layers() const { return layout_->num_layers(); }
  std::span<const LayerRange> ranges() const { return ranges_; }
  const LayerRange& range(std::size_t segment) const;

  // Element span of a segment inside a flat ParamVector.
  std::size_t element_offset(std::size_t segment) const;
  std::size_t element_count(std::size_t segment) const;

  bool operator==(const SegmentPlan& other) const {
    return *layout_ == *other.layout_ && ranges_ == other.ranges_;
  }

 private:
  LayoutPtr layout_;
  std::vector<LayerRange> ranges_;
};

struct FlatSegment {
  std::size_t segment_index = 0;
  std::vector<double> values;
};

// Partitions the layers into `num_segments` contiguous segments whose
// largest element count is as small as possible. The split is produced by
// left-to-right greedy packing under the smallest feasible capacity.
SegmentPlan build_segment_plan(const LayoutPtr& layout, std::size_t num_segments);

FlatSegment flatten_tensors(const ParamVector& params, const SegmentPlan& plan,
                            std::size_t segment_index);

std::vector<std::vector<double>> unflatten_tensors(const FlatSegment& flat,
                                                   const SegmentPlan& plan);

}  // namespace crossover
