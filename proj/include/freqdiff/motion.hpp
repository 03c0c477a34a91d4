// Copyright 2026 The freqdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "freqdiff/common.hpp"

namespace freqdiff {

/// One motion clip: frames along rows (time axis 0), feature dimensions along
/// columns. Always non-empty and finite.
class MotionSequence {
 public:
  explicit MotionSequence(Matrix data, std::optional<double> frame_rate_hz = std::nullopt)
      : data_(std::move(data)), frame_rate_hz_(frame_rate_hz) {
    require(data_.rows() >= 1, "motion sequence needs at least one frame");
    require(data_.cols() >= 1, "motion sequence needs at least one dimension");
    require(data_.allFinite(), "motion sequence entries must be finite");
    require(!frame_rate_hz_ || *frame_rate_hz_ > 0.0, "frame rate must be positive");
  }

  static MotionSequence zeros(Eigen::Index frames, Eigen::Index dims) {
    return MotionSequence(Matrix::Zero(frames, dims));
  }

  const Matrix& data() const noexcept { return data_; }
  Eigen::Index frames() const noexcept { return data_.rows(); }
  Eigen::Index dims() const noexcept { return data_.cols(); }
  std::optional<double> frame_rate_hz() const noexcept { return frame_rate_hz_; }

  double operator()(Eigen::Index frame, Eigen::Index dim) const { return data_(frame, dim); }

  bool same_shape(const MotionSequence& other) const noexcept {
    return frames() == other.frames() && dims() == other.dims();
  }

 private:
  Matrix data_;
  std::optional<double> frame_rate_hz_;
};

/// Binary per-frame validity mask.
class FrameMask {
 public:
  FrameMask() = default;
  explicit FrameMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  static FrameMask full(std::size_t frames) { return FrameMask(std::vector<std::uint8_t>(frames, 1)); }

  /// The first `valid` of `frames` bits set: the usual padding layout.
  static FrameMask prefix(std::size_t frames, std::size_t valid) {
    std::vector<std::uint8_t> bits(frames, 0);
    for (std::size_t i = 0; i < valid && i < frames; ++i) bits[i] = 1;
    return FrameMask(std::move(bits));
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace freqdiff
