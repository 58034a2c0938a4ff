// affectrepr/types.hpp

// Copyright 2026  The affectrepr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef AFFECTREPR_TYPES_HPP
#define AFFECTREPR_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace affect {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-utterance feature container: rows are frames in time order, columns are
// feature dimensions. Row-major so the on-disk layout matches memory.
using FeatureMatrix = RowMatrix<float>;

// Feature family tags, written as a single byte into feature files.
enum class DimKind : std::uint8_t {
  kFft513 = 0,
  kFft128 = 1,
  kLogMel40 = 2,
  kCtx5Fft128 = 3,
  kCtx5LogMel40 = 4,
};

inline int dim_of(DimKind kind) {
  switch (kind) {
    case DimKind::kFft513: return 513;
    case DimKind::kFft128: return 128;
    case DimKind::kLogMel40: return 40;
    case DimKind::kCtx5Fft128: return 640;
    case DimKind::kCtx5LogMel40: return 200;
  }
  throw std::invalid_argument("dim_of: unknown DimKind");
}

inline const char* name_of(DimKind kind) {
  switch (kind) {
    case DimKind::kFft513: return "fft513";
    case DimKind::kFft128: return "fft128";
    case DimKind::kLogMel40: return "logmel40";
    case DimKind::kCtx5Fft128: return "ctx5-of-fft128";
    case DimKind::kCtx5LogMel40: return "ctx5-of-logmel40";
  }
  throw std::invalid_argument("name_of: unknown DimKind");
}

// Error raised when a pipeline stage cannot find an upstream artifact.
// The CLI maps it to exit code 3.
class MissingArtifactError : public std::runtime_error {
 public:
  explicit MissingArtifactError(const std::string& what)
      : std::runtime_error(what) {}
};

// Error raised when training produces non-finite values. Exit code 4.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace affect

#endif  // AFFECTREPR_TYPES_HPP
