/**
 * Copyright 2026 The gradguard Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GRADGUARD_DATAIO_HPP_
#define GRADGUARD_DATAIO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradguard/autodiff/tensor.hpp"

namespace gradguard::dataio {

enum class ImageSource { kCifar10, kCifar100, kSynthetic };

const char* SourceName(ImageSource source);

struct LabeledImage {
  ad::Tensor pixels;  // [C,H,W], every value in [0,1]
  std::size_t label = 0;
  ImageSource source = ImageSource::kSynthetic;
  // CIFAR-100 superclass; kept only so records can be written back exactly.
  std::uint8_t coarse_label = 0;
};

enum class CifarVariant { kCifar10, kCifar100 };

inline constexpr std::size_t kCifarPixels = 3 * 32 * 32;
std::size_t CifarRecordSize(CifarVariant variant);
std::size_t CifarClassCount(CifarVariant variant);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// CIFAR binary batches: per record a label byte (CIFAR-100: coarse then fine)
// followed by 1024 red, 1024 green and 1024 blue bytes in row-major order.
std::vector<LabeledImage> ParseCifar(std::span<const std::uint8_t> bytes,
                                     CifarVariant variant);
std::vector<LabeledImage> ReadCifarFile(const std::filesystem::path& path,
                                        CifarVariant variant);
// Inverse of ParseCifar; pixels are rounded to the nearest byte.
std::vector<std::uint8_t> WriteCifar(std::span<const LabeledImage> images,
                                     CifarVariant variant);

// Smooth seeded images: per channel a sum of three 2-D cosines, rescaled to
// [0,1]. Labels cycle 0, 1, ..., k-1, 0, ...
std::vector<LabeledImage> SynthImages(std::size_t count, std::uint64_t seed,
                                      std::size_t num_classes,
                                      const ad::Shape& shape = {3, 32, 32});

}  // namespace gradguard::dataio

#endif  // GRADGUARD_DATAIO_HPP_
