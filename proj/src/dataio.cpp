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

#include "gradguard/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

namespace gradguard::dataio {

const char* SourceName(ImageSource source) {
  switch (source) {
    case ImageSource::kCifar10: return "cifar10";
    case ImageSource::kCifar100: return "cifar100";
    case ImageSource::kSynthetic: return "synthetic";
  }
  return "?";
}

std::size_t CifarRecordSize(CifarVariant variant) {
  return (variant == CifarVariant::kCifar10 ? 1 : 2) + kCifarPixels;
}

std::size_t CifarClassCount(CifarVariant variant) {
  return variant == CifarVariant::kCifar10 ? 10 : 100;
}

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at byte offset " + std::to_string(offset)),
      offset_(offset) {}

std::vector<LabeledImage> ParseCifar(std::span<const std::uint8_t> bytes,
                                     CifarVariant variant) {
  const std::size_t record = CifarRecordSize(variant);
  const std::size_t classes = CifarClassCount(variant);
  const std::size_t header = record - kCifarPixels;
  if (bytes.size() % record != 0) {
    throw ParseError("truncated record: " + std::to_string(bytes.size()) +
                         " bytes is not a multiple of " +
                         std::to_string(record),
                     bytes.size() - bytes.size() % record);
  }
  const ImageSource source = variant == CifarVariant::kCifar10
                                 ? ImageSource::kCifar10
                                 : ImageSource::kCifar100;
  std::vector<LabeledImage> out;
  out.reserve(bytes.size() / record);
  for (std::size_t offset = 0; offset < bytes.size(); offset += record) {
    const auto rec = bytes.subspan(offset, record);
    const std::uint8_t label = rec[header - 1];
    if (label >= classes) {
      throw ParseError("label " + std::to_string(label) + " out of range for " +
                           std::to_string(classes) + " classes",
                       offset + header - 1);
    }
    std::vector<double> pixels(kCifarPixels);
    for (std::size_t i = 0; i < kCifarPixels; ++i) {
      pixels[i] = rec[header + i] / 255.0;
    }
    out.push_back(LabeledImage{ad::Tensor({3, 32, 32}, std::move(pixels)),
                               label, source,
                               header == 2 ? rec[0] : std::uint8_t{0}});
  }
  return out;
}

std::vector<LabeledImage> ReadCifarFile(const std::filesystem::path& path,
                                        CifarVariant variant) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return ParseCifar(bytes, variant);
}

std::vector<std::uint8_t> WriteCifar(std::span<const LabeledImage> images,
                                     CifarVariant variant) {
  const std::size_t classes = CifarClassCount(variant);
  std::vector<std::uint8_t> out;
  out.reserve(images.size() * CifarRecordSize(variant));
  for (const LabeledImage& img : images) {
    if (img.pixels.shape() != ad::Shape{3, 32, 32}) {
      throw std::invalid_argument("CIFAR records are 3x32x32, got " +
                                  ad::ShapeToString(img.pixels.shape()));
    }
    if (img.label >= classes) {
      throw std::invalid_argument("label out of range for CIFAR variant");
    }
    if (variant == CifarVariant::kCifar100) out.push_back(img.coarse_label);
    out.push_back(static_cast<std::uint8_t>(img.label));
    for (double v : img.pixels.data()) {
      out.push_back(static_cast<std::uint8_t>(
          std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
  }
  return out;
}

std::vector<LabeledImage> SynthImages(std::size_t count, std::uint64_t seed,
                                      std::size_t num_classes,
                                      const ad::Shape& shape) {
  if (count == 0) throw std::invalid_argument("SynthImages: count must be >= 1");
  if (num_classes == 0) throw std::invalid_argument("SynthImages: no classes");
  if (shape.size() != 3) {
    throw std::invalid_argument("SynthImages: shape must be [C,H,W]");
  }
  const std::size_t c = shape[0], h = shape[1], w = shape[2];
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(-1.5, 1.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(0.5, 1.0);

  std::vector<LabeledImage> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    std::vector<double> px(c * h * w, 0.0);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (int wave = 0; wave < 3; ++wave) {
        const double fu = freq(rng), fv = freq(rng), ph = phase(rng),
                     a = amp(rng);
        for (std::size_t i = 0; i < h; ++i) {
          for (std::size_t j = 0; j < w; ++j) {
            px[(ch * h + i) * w + j] +=
                a * std::cos(2.0 * std::numbers::pi *
                                 (fu * static_cast<double>(i) / h +
                                  fv * static_cast<double>(j) / w) +
                             ph);
          }
        }
      }
    }
    const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
    const double low = *lo, span = *hi - *lo;
    for (double& v : px) v = span > 0.0 ? (v - low) / span : 0.5;
    out.push_back(LabeledImage{ad::Tensor(shape, std::move(px)),
                               n % num_classes, ImageSource::kSynthetic, 0});
  }
  return out;
}

}  // namespace gradguard::dataio
