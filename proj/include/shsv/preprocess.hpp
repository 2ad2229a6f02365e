/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace shsv {

/// 8-bit grayscale image, row-major.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h, fill) {}

    std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
    std::uint8_t& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }

    bool operator==(const GrayImage&) const = default;
};

using Histogram = std::array<std::uint64_t, 256>;

Histogram histogram(const GrayImage& img);

/**
 * Otsu threshold: the t maximising the between-class variance of {<= t} and
 * {> t}. Candidates start at the lowest occupied intensity so the lower class
 * is never empty; an empty upper class scores zero. Ties go to the smallest t.
 */
int otsu_threshold(const Histogram& hist);

/// Pads onto a white canvas; odd margins put the extra pixel right/bottom.
GrayImage center_on_canvas(const GrayImage& img, std::size_t canvas_w, std::size_t canvas_h);

/// Pixels above the Otsu threshold become 255, then every pixel p -> 255 - p.
GrayImage remove_background_and_invert(const GrayImage& img, int* threshold_out = nullptr);

/// Corner-aligned bilinear resampling, rounded half-up.
GrayImage resize_bilinear(const GrayImage& img, std::size_t out_h, std::size_t out_w);

GrayImage center_crop(const GrayImage& img, std::size_t crop_h, std::size_t crop_w);

struct PreprocessConfig {
    std::size_t canvas_w = 1360;
    std::size_t canvas_h = 952;
    std::size_t resize_h = 170;
    std::size_t resize_w = 242;
    std::size_t crop_h = 150;
    std::size_t crop_w = 220;
};

struct PreprocessResult {
    GrayImage image;
    int otsu = 0;
};

/// canvas -> background removal + inversion -> resize -> center crop.
PreprocessResult preprocess_signature(const GrayImage& img, const PreprocessConfig& cfg = {});

/// Binary PGM (P5, maxval <= 255).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

}  // namespace shsv
