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
#include "shsv/preprocess.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "shsv/errors.hpp"

namespace shsv {

namespace {

void check_image(const GrayImage& img) {
    if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height) {
        throw DataError(fmt::format("invalid image {}x{} with {} pixels", img.width, img.height, img.pixels.size()));
    }
}

}  // namespace

Histogram histogram(const GrayImage& img) {
    Histogram h{};
    for (auto p : img.pixels) {
        ++h[p];
    }
    return h;
}

int otsu_threshold(const Histogram& hist) {
    std::uint64_t total = 0;
    unsigned __int128 sum = 0;
    for (int i = 0; i < 256; ++i) {
        total += hist[i];
        sum += static_cast<unsigned __int128>(hist[i]) * static_cast<unsigned>(i);
    }
    if (total == 0) {
        throw DataError("otsu_threshold: empty histogram");
    }
    int first = 0;
    while (hist[first] == 0) {
        ++first;
    }
    // sigma_b^2 * N^2 = (S0*N - S*n0)^2 / (n0*n1); a pure function of the
    // integer class statistics, so empty bins produce exact ties.
    std::uint64_t n0 = 0;
    unsigned __int128 s0 = 0;
    for (int t = 0; t < first; ++t) {
        n0 += hist[t];
    }
    int best_t = first;
    double best = -1.0;
    for (int t = first; t < 256; ++t) {
        n0 += hist[t];
        s0 += static_cast<unsigned __int128>(hist[t]) * static_cast<unsigned>(t);
        const std::uint64_t n1 = total - n0;
        double score = 0.0;
        if (n1 > 0) {
            const auto lhs = static_cast<__int128>(s0 * total);
            const auto rhs = static_cast<__int128>(sum * n0);
            const double diff = static_cast<double>(lhs - rhs);
            score = diff * diff / (static_cast<double>(n0) * static_cast<double>(n1));
        }
        if (score > best) {
            best = score;
            best_t = t;
        }
    }
    return best_t;
}

GrayImage center_on_canvas(const GrayImage& img, std::size_t canvas_w, std::size_t canvas_h) {
    check_image(img);
    if (canvas_w < img.width || canvas_h < img.height) {
        throw DataError(fmt::format("canvas {}x{} is smaller than image {}x{}", canvas_w, canvas_h, img.width,
                                    img.height));
    }
    GrayImage out(canvas_w, canvas_h, 255);
    const std::size_t top = (canvas_h - img.height) / 2;
    const std::size_t left = (canvas_w - img.width) / 2;
    for (std::size_t r = 0; r < img.height; ++r) {
        for (std::size_t c = 0; c < img.width; ++c) {
            out.at(top + r, left + c) = img.at(r, c);
        }
    }
    return out;
}

GrayImage remove_background_and_invert(const GrayImage& img, int* threshold_out) {
    check_image(img);
    const int t = otsu_threshold(histogram(img));
    if (threshold_out != nullptr) {
        *threshold_out = t;
    }
    GrayImage out = img;
    for (auto& p : out.pixels) {
        const std::uint8_t v = p > t ? 255 : p;
        p = static_cast<std::uint8_t>(255 - v);
    }
    return out;
}

GrayImage resize_bilinear(const GrayImage& img, std::size_t out_h, std::size_t out_w) {
    check_image(img);
    if (out_h == 0 || out_w == 0) {
        throw DataError("resize_bilinear: target dimensions must be positive");
    }
    GrayImage out(out_w, out_h);
    const double sy = out_h > 1 ? static_cast<double>(img.height - 1) / static_cast<double>(out_h - 1) : 0.0;
    const double sx = out_w > 1 ? static_cast<double>(img.width - 1) / static_cast<double>(out_w - 1) : 0.0;
    for (std::size_t r = 0; r < out_h; ++r) {
        const double y = static_cast<double>(r) * sy;
        const auto y0 = std::min(static_cast<std::size_t>(y), img.height - 1);
        const std::size_t y1 = std::min(y0 + 1, img.height - 1);
        const double fy = y - static_cast<double>(y0);
        for (std::size_t c = 0; c < out_w; ++c) {
            const double x = static_cast<double>(c) * sx;
            const auto x0 = std::min(static_cast<std::size_t>(x), img.width - 1);
            const std::size_t x1 = std::min(x0 + 1, img.width - 1);
            const double fx = x - static_cast<double>(x0);
            const double top = (1.0 - fx) * img.at(y0, x0) + fx * img.at(y0, x1);
            const double bottom = (1.0 - fx) * img.at(y1, x0) + fx * img.at(y1, x1);
            const double v = (1.0 - fy) * top + fy * bottom;
            out.at(r, c) = static_cast<std::uint8_t>(std::min(255.0, std::floor(v + 0.5)));
        }
    }
    return out;
}

GrayImage center_crop(const GrayImage& img, std::size_t crop_h, std::size_t crop_w) {
    check_image(img);
    if (crop_h == 0 || crop_w == 0 || crop_h > img.height || crop_w > img.width) {
        throw DataError(fmt::format("crop {}x{} does not fit image {}x{}", crop_h, crop_w, img.height, img.width));
    }
    const std::size_t top = (img.height - crop_h) / 2;
    const std::size_t left = (img.width - crop_w) / 2;
    GrayImage out(crop_w, crop_h);
    for (std::size_t r = 0; r < crop_h; ++r) {
        for (std::size_t c = 0; c < crop_w; ++c) {
            out.at(r, c) = img.at(top + r, left + c);
        }
    }
    return out;
}

PreprocessResult preprocess_signature(const GrayImage& img, const PreprocessConfig& cfg) {
    PreprocessResult res;
    const auto canvas = center_on_canvas(img, cfg.canvas_w, cfg.canvas_h);
    const auto cleaned = remove_background_and_invert(canvas, &res.otsu);
    const auto resized = resize_bilinear(cleaned, cfg.resize_h, cfg.resize_w);
    res.image = center_crop(resized, cfg.crop_h, cfg.crop_w);
    return res;
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    auto token = [&]() {
        std::string tok;
        char c;
        while (in.get(c)) {
            if (c == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!tok.empty()) {
                    break;
                }
                continue;
            }
            tok.push_back(c);
        }
        return tok;
    };
    if (token() != "P5") {
        throw DataError("'" + path.string() + "' is not a binary PGM (P5)");
    }
    long w = 0, h = 0, maxval = 0;
    try {
        w = std::stol(token());
        h = std::stol(token());
        maxval = std::stol(token());
    } catch (const std::logic_error&) {
        throw DataError("'" + path.string() + "': malformed PGM header");
    }
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
        throw DataError("'" + path.string() + "': unsupported PGM geometry or maxval");
    }
    GrayImage img(static_cast<std::size_t>(w), static_cast<std::size_t>(h));
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
        throw DataError("'" + path.string() + "': truncated PGM pixel data");
    }
    if (maxval != 255) {
        for (auto& p : img.pixels) {
            p = static_cast<std::uint8_t>(std::min<long>(255, (p * 255L + maxval / 2) / maxval));
        }
    }
    return img;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    check_image(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open '" + path.string() + "' for writing");
    }
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!out) {
        throw DataError("write failed for '" + path.string() + "'");
    }
}

}  // namespace shsv
