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
#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "oracles/oracles.hpp"
#include "shsv/errors.hpp"
#include "shsv/preprocess.hpp"
#include "shsv/rng.hpp"
#include "test_util.hpp"

namespace {

using shsv::GrayImage;

GrayImage two_gaussian_image(std::uint64_t seed, std::size_t w = 64, std::size_t h = 48) {
    shsv::Rng rng(seed);
    GrayImage img(w, h);
    const double ink = 40 + 40 * rng.uniform(), paper = 190 + 40 * rng.uniform();
    for (auto& p : img.pixels) {
        const bool stroke = rng.uniform() < 0.2;
        const double v = (stroke ? ink : paper) + rng.normal() * 15;
        p = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return img;
}

TEST(Otsu, AllMassAtOneIntensity) {
    shsv::Histogram h{};
    h[7] = 1000;
    EXPECT_EQ(shsv::otsu_threshold(h), 7);
}

TEST(Otsu, EmptyHistogramIsError) {
    shsv::Histogram h{};
    EXPECT_THROW(shsv::otsu_threshold(h), shsv::DataError);
}

TEST(Otsu, BimodalMatchesSweep) {
    shsv::Histogram h{};
    h[10] = 100;
    h[200] = 100;
    const int t = shsv::otsu_threshold(h);
    EXPECT_GE(t, 10);
    EXPECT_LE(t, 199);
    EXPECT_EQ(t, oracle::otsu_sweep(h));
}

TEST(Otsu, TwoGaussianImageMatchesSweep) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto h = shsv::histogram(two_gaussian_image(seed));
        EXPECT_EQ(shsv::otsu_threshold(h), oracle::otsu_sweep(h)) << "seed " << seed;
    }
}

TEST(Otsu, RandomHistogramsMatchSweep) {
    shsv::Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        shsv::Histogram h{};
        const auto occupied = 1 + rng.below(20);
        for (std::uint64_t i = 0; i < occupied; ++i) {
            h[rng.below(256)] += 1 + rng.below(trial % 2 == 0 ? 5 : 100000);
        }
        ASSERT_EQ(shsv::otsu_threshold(h), oracle::otsu_sweep(h)) << "trial " << trial;
    }
}

TEST(Canvas, EvenMarginsAndRemainder) {
    GrayImage img(2, 2, 9);
    const auto c = shsv::center_on_canvas(img, 4, 4);
    ASSERT_EQ(c.width, 4u);
    ASSERT_EQ(c.height, 4u);
    EXPECT_EQ(c.at(0, 0), 255);
    EXPECT_EQ(c.at(1, 1), 9);
    EXPECT_EQ(c.at(2, 2), 9);
    EXPECT_EQ(c.at(3, 3), 255);

    const auto c3 = shsv::center_on_canvas(GrayImage(3, 3, 9), 4, 4);
    EXPECT_EQ(c3.at(0, 0), 9);
    EXPECT_EQ(c3.at(2, 2), 9);
    EXPECT_EQ(c3.at(3, 0), 255);
    EXPECT_EQ(c3.at(0, 3), 255);
}

TEST(Canvas, SameSizeIsIdentity) {
    const auto img = two_gaussian_image(3, 10, 7);
    EXPECT_EQ(shsv::center_on_canvas(img, 10, 7), img);
}

TEST(Canvas, SmallerCanvasIsError) { EXPECT_THROW(shsv::center_on_canvas(GrayImage(5, 5), 4, 6), shsv::DataError); }

TEST(Background, UniformWhiteBecomesZero) {
    const auto out = shsv::remove_background_and_invert(GrayImage(6, 4, 255));
    for (auto p : out.pixels) {
        EXPECT_EQ(p, 0);
    }
}

TEST(Background, BinaryImage) {
    GrayImage img(4, 1);
    img.pixels = {0, 255, 0, 255};
    const auto out = shsv::remove_background_and_invert(img);
    EXPECT_EQ(out.pixels, (std::vector<std::uint8_t>{255, 0, 255, 0}));
}

TEST(Background, BackgroundCountFollowsThreshold) {
    const auto img = two_gaussian_image(12);
    const int t = oracle::otsu_sweep(shsv::histogram(img));
    std::size_t above = 0;
    for (auto p : img.pixels) {
        above += p > t ? 1 : 0;
    }
    int used = -1;
    const auto out = shsv::remove_background_and_invert(img, &used);
    EXPECT_EQ(used, t);
    std::size_t zeros = 0;
    for (auto p : out.pixels) {
        zeros += p == 0 ? 1 : 0;
    }
    // Foreground pixels at exactly 255 would also map to 0; none exist below the threshold here.
    EXPECT_EQ(zeros, above);
}

TEST(Resize, SameDimsIsIdentity) {
    const auto img = two_gaussian_image(4, 9, 5);
    EXPECT_EQ(shsv::resize_bilinear(img, 5, 9), img);
}

TEST(Resize, HandComputedMiddleColumn) {
    GrayImage img(2, 2);
    img.pixels = {0, 255, 0, 255};
    const auto out = shsv::resize_bilinear(img, 2, 3);
    // Corner-aligned: output column 1 samples x = 0.5, i.e. 127.5, rounded half-up.
    EXPECT_EQ(out.pixels, (std::vector<std::uint8_t>{0, 128, 255, 0, 128, 255}));
}

TEST(Resize, ShapeAndErrors) {
    const auto img = two_gaussian_image(5, 31, 17);
    const auto out = shsv::resize_bilinear(img, 170, 242);
    EXPECT_EQ(out.height, 170u);
    EXPECT_EQ(out.width, 242u);
    EXPECT_THROW(shsv::resize_bilinear(img, 0, 3), shsv::DataError);
}

TEST(Crop, DefaultOffsets) {
    GrayImage img(242, 170);
    for (std::size_t r = 0; r < 170; ++r) {
        for (std::size_t c = 0; c < 242; ++c) {
            img.at(r, c) = static_cast<std::uint8_t>((r * 7 + c * 3) % 251);
        }
    }
    const auto out = shsv::center_crop(img, 150, 220);
    ASSERT_EQ(out.height, 150u);
    ASSERT_EQ(out.width, 220u);
    EXPECT_EQ(out.at(0, 0), img.at(10, 11));
    EXPECT_EQ(out.at(149, 219), img.at(159, 230));
}

TEST(Crop, FullSizeIsIdentityAndOversizeIsError) {
    const auto img = two_gaussian_image(6, 12, 8);
    EXPECT_EQ(shsv::center_crop(img, 8, 12), img);
    EXPECT_THROW(shsv::center_crop(img, 9, 12), shsv::DataError);
}

GrayImage stroke_image(std::size_t w, std::size_t h) {
    GrayImage img(w, h, 230);
    for (std::size_t r = h / 3; r < 2 * h / 3; ++r) {
        for (std::size_t c = w / 4; c < 3 * w / 4; ++c) {
            if ((r + c) % 5 < 2) {
                img.at(r, c) = 30;
            }
        }
    }
    return img;
}

TEST(Pipeline, AlwaysYieldsDefaultCropAndZeroBorder) {
    shsv::PreprocessConfig cfg;
    cfg.canvas_w = 400;
    cfg.canvas_h = 300;
    for (auto [w, h] : {std::pair<std::size_t, std::size_t>{40, 30}, {399, 299}, {120, 250}, {1, 1}}) {
        const auto res = shsv::preprocess_signature(stroke_image(w, h), cfg);
        ASSERT_EQ(res.image.width, 220u);
        ASSERT_EQ(res.image.height, 150u);
        for (std::size_t c = 0; c < 220; ++c) {
            EXPECT_EQ(res.image.at(0, c), 0);
            EXPECT_EQ(res.image.at(149, c), 0);
        }
        for (std::size_t r = 0; r < 150; ++r) {
            EXPECT_EQ(res.image.at(r, 0), 0);
            EXPECT_EQ(res.image.at(r, 219), 0);
        }
    }
}

TEST(Pgm, RoundTripWithComment) {
    testutil::TempDir dir;
    const auto img = two_gaussian_image(7, 13, 6);
    shsv::write_pgm(img, dir / "a.pgm");
    EXPECT_EQ(shsv::read_pgm(dir / "a.pgm"), img);
    {
        std::ofstream out(dir / "c.pgm", std::ios::binary);
        out << "P5\n# scanner output\n2 1\n255\n";
        out.put(static_cast<char>(12));
        out.put(static_cast<char>(250));
    }
    const auto c = shsv::read_pgm(dir / "c.pgm");
    EXPECT_EQ(c.pixels, (std::vector<std::uint8_t>{12, 250}));
}

TEST(Pgm, RejectsOtherFormats) {
    testutil::TempDir dir;
    {
        std::ofstream out(dir / "a.pgm");
        out << "P2\n1 1\n255\n0\n";
    }
    EXPECT_THROW(shsv::read_pgm(dir / "a.pgm"), shsv::DataError);
    EXPECT_THROW(shsv::read_pgm(dir / "missing.pgm"), shsv::DataError);
}

}  // namespace
