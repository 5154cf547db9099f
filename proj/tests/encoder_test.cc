// Copyright 2026 The ABA Authors
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

#include "aba/encoder.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "aba/error.h"

namespace aba {
namespace {

EncoderConfig Config(int pool_grid = 16) {
  EncoderConfig cfg;
  cfg.pool_grid = pool_grid;
  cfg.history = 2;
  cfg.known_labels = 4;
  return cfg;
}

std::vector<Observation> History(const LabelGridImage& image) {
  return {{image, {1, 2, 0}, 0}, {image, {3, 4, 1}, 1}};
}

// Occupancy fraction of `channel` in pooled block (br, bc), counted cell by
// cell.
double BlockOccupancy(const LabelGridImage& image, const EncoderConfig& cfg, int channel,
                      int br, int bc) {
  const int bh = cfg.grid_height / cfg.pool_grid;
  const int bw = cfg.grid_width / cfg.pool_grid;
  int hits = 0;
  for (int r = br * bh; r < (br + 1) * bh; ++r) {
    for (int c = bc * bw; c < (bc + 1) * bw; ++c) {
      const int id = image.at(r, c);
      hits += (id < cfg.known_labels ? id : cfg.known_labels) == channel;
    }
  }
  return static_cast<double>(hits) / (bh * bw);
}

int Index(const EncoderConfig& cfg, int channel, int br, int bc) {
  return (channel * cfg.pool_grid + br) * cfg.pool_grid + bc;
}

TEST(EncodeTest, AllBackgroundImage) {
  const EncoderConfig cfg = Config();
  const Embedding z = Encode(History(LabelGridImage(32, 32, 0)), cfg);
  ASSERT_EQ(static_cast<int>(z.size()), cfg.dimension());
  const int g2 = cfg.pool_grid * cfg.pool_grid;
  for (int i = 0; i < g2; ++i) EXPECT_EQ(z[i], 1.0);
  for (int i = g2; i < cfg.image_dimension(); ++i) EXPECT_EQ(z[i], 0.0);
  const std::vector<double> proprio(z.begin() + cfg.image_dimension(), z.end());
  EXPECT_EQ(proprio, (std::vector<double>{1.0 / 32, 2.0 / 32, 0, 3.0 / 32, 4.0 / 32, 1}));
}

TEST(EncodeTest, MatchesBlockCountingOnRandomImages) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> label(0, 7);
  for (int pool : {4, 8, 16}) {
    const EncoderConfig cfg = Config(pool);
    for (int trial = 0; trial < 20; ++trial) {
      LabelGridImage image(32, 32, 0);
      for (int r = 0; r < 32; ++r) {
        for (int c = 0; c < 32; ++c) image.set(r, c, static_cast<LabelId>(label(rng)));
      }
      const Embedding z = Encode(History(image), cfg);
      for (int ch = 0; ch <= cfg.known_labels; ++ch) {
        for (int br = 0; br < pool; ++br) {
          for (int bc = 0; bc < pool; ++bc) {
            ASSERT_NEAR(z[Index(cfg, ch, br, bc)], BlockOccupancy(image, cfg, ch, br, bc), 1e-12);
          }
        }
      }
    }
  }
}

TEST(EncodeTest, TranslationByOneBlockMovesMassToTheNeighbour) {
  const EncoderConfig cfg = Config(8);  // 4x4 blocks
  LabelGridImage a(32, 32, 0), b(32, 32, 0);
  for (int r = 8; r < 12; ++r) {
    for (int c = 4; c < 8; ++c) {
      a.set(r, c, 2);
      b.set(r, c + 4, 2);
    }
  }
  const Embedding za = Encode(History(a), cfg);
  const Embedding zb = Encode(History(b), cfg);
  EXPECT_EQ(za[Index(cfg, 2, 2, 1)], 1.0);
  EXPECT_EQ(za[Index(cfg, 2, 2, 2)], 0.0);
  EXPECT_EQ(zb[Index(cfg, 2, 2, 1)], 0.0);
  EXPECT_EQ(zb[Index(cfg, 2, 2, 2)], 1.0);
}

TEST(EncodeTest, ChangesStayInsideTheTouchedBlock) {
  const EncoderConfig cfg = Config(8);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cell(0, 31), label(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    LabelGridImage image(32, 32, 0);
    for (int i = 0; i < 100; ++i) image.set(cell(rng), cell(rng), label(rng));
    LabelGridImage changed = image;
    const int br = cell(rng) / 4, bc = cell(rng) / 4;
    for (int i = 0; i < 5; ++i) {
      changed.set(br * 4 + cell(rng) % 4, bc * 4 + cell(rng) % 4, label(rng));
    }
    const Embedding z0 = Encode(History(image), cfg);
    const Embedding z1 = Encode(History(changed), cfg);
    for (int ch = 0; ch <= cfg.known_labels; ++ch) {
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
          if (r == br && c == bc) continue;
          ASSERT_EQ(z0[Index(cfg, ch, r, c)], z1[Index(cfg, ch, r, c)]);
        }
      }
    }
  }
}

TEST(EncodeTest, UnregisteredLabelsFallInTheUnknownChannel) {
  const EncoderConfig cfg = Config(8);
  LabelGridImage image(32, 32, 0);
  for (int c = 0; c < 4; ++c) image.set(0, c, 9);
  const Embedding z = Encode(History(image), cfg);
  EXPECT_EQ(z[Index(cfg, cfg.known_labels, 0, 0)], 0.25);
  for (int ch = 1; ch < cfg.known_labels; ++ch) {
    for (int i = 0; i < 64; ++i) EXPECT_EQ(z[ch * 64 + i], 0.0);
  }
}

TEST(EncodeTest, HistoryAndConfigChecks) {
  const EncoderConfig cfg = Config();
  const std::vector<Observation> one = {{LabelGridImage(32, 32, 0), {}, 0}};
  EXPECT_THROW(Encode(one, cfg), ValidationError);
  const std::vector<Observation> small = {{LabelGridImage(8, 8, 0), {}, 0},
                                          {LabelGridImage(8, 8, 0), {}, 1}};
  EXPECT_THROW(Encode(small, cfg), ValidationError);
  EncoderConfig bad = cfg;
  bad.pool_grid = 5;
  EXPECT_THROW(bad.Validate(), ValidationError);
  EXPECT_NO_THROW(cfg.Validate());
}

TEST(EncodeAtTest, EarlyIndicesRepeatTheFirstProprio) {
  const EncoderConfig cfg = Config();
  std::vector<Observation> seq;
  for (int t = 0; t < 3; ++t) seq.push_back({LabelGridImage(32, 32, 0), {t * 1.0, 0, 0}, t});
  const Embedding z0 = EncodeAt(seq, 0, cfg);
  const Embedding z2 = EncodeAt(seq, 2, cfg);
  const int q = cfg.image_dimension();
  EXPECT_EQ(z0[q], 0.0);
  EXPECT_EQ(z0[q + 3], 0.0);
  EXPECT_EQ(z2[q], 1.0 / 32);
  EXPECT_EQ(z2[q + 3], 2.0 / 32);
  EXPECT_EQ(z2, Encode(std::span(seq).subspan(1, 2), cfg));
  EXPECT_THROW(EncodeAt(seq, 3, cfg), ValidationError);
}

TEST(VisualFeaturesTest, DropsTheDominantLabel) {
  LabelGridImage image(8, 8, 6);
  image.set(0, 0, 1);
  image.set(7, 7, 3);
  const Embedding f = VisualFeatures(image, 2);
  ASSERT_EQ(f.size(), 8u);
  // channel 0 objects, channel 1 agent; 4x4 blocks
  EXPECT_EQ(f, (std::vector<double>{0, 0, 0, 1.0 / 16, 1.0 / 16, 0, 0, 0}));
  LabelGridImage other_background = image;
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      if (image.at(r, c) == 6) other_background.set(r, c, 0);
    }
  }
  EXPECT_EQ(VisualFeatures(other_background, 2), f);
}

TEST(CosineSimilarityTest, KnownValues) {
  EXPECT_DOUBLE_EQ(CosineSimilarity(std::vector<double>{1, 0}, std::vector<double>{2, 0}), 1.0);
  EXPECT_DOUBLE_EQ(CosineSimilarity(std::vector<double>{1, 0}, std::vector<double>{0, 3}), 0.0);
  EXPECT_NEAR(CosineSimilarity(std::vector<double>{1, 0}, std::vector<double>{1, 1}),
              std::sqrt(0.5), 1e-15);
  EXPECT_THROW(CosineSimilarity(std::vector<double>{0, 0}, std::vector<double>{1, 1}),
               RuntimeFailure);
  EXPECT_THROW(CosineSimilarity(std::vector<double>{1}, std::vector<double>{1, 1}),
               ValidationError);
}

}  // namespace
}  // namespace aba
