#pragma once

// 16x16 dataset and micro training config shared by trainer, eval and
// service tests.

#include "relight/scene/dataset.hpp"
#include "relight/train/config.hpp"
#include "support/tempdir.hpp"

namespace small_data {

inline relight::scene::DatasetConfig dataset_config(int lights = 3) {
  relight::scene::DatasetConfig d;
  d.scenes = 4;
  d.val_scenes = 1;
  d.test_scenes = 1;
  d.views = 2;
  d.lights = lights;
  d.width = 16;
  d.height = 16;
  d.seed = 2;
  return d;
}

/// Built once per process: 4 train, 2 val and 2 test views.
inline const relight::scene::Manifest& dataset() {
  static testing_support::TempDir dir("small_data");
  static const relight::scene::Manifest m = relight::scene::make_dataset(dataset_config(), dir / "data");
  return m;
}

inline relight::train::TrainConfig train_config() {
  relight::train::TrainConfig c;
  c.model.width = 16;
  c.model.height = 16;
  c.model.steps = 8;
  c.model.features = 2;
  c.model.levels = 3;
  c.crop = 16;
  c.batch_size = 2;
  c.eval_views = 2;
  c.eval_every = 0;
  c.checkpoint_every = 0;
  c.log_every = 1;
  return c;
}

}  // namespace small_data
