#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "relight/errors.hpp"
#include "relight/eval/metrics.hpp"
#include "relight/train/trainer.hpp"
#include "support/small_data.hpp"
#include "support/tempdir.hpp"

using namespace relight;
using namespace relight::train;
using testing_support::TempDir;

namespace {

scene::DatasetConfig small_dataset_config(int lights) { return small_data::dataset_config(lights); }
const scene::Manifest& small_dataset() { return small_data::dataset(); }
TrainConfig small_config() { return small_data::train_config(); }

double angle_deg(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(dot(a, b), -1.0, 1.0)) * 180.0 / M_PI;
}

std::vector<float> flat_params(const nn::Module<float>& m) {
  std::vector<float> out;
  for (const auto& p : m.parameters()) out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

double split_shadow_mse(const models::Generator& g, const scene::Manifest& m, scene::Split split) {
  scene::CorruptionConfig none;
  none.warp_amplitude = none.bump_amplitude = none.texture_amplitude = 0.0;
  double sum = 0.0;
  const auto pairs = eval::eval_pairs(m, split);
  for (const auto& p : pairs) {
    const auto e = eval::load_eval_sample(m, p, none);
    const models::PreparedView pv(e.color_old, e.depth_gt, e.camera);
    sum += eval::mse(models::learned_shadow(g, pv, e.l_new), e.shadow_new);
  }
  return sum / static_cast<double>(pairs.size());
}

}  // namespace

TEST_CASE("default training config snapshot") {
  const TrainConfig c;
  CHECK(c.lambda_c == 10.0);
  CHECK(c.lambda_s == 2.0);
  CHECK(c.lambda_r == 10.0);
  CHECK(c.lambda_a == 0.1);
  CHECK(c.lr == 1e-4);
  CHECK(c.gen_steps_per_disc == 5);
  CHECK(c.batch_size == 4);
  CHECK(c.p_gt == 0.8);
  CHECK(c.light_noise_deg == 3.0);
  CHECK(c.crop == 64);
  CHECK_NOTHROW(c.validate());

  const nlohmann::json j = c;
  TrainConfig back;
  from_json(j, back);
  CHECK(nlohmann::json(back) == j);

  TrainConfig partial;
  from_json(nlohmann::json{{"lambda_a", 0.0}, {"epochs", 2}}, partial);
  CHECK(partial.lambda_a == 0.0);
  CHECK(partial.epochs == 2);
  CHECK(partial.lambda_c == 10.0);

  TrainConfig bad = c;
  bad.lambda_s = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.p_gt = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.crop = 32;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("zero light noise keeps the manifest direction exactly") {
  const auto& m = small_dataset();
  TrainConfig c = small_config();
  c.light_noise_deg = 0.0;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const auto ex = sample_pair(m, rng, c);
    const auto& v = m.views[ex.view_index];
    CHECK(ex.light_old != ex.light_new);
    CHECK(ex.l_old == v.lights[static_cast<std::size_t>(ex.light_old)].direction);
    CHECK(ex.l_new == v.lights[static_cast<std::size_t>(ex.light_new)].direction);
    CHECK(v.split == scene::Split::train);
  }
}

TEST_CASE("light noise has the configured angular spread") {
  std::mt19937_64 rng(4);
  const auto l = LightDirection::normalized({0.3, -0.7, 0.2});
  double sum = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const auto p = perturb_light(l, 3.0, rng);
    CHECK(norm(p.vec()) == doctest::Approx(1.0).epsilon(1e-12));
    sum += angle_deg(p.vec(), l.vec());
  }
  // E|N(0, s)| = s sqrt(2/pi).
  CHECK(sum / n == doctest::Approx(3.0 * std::sqrt(2.0 / M_PI)).epsilon(0.05));
  CHECK(perturb_light(l, 0.0, rng) == l);
}

TEST_CASE("identity augmentation passes colors through unchanged") {
  const auto& m = small_dataset();
  TrainConfig c = small_config();
  c.augment = {0.0, 0.0, 0.0};
  std::mt19937_64 rng(5);
  const auto ex = sample_pair(m, rng, c);
  const auto imgs = scene::load_view(m, m.views[ex.view_index]);
  CHECK(ex.color_old == imgs.colors[static_cast<std::size_t>(ex.light_old)]);
  CHECK(ex.color_new == imgs.colors[static_cast<std::size_t>(ex.light_new)]);
  CHECK(ex.shadow_new == imgs.shadows[static_cast<std::size_t>(ex.light_new)]);
  CHECK(ex.depth_gt == imgs.depth);
  CHECK_FALSE(ex.depth_corrupted == imgs.depth);
}

TEST_CASE("tone augmentation is shared by both colors") {
  const ColorImage img(2, 1, {0.2f, 0.4f, 0.6f, 0.05f, 0.1f, 0.9f});
  ToneParams p;
  p.exposure = 2.0;
  const auto e = apply_tone(img, p);
  for (std::size_t i = 0; i < 6; ++i) CHECK(e.raster().storage()[i] == doctest::Approx(2.0 * img.raster().storage()[i]));
  CHECK(apply_tone(img, ToneParams{}) == img);

  // Saturation about Rec.709 luminance keeps the luminance.
  ToneParams s;
  s.saturation = 0.5;
  const auto d = apply_tone(img, s);
  for (int x = 0; x < 2; ++x) {
    auto lum = [&](const ColorImage& c) {
      return 0.2126 * c.at(x, 0, 0) + 0.7152 * c.at(x, 0, 1) + 0.0722 * c.at(x, 0, 2);
    };
    CHECK(lum(d) == doctest::Approx(lum(img)).epsilon(1e-6));
  }

  const auto& m = small_dataset();
  TrainConfig c = small_config();
  c.augment = {1.0, 0.0, 0.0};
  c.light_noise_deg = 0.0;
  std::mt19937_64 rng(6);
  const auto ex = sample_pair(m, rng, c);
  const auto imgs = scene::load_view(m, m.views[ex.view_index]);
  const auto& o = imgs.colors[static_cast<std::size_t>(ex.light_old)];
  const auto& n = imgs.colors[static_cast<std::size_t>(ex.light_new)];
  // Same exposure factor on both colors.
  double ko = 0.0, kn = 0.0;
  for (int y = 0; y < 16 && (ko == 0.0 || kn == 0.0); ++y)
    for (int x = 0; x < 16; ++x) {
      if (ko == 0.0 && o.at(x, y, 1) > 0.05f) ko = ex.color_old.at(x, y, 1) / o.at(x, y, 1);
      if (kn == 0.0 && n.at(x, y, 1) > 0.05f) kn = ex.color_new.at(x, y, 1) / n.at(x, y, 1);
    }
  CHECK(ko == doctest::Approx(kn).epsilon(1e-5));
  CHECK(ko != doctest::Approx(1.0));
}

TEST_CASE("depth coin lands on ground truth about 80% of the time") {
  std::mt19937_64 rng(7);
  int gt = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) gt += flip_depth_coin(0.8, rng);
  const double f = static_cast<double>(gt) / n;
  MESSAGE("gt-depth fraction " << f);
  CHECK(f >= 0.78);
  CHECK(f <= 0.82);
  CHECK_FALSE(flip_depth_coin(0.0, rng));
  CHECK(flip_depth_coin(1.0, rng));
}

TEST_CASE("views with a single light are a configuration error") {
  TempDir dir("train1");
  auto d = small_dataset_config(1);
  d.scenes = 2;
  const auto m = scene::make_dataset(d, dir / "data");
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(sample_pair(m, rng, small_config()), ValidationError);
}

TEST_CASE("total loss is the weighted sum of the terms") {
  Trainer t(small_config(), small_dataset());
  for (int i = 0; i < 6; ++i) {
    const auto r = t.step();
    const auto& c = t.config();
    CHECK(r.total == doctest::Approx(c.lambda_c * r.l_c + c.lambda_s * r.l_s + c.lambda_r * r.l_r +
                                     c.lambda_a * r.l_a)
                         .epsilon(1e-6));
    CHECK(r.disc.has_value() == (r.step % 5 == 0));
  }
}

TEST_CASE("with lambda_A = 0 the discriminator never changes") {
  TrainConfig c = small_config();
  c.lambda_a = 0.0;
  Trainer t(c, small_dataset());
  const auto before = flat_params(t.discriminator());
  for (int i = 0; i < 10; ++i) CHECK_FALSE(t.step().disc.has_value());
  CHECK(flat_params(t.discriminator()) == before);
}

TEST_CASE("the refiner loss sends no gradient into the cast-shadow net") {
  TrainConfig c = small_config();
  c.lambda_c = 0.0;
  c.lambda_r = 0.0;
  c.lambda_a = 0.0;
  Trainer t(c, small_dataset());
  const auto cast_before = flat_params(*t.generator().cast());
  for (int i = 0; i < 3; ++i) {
    t.step();
    CHECK(grad_norm_sq(*t.generator().cast()) == 0.0);
    CHECK(grad_norm_sq(*t.generator().refine()) > 0.0);
  }
  CHECK(flat_params(*t.generator().cast()) == cast_before);

  // Control: the direct term does reach it.
  TrainConfig d = small_config();
  d.lambda_a = 0.0;
  Trainer u(d, small_dataset());
  u.step();
  CHECK(grad_norm_sq(*u.generator().cast()) > 0.0);
}

TEST_CASE("single-batch overfit drops the total loss below 10%") {
  TrainConfig c = small_config();
  c.model.features = 8;
  c.lr = 2e-3;
  Trainer t(c, small_dataset());
  std::mt19937_64 rng(9);
  const Batch b = sample_batch(small_dataset(), rng, c);
  const double first = t.train_step(b).total;
  double last = first;
  for (int i = 1; i < 500; ++i) last = t.train_step(b).total;
  MESSAGE("overfit total " << first << " -> " << last);
  CHECK(last < 0.1 * first);
}

TEST_CASE("resumed training reproduces the uninterrupted run") {
  TempDir dir("resume");
  TrainConfig c = small_config();
  c.max_steps = 12;
  std::vector<LossReport> full;
  {
    Trainer t(c, small_dataset());
    for (int i = 0; i < 12; ++i) full.push_back(t.step());
  }
  Trainer a(c, small_dataset());
  for (int i = 0; i < 7; ++i) a.step();
  a.save(dir / "mid.ckpt");
  Trainer b(c, small_dataset());
  b.resume(dir / "mid.ckpt");
  CHECK(b.steps_done() == 7);
  for (int i = 7; i < 12; ++i) {
    const auto r = b.step();
    CHECK(r.step == full[static_cast<std::size_t>(i)].step);
    CHECK(r.total == full[static_cast<std::size_t>(i)].total);
    CHECK(r.disc == full[static_cast<std::size_t>(i)].disc);
  }
}

TEST_CASE("resume refuses a different model config and names the field") {
  TempDir dir("mismatch");
  TrainConfig c = small_config();
  Trainer a(c, small_dataset());
  a.step();
  a.save(dir / "a.ckpt");
  TrainConfig other = c;
  other.model.features = 4;
  Trainer b(other, small_dataset());
  try {
    b.resume(dir / "a.ckpt");
    FAIL("expected refusal");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("features") != std::string::npos);
  }
  TrainConfig m2 = c;
  m2.method = models::Method::two_d;
  Trainer d(m2, small_dataset());
  CHECK_THROWS_AS(d.resume(dir / "a.ckpt"), ValidationError);
}

TEST_CASE("a non-finite loss aborts with the batch identity") {
  TrainConfig c = small_config();
  Trainer t(c, small_dataset());
  std::mt19937_64 rng(10);
  Batch b = sample_batch(small_dataset(), rng, c);
  b.color_new.data()[3] = std::numeric_limits<float>::quiet_NaN();
  try {
    t.train_step(b);
    FAIL("expected abort");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("non-finite") != std::string::npos);
    CHECK(msg.find(b.describe()) != std::string::npos);
  }
}

TEST_CASE("run logs losses and a constant Direct baseline per eval") {
  TempDir dir("run");
  TrainConfig c = small_config();
  c.max_steps = 6;
  c.eval_every = 2;
  c.checkpoint_every = 3;
  Trainer t(c, small_dataset());
  t.run(dir / "out");
  CHECK(std::filesystem::exists(dir / "out" / "final.ckpt"));
  CHECK(std::filesystem::exists(dir / "out" / "latest.ckpt"));
  std::ifstream f(dir / "out" / "metrics.jsonl");
  std::string line;
  int train_lines = 0;
  std::vector<double> direct;
  while (std::getline(f, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.at("type") == "train") {
      ++train_lines;
      CHECK(j.contains("l_c"));
      CHECK(j.contains("l_s"));
      CHECK(j.contains("l_r"));
      CHECK(j.contains("l_a"));
    } else if (j.at("type") == "eval") {
      direct.push_back(j.at("direct_shadow_mse").get<double>());
      CHECK(j.contains("shadow_mse"));
    }
  }
  CHECK(train_lines == 6);
  REQUIRE(direct.size() >= 3);
  for (double d : direct) CHECK(d == direct.front());
}

TEST_CASE("with clean depth, train scenes fit at least as well as held-out ones") {
  TrainConfig c = small_config();
  c.p_gt = 1.0;
  c.corruption.warp_amplitude = c.corruption.bump_amplitude = c.corruption.texture_amplitude = 0.0;
  c.light_noise_deg = 0.0;
  c.augment = {0.0, 0.0, 0.0};
  c.lr = 1e-3;
  Trainer t(c, small_dataset());
  for (int i = 0; i < 300; ++i) t.step();
  const double train_mse = split_shadow_mse(t.generator(), small_dataset(), scene::Split::train);
  const double test_mse = split_shadow_mse(t.generator(), small_dataset(), scene::Split::test);
  MESSAGE("shadow mse train " << train_mse << " held-out " << test_mse);
  CHECK(train_mse <= test_mse);
}
