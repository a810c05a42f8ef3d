// Regenerates the shipped synthetic datasets and the small linear model the
// attack benchmark perturbs. Deterministic: byte-identical output on every
// run. Usage: zovr-make-data [output-dir]  (default: data)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "zovr/problems.hpp"
#include "zovr/rng.hpp"
#include "zovr/trace_io.hpp"
#include "zovr/vec.hpp"

namespace {

using zovr::CounterRng;
using zovr::Dataset;
using zovr::Vec;

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  for (int c = 1; c <= data.d; ++c) f << "f" << c << (c == data.d ? "" : ",");
  f << ",label\n";
  for (int i = 0; i < data.n; ++i) {
    const auto row = data.row(i);
    for (int c = 0; c < data.d; ++c) f << zovr::format_double(row[c]) << ",";
    f << data.labels[i] << "\n";
  }
}

// Two Gaussian clusters along a shared axis with a sizable share of labels
// flipped. The flips keep the optimum finite and leave per-sample gradients
// in conflict there, so single-sample step noise does not vanish near the
// solution. The feature scale sets how loud that noise is relative to the
// curvature: at this scale a one-component-per-step method plateaus above
// the benchmark's gradient threshold, while anchored full-batch estimates
// keep descending through it.
Dataset make_logistic_synth() {
  const int n = 200, d = 50;
  const double scale = 5.4;
  CounterRng rng(2024, zovr::kStreamOracle);
  Vec axis(d, 1.0 / std::sqrt(static_cast<double>(d)));
  Dataset data;
  data.n = n;
  data.d = d;
  data.num_classes = 2;
  data.features.resize(static_cast<std::size_t>(n) * d);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    const double sign = label == 0 ? -0.75 : 0.75;
    for (int c = 0; c < d; ++c)
      data.features[static_cast<std::size_t>(i) * d + c] =
          scale * (sign * axis[c] + rng.normal() / std::sqrt(static_cast<double>(d)));
    data.labels[i] = rng.unit_open() < 0.30 ? 1 - label : label;
  }
  return data;
}

// Four 4x4 "digit" templates: one bright row per class plus pixel noise.
Dataset make_digits_synth() {
  const int classes = 4, per_class = 40, d = 16;
  CounterRng rng(2025, zovr::kStreamOracle);
  Dataset data;
  data.n = classes * per_class;
  data.d = d;
  data.num_classes = classes;
  data.features.resize(static_cast<std::size_t>(data.n) * d);
  data.labels.resize(data.n);
  int i = 0;
  for (int cls = 0; cls < classes; ++cls)
    for (int rep = 0; rep < per_class; ++rep, ++i) {
      for (int c = 0; c < d; ++c) {
        const double base = (c / 4 == cls) ? 0.9 : 0.1;
        const double v = base + 0.15 * rng.normal();
        data.features[static_cast<std::size_t>(i) * d + c] = std::clamp(v, 0.0, 1.0);
      }
      data.labels[i] = cls;
    }
  return data;
}

// Three well-separated image clusters (d = 27) and a ridge-fit linear scorer
// that classifies all of them with positive margin.
void make_attack_pair(const std::filesystem::path& dir) {
  const int classes = 3, per_class = 4, d = 27;
  CounterRng rng(2026, zovr::kStreamOracle);
  std::vector<Vec> centers;
  for (int cls = 0; cls < classes; ++cls) {
    Vec c(d);
    rng.fill_normal(c);
    zovr::scale(c, 2.0 / zovr::norm2(c));
    centers.push_back(std::move(c));
  }
  Dataset images;
  images.n = classes * per_class;
  images.d = d;
  images.num_classes = classes;
  images.features.resize(static_cast<std::size_t>(images.n) * d);
  images.labels.resize(images.n);
  int i = 0;
  for (int cls = 0; cls < classes; ++cls)
    for (int rep = 0; rep < per_class; ++rep, ++i) {
      for (int c = 0; c < d; ++c)
        images.features[static_cast<std::size_t>(i) * d + c] =
            centers[cls][c] + 0.35 * rng.normal();
      images.labels[i] = cls;
    }

  const auto model = zovr::fit_linear_softmax(images, 1e-3);
  double worst = 1e300;
  for (int k = 0; k < images.n; ++k) {
    const Vec z = model.logits(images.row(k));
    double other = -1e300;
    for (int c = 0; c < classes; ++c)
      if (c != images.labels[k]) other = std::max(other, z[c]);
    worst = std::min(worst, z[images.labels[k]] - other);
  }
  if (worst <= 0.0) throw std::runtime_error("attack model failed to separate its images");
  std::printf("attack model: %d images, worst margin %.4f\n", images.n, worst);

  write_dataset(dir / "attack_images.csv", images);
  zovr::save_model_csv(dir / "attack_model.csv", model);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(dir);
    write_dataset(dir / "logistic_synth.csv", make_logistic_synth());
    write_dataset(dir / "digits_synth.csv", make_digits_synth());
    make_attack_pair(dir);
    std::printf("wrote datasets to %s\n", dir.string().c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
