#include "attralign/grad_check.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "attralign/losses.hpp"
#include "attralign/trainer.hpp"

namespace attralign {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void record(GradCheckReport& r, double analytic, double numeric, double floor) {
  const double e = scaled_error(analytic, numeric, floor);
  ++r.checks;
  r.max_error = std::max(r.max_error, e);
  if (!(e <= r.tolerance)) ++r.failures;
}

AlignmentParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> alpha_d(0.3, 0.95);
  const double alpha = alpha_d(rng);
  std::uniform_real_distribution<double> margin_d(0.05, alpha - 0.01);
  std::uniform_real_distribution<double> tau_p(1.0, 20.0);
  std::uniform_real_distribution<double> tau_n(1.0, 60.0);
  const double m = margin_d(rng);
  const double tp = tau_p(rng);
  return AlignmentParams::from_margin(alpha, m, tp, tau_n(rng));
}

}  // namespace

double scaled_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport check_alignment_gradient(std::size_t param_sets, std::size_t samples,
                                         std::uint64_t seed) {
  const auto start = Clock::now();
  GradCheckReport r{"alignment loss", 0, 0, 0.0, 1e-4, 0.0};
  constexpr double h = 1e-5;
  std::mt19937_64 rng(seed);
  // Keep s +- h inside [-1, 1].
  std::uniform_real_distribution<double> sim(-1.0 + 2 * h, 1.0 - 2 * h);
  for (std::size_t p = 0; p < param_sets; ++p) {
    const AlignmentParams params = random_params(rng);
    for (std::size_t i = 0; i < samples; ++i) {
      const double s = sim(rng);
      const double gp = align_loss_grad({{s}, {}}, params).positives[0];
      const double np = (align_loss({{s + h}, {}}, params) - align_loss({{s - h}, {}}, params)) / (2 * h);
      record(r, gp, np, 1e-12);
      const double gn = align_loss_grad({{}, {s}}, params).negatives[0];
      const double nn = (align_loss({{}, {s + h}}, params) - align_loss({{}, {s - h}}, params)) / (2 * h);
      record(r, gn, nn, 1e-12);
    }
  }
  r.seconds = elapsed(start);
  return r;
}

GradCheckReport check_id_gradient(std::size_t trials, std::uint64_t seed) {
  const auto start = Clock::now();
  GradCheckReport r{"identity loss", 0, 0, 0.0, 1e-5, 0.0};
  constexpr double h = 1e-6;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> logit(0.0, 3.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t classes = 2 + t % 9;
    std::vector<double> z(classes);
    for (auto& v : z) v = logit(rng);
    const std::size_t target = t % classes;
    const auto analytic = id_loss(z, target).grad;
    for (std::size_t c = 0; c < classes; ++c) {
      auto up = z;
      auto down = z;
      up[c] += h;
      down[c] -= h;
      record(r, analytic[c], (id_loss(up, target).loss - id_loss(down, target).loss) / (2 * h), 1e-4);
    }
  }
  r.seconds = elapsed(start);
  return r;
}

GradCheckReport check_seg_gradient(std::size_t trials, std::uint64_t seed) {
  const auto start = Clock::now();
  GradCheckReport r{"segmentation loss", 0, 0, 0.0, 1e-5, 0.0};
  constexpr double h = 1e-6;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> logit(0.0, 2.0);
  std::uniform_int_distribution<int> label(0, static_cast<int>(kSegClasses) - 1);
  for (std::size_t t = 0; t < trials; ++t) {
    SegGrid g;
    g.height = 1 + t % 3;
    g.width = 1 + t % 2;
    for (std::size_t p = 0; p < g.height * g.width; ++p) g.labels.push_back(label(rng));
    g.logits.resize(g.labels.size() * kSegClasses);
    for (auto& v : g.logits) v = logit(rng);
    const auto analytic = seg_loss(g).grad;
    for (std::size_t i = 0; i < g.logits.size(); ++i) {
      SegGrid up = g;
      SegGrid down = g;
      up.logits[i] += h;
      down.logits[i] -= h;
      record(r, analytic[i], (seg_loss(up).loss - seg_loss(down).loss) / (2 * h), 1e-4);
    }
  }
  r.seconds = elapsed(start);
  return r;
}

GradCheckReport check_model_gradient(int variant, std::uint64_t seed) {
  const auto start = Clock::now();
  GradCheckReport r{variant == 0 ? "joint loss, affine encoders"
                                 : "joint loss, hidden layer + normalisation",
                    0, 0, 0.0, 1e-3, 0.0};
  constexpr double h = 1e-6;
  constexpr std::size_t d_in = 5;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> feat(0.0, 1.0);
  std::bernoulli_distribution present(0.75);
  std::uniform_int_distribution<int> label(0, static_cast<int>(kSegClasses) - 1);
  auto vec = [&](std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = feat(rng);
    return v;
  };

  // Two people, two records each; every category present on at least one
  // record per modality so each attribute term participates.
  Batch batch;
  const int ids[4] = {3, 3, 8, 8};
  for (std::size_t i = 0; i < 4; ++i) {
    for (Modality m : {Modality::Visual, Modality::Textual}) {
      RawRecord rec;
      rec.person_id = ids[i];
      rec.modality = m;
      rec.global = vec(d_in);
      for (std::size_t a = 0; a < kNumAttributes; ++a) {
        if (i == a % 4 || present(rng)) rec.attrs[a] = vec(d_in);
      }
      if (m == Modality::Visual) {
        SegLabels seg{2, 2, {}};
        for (int p = 0; p < 4; ++p) seg.labels.push_back(label(rng));
        rec.seg = seg;
        batch.visual.push_back(std::move(rec));
      } else {
        batch.textual.push_back(std::move(rec));
      }
    }
  }

  TrainConfig config;
  config.embedding_dim = 8;
  // Softer temperatures keep the loss far from saturation so every term
  // carries gradient signal.
  config.alignment = AlignmentParams::from_margin(0.6, 0.2, 3.0, 5.0);
  config.k = 2;
  if (variant != 0) {
    config.hidden_dim = 6;
    config.normalize_embeddings = true;
    config.text_id_loss = true;
  }
  const IdentityIndex index(std::vector<int>{3, 8, 11});
  ModelShape shape{d_in, d_in, d_in, 8, config.hidden_dim, 3, 2, 2, config.normalize_embeddings};
  Model model = Model::random(shape, rng);
  // Non-zero biases so their gradients are exercised away from the origin.
  for (auto& b : model.parameter_blocks()) {
    if (b.name.ends_with("bias")) {
      for (std::size_t i = 0; i < b.size; ++i) b.data[i] = 0.1 * feat(rng);
    }
  }

  const PairPlan plan = plan_pairs(model, batch, config.k);
  Model grad = model.zeros_like();
  batch_loss(model, batch, plan, config, index, &grad);

  auto blocks = model.parameter_blocks();
  const auto grad_blocks = std::as_const(grad).parameter_blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = 0; i < blocks[b].size; ++i) {
      double& w = blocks[b].data[i];
      const double saved = w;
      w = saved + h;
      const double up = batch_loss(model, batch, plan, config, index).total;
      w = saved - h;
      const double down = batch_loss(model, batch, plan, config, index).total;
      w = saved;
      record(r, grad_blocks[b].data[i], (up - down) / (2 * h), 1e-6);
    }
  }
  r.seconds = elapsed(start);
  return r;
}

std::vector<GradCheckReport> run_grad_checks() {
  return {check_alignment_gradient(), check_id_gradient(), check_seg_gradient(),
          check_model_gradient(0), check_model_gradient(1)};
}

}  // namespace attralign
