#include "attralign/trainer.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "attralign/error.hpp"
#include "attralign/eval.hpp"

namespace attralign {

IdentityIndex::IdentityIndex(std::vector<int> class_ids) : ids_(std::move(class_ids)) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!rows_.emplace(ids_[i], i).second) {
      throw Error(ErrorKind::MalformedInput,
                  "duplicate person id " + std::to_string(ids_[i]) + " in identity index");
    }
  }
}

IdentityIndex IdentityIndex::from_records(std::span<const RawRecord> records) {
  std::set<int> ids;
  for (const auto& r : records) ids.insert(r.person_id);
  return IdentityIndex(std::vector<int>(ids.begin(), ids.end()));
}

std::optional<std::size_t> IdentityIndex::class_of(int person_id) const {
  const auto it = rows_.find(person_id);
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

std::size_t PairPlan::surrogate_count() const {
  std::size_t n = 0;
  for (const auto& c : categories) {
    n += static_cast<std::size_t>(std::count_if(c.positives.begin(), c.positives.end(), [](const PositivePair& p) {
      return p.provenance == PairProvenance::Surrogate;
    }));
  }
  return n;
}

namespace {

constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);

Eigen::MatrixXd gather(std::span<const RawRecord> records, std::span<const std::size_t> rows,
                       std::size_t width, std::optional<AttributeCategory> category,
                       std::string_view slot) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const RawRecord& rec = records[rows[r]];
    const std::vector<double>& v = category ? *rec.attrs[index_of(*category)] : rec.global;
    if (v.size() != width) {
      throw Error(ErrorKind::DimensionMismatch,
                  std::string(slot) + " feature of person " + std::to_string(rec.person_id) +
                      " has width " + std::to_string(v.size()) + ", encoder expects " +
                      std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
    }
  }
  return x;
}

// Row-wise L2 normalisation; zero rows pass through.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out = z;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double n = z.row(i).norm();
    if (n > 0.0) out.row(i) /= n;
  }
  return out;
}

Eigen::MatrixXd normalize_rows_backward(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y,
                                        const Eigen::MatrixXd& dy) {
  Eigen::MatrixXd dz = dy;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double n = z.row(i).norm();
    if (n == 0.0) continue;
    dz.row(i) = (dy.row(i) - dy.row(i).dot(y.row(i)) * y.row(i)) / n;
  }
  return dz;
}

struct Slot {
  std::vector<std::size_t> rows;  // batch rows, ascending
  std::vector<std::size_t> local;  // batch row -> position in `rows`, or kAbsent
  Eigen::MatrixXd pre;             // encoder output
  Eigen::MatrixXd out;             // embedding used by the losses
  SlotEncoder::Cache cache;
};

struct SideForward {
  Slot global;
  std::array<Slot, kNumAttributes> attr;
};

struct BatchForward {
  SideForward visual;
  SideForward textual;
};

void run_slot(const SlotEncoder& enc, std::span<const RawRecord> records, Slot& slot,
              std::optional<AttributeCategory> category, bool normalize, std::string_view name) {
  slot.local.assign(records.size(), kAbsent);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (category && !records[i].present(*category)) continue;
    slot.local[i] = slot.rows.size();
    slot.rows.push_back(i);
  }
  if (slot.rows.empty()) return;
  const Eigen::MatrixXd x = gather(records, slot.rows, enc.in_dim(), category, name);
  slot.pre = enc.forward(x, &slot.cache);
  slot.out = normalize ? normalize_rows(slot.pre) : slot.pre;
}

BatchForward forward_batch(const Model& model, const Batch& batch) {
  const bool norm = model.shape().normalize_embeddings;
  BatchForward f;
  run_slot(model.visual_global, batch.visual, f.visual.global, std::nullopt, norm, "visual global");
  run_slot(model.textual_global, batch.textual, f.textual.global, std::nullopt, norm,
           "textual global");
  for (AttributeCategory c : kAllCategories) {
    const std::size_t a = index_of(c);
    run_slot(model.visual_attr[a], batch.visual, f.visual.attr[a], c, norm, "visual attribute");
    run_slot(model.textual_attr, batch.textual, f.textual.attr[a], c, norm, "textual attribute");
  }
  return f;
}

struct CosineMatrix {
  Eigen::MatrixXd a_hat, b_hat;
  Eigen::VectorXd a_norm, b_norm;
  Eigen::MatrixXd s;
};

Eigen::MatrixXd unit_rows(const Eigen::MatrixXd& m, Eigen::VectorXd& norms) {
  norms.resize(m.rows());
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    norms(i) = m.row(i).norm();
    if (norms(i) > 0.0) {
      out.row(i) /= norms(i);
    } else {
      out.row(i).setZero();
    }
  }
  return out;
}

CosineMatrix cosine_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  CosineMatrix c;
  c.a_hat = unit_rows(a, c.a_norm);
  c.b_hat = unit_rows(b, c.b_norm);
  c.s = (c.a_hat * c.b_hat.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
  return c;
}

void project_back(const Eigen::MatrixXd& d_hat, const Eigen::MatrixXd& hat,
                  const Eigen::VectorXd& norms, Eigen::MatrixXd& d_out) {
  for (Eigen::Index i = 0; i < hat.rows(); ++i) {
    if (norms(i) == 0.0) continue;
    d_out.row(i) += (d_hat.row(i) - d_hat.row(i).dot(hat.row(i)) * hat.row(i)) / norms(i);
  }
}

void cosine_backward(const CosineMatrix& c, const Eigen::MatrixXd& ds, Eigen::MatrixXd& da,
                     Eigen::MatrixXd& db) {
  project_back(ds * c.b_hat, c.a_hat, c.a_norm, da);
  project_back(ds.transpose() * c.a_hat, c.b_hat, c.b_norm, db);
}

void check_identities(const Batch& batch) {
  if (batch.visual.empty() || batch.textual.empty()) {
    throw Error(ErrorKind::EmptyBatch, "batch needs records of both modalities");
  }
  std::set<int> ids;
  for (const auto& r : batch.visual) ids.insert(r.person_id);
  for (const auto& r : batch.textual) ids.insert(r.person_id);
  if (ids.size() < 2) {
    throw Error(ErrorKind::DegenerateBatch,
                "batch holds a single identity (" + std::to_string(*ids.begin()) + ")");
  }
}

EmbeddingVector row_vector(const Eigen::MatrixXd& m, std::size_t r) {
  const auto row = m.row(static_cast<Eigen::Index>(r));
  return EmbeddingVector(std::vector<double>(row.begin(), row.end()));
}

PairPlan plan_from_forward(const BatchForward& f, const Batch& batch, std::size_t k) {
  check_identities(batch);
  PairPlan plan;
  for (std::size_t i = 0; i < batch.visual.size(); ++i) {
    for (std::size_t j = 0; j < batch.textual.size(); ++j) {
      if (batch.visual[i].person_id == batch.textual[j].person_id) {
        plan.global_positives.emplace_back(i, j);
      } else {
        plan.global_negatives.emplace_back(i, j);
      }
    }
  }

  for (std::size_t a = 0; a < kNumAttributes; ++a) {
    const Slot& vs = f.visual.attr[a];
    const Slot& ts = f.textual.attr[a];
    if (vs.rows.empty() || ts.rows.empty()) continue;

    SamplerInput input;
    input.k = k;
    std::vector<LabeledIndex> vlab, tlab;
    for (std::size_t r = 0; r < vs.rows.size(); ++r) {
      input.visual.push_back({vs.rows[r], row_vector(vs.out, r)});
      vlab.push_back({vs.rows[r], batch.visual[vs.rows[r]].person_id});
    }
    for (std::size_t r = 0; r < ts.rows.size(); ++r) {
      input.textual.push_back({ts.rows[r], row_vector(ts.out, r)});
      tlab.push_back({ts.rows[r], batch.textual[ts.rows[r]].person_id});
    }
    CategoryPlan& cp = plan.categories[a];
    cp.positives = build_positive_pairs(vlab, tlab, k_reciprocal_sample(input));

    std::set<RowPair> positive;
    for (const auto& p : cp.positives) positive.emplace(p.visual, p.textual);
    for (const auto& v : vlab) {
      for (const auto& t : tlab) {
        if (v.person_id == t.person_id || positive.contains({v.index, t.index})) continue;
        cp.negatives.emplace_back(v.index, t.index);
      }
    }
  }
  return plan;
}

struct Grads {
  Eigen::MatrixXd visual_global, textual_global;
  std::array<Eigen::MatrixXd, kNumAttributes> visual_attr, textual_attr;
};

Eigen::MatrixXd zeros_for(const Slot& s, std::size_t dim) {
  return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.rows.size()),
                               static_cast<Eigen::Index>(dim));
}

// Alignment term over a cosine matrix whose rows/columns are slot positions.
std::optional<double> alignment_term(const CosineMatrix& cm, const Slot& vs, const Slot& ts,
                                     std::span<const RowPair> positives,
                                     std::span<const RowPair> negatives,
                                     const AlignmentParams& params, double weight,
                                     Eigen::MatrixXd* ds) {
  if (positives.empty() && negatives.empty()) return std::nullopt;
  auto at = [&](const RowPair& p) {
    return cm.s(static_cast<Eigen::Index>(vs.local[p.first]),
                static_cast<Eigen::Index>(ts.local[p.second]));
  };
  PairSimilarities sims;
  for (const auto& p : positives) sims.positives.push_back(at(p));
  for (const auto& p : negatives) sims.negatives.push_back(at(p));
  const double loss = align_loss(sims, params);
  if (ds != nullptr && weight != 0.0) {
    const AlignmentGradient g = align_loss_grad(sims, params);
    auto add = [&](const RowPair& p, double v) {
      (*ds)(static_cast<Eigen::Index>(vs.local[p.first]),
            static_cast<Eigen::Index>(ts.local[p.second])) += weight * v;
    };
    for (std::size_t i = 0; i < positives.size(); ++i) add(positives[i], g.positives[i]);
    for (std::size_t i = 0; i < negatives.size(); ++i) add(negatives[i], g.negatives[i]);
  }
  return loss;
}

void backward_slot(const SlotEncoder& enc, const Slot& s, const Eigen::MatrixXd& d_out,
                   SlotEncoder& grad, bool normalize) {
  if (s.rows.empty()) return;
  const Eigen::MatrixXd d_pre = normalize ? normalize_rows_backward(s.pre, s.out, d_out) : d_out;
  enc.backward(s.cache, d_pre, grad);
}

LossBreakdown loss_from_forward(const Model& model, const BatchForward& f, const Batch& batch,
                                const PairPlan& plan, const TrainConfig& config,
                                const IdentityIndex& ids, Model* grad) {
  const ModelShape& shape = model.shape();
  const LossWeights& w = config.loss_weights;
  const std::size_t d = shape.dim;
  Grads g;
  g.visual_global = zeros_for(f.visual.global, d);
  g.textual_global = zeros_for(f.textual.global, d);
  for (std::size_t a = 0; a < kNumAttributes; ++a) {
    g.visual_attr[a] = zeros_for(f.visual.attr[a], d);
    g.textual_attr[a] = zeros_for(f.textual.attr[a], d);
  }
  LossBreakdown out;

  // Identity classification over global embeddings.
  if (shape.num_classes > 0) {
    struct Row {
      const Eigen::MatrixXd* emb;
      Eigen::MatrixXd* demb;
      std::size_t row;
      std::size_t target;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < batch.visual.size(); ++i) {
      if (auto c = ids.class_of(batch.visual[i].person_id)) {
        rows.push_back({&f.visual.global.out, &g.visual_global, i, *c});
      }
    }
    if (config.text_id_loss) {
      for (std::size_t j = 0; j < batch.textual.size(); ++j) {
        if (auto c = ids.class_of(batch.textual[j].person_id)) {
          rows.push_back({&f.textual.global.out, &g.textual_global, j, *c});
        }
      }
    }
    if (!rows.empty()) {
      const double scale = 1.0 / static_cast<double>(rows.size());
      double sum = 0.0;
      for (const Row& r : rows) {
        const auto e = r.emb->row(static_cast<Eigen::Index>(r.row));
        const Eigen::VectorXd logits = model.id_head.weight * e.transpose() + model.id_head.bias;
        const LossWithGradient lg =
            id_loss(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())),
                    r.target);
        sum += lg.loss;
        if (grad != nullptr && w.id != 0.0) {
          const Eigen::Map<const Eigen::VectorXd> dl(lg.grad.data(),
                                                     static_cast<Eigen::Index>(lg.grad.size()));
          const Eigen::VectorXd dlogits = dl * (w.id * scale);
          grad->id_head.weight += dlogits * e;
          grad->id_head.bias += dlogits;
          r.demb->row(static_cast<Eigen::Index>(r.row)) +=
              (model.id_head.weight.transpose() * dlogits).transpose();
        }
      }
      out.terms.id = sum * scale;
    }
  }

  // Segmentation of the per-record label grids from the attribute embeddings.
  if (shape.grid_cells() > 0) {
    std::vector<std::size_t> seg_rows;
    for (std::size_t i = 0; i < batch.visual.size(); ++i) {
      if (batch.visual[i].seg) seg_rows.push_back(i);
    }
    if (!seg_rows.empty()) {
      const std::size_t cells = shape.grid_cells();
      const double scale = 1.0 / static_cast<double>(seg_rows.size());
      double sum = 0.0;
      for (std::size_t i : seg_rows) {
        const SegLabels& lab = *batch.visual[i].seg;
        if (lab.height != shape.grid_height || lab.width != shape.grid_width) {
          throw Error(ErrorKind::ShapeMismatch,
                      "segmentation grid " + std::to_string(lab.height) + "x" +
                          std::to_string(lab.width) + " does not match model grid " +
                          std::to_string(shape.grid_height) + "x" +
                          std::to_string(shape.grid_width));
        }
        SegGrid grid{lab.height, lab.width, std::vector<double>(cells * kSegClasses), lab.labels};
        for (std::size_t p = 0; p < cells; ++p) {
          for (std::size_t k = 0; k < kSegClasses; ++k) {
            grid.logits[p * kSegClasses + k] =
                model.seg_bias(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
          }
          for (std::size_t a = 0; a < kNumAttributes; ++a) {
            const std::size_t local = f.visual.attr[a].local[i];
            if (local == kAbsent) continue;
            grid.logits[p * kSegClasses + 1 + a] +=
                model.seg_weight.row(static_cast<Eigen::Index>(p * kNumAttributes + a))
                    .dot(f.visual.attr[a].out.row(static_cast<Eigen::Index>(local)));
          }
        }
        const LossWithGradient lg = seg_loss(grid);
        sum += lg.loss;
        if (grad == nullptr || w.seg == 0.0) continue;
        const double s = w.seg * scale;
        for (std::size_t p = 0; p < cells; ++p) {
          for (std::size_t k = 0; k < kSegClasses; ++k) {
            grad->seg_bias(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) +=
                s * lg.grad[p * kSegClasses + k];
          }
          for (std::size_t a = 0; a < kNumAttributes; ++a) {
            const std::size_t local = f.visual.attr[a].local[i];
            if (local == kAbsent) continue;
            const double gl = s * lg.grad[p * kSegClasses + 1 + a];
            const auto row = static_cast<Eigen::Index>(p * kNumAttributes + a);
            grad->seg_weight.row(row) += gl * f.visual.attr[a].out.row(static_cast<Eigen::Index>(local));
            g.visual_attr[a].row(static_cast<Eigen::Index>(local)) += gl * model.seg_weight.row(row);
          }
        }
      }
      out.terms.seg = sum * scale;
    }
  }

  // Global alignment.
  {
    const CosineMatrix cm = cosine_matrix(f.visual.global.out, f.textual.global.out);
    Eigen::MatrixXd ds = Eigen::MatrixXd::Zero(cm.s.rows(), cm.s.cols());
    out.terms.align_global =
        alignment_term(cm, f.visual.global, f.textual.global, plan.global_positives,
                       plan.global_negatives, config.alignment, w.align_global,
                       grad != nullptr ? &ds : nullptr);
    if (grad != nullptr && out.terms.align_global) {
      cosine_backward(cm, ds, g.visual_global, g.textual_global);
    }
  }

  // Attribute alignment, averaged over the categories that have pairs.
  {
    std::array<std::optional<double>, kNumAttributes> per;
    std::array<CosineMatrix, kNumAttributes> cms;
    std::array<Eigen::MatrixXd, kNumAttributes> dss;
    std::size_t active = 0;
    for (std::size_t a = 0; a < kNumAttributes; ++a) {
      const CategoryPlan& cp = plan.categories[a];
      if (cp.positives.empty() && cp.negatives.empty()) continue;
      ++active;
    }
    const double weight = active > 0 ? w.align_attr / static_cast<double>(active) : 0.0;
    for (std::size_t a = 0; a < kNumAttributes; ++a) {
      const CategoryPlan& cp = plan.categories[a];
      if (cp.positives.empty() && cp.negatives.empty()) continue;
      cms[a] = cosine_matrix(f.visual.attr[a].out, f.textual.attr[a].out);
      dss[a] = Eigen::MatrixXd::Zero(cms[a].s.rows(), cms[a].s.cols());
      std::vector<RowPair> pos;
      pos.reserve(cp.positives.size());
      for (const auto& p : cp.positives) pos.emplace_back(p.visual, p.textual);
      per[a] = alignment_term(cms[a], f.visual.attr[a], f.textual.attr[a], pos, cp.negatives,
                              config.alignment, weight, grad != nullptr ? &dss[a] : nullptr);
      if (grad != nullptr) cosine_backward(cms[a], dss[a], g.visual_attr[a], g.textual_attr[a]);
    }
    out.terms.align_attr = mean_attribute_loss(per);
  }

  out.total = joint_loss(out.terms, w);

  if (grad != nullptr) {
    const bool norm = shape.normalize_embeddings;
    backward_slot(model.visual_global, f.visual.global, g.visual_global, grad->visual_global, norm);
    backward_slot(model.textual_global, f.textual.global, g.textual_global, grad->textual_global,
                  norm);
    for (std::size_t a = 0; a < kNumAttributes; ++a) {
      backward_slot(model.visual_attr[a], f.visual.attr[a], g.visual_attr[a], grad->visual_attr[a],
                    norm);
      backward_slot(model.textual_attr, f.textual.attr[a], g.textual_attr[a], grad->textual_attr,
                    norm);
    }
  }
  return out;
}

Model init_model(const Dataset& train, const TrainConfig& config, const IdentityIndex& ids,
                 std::mt19937_64& rng) {
  return Model::random(model_shape(train, config, ids.size()), rng);
}

}  // namespace

PairPlan plan_pairs(const Model& model, const Batch& batch, std::size_t k) {
  check_identities(batch);
  return plan_from_forward(forward_batch(model, batch), batch, k);
}

LossBreakdown batch_loss(const Model& model, const Batch& batch, const PairPlan& plan,
                         const TrainConfig& config, const IdentityIndex& ids, Model* grad) {
  check_identities(batch);
  return loss_from_forward(model, forward_batch(model, batch), batch, plan, config, ids, grad);
}

LossBreakdown train_step(const Batch& batch, Model& model, Adam& optimizer,
                         const TrainConfig& config, const IdentityIndex& ids, double lr) {
  check_identities(batch);
  const BatchForward f = forward_batch(model, batch);
  const PairPlan plan = plan_from_forward(f, batch, config.k);
  Model grad = model.zeros_like();
  const LossBreakdown out = loss_from_forward(model, f, batch, plan, config, ids, &grad);
  optimizer.step(model, grad, lr);
  return out;
}

std::vector<Batch> make_batches(const Dataset& train, std::size_t batch_size,
                                std::mt19937_64& rng) {
  if (batch_size < 2) throw Error(ErrorKind::InvalidParams, "batch_size must be at least 2");
  std::map<int, std::vector<std::size_t>> texts;
  for (std::size_t j = 0; j < train.textual.size(); ++j) {
    texts[train.textual[j].person_id].push_back(j);
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < train.visual.size(); ++i) {
    if (texts.contains(train.visual[i].person_id)) order.push_back(i);
  }
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    std::set<int> people;
    for (std::size_t n = start; n < end; ++n) {
      const RawRecord& v = train.visual[order[n]];
      const auto& choices = texts.at(v.person_id);
      std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
      b.visual.push_back(v);
      b.textual.push_back(train.textual[choices[pick(rng)]]);
      people.insert(v.person_id);
    }
    if (people.size() >= 2) batches.push_back(std::move(b));
  }
  return batches;
}

ModelShape model_shape(const Dataset& train, const TrainConfig& config, std::size_t num_classes) {
  const FeatureDims dims = train.dims();
  ModelShape s;
  s.visual_global_in = dims.visual_global;
  s.visual_attr_in = dims.visual_attr;
  s.textual_in = dims.textual;
  s.dim = config.embedding_dim;
  s.hidden = config.hidden_dim;
  s.num_classes = num_classes;
  if (const auto grid = train.grid_shape()) {
    s.grid_height = grid->first;
    s.grid_width = grid->second;
  }
  s.normalize_embeddings = config.normalize_embeddings;
  return s;
}

Checkpoint initial_checkpoint(const Dataset& train, const TrainConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const IdentityIndex ids = IdentityIndex::from_records(train.visual);
  Model model = init_model(train, config, ids, rng);
  return Checkpoint{config, std::move(model), ids.ids(), 0, rng_to_string(rng)};
}

FitResult fit(const Dataset& train, const Dataset& val, const TrainConfig& config,
              const std::function<void(const EpochMetrics&)>& on_epoch) {
  config.validate();
  FitResult result;
  result.best = initial_checkpoint(train, config);
  if (config.epochs == 0) return result;

  const IdentityIndex ids(result.best.class_ids);
  Model model = result.best.model;
  std::mt19937_64 rng = rng_from_string(result.best.rng_state);
  Adam adam(model, config.adam());
  const bool has_val = !val.visual.empty() && !val.textual.empty();
  double best_r1 = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double lr = config.lr;
    if (config.lr_decay_epoch > 0 && epoch > config.lr_decay_epoch) lr *= config.lr_decay_factor;

    std::array<double, 4> sum{};
    std::array<std::size_t, 4> count{};
    const auto batches = make_batches(train, config.batch_size, rng);
    for (const Batch& b : batches) {
      const LossBreakdown lb = train_step(b, model, adam, config, ids, lr);
      const std::array<std::optional<double>, 4> t{lb.terms.id, lb.terms.seg,
                                                   lb.terms.align_global, lb.terms.align_attr};
      for (std::size_t i = 0; i < 4; ++i) {
        if (t[i]) {
          sum[i] += *t[i];
          ++count[i];
        }
      }
    }
    auto mean = [&](std::size_t i) {
      return count[i] > 0 ? sum[i] / static_cast<double>(count[i]) : 0.0;
    };
    EpochMetrics m{epoch, mean(0), mean(1), mean(2), mean(3), 0.0};
    if (has_val) m.val_r1 = evaluate_retrieval(model, val, config.eval_lambda).r1;
    result.log.push_back(m);

    if (!has_val || m.val_r1 > best_r1) {
      best_r1 = m.val_r1;
      result.best = Checkpoint{config, model, ids.ids(), epoch, rng_to_string(rng)};
    }
    if (on_epoch) on_epoch(m);
  }
  return result;
}

std::string metrics_csv(std::span<const EpochMetrics> log) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,loss_id,loss_seg,loss_align_glo,loss_align_attr,val_r1\n";
  for (const auto& m : log) {
    out << m.epoch << ',' << m.loss_id << ',' << m.loss_seg << ',' << m.loss_align_glo << ','
        << m.loss_align_attr << ',' << m.val_r1 << '\n';
  }
  return out.str();
}

std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

std::mt19937_64 rng_from_string(const std::string& state) {
  std::mt19937_64 rng;
  std::istringstream in(state);
  in >> rng;
  if (!in) throw Error(ErrorKind::MalformedInput, "unreadable random generator state");
  return rng;
}

}  // namespace attralign
