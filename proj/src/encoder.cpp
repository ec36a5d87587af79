#include "attralign/encoder.hpp"

#include <cmath>

#include "attralign/error.hpp"

namespace attralign {
namespace {

AffineLayer zero_layer(std::size_t in, std::size_t out) {
  return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
}

Eigen::MatrixXd row_matrix(std::span<const double> v) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

EmbeddingVector to_embedding(const Eigen::MatrixXd& row, bool normalize) {
  std::vector<double> values(row.data(), row.data() + row.size());
  EmbeddingVector v(std::move(values));
  if (normalize && v.norm() > 0.0) return l2_normalize(v);
  return v;
}

EmbeddingVector encode(const SlotEncoder& enc, std::span<const double> raw, bool normalize,
                       std::string_view slot) {
  if (raw.size() != enc.in_dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(slot) + " features have width " + std::to_string(raw.size()) +
                    ", encoder expects " + std::to_string(enc.in_dim()));
  }
  return to_embedding(enc.forward(row_matrix(raw)), normalize);
}

template <class Block, class M>
void collect(M& model, std::vector<Block>& out) {
  auto add_encoder = [&](const std::string& prefix, auto& enc) {
    for (std::size_t l = 0; l < enc.layers().size(); ++l) {
      auto& layer = enc.layers()[l];
      out.push_back({prefix + "." + std::to_string(l) + ".weight", layer.weight.data(),
                     static_cast<std::size_t>(layer.weight.size())});
      out.push_back({prefix + "." + std::to_string(l) + ".bias", layer.bias.data(),
                     static_cast<std::size_t>(layer.bias.size())});
    }
  };
  add_encoder("visual.global", model.visual_global);
  for (AttributeCategory c : kAllCategories) {
    add_encoder("visual." + std::string(category_key(c)), model.visual_attr[index_of(c)]);
  }
  add_encoder("textual.global", model.textual_global);
  add_encoder("textual.attr", model.textual_attr);
  if (model.id_head.weight.size() > 0) {
    out.push_back({"id_head.weight", model.id_head.weight.data(),
                   static_cast<std::size_t>(model.id_head.weight.size())});
    out.push_back({"id_head.bias", model.id_head.bias.data(),
                   static_cast<std::size_t>(model.id_head.bias.size())});
  }
  if (model.seg_bias.size() > 0) {
    out.push_back({"seg.bias", model.seg_bias.data(), static_cast<std::size_t>(model.seg_bias.size())});
    out.push_back({"seg.weight", model.seg_weight.data(),
                   static_cast<std::size_t>(model.seg_weight.size())});
  }
}

}  // namespace

SlotEncoder::SlotEncoder(std::size_t in_dim, std::size_t out_dim, std::size_t hidden_dim) {
  if (hidden_dim == 0) {
    layers_.push_back(zero_layer(in_dim, out_dim));
  } else {
    layers_.push_back(zero_layer(in_dim, hidden_dim));
    layers_.push_back(zero_layer(hidden_dim, out_dim));
  }
}

SlotEncoder SlotEncoder::identity(std::size_t dim) {
  SlotEncoder enc(dim, dim);
  enc.layers_[0].weight.setIdentity();
  return enc;
}

void SlotEncoder::init_random(std::mt19937_64& rng) {
  for (auto& layer : layers_) {
    std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(layer.weight.cols())));
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = n(rng);
    layer.bias.setZero();
  }
}

std::size_t SlotEncoder::in_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weight.cols());
}

std::size_t SlotEncoder::out_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weight.rows());
}

Eigen::MatrixXd SlotEncoder::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (cache != nullptr) cache->input = x;
  const auto& first = layers_.front();
  Eigen::MatrixXd y = (x * first.weight.transpose()).rowwise() + first.bias.transpose();
  if (!has_hidden()) return y;
  y = y.array().tanh().matrix();
  if (cache != nullptr) cache->hidden = y;
  const auto& second = layers_.back();
  return (y * second.weight.transpose()).rowwise() + second.bias.transpose();
}

void SlotEncoder::backward(const Cache& cache, const Eigen::MatrixXd& grad_out,
                           SlotEncoder& grad) const {
  if (!has_hidden()) {
    grad.layers_[0].weight.noalias() += grad_out.transpose() * cache.input;
    grad.layers_[0].bias += grad_out.colwise().sum().transpose();
    return;
  }
  grad.layers_[1].weight.noalias() += grad_out.transpose() * cache.hidden;
  grad.layers_[1].bias += grad_out.colwise().sum().transpose();
  Eigen::MatrixXd d_hidden = grad_out * layers_[1].weight;
  d_hidden.array() *= (1.0 - cache.hidden.array().square());
  grad.layers_[0].weight.noalias() += d_hidden.transpose() * cache.input;
  grad.layers_[0].bias += d_hidden.colwise().sum().transpose();
}

Model::Model(const ModelShape& shape) : shape_(shape) {
  visual_global = SlotEncoder(shape.visual_global_in, shape.dim, shape.hidden);
  for (auto& enc : visual_attr) enc = SlotEncoder(shape.visual_attr_in, shape.dim, shape.hidden);
  textual_global = SlotEncoder(shape.textual_in, shape.dim, shape.hidden);
  textual_attr = SlotEncoder(shape.textual_in, shape.dim, shape.hidden);
  if (shape.num_classes > 0) id_head = zero_layer(shape.dim, shape.num_classes);
  if (shape.grid_cells() > 0) {
    const auto cells = static_cast<Eigen::Index>(shape.grid_cells());
    seg_bias = Eigen::MatrixXd::Zero(cells, static_cast<Eigen::Index>(kNumAttributes + 1));
    seg_weight = Eigen::MatrixXd::Zero(cells * static_cast<Eigen::Index>(kNumAttributes),
                                       static_cast<Eigen::Index>(shape.dim));
  }
}

Model Model::random(const ModelShape& shape, std::mt19937_64& rng) {
  Model m(shape);
  m.visual_global.init_random(rng);
  for (auto& enc : m.visual_attr) enc.init_random(rng);
  m.textual_global.init_random(rng);
  m.textual_attr.init_random(rng);
  if (m.id_head.weight.size() > 0) {
    std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(shape.dim)));
    for (Eigen::Index i = 0; i < m.id_head.weight.size(); ++i) m.id_head.weight.data()[i] = n(rng);
  }
  if (m.seg_weight.size() > 0) {
    std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(shape.dim)));
    for (Eigen::Index i = 0; i < m.seg_weight.size(); ++i) m.seg_weight.data()[i] = n(rng);
  }
  return m;
}

std::vector<ParamBlock> Model::parameter_blocks() {
  std::vector<ParamBlock> out;
  collect(*this, out);
  return out;
}

std::vector<ConstParamBlock> Model::parameter_blocks() const {
  std::vector<ConstParamBlock> out;
  collect(*this, out);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : parameter_blocks()) n += b.size;
  return n;
}

EmbeddingRecord Model::embed(const RawRecord& record) const {
  const bool visual = record.modality == Modality::Visual;
  const bool norm = shape_.normalize_embeddings;
  EmbeddingVector global = encode(visual ? visual_global : textual_global, record.global, norm,
                                  visual ? "visual global" : "textual global");
  AttributeSlots attrs;
  for (AttributeCategory c : kAllCategories) {
    const auto& raw = record.attrs[index_of(c)];
    if (!raw) continue;
    const SlotEncoder& enc = visual ? visual_attr[index_of(c)] : textual_attr;
    attrs[index_of(c)] = encode(enc, *raw, norm, visual ? "visual attribute" : "textual attribute");
  }
  return EmbeddingRecord(record.person_id, record.modality, std::move(global), std::move(attrs));
}

EmbeddingVector Model::embed_text_attribute(std::span<const double> features) const {
  return encode(textual_attr, features, shape_.normalize_embeddings, "textual attribute");
}

std::vector<EmbeddingRecord> forward(std::span<const RawRecord> records, const Model& model) {
  std::vector<EmbeddingRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(model.embed(r));
  return out;
}

Adam::Adam(const Model& like, AdamSettings settings)
    : settings_(settings), m_(like.zeros_like()), v_(like.zeros_like()) {}

void Adam::step(Model& params, const Model& grad, double lr) {
  ++t_;
  auto p_blocks = params.parameter_blocks();
  const auto g_blocks = grad.parameter_blocks();
  auto m_blocks = m_.parameter_blocks();
  auto v_blocks = v_.parameter_blocks();
  if (p_blocks.size() != g_blocks.size() || p_blocks.size() != m_blocks.size()) {
    throw Error(ErrorKind::ShapeMismatch, "optimizer state does not match the model");
  }
  const double b1 = settings_.beta1;
  const double b2 = settings_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t b = 0; b < p_blocks.size(); ++b) {
    double* p = p_blocks[b].data;
    const double* g = g_blocks[b].data;
    double* m = m_blocks[b].data;
    double* v = v_blocks[b].data;
    for (std::size_t i = 0; i < p_blocks[b].size; ++i) {
      const double gi = g[i] + settings_.weight_decay * p[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + settings_.eps);
    }
  }
}

}  // namespace attralign
