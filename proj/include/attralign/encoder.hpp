#ifndef ATTRALIGN_ENCODER_HPP
#define ATTRALIGN_ENCODER_HPP

// Toy encoders standing in for the image and language streams: one affine
// map (optionally with a tanh hidden layer) per slot. The visual side has a
// separate branch per attribute category; the textual attribute branch is a
// single parameter set shared across categories.

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "attralign/core.hpp"
#include "attralign/dataset.hpp"

namespace attralign {

struct AffineLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Samples are rows: forward maps an n x in matrix to n x out.
class SlotEncoder {
 public:
  SlotEncoder() = default;
  // hidden_dim == 0 gives a single affine layer. Parameters start at zero.
  SlotEncoder(std::size_t in_dim, std::size_t out_dim, std::size_t hidden_dim = 0);

  static SlotEncoder identity(std::size_t dim);

  // Weights N(0, 1/fan_in), biases zero.
  void init_random(std::mt19937_64& rng);

  std::size_t in_dim() const;
  std::size_t out_dim() const;
  bool has_hidden() const { return layers_.size() == 2; }

  struct Cache {
    Eigen::MatrixXd input;
    Eigen::MatrixXd hidden;  // post-activation, only with a hidden layer
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;
  // Accumulates parameter gradients into `grad` (same shape as *this).
  void backward(const Cache& cache, const Eigen::MatrixXd& grad_out, SlotEncoder& grad) const;

  std::vector<AffineLayer>& layers() { return layers_; }
  const std::vector<AffineLayer>& layers() const { return layers_; }

 private:
  std::vector<AffineLayer> layers_;
};

struct ModelShape {
  std::size_t visual_global_in = 0;
  std::size_t visual_attr_in = 0;
  std::size_t textual_in = 0;
  std::size_t dim = kDefaultEmbeddingDim;
  std::size_t hidden = 0;
  std::size_t num_classes = 0;  // identity classifier width; 0 disables it
  std::size_t grid_height = 0;  // segmentation head; 0 disables it
  std::size_t grid_width = 0;
  bool normalize_embeddings = false;

  std::size_t grid_cells() const { return grid_height * grid_width; }
  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

struct ParamBlock {
  std::string name;
  double* data;
  std::size_t size;
};

struct ConstParamBlock {
  std::string name;
  const double* data;
  std::size_t size;
};

// Both encoders plus the identity classifier and the per-cell segmentation
// classifier. The segmentation logit of class 1 + a at cell p is
// seg_bias(p, 1 + a) + seg_weight.row(p * 5 + a) . v_a, where v_a is the
// visual embedding of category a (absent categories contribute nothing);
// background only has a bias.
class Model {
 public:
  Model() = default;
  explicit Model(const ModelShape& shape);  // all parameters zero

  static Model random(const ModelShape& shape, std::mt19937_64& rng);

  const ModelShape& shape() const { return shape_; }

  SlotEncoder visual_global;
  std::array<SlotEncoder, kNumAttributes> visual_attr;
  SlotEncoder textual_global;
  SlotEncoder textual_attr;
  AffineLayer id_head;
  Eigen::MatrixXd seg_bias;    // cells x 6
  Eigen::MatrixXd seg_weight;  // (cells * 5) x dim

  Model zeros_like() const { return Model(shape_); }

  // Stable order; identical across models of the same shape.
  std::vector<ParamBlock> parameter_blocks();
  std::vector<ConstParamBlock> parameter_blocks() const;
  std::size_t parameter_count() const;

  // Encodes one raw record; absent raw attributes stay absent.
  EmbeddingRecord embed(const RawRecord& record) const;
  // Textual attribute embedding of a raw phrase feature.
  EmbeddingVector embed_text_attribute(std::span<const double> features) const;

 private:
  ModelShape shape_;
};

std::vector<EmbeddingRecord> forward(std::span<const RawRecord> records, const Model& model);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 4e-5;  // L2 term added to the gradient
};

class Adam {
 public:
  Adam(const Model& like, AdamSettings settings);

  void step(Model& params, const Model& grad, double lr);
  long steps() const { return t_; }

 private:
  AdamSettings settings_;
  Model m_;
  Model v_;
  long t_ = 0;
};

}  // namespace attralign

#endif  // ATTRALIGN_ENCODER_HPP
