#include "attralign/config.hpp"

#include <fstream>
#include <set>

#include "attralign/error.hpp"

namespace attralign {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw Error(ErrorKind::InvalidParams, "unknown config field '" + where + key + "'");
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidParams, why); };
  if (batch_size < 2) fail("batch_size must be at least 2");
  if (!(lr >= 0.0)) fail("lr must be non-negative");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
  if (!(lr_decay_factor > 0.0)) fail("lr_decay_factor must be positive");
  if (k < 1) fail("k must be at least 1");
  if (embedding_dim < 1) fail("embedding_dim must be positive");
  const auto& w = loss_weights;
  if (w.id < 0 || w.seg < 0 || w.align_global < 0 || w.align_attr < 0) {
    fail("loss weights must be non-negative");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    fail("adam moment decays must be in [0, 1)");
  }
  if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
}

std::filesystem::path TrainConfig::resource_dir() const {
  return resources.empty() ? default_resource_dir() : std::filesystem::path(resources);
}

TrainConfig config_from_json(const json& j, TrainConfig base) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidParams, "config must be a JSON object");
  reject_unknown(j,
                 {"batch_size", "epochs", "lr", "weight_decay", "lr_decay_factor", "lr_decay_epoch",
                  "seed", "alignment", "k", "theta", "loss_weights", "deterministic",
                  "embedding_dim", "hidden_dim", "normalize_embeddings", "text_id_loss",
                  "eval_lambda", "adam", "resources"},
                 "");
  TrainConfig c = std::move(base);
  try {
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.lr_decay_factor = j.value("lr_decay_factor", c.lr_decay_factor);
    c.lr_decay_epoch = j.value("lr_decay_epoch", c.lr_decay_epoch);
    c.seed = j.value("seed", c.seed);
    c.k = j.value("k", c.k);
    c.theta = j.value("theta", c.theta);
    c.deterministic = j.value("deterministic", c.deterministic);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.normalize_embeddings = j.value("normalize_embeddings", c.normalize_embeddings);
    c.text_id_loss = j.value("text_id_loss", c.text_id_loss);
    c.eval_lambda = j.value("eval_lambda", c.eval_lambda);
    c.resources = j.value("resources", c.resources);
    if (j.contains("alignment")) {
      const auto& a = j["alignment"];
      reject_unknown(a, {"alpha", "beta", "m", "tau_p", "tau_n"}, "alignment.");
      const double alpha = a.value("alpha", c.alignment.alpha());
      const double m = a.value("m", c.alignment.margin());
      const double beta = a.value("beta", alpha - m);
      c.alignment = AlignmentParams(alpha, beta, m, a.value("tau_p", c.alignment.tau_p()),
                                    a.value("tau_n", c.alignment.tau_n()));
    }
    if (j.contains("loss_weights")) {
      const auto& w = j["loss_weights"];
      reject_unknown(w, {"id", "seg", "align_glo", "align_attr"}, "loss_weights.");
      c.loss_weights.id = w.value("id", c.loss_weights.id);
      c.loss_weights.seg = w.value("seg", c.loss_weights.seg);
      c.loss_weights.align_global = w.value("align_glo", c.loss_weights.align_global);
      c.loss_weights.align_attr = w.value("align_attr", c.loss_weights.align_attr);
    }
    if (j.contains("adam")) {
      const auto& a = j["adam"];
      reject_unknown(a, {"beta1", "beta2", "eps"}, "adam.");
      c.adam_beta1 = a.value("beta1", c.adam_beta1);
      c.adam_beta2 = a.value("beta2", c.adam_beta2);
      c.adam_eps = a.value("eps", c.adam_eps);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidParams, std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"lr_decay_factor", c.lr_decay_factor},
          {"lr_decay_epoch", c.lr_decay_epoch},
          {"seed", c.seed},
          {"alignment",
           {{"alpha", c.alignment.alpha()},
            {"beta", c.alignment.beta()},
            {"m", c.alignment.margin()},
            {"tau_p", c.alignment.tau_p()},
            {"tau_n", c.alignment.tau_n()}}},
          {"k", c.k},
          {"theta", c.theta},
          {"loss_weights",
           {{"id", c.loss_weights.id},
            {"seg", c.loss_weights.seg},
            {"align_glo", c.loss_weights.align_global},
            {"align_attr", c.loss_weights.align_attr}}},
          {"deterministic", c.deterministic},
          {"embedding_dim", c.embedding_dim},
          {"hidden_dim", c.hidden_dim},
          {"normalize_embeddings", c.normalize_embeddings},
          {"text_id_loss", c.text_id_loss},
          {"eval_lambda", c.eval_lambda},
          {"adam", {{"beta1", c.adam_beta1}, {"beta2", c.adam_beta2}, {"eps", c.adam_eps}}},
          {"resources", c.resources}};
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidParams, path.string() + ": invalid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace attralign
