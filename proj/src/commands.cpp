#include "attralign/commands.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "attralign/checkpoint.hpp"
#include "attralign/error.hpp"
#include "attralign/grad_check.hpp"
#include "attralign/sampler.hpp"
#include "attralign/trainer.hpp"

namespace attralign {
namespace {

namespace fs = std::filesystem;

void split_into(std::vector<RawRecord> records, Dataset& out) {
  for (auto& r : records) {
    (r.modality == Modality::Visual ? out.visual : out.textual).push_back(std::move(r));
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

fs::path split_path(const fs::path& dir, const std::string& split) {
  const fs::path p = dir / (split + ".jsonl");
  if (!fs::exists(p)) throw Error(ErrorKind::Io, "missing " + p.string());
  return p;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::InvalidParams:
      return kExitUsage;
    default:
      return kExitData;
  }
}

std::string error_line(const Error& e) {
  std::string msg = e.what();
  for (char& c : msg) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return "error: " + std::string(to_string(e.kind())) + ": " + msg;
}

DataBundle load_data_dir(const fs::path& dir, const TextFeaturizer& featurizer) {
  DataBundle b;
  b.train = read_dataset(split_path(dir, "train"), &featurizer);
  b.val = read_dataset(split_path(dir, "val"), &featurizer);
  if (fs::exists(dir / "probe.jsonl")) b.probe = read_probe_cases(dir / "probe.jsonl", featurizer);
  return b;
}

DataBundle bundle_from_synthetic(const SyntheticData& data, const TextFeaturizer& featurizer) {
  auto prepare = [&](std::vector<RawRecord> records) {
    for (auto& r : records) {
      if (r.modality == Modality::Textual && r.text) featurizer.featurize(r);
    }
    return records;
  };
  DataBundle b;
  split_into(prepare(data.train), b.train);
  split_into(prepare(data.val), b.val);
  b.probe = data.probe;
  for (auto& c : b.probe) {
    if (c.query.text) featurizer.featurize(c.query);
  }
  return b;
}

TrainConfig resolve_config(const std::optional<fs::path>& file, const TrainOverrides& o) {
  TrainConfig c = file ? load_config(*file) : TrainConfig{};
  if (o.seed) c.seed = *o.seed;
  if (o.epochs) c.epochs = *o.epochs;
  if (o.lr) c.lr = *o.lr;
  if (o.batch_size) c.batch_size = *o.batch_size;
  if (o.k) c.k = *o.k;
  if (o.theta) c.theta = *o.theta;
  c.validate();
  return c;
}

int run_train(const TrainOptions& opt, std::ostream& out) {
  const TrainConfig config = resolve_config(opt.config, opt.overrides);
  const ParserResources resources = ParserResources::load(config.resource_dir());
  const TextFeaturizer featurizer(resources, config.theta);
  const DataBundle data = load_data_dir(opt.data, featurizer);

  const auto on_epoch = [&](const EpochMetrics& m) {
    if (opt.quiet) return;
    out << "epoch " << m.epoch << " id " << fixed(m.loss_id) << " seg " << fixed(m.loss_seg)
        << " glo " << fixed(m.loss_align_glo) << " attr " << fixed(m.loss_align_attr)
        << " val_r1 " << fixed(m.val_r1) << '\n';
  };
  const FitResult result = fit(data.train, data.val, config, on_epoch);
  save_checkpoint(result.best, opt.out);
  const fs::path metrics = opt.metrics ? *opt.metrics : fs::path(opt.out.string() + ".metrics.csv");
  write_text(metrics, metrics_csv(result.log));
  out << "checkpoint " << opt.out.string() << " (epoch " << result.best.epoch << ")\n";
  out << "metrics " << metrics.string() << '\n';
  return kExitOk;
}

EvalReport evaluate(const EvalOptions& opt) {
  const Checkpoint ckpt = load_checkpoint(opt.ckpt);
  const ParserResources resources = ParserResources::load(ckpt.config.resource_dir());
  const TextFeaturizer featurizer(resources, ckpt.config.theta);
  const Dataset split = read_dataset(split_path(opt.data, opt.split), &featurizer);

  EvalReport report;
  report.ablate = opt.ablate;
  report.lambda = opt.ablate == Ablation::GlobalOnly ? 0.0 : opt.lambda.value_or(ckpt.config.eval_lambda);

  if (opt.ablate == Ablation::GlobalOnly) {
    // Dropping the attribute branches must score exactly like lambda = 0.
    report.retrieval = evaluate_retrieval(ckpt.model, split, 0.0, ScoringMode::GlobalOnly);
    const auto zero = evaluate_retrieval(ckpt.model, split, 0.0, ScoringMode::Combined);
    const auto& g = report.retrieval;
    report.consistent = g.r1 == zero.r1 && g.r5 == zero.r5 && g.r10 == zero.r10 && g.map == zero.map;
  } else {
    report.retrieval = evaluate_retrieval(ckpt.model, split, report.lambda);
  }

  const fs::path probe_path = opt.data / "probe.jsonl";
  if (fs::exists(probe_path)) {
    const auto cases = read_probe_cases(probe_path, featurizer);
    report.probe_accuracy = probe_malpositioned(
        cases, ckpt.model, report.lambda,
        opt.ablate == Ablation::GlobalOnly ? ScoringMode::GlobalOnly : ScoringMode::Combined,
        opt.probe_seed);
  }

  if (opt.attribute_table) {
    report.attributes = nlohmann::json::object();
    for (AttributeCategory c : kAllCategories) {
      const std::size_t a = index_of(c);
      std::set<std::string> values;
      for (const auto& r : split.visual) {
        if (r.present(c) && r.labels[a]) values.insert(*r.labels[a]);
      }
      const auto& words = resources.dictionary.words(c);
      if (values.empty() || words.empty()) continue;
      nlohmann::json rows = nlohmann::json::object();
      for (const auto& v : values) {
        const std::string phrase = v + " " + words.front();
        try {
          const auto res = attribute_retrieve(phrase, split.visual, ckpt.model, featurizer, c, v);
          nlohmann::json row{{"query", phrase}, {"targets", res.targets}};
          row["r1"] = res.r1 ? nlohmann::json(*res.r1) : nlohmann::json(nullptr);
          row["map"] = res.map ? nlohmann::json(*res.map) : nlohmann::json(nullptr);
          rows[v] = row;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::PhraseUnassignable) throw;
          rows[v] = nlohmann::json{{"query", phrase}, {"error", "PhraseUnassignable"}};
        }
      }
      report.attributes[std::string(category_key(c))] = rows;
    }
  }
  return report;
}

std::string eval_metrics_csv(const EvalReport& r) {
  std::ostringstream s;
  s.precision(17);
  s << "metric,k,value\n";
  s << "recall,1," << r.retrieval.r1 << '\n';
  s << "recall,5," << r.retrieval.r5 << '\n';
  s << "recall,10," << r.retrieval.r10 << '\n';
  s << "map,," << r.retrieval.map << '\n';
  if (r.probe_accuracy) s << "probe_accuracy,," << *r.probe_accuracy << '\n';
  return s.str();
}

nlohmann::json eval_summary_json(const EvalReport& r) {
  nlohmann::json j{{"lambda", r.lambda},
                   {"ablate", r.ablate == Ablation::GlobalOnly ? "global-only" : "full"},
                   {"queries", r.retrieval.queries},
                   {"r1", r.retrieval.r1},
                   {"r5", r.retrieval.r5},
                   {"r10", r.retrieval.r10},
                   {"map", r.retrieval.map}};
  j["probe_accuracy"] = r.probe_accuracy ? nlohmann::json(*r.probe_accuracy) : nlohmann::json(nullptr);
  if (!r.attributes.is_null()) j["attributes"] = r.attributes;
  return j;
}

int run_eval(const EvalOptions& opt, std::ostream& out) {
  const EvalReport r = evaluate(opt);
  out << "queries " << r.retrieval.queries << '\n';
  out << "R@1 " << fixed(r.retrieval.r1) << '\n';
  out << "R@5 " << fixed(r.retrieval.r5) << '\n';
  out << "R@10 " << fixed(r.retrieval.r10) << '\n';
  out << "mAP " << fixed(r.retrieval.map) << '\n';
  if (r.probe_accuracy) out << "probe " << fixed(*r.probe_accuracy) << '\n';
  if (!r.attributes.is_null()) {
    for (const auto& [cat, rows] : r.attributes.items()) {
      for (const auto& [value, row] : rows.items()) {
        out << "attribute " << cat << ' ' << value;
        if (row.contains("error")) {
          out << " unassignable\n";
          continue;
        }
        out << " targets " << row["targets"].get<std::size_t>();
        out << " R@1 " << (row["r1"].is_null() ? "-" : fixed(row["r1"].get<double>()));
        out << " mAP " << (row["map"].is_null() ? "-" : fixed(row["map"].get<double>())) << '\n';
      }
    }
  }
  if (opt.metrics_csv) write_text(*opt.metrics_csv, eval_metrics_csv(r));
  if (opt.summary_json) write_text(*opt.summary_json, eval_summary_json(r).dump(2) + "\n");
  if (!r.consistent) {
    out << "check failed: global-only scores differ from lambda 0 scores\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

nlohmann::json parse_report(const ParsedDescription& parsed) {
  nlohmann::json phrases = nlohmann::json::array();
  for (const auto& p : parsed.phrases) {
    phrases.push_back({{"text", join(p.tokens)},
                       {"category", p.category ? nlohmann::json(std::string(category_name(*p.category)))
                                               : nlohmann::json(nullptr)},
                       {"score", p.score}});
  }
  nlohmann::json attributes = nlohmann::json::object();
  for (const auto& [c, tokens] : parsed.attributes) attributes[std::string(category_name(c))] = join(tokens);
  return {{"tokens", parsed.tokens}, {"phrases", phrases}, {"attributes", attributes}};
}

int run_parse(const ParseOptions& opt, std::ostream& out) {
  if (!(opt.theta >= -1.0 && opt.theta <= 1.0)) {
    throw Error(ErrorKind::InvalidParams, "theta must lie in [-1, 1]");
  }
  const ParserResources resources =
      ParserResources::load(opt.resources ? *opt.resources : default_resource_dir());
  const ParsedDescription parsed = parse_description(opt.text, resources, opt.theta);
  if (opt.json) {
    out << parse_report(parsed).dump() << '\n';
    return kExitOk;
  }
  out << "tokens: " << join(parsed.tokens) << '\n';
  for (const auto& p : parsed.phrases) {
    out << "chunk: \"" << join(p.tokens) << "\" -> "
        << (p.category ? std::string(category_name(*p.category)) : std::string("unassigned"))
        << " (" << fixed(p.score) << ")\n";
  }
  for (const auto& [c, tokens] : parsed.attributes) {
    out << category_name(c) << ": \"" << join(tokens) << "\"\n";
  }
  return kExitOk;
}

int run_gen_data(const GenDataOptions& opt, std::ostream& out) {
  SyntheticSpec spec;
  if (opt.spec) {
    std::ifstream f(*opt.spec);
    if (!f) throw Error(ErrorKind::Io, "cannot read " + opt.spec->string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedInput, opt.spec->string() + ": " + e.what());
    }
    spec = spec_from_json(j);
  }
  if (opt.seed) spec.seed = *opt.seed;
  spec.validate();
  const SyntheticData data = gen_synthetic(spec);
  write_synthetic(data, spec, opt.out);
  out << "wrote " << data.train.size() << " train, " << data.val.size() << " val records and "
      << data.probe.size() << " probe cases to " << opt.out.string() << '\n';
  return kExitOk;
}

nlohmann::json inspect_surrogates(const InspectOptions& opt) {
  const Checkpoint ckpt = load_checkpoint(opt.ckpt);
  const ParserResources resources = ParserResources::load(ckpt.config.resource_dir());
  const TextFeaturizer featurizer(resources, ckpt.config.theta);
  const Dataset split = read_dataset(split_path(opt.data, opt.split), &featurizer);
  const std::size_t k = opt.k.value_or(ckpt.config.k);
  if (k == 0) throw Error(ErrorKind::InvalidParams, "k must be at least 1");

  const auto visual = forward(split.visual, ckpt.model);
  const auto textual = forward(split.textual, ckpt.model);
  nlohmann::json categories = nlohmann::json::object();
  for (AttributeCategory c : kAllCategories) {
    SamplerInput input;
    input.k = k;
    for (std::size_t i = 0; i < visual.size(); ++i) {
      if (visual[i].present(c)) input.visual.push_back({i, visual[i].attr(c)});
    }
    for (std::size_t j = 0; j < textual.size(); ++j) {
      if (textual[j].present(c)) input.textual.push_back({j, textual[j].attr(c)});
    }
    nlohmann::json entry{{"visual", input.visual.size()}, {"textual", input.textual.size()}};
    std::size_t pairs = 0;
    std::size_t cross = 0;
    nlohmann::json sets = nlohmann::json::object();
    if (!input.visual.empty() && !input.textual.empty()) {
      for (const auto& [v, ts] : k_reciprocal_sample(input)) {
        sets[std::to_string(v)] = std::vector<std::size_t>(ts.begin(), ts.end());
        pairs += ts.size();
        for (std::size_t t : ts) {
          if (visual[v].person_id() != textual[t].person_id()) ++cross;
        }
      }
    }
    entry["pairs"] = pairs;
    entry["cross_identity_pairs"] = cross;
    entry["sets"] = sets;
    categories[std::string(category_key(c))] = entry;
  }
  return {{"k", k}, {"split", opt.split}, {"categories", categories}};
}

int run_inspect_surrogates(const InspectOptions& opt, std::ostream& out) {
  out << inspect_surrogates(opt).dump() << '\n';
  return kExitOk;
}

int run_grad_check(std::ostream& out) {
  bool ok = true;
  for (const auto& r : run_grad_checks()) {
    out << (r.ok() ? "ok   " : "FAIL ") << r.name << ": " << r.checks << " checks, "
        << r.failures << " failures, max error " << std::scientific << std::setprecision(2)
        << r.max_error << " (tol " << r.tolerance << "), " << std::fixed << std::setprecision(3)
        << r.seconds << " s\n";
    ok = ok && r.ok();
  }
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace attralign
