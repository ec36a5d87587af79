#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "attralign/commands.hpp"
#include "attralign/error.hpp"

namespace {

using namespace attralign;

template <class T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& target,
                   const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attribute-aligned cross-modal retrieval"};
  app.require_subcommand(1);

  TrainOptions train;
  std::string train_config;
  auto* t = app.add_subcommand("train", "train encoders on a data directory");
  t->add_option("--config", train_config, "JSON training config");
  t->add_option("--data", train.data, "directory with train.jsonl and val.jsonl")->required();
  t->add_option("--out", train.out, "checkpoint path")->required();
  optional_flag(t, "--metrics", train.metrics, "metric CSV path (default <out>.metrics.csv)");
  optional_flag(t, "--seed", train.overrides.seed, "random seed");
  optional_flag(t, "--epochs", train.overrides.epochs, "number of epochs");
  optional_flag(t, "--lr", train.overrides.lr, "learning rate");
  optional_flag(t, "--batch-size", train.overrides.batch_size, "mini-batch size");
  optional_flag(t, "--k", train.overrides.k, "k of the reciprocal sampler");
  optional_flag(t, "--theta", train.overrides.theta, "phrase assignment threshold");
  t->add_flag("--quiet", train.quiet, "suppress per-epoch lines");

  EvalOptions eval;
  std::string ablate = "full";
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint");
  e->add_option("--ckpt", eval.ckpt, "checkpoint path")->required();
  e->add_option("--data", eval.data, "data directory")->required();
  e->add_option("--split", eval.split, "split file stem (default val)");
  optional_flag(e, "--lambda", eval.lambda, "attribute fusion weight");
  e->add_option("--ablate", ablate, "full or global-only")
      ->check(CLI::IsMember({"full", "global-only"}));
  optional_flag(e, "--metrics-out", eval.metrics_csv, "write metric,k,value CSV");
  optional_flag(e, "--summary-out", eval.summary_json, "write JSON summary");
  e->add_flag("--attributes", eval.attribute_table, "per-value attribute retrieval table");
  e->add_option("--seed", eval.probe_seed, "seed for probe tie-breaking");

  ParseOptions parse;
  auto* p = app.add_subcommand("parse", "show how a description is decomposed");
  p->add_option("--text", parse.text, "description")->required();
  p->add_option("--theta", parse.theta, "assignment threshold");
  optional_flag(p, "--resources", parse.resources, "resource directory");
  p->add_flag("--json", parse.json, "machine-readable output");

  GenDataOptions gen;
  auto* g = app.add_subcommand("gen-data", "generate a synthetic data directory");
  optional_flag(g, "--spec", gen.spec, "JSON generator spec");
  g->add_option("--out", gen.out, "output directory")->required();
  optional_flag(g, "--seed", gen.seed, "override the spec seed");

  InspectOptions inspect;
  auto* s = app.add_subcommand("inspect-surrogates", "dump k-reciprocal surrogate sets");
  s->add_option("--ckpt", inspect.ckpt, "checkpoint path")->required();
  s->add_option("--data", inspect.data, "data directory")->required();
  s->add_option("--split", inspect.split, "split file stem (default train)");
  optional_flag(s, "--k", inspect.k, "neighbourhood size");

  app.add_subcommand("grad-check", "finite-difference gradient checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& err) {
    std::string msg = err.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: Usage: " << msg << '\n';
    return kExitUsage;
  }

  try {
    if (*t) {
      if (!train_config.empty()) train.config = train_config;
      return run_train(train, std::cout);
    }
    if (*e) {
      eval.ablate = ablate == "global-only" ? Ablation::GlobalOnly : Ablation::Full;
      return run_eval(eval, std::cout);
    }
    if (*p) return run_parse(parse, std::cout);
    if (*g) return run_gen_data(gen, std::cout);
    if (*s) return run_inspect_surrogates(inspect, std::cout);
    return run_grad_check(std::cout);
  } catch (const Error& err) {
    std::cerr << error_line(err) << '\n';
    return exit_code_for(err.kind());
  } catch (const std::exception& err) {
    std::cerr << "error: Io: " << err.what() << '\n';
    return kExitData;
  }
}
