#ifndef ATTRALIGN_COMMANDS_HPP
#define ATTRALIGN_COMMANDS_HPP

// The command surface behind the `attralign` executable. Each command
// returns a process exit code and throws attralign::Error for invalid input;
// argument parsing lives in the executable.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "attralign/config.hpp"
#include "attralign/dataset.hpp"
#include "attralign/error.hpp"
#include "attralign/eval.hpp"
#include "attralign/synthetic.hpp"
#include "attralign/textparse.hpp"

namespace attralign {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitCheckFailed = 3 };

// Exit code for an error escaping a command.
int exit_code_for(ErrorKind kind);
// "error: <kind>: <message>" on one line.
std::string error_line(const Error& e);

// A data directory holds train.jsonl and val.jsonl, optionally probe.jsonl.
struct DataBundle {
  Dataset train;
  Dataset val;
  std::vector<RawProbeCase> probe;
};

DataBundle load_data_dir(const std::filesystem::path& dir, const TextFeaturizer& featurizer);
// Same layout, built in memory from a generator run.
DataBundle bundle_from_synthetic(const SyntheticData& data, const TextFeaturizer& featurizer);

struct TrainOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> k;
  std::optional<double> theta;
};

// Config file (if any) over the defaults, flags over the file.
TrainConfig resolve_config(const std::optional<std::filesystem::path>& file,
                           const TrainOverrides& overrides);

struct TrainOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path data;
  std::filesystem::path out;                    // checkpoint
  std::optional<std::filesystem::path> metrics;  // default: <out>.metrics.csv
  TrainOverrides overrides;
  bool quiet = false;
};
int run_train(const TrainOptions& opt, std::ostream& out);

enum class Ablation { Full, GlobalOnly };

struct EvalOptions {
  std::filesystem::path ckpt;
  std::filesystem::path data;
  std::string split = "val";
  std::optional<double> lambda;  // default: the checkpoint's eval_lambda
  Ablation ablate = Ablation::Full;
  std::optional<std::filesystem::path> metrics_csv;
  std::optional<std::filesystem::path> summary_json;
  bool attribute_table = false;
  std::uint64_t probe_seed = 0;
};

struct EvalReport {
  RetrievalMetrics retrieval;
  std::optional<double> probe_accuracy;
  double lambda = 1.0;
  Ablation ablate = Ablation::Full;
  nlohmann::json attributes;  // per category/value R@1 and mAP, when requested
  bool consistent = true;     // global-only ablation agrees with lambda 0
};

EvalReport evaluate(const EvalOptions& opt);
std::string eval_metrics_csv(const EvalReport& report);
nlohmann::json eval_summary_json(const EvalReport& report);
int run_eval(const EvalOptions& opt, std::ostream& out);

struct ParseOptions {
  std::string text;
  double theta = kDefaultAssignThreshold;
  std::optional<std::filesystem::path> resources;
  bool json = false;
};
nlohmann::json parse_report(const ParsedDescription& parsed);
int run_parse(const ParseOptions& opt, std::ostream& out);

struct GenDataOptions {
  std::optional<std::filesystem::path> spec;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
};
int run_gen_data(const GenDataOptions& opt, std::ostream& out);

struct InspectOptions {
  std::filesystem::path ckpt;
  std::filesystem::path data;
  std::string split = "train";
  std::optional<std::size_t> k;  // default: the checkpoint's k
};
// Surrogate positive sets per category over the whole split; indices are
// record positions within the split's visual and textual lists.
nlohmann::json inspect_surrogates(const InspectOptions& opt);
int run_inspect_surrogates(const InspectOptions& opt, std::ostream& out);

int run_grad_check(std::ostream& out);

}  // namespace attralign

#endif  // ATTRALIGN_COMMANDS_HPP
