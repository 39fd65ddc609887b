#pragma once

// Command implementations behind the `cograph` binary. They are plain
// library functions so tests can drive full runs in-process; all failures
// surface as Error, which the binary maps onto exit codes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace cograph {

struct TrainCodecArgs {
  std::size_t corpus = 128;  // perturbed samples per category
  double sigma = 0.05;       // corpus perturbation
  std::size_t epochs = 500;
  std::size_t batch = 256;
  double lr = 1e-4;
  std::uint64_t seed = 2024;            // corpus + optimizer seed
  std::uint64_t embedding_seed = 2024;  // vocabulary recipe
  std::string out = "codec.bin";
};

// Generates the synthetic corpus, trains the autoencoder, saves the codec
// file, and logs the loss trajectory endpoints.
void cmd_train_codec(const TrainCodecArgs& args, std::ostream& log);

struct RunArgs {
  std::string scenario;  // scenario JSON path (required)
  std::string codec;     // codec file; required for compressed transmission
  std::string out = "run_out";
  std::optional<std::uint64_t> seed;      // overrides the scenario seed
  std::optional<double> pose_noise;       // overrides pose_noise_sigma
  std::optional<std::string> mode;        // overrides the transmit mode
  bool both_modes = false;                // run compressed and raw512
};

// Runs the scenario once per requested mode and writes, under args.out:
// metrics.json (one bundle per mode), metrics_table.txt, and per mode a
// channel_log.csv, local/merged graph dumps, and merge_reports.json.
void cmd_run(const RunArgs& args, std::ostream& log);

struct QueryArgs {
  std::string graph;  // graph dump path
  std::string text;   // query text
  std::size_t k = 5;
};

// Prints the top-k nodes as a JSON array of {rank, robot, node, label,
// category, similarity}.
void cmd_query(const QueryArgs& args, std::ostream& out);

struct MetricsArgs {
  std::string run_dir;  // directory written by cmd_run
};

// Re-emits a run's metrics.json as the results table.
void cmd_metrics(const MetricsArgs& args, std::ostream& out);

}  // namespace cograph
