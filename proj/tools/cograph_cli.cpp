#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cograph/cli.hpp"
#include "cograph/error.hpp"

namespace {

// 0 success, 2 bad input (flags, files, configuration), 3 runtime failure.
int exit_code_for(cograph::Errc code) {
  switch (code) {
    case cograph::Errc::config:
    case cograph::Errc::io:
    case cograph::Errc::codec_not_found:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"object-level open-vocabulary scene graphs over a byte-counted channel"};
  app.require_subcommand(1);

  cograph::TrainCodecArgs train_args;
  CLI::App* train = app.add_subcommand("train-codec", "train the 512->3 feature codec");
  train->add_option("--corpus", train_args.corpus, "perturbed samples per category")
      ->capture_default_str();
  train->add_option("--sigma", train_args.sigma, "corpus perturbation magnitude")
      ->capture_default_str();
  train->add_option("--epochs", train_args.epochs, "training epochs")->capture_default_str();
  train->add_option("--batch", train_args.batch, "mini-batch size")->capture_default_str();
  train->add_option("--lr", train_args.lr, "learning rate")->capture_default_str();
  train->add_option("--seed", train_args.seed, "corpus and optimizer seed")
      ->capture_default_str();
  train->add_option("--embedding-seed", train_args.embedding_seed, "vocabulary seed")
      ->capture_default_str();
  train->add_option("--out", train_args.out, "codec output file")->capture_default_str();

  cograph::RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run a multi-robot scenario");
  run->add_option("--scenario", run_args.scenario, "scenario JSON file")->required();
  run->add_option("--codec", run_args.codec, "trained codec file");
  run->add_option("--out", run_args.out, "output directory")->capture_default_str();
  std::uint64_t seed_override = 0;
  CLI::Option* seed_opt = run->add_option("--seed", seed_override, "override the scenario seed");
  double pose_noise_override = 0.0;
  CLI::Option* noise_opt =
      run->add_option("--pose-noise", pose_noise_override, "override pose noise sigma, meters");
  std::string mode_override;
  CLI::Option* mode_opt =
      run->add_option("--mode", mode_override, "transmit mode: compressed|raw512");
  run->add_flag("--both-modes", run_args.both_modes, "run compressed and raw512 back to back");

  cograph::QueryArgs query_args;
  CLI::App* query = app.add_subcommand("query", "rank graph nodes against text");
  query->add_option("--graph", query_args.graph, "graph dump file")->required();
  query->add_option("--text", query_args.text, "query text")->required();
  query->add_option("--k", query_args.k, "results to return")->capture_default_str();

  cograph::MetricsArgs metrics_args;
  CLI::App* metrics = app.add_subcommand("metrics", "print the results table for a run");
  metrics->add_option("--run-dir", metrics_args.run_dir, "directory written by `run`")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) {
      cograph::cmd_train_codec(train_args, std::cout);
    } else if (run->parsed()) {
      if (*seed_opt) run_args.seed = seed_override;
      if (*noise_opt) run_args.pose_noise = pose_noise_override;
      if (*mode_opt) run_args.mode = mode_override;
      cograph::cmd_run(run_args, std::cout);
    } else if (query->parsed()) {
      cograph::cmd_query(query_args, std::cout);
    } else if (metrics->parsed()) {
      cograph::cmd_metrics(metrics_args, std::cout);
    }
    return 0;
  } catch (const cograph::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
