#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cograph/cli.hpp"
#include "cograph/codec.hpp"
#include "cograph/corpus.hpp"
#include "cograph/dump.hpp"
#include "cograph/error.hpp"
#include "cograph/metrics.hpp"
#include "cograph/rng.hpp"
#include "cograph/sim.hpp"

namespace cograph {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) raise(Errc::io, "short write to " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

void cmd_train_codec(const TrainCodecArgs& args, std::ostream& log) {
  if (args.corpus == 0) raise(Errc::config, "corpus needs at least one sample per category");
  EmbeddingTable table(default_embedding_spec(args.embedding_seed));
  FeatureCorpus corpus =
      generate_corpus(table, args.corpus, args.sigma, mix_seed(args.seed, hash64("corpus")));
  log << "corpus: " << corpus.vectors.size() << " vectors, "
      << table.spec().categories.size() << " categories, sigma " << args.sigma << "\n";

  TrainingConfig cfg;
  cfg.epochs = args.epochs;
  cfg.batch = args.batch;
  cfg.lr = args.lr;
  cfg.seed = args.seed;
  TrainResult result = train_codec(corpus, cfg);
  save_codec(result.params, args.out);

  log << "trained " << args.epochs << " epochs (batch " << args.batch << ", lr " << args.lr
      << ")\n";
  log << "loss: train " << result.train_loss.front() << " -> " << result.train_loss.back();
  if (!result.val_loss.empty()) log << ", val " << result.val_loss.back();
  log << "\n" << "codec written to " << args.out << "\n";
}

void cmd_run(const RunArgs& args, std::ostream& log) {
  if (args.scenario.empty()) raise(Errc::config, "run needs a scenario file");
  ScenarioConfig cfg = load_scenario(args.scenario);
  if (args.seed) cfg.seed = *args.seed;
  if (args.pose_noise) cfg.pose_noise_sigma = *args.pose_noise;
  if (args.mode) {
    if (*args.mode == "compressed")
      cfg.mode = TransmitMode::compressed;
    else if (*args.mode == "raw512")
      cfg.mode = TransmitMode::raw512;
    else
      raise(Errc::config, "unknown mode '" + *args.mode + "' (compressed|raw512)");
  }

  std::vector<TransmitMode> modes;
  if (args.both_modes)
    modes = {TransmitMode::compressed, TransmitMode::raw512};
  else
    modes = {cfg.mode};

  bool needs_codec = false;
  for (TransmitMode m : modes) needs_codec |= m == TransmitMode::compressed;
  std::optional<CodecParams> codec;
  if (!args.codec.empty())
    codec = load_codec(args.codec);
  else if (needs_codec)
    raise(Errc::codec_not_found, "compressed transmission needs --codec");

  std::filesystem::path out_dir(args.out);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) raise(Errc::io, "cannot create " + out_dir.string() + ": " + ec.message());

  EmbeddingTable table(default_embedding_spec(cfg.embedding_seed));
  std::vector<MetricsBundle> bundles;
  for (TransmitMode mode : modes) {
    cfg.mode = mode;
    ScenarioResult result = run_scenario(cfg, codec ? &*codec : nullptr);
    MetricsBundle bundle = compute_metrics(result, cfg, table);
    bundles.push_back(bundle);

    std::string mode_name = mode == TransmitMode::compressed ? "compressed" : "raw512";
    std::filesystem::path mode_dir = out_dir / mode_name;
    std::filesystem::create_directories(mode_dir, ec);
    if (ec) raise(Errc::io, "cannot create " + mode_dir.string() + ": " + ec.message());

    write_text(mode_dir / "channel_log.csv", channel_log_csv(result.stats));
    for (std::size_t r = 0; r < result.locals.size(); ++r)
      write_text(mode_dir / ("local_robot" + std::to_string(r + 1) + ".txt"),
                 write_graph_dump(make_graph_dump(result.locals[r], table.spec())));
    const COGraph& view = result.views[0] ? result.views[0]->merged : result.locals[0];
    write_text(mode_dir / "merged_robot1.txt",
               write_graph_dump(make_graph_dump(view, table.spec())));

    nlohmann::json reports = nlohmann::json::array();
    for (const MergeEvent& ev : result.merges)
      reports.push_back({{"receiver", int(ev.receiver)},
                         {"sender", int(ev.sender)},
                         {"report", nlohmann::json::parse(ev.report_json)}});
    write_text(mode_dir / "merge_reports.json", reports.dump(2) + "\n");

    log << mode_name << ": " << result.locals.size() << " robots, "
        << result.stats.total_sent() << " bytes sent, " << result.merges.size()
        << " merge events, view " << view.node_count() << " nodes / " << view.edge_count()
        << " edges\n";
  }

  write_text(out_dir / "metrics.json", metrics_json_array(bundles));
  write_text(out_dir / "metrics_table.txt", metrics_table(bundles));
  log << "metrics written to " << (out_dir / "metrics.json").string() << "\n";
}

void cmd_query(const QueryArgs& args, std::ostream& out) {
  if (args.graph.empty()) raise(Errc::config, "query needs a graph dump file");
  if (args.text.empty()) raise(Errc::config, "query needs text");
  GraphDump dump = load_graph_dump(args.graph);
  if (dump.nodes.empty()) raise(Errc::empty_graph, "graph dump has no nodes");

  EmbeddingTable table(dump.embedding);
  QueryResult result = query_nodes(dump.nodes, table, args.text, args.k);

  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < result.hits.size(); ++i) {
    const QueryHit& hit = result.hits[i];
    arr.push_back({{"rank", i + 1},
                   {"robot", int(hit.robot)},
                   {"node", int(hit.node)},
                   {"label", hit.label},
                   {"category", table.category_of(hit.label)},
                   {"similarity", hit.similarity}});
  }
  out << arr.dump(2) << "\n";
}

void cmd_metrics(const MetricsArgs& args, std::ostream& out) {
  if (args.run_dir.empty()) raise(Errc::config, "metrics needs a run directory");
  std::filesystem::path path = std::filesystem::path(args.run_dir) / "metrics.json";
  std::vector<MetricsBundle> bundles = metrics_array_from_json(read_text(path));
  out << metrics_table(bundles);
}

}  // namespace cograph
