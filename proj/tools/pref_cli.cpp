// Command-line front end: train-dict -> encode -> evaluate.
//
// Every flag can also be set through an environment variable named
// PREF_<FLAG> (upper case, dashes as underscores), e.g. PREF_ATOMS=300.

#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "pref/errors.hpp"
#include "pref/pipeline.hpp"

namespace {

void add_common(CLI::App& cmd, pref::RunConfig& cfg) {
  cmd.add_option("--out", cfg.out, "Output directory")->envname("PREF_OUT");
  cmd.add_option("--seed", cfg.seed, "Random seed")->envname("PREF_SEED");
  cmd.add_option("--jobs", cfg.jobs, "Worker threads (0 = available parallelism)")
      ->envname("PREF_JOBS");
  cmd.add_flag("--spatial", cfg.spatial, "Append normalised patch centre to each histogram")
      ->envname("PREF_SPATIAL");
}

void add_sources(CLI::App& cmd, pref::RunConfig& cfg) {
  cmd.add_option("--source", cfg.sources, "Source (single-person) manifest; repeatable")
      ->envname("PREF_SOURCE");
}

void add_target(CLI::App& cmd, pref::RunConfig& cfg) {
  cmd.add_option("--target", cfg.target, "Target (group) manifest")->envname("PREF_TARGET");
}

void add_encoding(CLI::App& cmd, pref::RunConfig& cfg, std::string& metric, std::string& pooling,
                  std::string& pca_fit) {
  cmd.add_option("--dict-dir", cfg.dict_dir, "Directory holding the dictionary bundles (default --out)")
      ->envname("PREF_DICT_DIR");
  cmd.add_option("--metric", metric, "Residual metric")
      ->check(CLI::IsMember({"l1", "cosine", "chisquare", "euclidean"}))
      ->envname("PREF_METRIC");
  cmd.add_option("--pooling", pooling, "Residual pooling")
      ->check(CLI::IsMember({"max", "avg"}))
      ->envname("PREF_POOLING");
  cmd.add_option("--pca-dim", cfg.pca_dim, "PCA output dimension u")->envname("PREF_PCA_DIM");
  cmd.add_option("--pca-fit", pca_fit, "Population the PCA is fitted on")
      ->check(CLI::IsMember({"source", "gallery"}))
      ->envname("PREF_PCA_FIT");
  cmd.add_option("--atoms", cfg.atoms, "Dictionary atoms k (checked against u)")
      ->envname("PREF_ATOMS");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group re-identification by pooled sparse residual encoding"};
  app.require_subcommand(1);

  pref::RunConfig cfg;
  std::string metric = "cosine", pooling = "avg", pca_fit = "source", channel;

  auto* train = app.add_subcommand("train-dict", "Learn one dictionary per colorspace from source images");
  add_common(*train, cfg);
  add_sources(*train, cfg);
  train->add_option("--atoms", cfg.atoms, "Dictionary atoms k")->envname("PREF_ATOMS");
  train->add_option("--lambda", cfg.lambda, "Sparsity weight")->envname("PREF_LAMBDA");
  train->add_option("--iterations", cfg.iterations, "Online learning iterations T")
      ->envname("PREF_ITERATIONS");
  train->add_option("--heldout", cfg.heldout, "Held-out patches for the objective monitor")
      ->envname("PREF_HELDOUT");
  train->add_option("--checkpoint-every", cfg.checkpoint_every,
                    "Iterations between objective checkpoints (0 = T/100)")
      ->envname("PREF_CHECKPOINT_EVERY");

  auto* encode = app.add_subcommand("encode", "Encode target images into signatures");
  add_common(*encode, cfg);
  add_sources(*encode, cfg);
  add_target(*encode, cfg);
  add_encoding(*encode, cfg, metric, pooling, pca_fit);

  auto* evaluate = app.add_subcommand("evaluate", "Run the single-vs-single shot protocol");
  add_common(*evaluate, cfg);
  add_sources(*evaluate, cfg);
  add_target(*evaluate, cfg);
  add_encoding(*evaluate, cfg, metric, pooling, pca_fit);
  evaluate->add_option("--encode-dir", cfg.encode_dir, "Directory holding encode outputs (default --out)")
      ->envname("PREF_ENCODE_DIR");
  evaluate->add_option("--trials", cfg.trials, "Random gallery/probe splits")->envname("PREF_TRIALS");
  evaluate->add_flag("--sweep-metrics", cfg.sweep_metrics, "Evaluate every metric x pooling pair")
      ->envname("PREF_SWEEP_METRICS");
  evaluate->add_flag("--sweep-pca", cfg.sweep_pca, "Evaluate u in {20,30,40,50,60}")
      ->envname("PREF_SWEEP_PCA");
  evaluate->add_flag("--dump-rankings", cfg.dump_rankings, "Write rankings.csv")
      ->envname("PREF_DUMP_RANKINGS");
  evaluate->add_option("--channel", channel, "Match on a single colorspace")
      ->check(CLI::IsMember({"HS", "RGB", "Lab"}))
      ->envname("PREF_CHANNEL");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.metric = pref::parse_metric(metric);
    cfg.pooling = pref::parse_pooling(pooling);
    cfg.pca_fit = pref::parse_pca_fit(pca_fit);
    if (!channel.empty()) cfg.channel = pref::parse_colorspace(channel);

    if (train->parsed()) {
      cfg.subcommand = "train-dict";
      pref::cmd_train_dict(cfg, std::cout);
    } else if (encode->parsed()) {
      cfg.subcommand = "encode";
      pref::cmd_encode(cfg, std::cout);
    } else {
      cfg.subcommand = "evaluate";
      pref::cmd_evaluate(cfg, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "pref: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
