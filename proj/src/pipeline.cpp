#include "pref/pipeline.hpp"

#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "pref/artifacts.hpp"
#include "pref/errors.hpp"
#include "pref/parallel.hpp"

namespace pref {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(PcaFitMode mode) {
  return mode == PcaFitMode::Source ? "source" : "gallery";
}

PcaFitMode parse_pca_fit(std::string_view name) {
  if (name == "source") return PcaFitMode::Source;
  if (name == "gallery") return PcaFitMode::Gallery;
  throw ConfigError("unknown PCA fit mode '" + std::string(name) + "'");
}

void validate(const RunConfig& cfg) {
  if (cfg.atoms < 1) throw ConfigError("--atoms must be positive");
  if (!(cfg.lambda > 0.0)) throw ConfigError("--lambda must be positive");
  if (cfg.iterations < 0) throw ConfigError("--iterations must be non-negative");
  if (cfg.pca_dim < 1) throw ConfigError("--pca-dim must be positive");
  if (cfg.trials < 1) throw ConfigError("--trials must be at least 1");
  if (cfg.jobs < 0) throw ConfigError("--jobs must be non-negative");
  if (cfg.sweep_metrics && cfg.sweep_pca) {
    throw ConfigError("--sweep-metrics and --sweep-pca are mutually exclusive");
  }
}

void validate_dimensions(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.pca_dim >= cfg.atoms) {
    throw ConfigError("--pca-dim (" + std::to_string(cfg.pca_dim) + ") must be smaller than --atoms (" +
                      std::to_string(cfg.atoms) + ")");
  }
}

json config_echo(const RunConfig& cfg) {
  json j;
  std::vector<std::string> sources;
  for (const auto& s : cfg.sources) sources.push_back(s.stem().string());
  j["source_datasets"] = sources;
  j["target_dataset"] = cfg.target ? cfg.target->stem().string() : "";
  j["k"] = cfg.atoms;
  j["lambda"] = cfg.lambda;
  j["iterations"] = cfg.iterations;
  j["metric"] = to_string(cfg.metric);
  j["pooling"] = to_string(cfg.pooling);
  j["u"] = cfg.pca_dim;
  j["pca_fit"] = to_string(cfg.pca_fit);
  j["spatial"] = cfg.spatial;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["heldout"] = cfg.heldout;
  j["channel"] = cfg.channel ? std::string(to_string(*cfg.channel)) : "fused";
  return j;
}

namespace {

class StageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

template <class Fn>
auto stage(const RunConfig& cfg, const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(cfg.subcommand + ": " + name + ": " + e.what());
  }
}

int jobs_of(const RunConfig& cfg) { return cfg.jobs > 0 ? cfg.jobs : default_jobs(); }

fs::path dict_dir(const RunConfig& cfg) { return cfg.dict_dir.value_or(cfg.out); }
fs::path encode_dir(const RunConfig& cfg) { return cfg.encode_dir.value_or(cfg.out); }

void ensure_out(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out.string() + ": " + ec.message());
}

void record_config(const RunConfig& cfg) {
  const auto path = cfg.out / "config.json";
  json all = json::object();
  if (std::ifstream in(path); in) {
    all = json::parse(in, nullptr, false);
    if (!all.is_object()) all = json::object();
  }
  json j = config_echo(cfg);
  std::vector<std::string> sources;
  for (const auto& s : cfg.sources) sources.push_back(s.string());
  j["sources"] = sources;
  j["target"] = cfg.target ? cfg.target->string() : "";
  j["dict_dir"] = dict_dir(cfg).string();
  j["encode_dir"] = encode_dir(cfg).string();
  j["checkpoint_every"] = cfg.checkpoint_every;
  j["sweep_metrics"] = cfg.sweep_metrics;
  j["sweep_pca"] = cfg.sweep_pca;
  all[cfg.subcommand] = j;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << all.dump(2) << '\n';
}

DatasetManifest load_sources(const RunConfig& cfg) {
  if (cfg.sources.empty()) throw ConfigError("at least one --source manifest is required");
  std::vector<DatasetManifest> parts;
  for (const auto& s : cfg.sources) parts.push_back(parse_manifest(s, DomainRole::Source));
  return concat_manifests(parts);
}

DatasetManifest load_target(const RunConfig& cfg) {
  if (!cfg.target) throw ConfigError("a --target manifest is required");
  return parse_manifest(*cfg.target, DomainRole::Target);
}

EncoderConfig encoder_config(const RunConfig& cfg, ResidualMetric metric, Pooling pooling) {
  EncoderConfig enc;
  enc.residual.metric = metric;
  enc.residual.pooling = pooling;
  enc.spatial = cfg.spatial;
  return enc;
}

DictionarySet load_dictionaries(const RunConfig& cfg) {
  DictionarySet dicts;
  const Eigen::Index expected_d = kHistogramBins + (cfg.spatial ? 2 : 0);
  for (std::size_t c = 0; c < kColorSpaces.size(); ++c) {
    dicts[c] = read_dictionary(dict_dir(cfg), kColorSpaces[c]);
    if (dicts[c].dim() != expected_d) {
      throw ConfigError("dictionary " + std::string(to_string(kColorSpaces[c])) + " has d = " +
                        std::to_string(dicts[c].dim()) + " but features have d = " +
                        std::to_string(expected_d));
    }
    if (dicts[c].size() != dicts[0].size()) throw ConfigError("dictionaries differ in atom count");
  }
  if (cfg.pca_dim >= dicts[0].size()) {
    throw ConfigError("--pca-dim must be smaller than the dictionary atom count " +
                      std::to_string(dicts[0].size()));
  }
  return dicts;
}

std::vector<EncodedImage> encode_manifest(const DatasetManifest& manifest, const DictionarySet& dicts,
                                          const EncoderConfig& enc, int jobs, std::ostream& log) {
  std::vector<EncodedImage> out(manifest.records.size());
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    const auto& rec = manifest.records[i];
    auto& img = out[i];
    img.image_id = rec.image_id;
    img.group_id = rec.id;
    const auto loaded = load_record(rec, manifest.role);
    try {
      img.pooled = pooled_encoding(loaded.image, loaded.mask, dicts, enc);
    } catch (const DegenerateInput&) {
      img.valid = false;
    }
  });
  for (const auto& img : out) {
    if (!img.valid) log << "warning: " << img.image_id << " is fully masked; excluded\n";
  }
  return out;
}

PcaSet fit_pca(const std::vector<EncodedImage>& images, Eigen::Index u) {
  std::vector<const EncodedImage*> valid;
  for (const auto& img : images) {
    if (img.valid) valid.push_back(&img);
  }
  if (valid.empty()) throw InvalidArgument("no encodable images to fit PCA on");
  PcaSet pca;
  for (std::size_t c = 0; c < kColorSpaces.size(); ++c) {
    Eigen::MatrixXd samples(valid.front()->pooled[c].size(), Eigen::Index(valid.size()));
    for (std::size_t i = 0; i < valid.size(); ++i) samples.col(Eigen::Index(i)) = valid[i]->pooled[c];
    pca[c] = pca_fit(samples, u);
    pca[c].colorspace = kColorSpaces[c];
  }
  return pca;
}

void apply_pca(std::vector<EncodedImage>& images, const PcaSet& pca) {
  for (auto& img : images) {
    if (img.valid) img.signature = project(img.pooled, pca);
  }
}

PooledTable to_pooled_table(const std::vector<EncodedImage>& images, Eigen::Index k) {
  PooledTable t;
  t.k = k;
  for (const auto& img : images) {
    if (!img.valid) continue;
    t.image_ids.push_back(img.image_id);
    t.group_ids.push_back(img.group_id);
    t.pooled.push_back(img.pooled);
  }
  return t;
}

std::vector<EncodedImage> from_pooled_table(const PooledTable& t) {
  std::vector<EncodedImage> out(t.image_ids.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].image_id = t.image_ids[i];
    out[i].group_id = t.group_ids[i];
    out[i].pooled = t.pooled[i];
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

EvalReport evaluate_and_write(const RunConfig& cfg, std::vector<EncodedImage>& images,
                              std::size_t excluded, const std::string& suffix, json echo,
                              bool gallery_pca, Eigen::Index u, std::ostream& log) {
  ProtocolOptions opts;
  opts.trials = cfg.trials;
  opts.seed = cfg.seed;
  opts.channel = cfg.channel;
  if (gallery_pca) opts.gallery_pca_dim = u;

  std::vector<RankedList> rankings;
  auto report = evaluate_protocol(images, opts, cfg.dump_rankings ? &rankings : nullptr);
  report.excluded += excluded;
  report.config = std::move(echo);

  write_text(cfg.out / ("report" + suffix + ".json"), to_json(report).dump(2) + "\n");
  std::ostringstream csv;
  write_cmc_csv(csv, report);
  write_text(cfg.out / ("cmc" + suffix + ".csv"), csv.str());
  if (cfg.dump_rankings) {
    std::ostringstream r;
    write_rankings_csv(r, rankings);
    write_text(cfg.out / ("rankings" + suffix + ".csv"), r.str());
  }
  log << (suffix.empty() ? std::string("report") : suffix.substr(1)) << ": " << summary_line(report)
      << '\n';
  return report;
}

json evaluate_echo(const RunConfig& cfg, std::optional<Eigen::Index> k, Eigen::Index u) {
  auto j = config_echo(cfg);
  for (const char* key : {"lambda", "iterations", "heldout"}) j.erase(key);
  if (k) {
    j["k"] = *k;
  } else {
    j.erase("k");
  }
  j["u"] = u;
  return j;
}

void check_u(Eigen::Index u, Eigen::Index k) {
  if (u >= k) {
    throw ConfigError("--pca-dim (" + std::to_string(u) + ") must be smaller than the atom count " +
                      std::to_string(k));
  }
}

}  // namespace

void cmd_train_dict(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const auto manifest = stage(cfg, "loading source manifests", [&] { return load_sources(cfg); });
  ensure_out(cfg);
  const int jobs = jobs_of(cfg);

  // Per image, per colorspace: 64- or 66-D features of every patch.
  const std::size_t n_images = manifest.records.size();
  std::vector<ImageFeatures> features(n_images);
  stage(cfg, "extracting source features", [&] {
    parallel_for(n_images, jobs, [&](std::size_t i) {
      const auto loaded = load_record(manifest.records[i], DomainRole::Source);
      features[i] = extract_features(loaded.image, loaded.mask, cfg.spatial);
    });
  });
  log << "train-dict: " << n_images << " source images from " << manifest.name << '\n';

  std::array<LearnResult, 3> results;
  stage(cfg, "learning dictionaries", [&] {
    parallel_for(kColorSpaces.size(), jobs, [&](std::size_t c) {
      std::size_t count = 0;
      for (const auto& f : features) {
        for (const auto& p : f.per_colorspace[c]) count += p.is_zero() ? 0 : 1;
      }
      if (count == 0) throw InvalidArgument("no non-empty source patches");
      const Eigen::Index d = kHistogramBins + (cfg.spatial ? 2 : 0);
      Eigen::MatrixXf samples(d, Eigen::Index(count));
      Eigen::Index col = 0;
      for (const auto& f : features) {
        for (const auto& p : f.per_colorspace[c]) {
          if (p.is_zero()) continue;
          for (Eigen::Index r = 0; r < d; ++r) samples(r, col) = float(p.values[std::size_t(r)]);
          ++col;
        }
      }
      LearnConfig lc;
      lc.k = cfg.atoms;
      lc.lambda = cfg.lambda;
      lc.iterations = cfg.iterations;
      lc.seed = cfg.seed;
      lc.heldout_size = cfg.heldout;
      lc.checkpoint_interval =
          cfg.checkpoint_every > 0 ? cfg.checkpoint_every : std::max(1L, cfg.iterations / 100);
      lc.colorspace = kColorSpaces[c];
      results[c] = learn_dictionary(FloatMatrixSource(std::move(samples)), lc);
    });
  });

  stage(cfg, "writing dictionaries", [&] {
    std::ostringstream csv;
    csv.precision(17);
    csv << "colorspace,iteration,objective\n";
    for (std::size_t c = 0; c < kColorSpaces.size(); ++c) {
      write_dictionary(cfg.out, results[c].dict);
      for (const auto& cp : results[c].checkpoints) {
        csv << to_string(kColorSpaces[c]) << ',' << cp.t << ',' << cp.objective << '\n';
      }
      const auto& cps = results[c].checkpoints;
      log << "train-dict: " << to_string(kColorSpaces[c]) << " objective " << cps.front().objective
          << " -> " << cps.back().objective << '\n';
    }
    write_text(cfg.out / "train_log.csv", csv.str());
    record_config(cfg);
  });
}

void cmd_encode(const RunConfig& cfg, std::ostream& log) {
  validate_dimensions(cfg);
  const auto dicts = stage(cfg, "loading dictionaries", [&] {
    auto d = load_dictionaries(cfg);
    if (d[0].size() != cfg.atoms) {
      throw ConfigError("--atoms (" + std::to_string(cfg.atoms) +
                        ") does not match the dictionary atom count " + std::to_string(d[0].size()));
    }
    return d;
  });
  const auto target = stage(cfg, "loading target manifest", [&] { return load_target(cfg); });
  std::optional<DatasetManifest> sources;
  if (cfg.pca_fit == PcaFitMode::Source) {
    sources = stage(cfg, "loading source manifests", [&] { return load_sources(cfg); });
  }
  ensure_out(cfg);
  const int jobs = jobs_of(cfg);
  const auto enc = encoder_config(cfg, cfg.metric, cfg.pooling);
  const Eigen::Index k = dicts[0].size();

  auto images = stage(cfg, "encoding target images",
                      [&] { return encode_manifest(target, dicts, enc, jobs, log); });

  PcaSet pca = stage(cfg, "fitting PCA", [&] {
    if (sources) {
      const auto src = encode_manifest(*sources, dicts, enc, jobs, log);
      write_pooled(cfg.out, "source", to_pooled_table(src, k));
      return fit_pca(src, cfg.pca_dim);
    }
    return fit_pca(images, cfg.pca_dim);
  });
  apply_pca(images, pca);

  stage(cfg, "writing signatures", [&] {
    for (const auto& m : pca) write_pca(cfg.out, m);
    write_pooled(cfg.out, "target", to_pooled_table(images, k));
    SignatureTable table;
    table.u = cfg.pca_dim;
    for (const auto& img : images) {
      if (!img.valid) {
        table.excluded_ids.push_back(img.image_id);
        continue;
      }
      table.image_ids.push_back(img.image_id);
      table.group_ids.push_back(img.group_id);
      table.signatures.push_back(img.signature);
    }
    write_signatures(cfg.out, table);
    record_config(cfg);
    log << "encode: " << table.image_ids.size() << " signatures (" << table.excluded_ids.size()
        << " excluded), u = " << cfg.pca_dim << '\n';
  });
}

EvalReport cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  ensure_out(cfg);
  const bool gallery = cfg.pca_fit == PcaFitMode::Gallery;
  std::optional<EvalReport> first;
  auto keep = [&](EvalReport r) {
    if (!first) first = std::move(r);
  };

  if (cfg.sweep_metrics) {
    const auto dicts = stage(cfg, "loading dictionaries", [&] { return load_dictionaries(cfg); });
    const auto target = stage(cfg, "loading target manifest", [&] { return load_target(cfg); });
    std::optional<DatasetManifest> sources;
    if (!gallery) sources = stage(cfg, "loading source manifests", [&] { return load_sources(cfg); });
    for (auto metric : kResidualMetrics) {
      for (auto pooling : kPoolings) {
        const std::string suffix =
            "_" + std::string(to_string(metric)) + "_" + std::string(to_string(pooling));
        keep(stage(cfg, "metric sweep", [&] {
          const auto enc = encoder_config(cfg, metric, pooling);
          auto images = encode_manifest(target, dicts, enc, jobs_of(cfg), log);
          if (!gallery) apply_pca(images, fit_pca(encode_manifest(*sources, dicts, enc, jobs_of(cfg), log), cfg.pca_dim));
          auto echo = evaluate_echo(cfg, dicts[0].size(), cfg.pca_dim);
          echo["metric"] = to_string(metric);
          echo["pooling"] = to_string(pooling);
          return evaluate_and_write(cfg, images, 0, suffix, echo, gallery, cfg.pca_dim, log);
        }));
      }
    }
  } else if (cfg.sweep_pca) {
    const auto target = stage(cfg, "reading pooled encodings",
                              [&] { return read_pooled(encode_dir(cfg), "target"); });
    std::optional<PooledTable> source;
    if (!gallery) {
      source = stage(cfg, "reading pooled encodings",
                     [&] { return read_pooled(encode_dir(cfg), "source"); });
    }
    for (int u : kPcaSweep) {
      keep(stage(cfg, "PCA sweep", [&] {
        check_u(u, target.k);
        auto images = from_pooled_table(target);
        if (!gallery) apply_pca(images, fit_pca(from_pooled_table(*source), u));
        return evaluate_and_write(cfg, images, 0, "_u" + std::to_string(u),
                                  evaluate_echo(cfg, target.k, u), gallery, u, log);
      }));
    }
  } else if (gallery) {
    keep(stage(cfg, "evaluating", [&] {
      const auto table = read_pooled(encode_dir(cfg), "target");
      check_u(cfg.pca_dim, table.k);
      auto images = from_pooled_table(table);
      return evaluate_and_write(cfg, images, 0, "", evaluate_echo(cfg, table.k, cfg.pca_dim), true,
                                cfg.pca_dim, log);
    }));
  } else {
    keep(stage(cfg, "evaluating", [&] {
      const auto table = read_signatures(encode_dir(cfg));
      std::vector<EncodedImage> images(table.image_ids.size());
      for (std::size_t i = 0; i < images.size(); ++i) {
        images[i].image_id = table.image_ids[i];
        images[i].group_id = table.group_ids[i];
        images[i].signature = table.signatures[i];
      }
      return evaluate_and_write(cfg, images, table.excluded_ids.size(), "",
                                evaluate_echo(cfg, std::nullopt, table.u), false, table.u, log);
    }));
  }
  stage(cfg, "writing config", [&] { record_config(cfg); });
  return std::move(*first);
}

}  // namespace pref
