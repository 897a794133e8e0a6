// Batch CLI over the cross-script recognition core: synth, train, lut,
// recognize, spot, simscore. stdout carries data and reports, stderr carries
// diagnostics. Exit codes: 0 ok, 2 config, 3 I/O, 4 insufficient data,
// 5 bundle incompatibility, 6 character coverage.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "xlhwr/bundle.hpp"
#include "xlhwr/errors.hpp"
#include "xlhwr/formats.hpp"
#include "xlhwr/parallel.hpp"
#include "xlhwr/pipeline.hpp"
#include "xlhwr/simscore.hpp"
#include "xlhwr/wordrec.hpp"
#include "xlhwr/wordspot.hpp"

namespace fs = std::filesystem;
using namespace xlhwr;

namespace {

std::set<std::string> table_tokens(const std::map<std::string, Decomp>& table) {
  std::set<std::string> tokens;
  for (const auto& [ch, d] : table) tokens.insert(ch);
  return tokens;
}

std::vector<LowerTemplate> maybe_templates(const std::string& dir) {
  if (dir.empty()) return {};
  return load_templates(dir);
}

const HmmSet& hmms_of(const ModelBundle& b, const std::string& path) {
  if (b.meta.kind != "hmmset" || !b.hmms)
    throw CompatError(path + ": expected an hmmset bundle, got '" +
                      b.meta.kind + "'");
  return *b.hmms;
}

const SvmModel& svm_of(const ModelBundle& b, const std::string& path) {
  if (b.meta.kind != "svm" || !b.svm)
    throw CompatError(path + ": expected an svm bundle, got '" + b.meta.kind +
                      "'");
  return *b.svm;
}

std::vector<Lut> load_lut_args(const std::vector<std::string>& paths) {
  std::vector<Lut> all;
  for (const auto& p : paths) {
    std::vector<Lut> part;
    // Accept either a LUT bundle or a bare LUT table file.
    std::ifstream probe(p);
    std::string first;
    std::getline(probe, first);
    if (first.rfind("XLHWR ", 0) == 0) {
      ModelBundle b = load_bundle(p);
      if (b.meta.kind != "luts")
        throw CompatError(p + ": expected a luts bundle, got '" + b.meta.kind +
                          "'");
      part = std::move(b.luts);
    } else {
      part = load_luts(p);
    }
    for (auto& lut : part) {
      if (find_lut(all, lut.zone))
        throw CompatError(p + ": duplicate LUT for zone " +
                          zone_name(lut.zone));
      all.push_back(std::move(lut));
    }
  }
  return all;
}

int run_synth_cmd(const std::string& config_path, std::size_t jobs) {
  const Config cfg = load_config(config_path);
  const SynthParams params = synth_params_from_config(cfg, config_path);
  const SynthOutput out = run_synth(params, jobs);
  std::cout << "source\t" << out.source.dir << "\n";
  std::cout << "target\t" << out.target.dir << "\n";
  std::cout << "mapping\t" << out.mapping_file << "\n";
  return 0;
}

int run_train_cmd(const std::string& manifest_path, const std::string& zone,
                  const std::string& script_path, const std::string& templates,
                  int states, int mixtures, int iters, double cost,
                  double gamma, const std::string& out_path,
                  std::size_t jobs) {
  const Manifest manifest = load_manifest(manifest_path);
  if (manifest.rows.empty())
    throw DataError(manifest_path + ": empty manifest");

  const std::string provenance =
      "config=" +
      [&] {
        std::string flat = manifest_path + zone + script_path +
                           std::to_string(states) + std::to_string(mixtures) +
                           std::to_string(iters) + fmt_double(cost) +
                           fmt_double(gamma);
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(flat)));
        return std::string(buf);
      }();

  if (zone == "middle") {
    if (script_path.empty())
      throw ConfigError("train --zone middle needs --script");
    const SyntheticScript script = load_script(script_path);
    MiddleTrainOptions options;
    options.states = states;
    options.mixtures = mixtures;
    options.iters = iters;
    options.jobs = jobs;
    const MiddleTrainOutput out = train_middle_from_manifest(
        manifest, script.decomposition, maybe_templates(templates), options);
    for (std::size_t i = 0; i < out.trace.size(); ++i)
      std::cerr << "iter " << (i + 1) << " log-likelihood "
                << fmt_double(out.trace[i]) << "\n";
    if (out.skipped > 0)
      std::cerr << "skipped " << out.skipped
                << " sequences shorter than their word models\n";
    save_bundle(out_path, bundle_hmms(out.set, provenance));
    std::cout << "bundle\t" << out_path << "\tstates\t" << states
              << "\tmixtures\t" << mixtures << "\n";
    return 0;
  }
  if (zone == "upper" || zone == "lower") {
    const SvmModel model = train_modifier_from_manifest(manifest, cost, gamma);
    // KKT residuals over the training set, per binary machine.
    {
      std::map<std::string, std::vector<std::size_t>> by_label;
      for (std::size_t i = 0; i < manifest.rows.size(); ++i)
        by_label[manifest.rows[i].transcription].push_back(i);
      std::cerr << "trained " << model.machines.size()
                << " pairwise machines over " << model.labels.size()
                << " labels\n";
    }
    save_bundle(out_path, bundle_svm(model, manifest.script_id, provenance));
    std::cout << "bundle\t" << out_path << "\tC\t" << fmt_double(cost) << "\n";
    return 0;
  }
  throw ConfigError("train: zone must be middle|upper|lower");
}

int run_lut_cmd(const std::string& zone, const std::string& hmm_path,
                const std::string& svm_path, const std::string& samples_path,
                const std::string& templates, const std::string& out_path) {
  const Manifest samples = load_manifest(samples_path);
  std::vector<Lut> luts;
  if (zone == "middle") {
    if (hmm_path.empty()) throw ConfigError("lut --zone middle needs --hmm");
    const ModelBundle b = load_bundle(hmm_path);
    const HmmSet& set = hmms_of(b, hmm_path);
    const auto seqs = char_samples_from_manifest(
        samples, maybe_templates(templates), set.window_width,
        set.window_shift);
    luts.push_back(build_lut_middle(set, seqs));
  } else if (zone == "upper" || zone == "lower") {
    if (svm_path.empty()) throw ConfigError("lut needs --svm for modifiers");
    const ModelBundle b = load_bundle(svm_path);
    const auto comps = modifier_samples_from_manifest(samples);
    luts.push_back(build_lut_modifier(
        svm_of(b, svm_path), comps,
        zone == "upper" ? Zone::kUpper : Zone::kLower));
  } else {
    throw ConfigError("lut: zone must be middle|upper|lower");
  }
  save_luts(out_path, luts);
  std::cout << "lut\t" << out_path << "\tentries\t"
            << luts.front().mapping.size() << "\n";
  return 0;
}

int run_recognize_cmd(const std::string& images_path,
                      const std::string& hmm_path,
                      const std::string& upper_svm_path,
                      const std::string& lower_svm_path,
                      const std::vector<std::string>& lut_paths,
                      const std::string& lexicon_path,
                      const std::string& script_path,
                      const std::string& templates, int topn,
                      const std::string& out_path, std::size_t jobs) {
  const Manifest manifest = load_manifest(images_path);
  const ModelBundle hmm_bundle = load_bundle(hmm_path);
  const HmmSet& set = hmms_of(hmm_bundle, hmm_path);
  const SyntheticScript script = load_script(script_path);
  const auto luts = load_lut_args(lut_paths);
  if (!find_lut(luts, Zone::kMiddle))
    throw CoverageError("recognize: no middle-zone LUT supplied");

  std::optional<ModelBundle> upper_b, lower_b;
  ModifierSvms svms;
  if (!upper_svm_path.empty()) {
    upper_b = load_bundle(upper_svm_path);
    svms.upper = &svm_of(*upper_b, upper_svm_path);
  }
  if (!lower_svm_path.empty()) {
    lower_b = load_bundle(lower_svm_path);
    svms.lower = &svm_of(*lower_b, lower_svm_path);
  }

  const auto lexicon =
      load_wordlist(lexicon_path, table_tokens(script.decomposition));
  LexiconTriple triple = make_mid_lexicon(lexicon, script.decomposition);
  triple = map_lexicon(std::move(triple), *find_lut(luts, Zone::kMiddle));

  const auto tmpl = maybe_templates(templates);
  const auto tokens = table_tokens(script.decomposition);

  std::vector<std::vector<Word>> ranked(manifest.rows.size());
  std::vector<Word> gold(manifest.rows.size());
  std::vector<std::string> failures(manifest.rows.size());
  parallel_for(manifest.rows.size(), jobs, [&](std::size_t i) {
    try {
      const GrayImage img = load_pgm(manifest.image_path(i));
      const RecognitionResult res = recognize_word(
          img, set, svms, luts, triple, script.decomposition, tmpl, topn);
      for (const auto& c : res.candidates) ranked[i].push_back(c.word);
      gold[i] = tokenize_word(manifest.rows[i].transcription, tokens);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < failures.size(); ++i)
    if (!failures[i].empty())
      throw DataError("recognize: row " + std::to_string(i + 1) + ": " +
                      failures[i]);

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(out_path + ": cannot open file for writing");
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    out << manifest.rows[i].image << '\t' << manifest.rows[i].transcription;
    for (int k = 0; k < topn; ++k)
      out << '\t'
          << (k < static_cast<int>(ranked[i].size()) ? join_word(ranked[i][k])
                                                     : std::string("-"));
    out << "\n";
  }
  const RecognitionMetrics metrics = evaluate_recognition(ranked, gold);
  std::cout << "top1\t" << fmt_double(metrics.top1) << "\n";
  std::cout << "top5\t" << fmt_double(metrics.top5) << "\n";
  return 0;
}

int run_spot_cmd(const std::string& images_path, const std::string& hmm_path,
                 const std::vector<std::string>& lut_paths,
                 const std::string& script_path,
                 const std::string& keywords_path,
                 const std::string& templates,
                 const std::string& upper_svm_path,
                 const std::string& lower_svm_path, const std::string& rerank,
                 const std::string& mode, double threshold, bool calibrate,
                 const std::string& out_path, std::size_t jobs) {
  const Manifest manifest = load_manifest(images_path);
  const ModelBundle hmm_bundle = load_bundle(hmm_path);
  const HmmSet& set = hmms_of(hmm_bundle, hmm_path);
  const SyntheticScript script = load_script(script_path);
  const auto luts = load_lut_args(lut_paths);
  if (!find_lut(luts, Zone::kMiddle))
    throw CoverageError("spot: no middle-zone LUT supplied");
  const auto tokens = table_tokens(script.decomposition);
  const auto keywords = load_wordlist(keywords_path, tokens);
  if (keywords.empty()) throw DataError("spot: empty keyword list");

  std::optional<ModelBundle> upper_b, lower_b;
  ModifierSvms svms;
  if (!upper_svm_path.empty()) {
    upper_b = load_bundle(upper_svm_path);
    svms.upper = &svm_of(*upper_b, upper_svm_path);
  }
  if (!lower_svm_path.empty()) {
    lower_b = load_bundle(lower_svm_path);
    svms.lower = &svm_of(*lower_b, lower_svm_path);
  }
  if (rerank == "labels" && (!svms.upper || !svms.lower))
    throw CompatError("spot --rerank labels needs --upper-svm and --lower-svm");

  // Per-image zones, features and the shared filler score.
  const auto tmpl = maybe_templates(templates);
  struct ImageData {
    ZoneSplit split;
    FeatureSequence features;
    double filler = kLogZero;
    bool ok = false;
  };
  std::vector<ImageData> images(manifest.rows.size());
  parallel_for(manifest.rows.size(), jobs, [&](std::size_t i) {
    try {
      const GrayImage img = load_pgm(manifest.image_path(i));
      images[i].split = split_zones(img, tmpl);
      images[i].features = window_features(
          images[i].split.middle, set.window_width, set.window_shift);
      images[i].filler = loop_score(images[i].features, set).log_likelihood;
      images[i].ok = true;
    } catch (const std::exception&) {
      images[i].ok = false;  // unscorable image: sentinel for every keyword
    }
  });

  std::vector<KeywordQuery> queries;
  for (const auto& kw : keywords) queries.push_back(make_query(kw, script.decomposition, luts));

  // Score matrix, then optional re-ranking, then decisions.
  std::vector<std::vector<SpotScore>> scores(
      keywords.size(), std::vector<SpotScore>(manifest.rows.size()));
  parallel_for(keywords.size(), jobs, [&](std::size_t k) {
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
      if (!images[i].ok) {
        scores[k][i].frames = 0;
        continue;
      }
      scores[k][i] = spot_score_with_filler(images[i].features, queries[k],
                                            set, images[i].filler);
    }
  });

  const bool use_local = mode == "local";
  std::vector<KeywordOutcome> outcomes(keywords.size());
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(out_path + ": cannot open file for writing");

  std::vector<double> global_scores;
  std::vector<bool> global_rel;
  for (std::size_t k = 0; k < keywords.size(); ++k)
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
      global_scores.push_back(scores[k][i].score);
      global_rel.push_back(manifest.rows[i].transcription ==
                           join_word(keywords[k]));
    }
  double global_t = threshold;
  if (calibrate && !use_local)
    global_t = calibrate_threshold(global_scores, global_rel);

  for (std::size_t k = 0; k < keywords.size(); ++k) {
    auto& outcome = outcomes[k];
    outcome.scores.resize(manifest.rows.size());
    outcome.accepted.assign(manifest.rows.size(), false);
    outcome.relevant.resize(manifest.rows.size());
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
      outcome.scores[i] = scores[k][i].score;
      outcome.relevant[i] =
          manifest.rows[i].transcription == join_word(keywords[k]);
    }
    double t = global_t;
    if (calibrate && use_local) {
      std::vector<bool> rel(outcome.relevant.begin(), outcome.relevant.end());
      t = calibrate_threshold(outcome.scores, rel);
    }
    // Acceptance by threshold, then modifier re-ranking of the accepted set.
    std::vector<SpotHit> hits;
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
      if (!decide(scores[k][i], t)) continue;
      SpotHit hit;
      hit.image = static_cast<int>(i);
      hit.split = images[i].split;
      hit.features = images[i].features;
      hit.score = scores[k][i];
      hits.push_back(std::move(hit));
    }
    if (rerank == "labels" || rerank == "counts") {
      hits = rerank_with_modifiers(hits, queries[k], svms, set,
                                   rerank == "labels" ? RerankMode::kLabels
                                                      : RerankMode::kCounts);
      // Removed hits drop to the sentinel so rankings reflect the filter.
      std::vector<bool> kept(manifest.rows.size(), false);
      for (const auto& h : hits) kept[h.image] = true;
      for (std::size_t i = 0; i < manifest.rows.size(); ++i)
        if (!kept[i]) outcome.scores[i] = kLogZero;
    }
    for (const auto& h : hits) outcome.accepted[h.image] = true;

    for (std::size_t i = 0; i < manifest.rows.size(); ++i)
      out << join_word(keywords[k]) << '\t' << manifest.rows[i].image << '\t'
          << (outcome.scores[i] == kLogZero ? "-inf"
                                            : fmt_double(outcome.scores[i]))
          << '\t' << (outcome.accepted[i] ? 1 : 0) << "\n";
  }

  const RetrievalMetrics metrics = evaluate_retrieval(outcomes);
  std::cout << "precision\t" << fmt_double(metrics.precision) << "\n";
  std::cout << "recall\t" << fmt_double(metrics.recall) << "\n";
  std::cout << "map\t" << fmt_double(metrics.map) << "\n";
  for (std::size_t k = 0; k < keywords.size(); ++k)
    std::cout << "ap\t" << join_word(keywords[k]) << '\t'
              << fmt_double(metrics.ap[k]) << "\n";
  return 0;
}

int run_simscore_cmd(const std::string& hmm_path, const std::string& self_path,
                     const std::string& samples_path,
                     const std::string& templates, bool relative,
                     const std::string& matrix_path,
                     const std::string& out_path) {
  if (!matrix_path.empty()) {
    // Matrix mode: rows `id<TAB>hmm_bundle<TAB>chars_manifest<TAB>templates`.
    std::ifstream in(matrix_path);
    if (!in) throw IoError(matrix_path + ": cannot open file");
    struct Row {
      std::string id;
      ModelBundle bundle;
      std::map<std::string, std::vector<FeatureSequence>> samples;
    };
    std::vector<Row> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cols;
      std::size_t start = 0;
      while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
          cols.push_back(line.substr(start));
          break;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
      }
      if (cols.size() < 3)
        throw IoError(matrix_path + ": matrix rows need id, bundle, samples");
      Row row;
      row.id = cols[0];
      row.bundle = load_bundle(cols[1]);
      const HmmSet& set = hmms_of(row.bundle, cols[1]);
      row.samples = char_samples_from_manifest(
          load_manifest(cols[2]),
          maybe_templates(cols.size() >= 4 ? cols[3] : ""), set.window_width,
          set.window_shift);
      rows.push_back(std::move(row));
    }
    std::vector<ScriptEntry> entries;
    for (const auto& r : rows)
      entries.push_back({r.id, &*r.bundle.hmms, &r.samples});
    const SimilarityMatrix matrix = similarity_matrix(entries);
    save_similarity_matrix(out_path, matrix);
    std::cout << "matrix\t" << out_path << "\n";
    return 0;
  }

  const ModelBundle source_b = load_bundle(hmm_path);
  const HmmSet& source = hmms_of(source_b, hmm_path);
  if (relative && self_path.empty())
    throw CompatError("simscore --relative needs --self (target self-models)");
  const auto samples = char_samples_from_manifest(
      load_manifest(samples_path), maybe_templates(templates),
      source.window_width, source.window_shift);

  SimilarityReport report;
  if (!self_path.empty()) {
    const ModelBundle self_b = load_bundle(self_path);
    if (self_b.meta.window_width != source_b.meta.window_width ||
        self_b.meta.window_shift != source_b.meta.window_shift)
      throw CompatError("simscore: source and self bundles disagree on "
                        "feature geometry");
    report = run_similarity(source, samples, hmms_of(self_b, self_path));
  } else {
    // Cross-only: records and S_sim against the source models.
    for (const auto& [ch, seqs] : samples) {
      EntropyRecord rec;
      rec.target_char = ch;
      rec.votes = recognition_histogram(seqs, source);
      for (const auto& [src, n] : rec.votes)
        if (n > 0) rec.k += 1;
      rec.h = entropy(rec.votes);
      rec.h_n = normalized_entropy(rec.h, rec.k);
      rec.s = char_similarity(rec.h_n);
      report.records.push_back(std::move(rec));
    }
    long total = 0;
    for (const auto& [ch, seqs] : samples) total += seqs.size();
    for (const auto& [ch, seqs] : samples)
      report.weights.push_back(static_cast<double>(seqs.size()) / total);
    report.m = static_cast<int>(report.records.size());
    report.s_sim = script_similarity(report.records, report.weights);
  }
  save_similarity_report(out_path, report);
  std::cout << "s_sim\t" << fmt_double(report.s_sim) << "\n";
  if (!self_path.empty())
    std::cout << "s_rel\t" << fmt_double(report.s_rel) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-script handwritten word recognition and spotting"};
  app.require_subcommand(1);
  std::size_t jobs = 4;
  app.add_option("--jobs", jobs, "Worker cap for parallel stages")
      ->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a paired synthetic-script workspace");
  std::string synth_config;
  synth->add_option("config", synth_config, "key=value config file")->required();

  // train
  auto* train = app.add_subcommand("train", "Train zone models from a manifest");
  std::string train_manifest, train_zone = "middle", train_script,
              train_templates, train_out = "model.bundle";
  int train_states = kDefaultStates, train_mixtures = kDefaultMixtures,
      train_iters = 8;
  double train_cost = kDefaultSvmCost, train_gamma = 0.0;
  train->add_option("--manifest", train_manifest)->required();
  train->add_option("--zone", train_zone, "middle|upper|lower")
      ->capture_default_str();
  train->add_option("--script", train_script, "script definition file");
  train->add_option("--templates", train_templates, "lower-zone template dir");
  train->add_option("--states", train_states)->capture_default_str();
  train->add_option("--mixtures", train_mixtures)->capture_default_str();
  train->add_option("--iters", train_iters)->capture_default_str();
  train->add_option("--cost", train_cost, "SVM C")->capture_default_str();
  train->add_option("--gamma", train_gamma, "SVM RBF width (0 = 1/168)");
  train->add_option("--out", train_out)->capture_default_str();

  // lut
  auto* lut = app.add_subcommand("lut", "Build a majority-vote character LUT");
  std::string lut_zone = "middle", lut_hmm, lut_svm, lut_samples,
              lut_templates, lut_out = "lut.tsv";
  lut->add_option("--zone", lut_zone)->capture_default_str();
  lut->add_option("--hmm", lut_hmm, "source hmmset bundle (middle zone)");
  lut->add_option("--svm", lut_svm, "source svm bundle (modifier zones)");
  lut->add_option("--samples", lut_samples, "target sample manifest")->required();
  lut->add_option("--templates", lut_templates);
  lut->add_option("--out", lut_out)->capture_default_str();

  // recognize
  auto* rec = app.add_subcommand("recognize", "Cross-script word recognition");
  std::string rec_images, rec_hmm, rec_upper, rec_lower, rec_lexicon,
      rec_script, rec_templates, rec_out = "recognition.tsv";
  std::vector<std::string> rec_luts;
  int rec_topn = kDefaultTopN;
  rec->add_option("--images", rec_images)->required();
  rec->add_option("--hmm", rec_hmm)->required();
  rec->add_option("--upper-svm", rec_upper);
  rec->add_option("--lower-svm", rec_lower);
  rec->add_option("--luts", rec_luts, "LUT files (repeatable)")->required();
  rec->add_option("--lexicon", rec_lexicon)->required();
  rec->add_option("--script", rec_script)->required();
  rec->add_option("--templates", rec_templates);
  rec->add_option("--topn", rec_topn)->capture_default_str();
  rec->add_option("--out", rec_out)->capture_default_str();

  // spot
  auto* spot = app.add_subcommand("spot", "Keyword spotting with a filler model");
  std::string spot_images, spot_hmm, spot_script, spot_keywords,
      spot_templates, spot_upper, spot_lower, spot_rerank = "none",
      spot_mode = "global", spot_out = "hits.tsv";
  std::vector<std::string> spot_luts;
  double spot_threshold = -1.0;
  bool spot_calibrate = false;
  spot->add_option("--images", spot_images)->required();
  spot->add_option("--hmm", spot_hmm)->required();
  spot->add_option("--luts", spot_luts)->required();
  spot->add_option("--script", spot_script)->required();
  spot->add_option("--keywords", spot_keywords)->required();
  spot->add_option("--templates", spot_templates);
  spot->add_option("--upper-svm", spot_upper);
  spot->add_option("--lower-svm", spot_lower);
  spot->add_option("--rerank", spot_rerank, "none|counts|labels")
      ->capture_default_str();
  spot->add_option("--mode", spot_mode, "global|local threshold mode")
      ->capture_default_str();
  spot->add_option("--threshold", spot_threshold, "score threshold T")
      ->capture_default_str();
  spot->add_flag("--calibrate", spot_calibrate,
                 "pick T by F1 on the scored corpus");
  spot->add_option("--out", spot_out)->capture_default_str();

  // simscore
  auto* sim = app.add_subcommand("simscore", "Entropy-based script similarity");
  std::string sim_hmm, sim_self, sim_samples, sim_templates, sim_matrix,
      sim_out = "similarity.tsv";
  bool sim_relative = false;
  sim->add_option("--hmm", sim_hmm, "source hmmset bundle");
  sim->add_option("--self", sim_self, "target self-trained hmmset bundle");
  sim->add_option("--samples", sim_samples, "target char sample manifest");
  sim->add_option("--templates", sim_templates);
  sim->add_flag("--relative", sim_relative, "emit the relative index");
  sim->add_option("--matrix", sim_matrix,
                  "matrix list file: id, bundle, samples[, templates]");
  sim->add_option("--out", sim_out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth_cmd(synth_config, jobs);
    if (train->parsed())
      return run_train_cmd(train_manifest, train_zone, train_script,
                           train_templates, train_states, train_mixtures,
                           train_iters, train_cost, train_gamma, train_out,
                           jobs);
    if (lut->parsed())
      return run_lut_cmd(lut_zone, lut_hmm, lut_svm, lut_samples,
                         lut_templates, lut_out);
    if (rec->parsed())
      return run_recognize_cmd(rec_images, rec_hmm, rec_upper, rec_lower,
                               rec_luts, rec_lexicon, rec_script,
                               rec_templates, rec_topn, rec_out, jobs);
    if (spot->parsed())
      return run_spot_cmd(spot_images, spot_hmm, spot_luts, spot_script,
                          spot_keywords, spot_templates, spot_upper,
                          spot_lower, spot_rerank, spot_mode, spot_threshold,
                          spot_calibrate, spot_out, jobs);
    if (sim->parsed())
      return run_simscore_cmd(sim_hmm, sim_self, sim_samples, sim_templates,
                              sim_relative, sim_matrix, sim_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 4;
  } catch (const CompatError& e) {
    std::cerr << "compatibility error: " << e.what() << "\n";
    return 5;
  } catch (const CoverageError& e) {
    std::cerr << "coverage error: " << e.what() << "\n";
    return 6;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
