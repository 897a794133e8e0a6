#include "xlhwr/formats.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_support.hpp"
#include "xlhwr/bundle.hpp"
#include "xlhwr/errors.hpp"
#include "xlhwr/rng.hpp"

using namespace xlhwr;
using namespace xlhwr::testsupport;

namespace {

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("fmt_double round-trips doubles exactly") {
  Rng rng(501);
  const double specials[] = {0.0,    -0.0,   0.1,     1.0 / 3.0,
                             1e-300, 1e300,  -123.456, 5e-324};
  for (double v : specials) {
    const double back = parse_double(fmt_double(v));
    CHECK(std::memcmp(&back, &v, sizeof(double)) == 0);
  }
  for (int i = 0; i < 1000; ++i) {
    double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-30, 30));
    const double back = parse_double(fmt_double(v));
    CHECK(std::memcmp(&back, &v, sizeof(double)) == 0);
  }
  CHECK_THROWS_AS(parse_double("not-a-number"), IoError);
}

TEST_CASE("manifest save/load round trip with script header and comments") {
  const std::string path = tmp("xlhwr_manifest.tsv");
  std::vector<ManifestRow> rows{{"img_0.pgm", "word", std::string("img_0.gt")},
                                {"img_1.pgm", "another", std::nullopt}};
  save_manifest(path, "scriptX", rows);
  const Manifest m = load_manifest(path);
  CHECK(m.script_id == "scriptX");
  REQUIRE(m.rows.size() == 2);
  CHECK(m.rows[0].image == "img_0.pgm");
  CHECK(m.rows[0].transcription == "word");
  CHECK(m.rows[0].truth == "img_0.gt");
  CHECK(!m.rows[1].truth.has_value());
  CHECK(m.image_path(0).find("img_0.pgm") != std::string::npos);

  write_file(path, "#script\ts\nonly_one_column\n");
  CHECK_THROWS_AS(load_manifest(path), IoError);
}

TEST_CASE("config parsing reports line numbers") {
  const Config good = parse_config_text(
      "# comment\nn_middle = 20\nstyle.jitter=1.5\n\nout_dir = /tmp/x\n",
      "cfg");
  CHECK(good.at("n_middle") == "20");
  CHECK(good.at("style.jitter") == "1.5");
  CHECK(good.at("out_dir") == "/tmp/x");

  try {
    parse_config_text("a=1\nbroken line\n", "cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("a=1\na=2\n", "cfg"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("=value\n", "cfg"), ConfigError);
}

TEST_CASE("script files round trip exactly") {
  const SyntheticScript s = random_script("roundtrip", 5, 2, 2, 601);
  const std::string p1 = tmp("xlhwr_script1.txt");
  const std::string p2 = tmp("xlhwr_script2.txt");
  save_script(p1, s);
  const SyntheticScript loaded = load_script(p1);
  save_script(p2, loaded);
  CHECK(read_file(p1) == read_file(p2));
  CHECK(loaded.id == "roundtrip");
  CHECK(loaded.middle.size() == 5);
  CHECK(loaded.decomposition.size() == s.decomposition.size());

  write_file(p1, "WRONG 9\n");
  CHECK_THROWS_AS(load_script(p1), CompatError);
}

TEST_CASE("decomposition files parse the documented line shape") {
  const std::string path = tmp("xlhwr_decomp.txt");
  write_file(path,
             "# table\n"
             "ka = k\n"
             "ki = k +upper:i\n"
             "ku = k +lower:u\n"
             "kiu = k +upper:i +lower:u\n");
  const auto table = load_decomposition(path);
  REQUIRE(table.size() == 4);
  CHECK(table.at("ka").base == "k");
  CHECK(!table.at("ka").upper);
  CHECK(table.at("ki").upper == "i");
  CHECK(table.at("ku").lower == "u");
  CHECK(table.at("kiu").upper == "i");
  CHECK(table.at("kiu").lower == "u");

  write_file(path, "ka == k\n");
  CHECK_THROWS_AS(load_decomposition(path), IoError);
}

TEST_CASE("wordlists tokenize against the character inventory") {
  const std::string path = tmp("xlhwr_words.txt");
  write_file(path, "kaki\nka\n");
  // Multi-codepoint tokens: greedy longest match.
  const std::set<std::string> tokens{"ka", "ki", "k"};
  const auto words = load_wordlist(path, tokens);
  REQUIRE(words.size() == 2);
  CHECK(words[0] == Word{"ka", "ki"});
  CHECK(words[1] == Word{"ka"});
}

TEST_CASE("ground truth sidecars round trip") {
  GroundTruth gt;
  gt.transcription = {"a", "b"};
  gt.matra_top = 14;
  gt.matra_bottom = 16;
  gt.char_x = {{4, 20}, {25, 44}};
  gt.modifiers = {{Zone::kUpper, "u1", 6, 15, 0}};
  const std::string path = tmp("xlhwr_gt.txt");
  save_ground_truth(path, gt);
  const GroundTruth back = load_ground_truth(path);
  CHECK(back.transcription == gt.transcription);
  CHECK(back.matra_top == 14);
  CHECK(back.char_x == gt.char_x);
  REQUIRE(back.modifiers.size() == 1);
  CHECK(back.modifiers[0].zone == Zone::kUpper);
  CHECK(back.modifiers[0].label == "u1");
  CHECK(back.modifiers[0].base_index == 0);
}

TEST_CASE("hmm bundles reproduce decode scores bit-exactly") {
  const SyntheticScript s = random_script("s", 4, 0, 0, 611);
  RenderStyle style;
  const auto templates = templates_of(s);
  const auto samples = char_samples(s, templates, 4, style, 170);
  HmmSet set = char_models(s, samples, 4, 2, 2);
  set.script_id = "s";

  const std::string path = tmp("xlhwr_hmm.bundle");
  save_bundle(path, bundle_hmms(set, "config=test seed=1"));
  const ModelBundle loaded = load_bundle(path);
  REQUIRE(loaded.hmms.has_value());
  CHECK(loaded.meta.kind == "hmmset");
  CHECK(loaded.meta.script_id == "s");
  CHECK(loaded.meta.provenance == "config=test seed=1");

  // Every score identical to the last bit.
  const auto bases = s.base_chars();
  for (int trial = 0; trial < 6; ++trial) {
    const Word word{bases[trial % 4], bases[(trial + 1) % 4]};
    const FeatureSequence seq = image_features(
        render_word(s, word, style, 700 + trial).image, templates);
    const double a =
        viterbi(seq, make_word_model(set, word)).log_likelihood;
    const double b =
        viterbi(seq, make_word_model(*loaded.hmms, word)).log_likelihood;
    CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
    const double fa = loop_score(seq, set).log_likelihood;
    const double fb = loop_score(seq, *loaded.hmms).log_likelihood;
    CHECK(std::memcmp(&fa, &fb, sizeof(double)) == 0);
  }

  // Re-serialization is byte-identical.
  const std::string path2 = tmp("xlhwr_hmm2.bundle");
  save_bundle(path2, bundle_hmms(*loaded.hmms, loaded.meta.provenance));
  CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("corrupted bundles are rejected by checksum") {
  const SyntheticScript s = random_script("s", 3, 2, 0, 613);
  RenderStyle style;
  const SvmModel svm = modifier_svm(s, Zone::kUpper, 5, style, 180);
  const std::string path = tmp("xlhwr_svm.bundle");
  save_bundle(path, bundle_svm(svm, "s", ""));

  // Round trip first.
  const ModelBundle ok = load_bundle(path);
  REQUIRE(ok.svm.has_value());
  CHECK(ok.svm->labels == svm.labels);
  CHECK(ok.svm->machines.size() == svm.machines.size());

  // Flip one payload byte.
  std::string bytes = read_file(path);
  const std::size_t payload_at = bytes.find("svm\t");
  REQUIRE(payload_at != std::string::npos);
  bytes[payload_at + 10] ^= 0x01;
  write_file(path, bytes);
  CHECK_THROWS_AS(load_bundle(path), CompatError);
}

TEST_CASE("future bundle versions fail with a version error") {
  const std::string path = tmp("xlhwr_future.bundle");
  write_file(path, "XLHWR 2\nkind\thmmset\n");
  try {
    load_bundle(path);
    FAIL("expected CompatError");
  } catch (const CompatError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
  write_file(path, "garbage\n");
  CHECK_THROWS_AS(load_bundle(path), CompatError);
}

TEST_CASE("lut bundles round trip") {
  Lut lut;
  lut.zone = Zone::kMiddle;
  lut.mapping = {{"a", "x"}};
  lut.histograms = {{"a", {{"x", 5}, {"y", 2}}}};
  lut.confidence = {{"a", {{"x", 1.0}, {"y", 0.2}}}};
  const std::string path = tmp("xlhwr_luts.bundle");
  save_bundle(path, bundle_luts({lut}, "s", "prov"));
  const ModelBundle back = load_bundle(path);
  REQUIRE(back.luts.size() == 1);
  CHECK(back.luts[0].mapping == lut.mapping);
  CHECK(back.luts[0].histograms == lut.histograms);
}
