#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlhwr/synthscript.hpp"
#include "xlhwr/text.hpp"

namespace xlhwr {

// Round-trip-exact decimal serialization (shortest form that parses back to
// the same bits) and its inverse; every float in every text format goes
// through these.
std::string fmt_double(double v);
double parse_double(const std::string& s);

struct ManifestRow {
  std::string image;                 // relative to the manifest directory
  std::string transcription;         // UTF-8 word or character label
  std::optional<std::string> truth;  // ground-truth sidecar, if any
};

struct Manifest {
  std::string script_id;
  std::string dir;  // directory of the manifest file, for resolving paths
  std::vector<ManifestRow> rows;

  std::string image_path(std::size_t i) const;
  std::optional<std::string> truth_path(std::size_t i) const;
};

Manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const std::string& script_id,
                   const std::vector<ManifestRow>& rows);

void save_ground_truth(const std::string& path, const GroundTruth& gt);
GroundTruth load_ground_truth(const std::string& path);

// key=value config with '#' comments; parse errors carry the line number.
using Config = std::map<std::string, std::string>;
Config parse_config_text(const std::string& text, const std::string& origin);
Config load_config(const std::string& path);

// Script definition file (XLHWR-SCRIPT 1).
void save_script(const std::string& path, const SyntheticScript& script);
SyntheticScript load_script(const std::string& path);

// Standalone decomposition table: lines `char = base [+upper:u] [+lower:l]`.
std::map<std::string, Decomp> parse_decomposition_line_set(
    const std::vector<std::string>& lines, const std::string& origin);
std::map<std::string, Decomp> load_decomposition(const std::string& path);

// One word per line, UTF-8; tokenized against the character inventory.
std::vector<Word> load_wordlist(const std::string& path,
                                const std::set<std::string>& tokens);
void save_wordlist(const std::string& path, const std::vector<Word>& words);

// target_id <TAB> source_id per line (glyph correspondence ground truth).
void save_mapping(const std::string& path,
                  const std::map<std::string, std::string>& mapping);
std::map<std::string, std::string> load_mapping(const std::string& path);

}  // namespace xlhwr
