#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xlhwr/ghmm.hpp"
#include "xlhwr/rbfsvm.hpp"
#include "xlhwr/xmap.hpp"

namespace xlhwr {

inline constexpr const char* kBundleMagic = "XLHWR 1";

struct BundleMeta {
  std::string kind;  // "hmmset" | "svm" | "luts"
  std::string script_id;
  int window_width = kDefaultWindowWidth;
  int window_shift = kDefaultWindowShift;
  std::string provenance;  // e.g. "config=<fnv64> seed=<n>"
};

struct ModelBundle {
  BundleMeta meta;
  std::optional<HmmSet> hmms;
  std::optional<SvmModel> svm;
  std::vector<Lut> luts;
};

// Textual versioned format: `XLHWR 1` header, tab-separated meta lines, a
// counted payload block, and an FNV-1a checksum over the payload bytes.
// Floats use shortest round-trip decimals, so load(save(b)) reproduces every
// score bit-exactly and re-serialization is byte-identical.
void save_bundle(const std::string& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);

// Convenience wrappers used by the CLI.
ModelBundle bundle_hmms(HmmSet set, std::string provenance);
ModelBundle bundle_svm(SvmModel model, std::string script_id,
                       std::string provenance);
ModelBundle bundle_luts(std::vector<Lut> luts, std::string script_id,
                        std::string provenance);

}  // namespace xlhwr
