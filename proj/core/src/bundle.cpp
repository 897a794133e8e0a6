#include "xlhwr/bundle.hpp"

#include <fstream>
#include <sstream>

#include "xlhwr/errors.hpp"
#include "xlhwr/formats.hpp"

namespace xlhwr {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void emit_doubles(std::string& out, const double* v, int n) {
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += fmt_double(v[i]);
  }
}

std::vector<double> parse_doubles(const std::string& line, int expect,
                                  const std::string& where) {
  std::vector<double> out;
  out.reserve(expect);
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok));
  if (expect >= 0 && static_cast<int>(out.size()) != expect)
    throw CompatError(where + ": expected " + std::to_string(expect) +
                      " values, got " + std::to_string(out.size()));
  return out;
}

std::string payload_hmmset(const HmmSet& set) {
  std::string p;
  p += "hmmset\t" + std::to_string(set.models.size()) + "\n";
  for (const auto& m : set.models) {
    p += "model\t" + m.id + "\t" + std::to_string(m.states) + "\t" +
         std::to_string(m.mixtures) + "\t" + std::to_string(m.dim) + "\n";
    p += "stay\t";
    emit_doubles(p, m.stay.data(), m.states);
    p += "\n";
    for (int s = 0; s < m.states; ++s) {
      for (int mm = 0; mm < m.mixtures; ++mm) {
        const std::size_t wi = static_cast<std::size_t>(s) * m.mixtures + mm;
        p += "mix\t" + std::to_string(s) + "\t" + std::to_string(mm) + "\t" +
             fmt_double(m.weights[wi]) + "\n";
        p += "mean\t";
        emit_doubles(p, m.means.data() + wi * m.dim, m.dim);
        p += "\nvar\t";
        emit_doubles(p, m.vars.data() + wi * m.dim, m.dim);
        p += "\n";
      }
    }
  }
  return p;
}

std::string payload_svm(const SvmModel& model) {
  std::string p;
  p += "svm\t" + std::to_string(model.labels.size()) + "\t" +
       fmt_double(model.gamma) + "\t" + fmt_double(model.cost) + "\n";
  for (const auto& l : model.labels) p += "label\t" + l + "\n";
  for (const auto& mach : model.machines) {
    p += "machine\t" + std::to_string(mach.label_a) + "\t" +
         std::to_string(mach.label_b) + "\t" +
         std::to_string(mach.support_vectors.size()) + "\t" +
         fmt_double(mach.bias) + "\n";
    for (std::size_t i = 0; i < mach.support_vectors.size(); ++i) {
      p += "sv\t" + fmt_double(mach.coeffs[i]) + "\t";
      emit_doubles(p, mach.support_vectors[i].data(),
                   static_cast<int>(mach.support_vectors[i].size()));
      p += "\n";
    }
  }
  return p;
}

std::string payload_luts(const std::vector<Lut>& luts) {
  std::string p;
  for (const auto& lut : luts) {
    for (const auto& [target, source] : lut.mapping) {
      p += std::string("lut\t") + zone_name(lut.zone) + "\t" + target + "\t" +
           source + "\thist:";
      std::vector<std::pair<std::string, int>> hist(
          lut.histograms.at(target).begin(), lut.histograms.at(target).end());
      std::sort(hist.begin(), hist.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      });
      for (std::size_t i = 0; i < hist.size(); ++i)
        p += (i ? "," : "") + hist[i].first + "=" + std::to_string(hist[i].second);
      p += "\n";
    }
  }
  return p;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string> tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

HmmSet parse_hmmset(const std::vector<std::string>& lines,
                    const BundleMeta& meta, const std::string& path) {
  HmmSet set;
  set.script_id = meta.script_id;
  set.window_width = meta.window_width;
  set.window_shift = meta.window_shift;
  std::size_t i = 0;
  auto need = [&](const char* what) -> const std::string& {
    if (i >= lines.size())
      throw CompatError(path + ": truncated payload, expected " +
                        std::string(what));
    return lines[i++];
  };
  const auto head = tabs(need("hmmset header"));
  if (head.size() != 2 || head[0] != "hmmset")
    throw CompatError(path + ": bad hmmset header");
  const int n_models = std::stoi(head[1]);
  for (int k = 0; k < n_models; ++k) {
    const auto mh = tabs(need("model header"));
    if (mh.size() != 5 || mh[0] != "model")
      throw CompatError(path + ": bad model header");
    CharHmm m;
    m.id = mh[1];
    m.states = std::stoi(mh[2]);
    m.mixtures = std::stoi(mh[3]);
    m.dim = std::stoi(mh[4]);
    const auto st = tabs(need("stay line"));
    if (st.size() != 2 || st[0] != "stay")
      throw CompatError(path + ": bad stay line");
    m.stay = parse_doubles(st[1], m.states, path);
    m.weights.assign(static_cast<std::size_t>(m.states) * m.mixtures, 0.0);
    m.means.assign(static_cast<std::size_t>(m.states) * m.mixtures * m.dim, 0.0);
    m.vars.assign(static_cast<std::size_t>(m.states) * m.mixtures * m.dim, 0.0);
    for (int s = 0; s < m.states; ++s) {
      for (int mm = 0; mm < m.mixtures; ++mm) {
        const auto mixl = tabs(need("mix line"));
        if (mixl.size() != 4 || mixl[0] != "mix")
          throw CompatError(path + ": bad mix line");
        const std::size_t wi = static_cast<std::size_t>(s) * m.mixtures + mm;
        m.weights[wi] = parse_double(mixl[3]);
        const auto meanl = tabs(need("mean line"));
        if (meanl.size() != 2 || meanl[0] != "mean")
          throw CompatError(path + ": bad mean line");
        const auto means = parse_doubles(meanl[1], m.dim, path);
        std::copy(means.begin(), means.end(), m.means.begin() + wi * m.dim);
        const auto varl = tabs(need("var line"));
        if (varl.size() != 2 || varl[0] != "var")
          throw CompatError(path + ": bad var line");
        const auto vars = parse_doubles(varl[1], m.dim, path);
        std::copy(vars.begin(), vars.end(), m.vars.begin() + wi * m.dim);
      }
    }
    m.prepare();
    set.models.push_back(std::move(m));
  }
  return set;
}

SvmModel parse_svm(const std::vector<std::string>& lines,
                   const std::string& path) {
  SvmModel model;
  std::size_t i = 0;
  auto need = [&](const char* what) -> const std::string& {
    if (i >= lines.size())
      throw CompatError(path + ": truncated payload, expected " +
                        std::string(what));
    return lines[i++];
  };
  const auto head = tabs(need("svm header"));
  if (head.size() != 4 || head[0] != "svm")
    throw CompatError(path + ": bad svm header");
  const int n_labels = std::stoi(head[1]);
  model.gamma = parse_double(head[2]);
  model.cost = parse_double(head[3]);
  for (int k = 0; k < n_labels; ++k) {
    const auto l = tabs(need("label line"));
    if (l.size() != 2 || l[0] != "label")
      throw CompatError(path + ": bad label line");
    model.labels.push_back(l[1]);
  }
  while (i < lines.size()) {
    const auto mh = tabs(need("machine header"));
    if (mh.size() != 5 || mh[0] != "machine")
      throw CompatError(path + ": bad machine header");
    BinarySvm mach;
    mach.label_a = std::stoi(mh[1]);
    mach.label_b = std::stoi(mh[2]);
    const int n_sv = std::stoi(mh[3]);
    mach.bias = parse_double(mh[4]);
    for (int s = 0; s < n_sv; ++s) {
      const auto sv = tabs(need("sv line"));
      if (sv.size() != 3 || sv[0] != "sv")
        throw CompatError(path + ": bad sv line");
      mach.coeffs.push_back(parse_double(sv[1]));
      mach.support_vectors.push_back(parse_doubles(sv[2], kPhogDim, path));
    }
    model.machines.push_back(std::move(mach));
  }
  return model;
}

std::vector<Lut> parse_luts(const std::vector<std::string>& lines,
                            const std::string& path) {
  std::map<std::string, Lut> by_zone;
  for (const auto& line : lines) {
    const auto cols = tabs(line);
    if (cols.size() != 5 || cols[0] != "lut" || cols[4].rfind("hist:", 0) != 0)
      throw CompatError(path + ": bad lut line '" + line + "'");
    Lut& lut = by_zone[cols[1]];
    lut.zone = zone_from_name(cols[1]);
    lut.mapping[cols[2]] = cols[3];
    auto& hist = lut.histograms[cols[2]];
    std::istringstream hs(cols[4].substr(5));
    std::string entry;
    while (std::getline(hs, entry, ',')) {
      const std::size_t eq = entry.rfind('=');
      if (eq == std::string::npos)
        throw CompatError(path + ": bad histogram entry '" + entry + "'");
      hist[entry.substr(0, eq)] = std::stoi(entry.substr(eq + 1));
    }
    for (const auto& [src, count] : hist) lut.confidence[cols[2]][src] = 0.0;
  }
  std::vector<Lut> out;
  for (auto& [name, lut] : by_zone) out.push_back(std::move(lut));
  return out;
}

}  // namespace

void save_bundle(const std::string& path, const ModelBundle& bundle) {
  std::string payload;
  if (bundle.meta.kind == "hmmset") {
    if (!bundle.hmms) throw DataError("save_bundle: hmmset kind without models");
    payload = payload_hmmset(*bundle.hmms);
  } else if (bundle.meta.kind == "svm") {
    if (!bundle.svm) throw DataError("save_bundle: svm kind without model");
    payload = payload_svm(*bundle.svm);
  } else if (bundle.meta.kind == "luts") {
    payload = payload_luts(bundle.luts);
  } else {
    throw DataError("save_bundle: unknown kind '" + bundle.meta.kind + "'");
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open file for writing");
  out << kBundleMagic << "\n";
  out << "kind\t" << bundle.meta.kind << "\n";
  out << "script\t" << bundle.meta.script_id << "\n";
  out << "window\t" << bundle.meta.window_width << '\t'
      << bundle.meta.window_shift << "\n";
  if (!bundle.meta.provenance.empty())
    out << "provenance\t" << bundle.meta.provenance << "\n";
  out << "payload\t" << payload.size() << "\n";
  out << payload;
  out << "checksum\t" << hex64(fnv1a64(payload)) << "\n";
  if (!out) throw IoError(path + ": short write");
}

ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    if (pos >= text.size()) throw CompatError(path + ": truncated bundle");
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };

  const std::string magic = next_line();
  if (magic != kBundleMagic) {
    if (magic.rfind("XLHWR ", 0) == 0)
      throw CompatError(path + ": unsupported bundle version '" + magic + "'");
    throw CompatError(path + ": not an XLHWR bundle");
  }

  ModelBundle bundle;
  std::size_t payload_bytes = 0;
  while (true) {
    const auto cols = tabs(next_line());
    if (cols[0] == "kind" && cols.size() == 2) {
      bundle.meta.kind = cols[1];
    } else if (cols[0] == "script" && cols.size() == 2) {
      bundle.meta.script_id = cols[1];
    } else if (cols[0] == "window" && cols.size() == 3) {
      bundle.meta.window_width = std::stoi(cols[1]);
      bundle.meta.window_shift = std::stoi(cols[2]);
    } else if (cols[0] == "provenance" && cols.size() >= 2) {
      bundle.meta.provenance = cols[1];
    } else if (cols[0] == "payload" && cols.size() == 2) {
      payload_bytes = static_cast<std::size_t>(std::stoll(cols[1]));
      break;
    } else {
      throw CompatError(path + ": unexpected bundle line");
    }
  }
  if (pos + payload_bytes > text.size())
    throw CompatError(path + ": truncated payload");
  const std::string payload = text.substr(pos, payload_bytes);
  pos += payload_bytes;
  const auto check = tabs(next_line());
  if (check.size() != 2 || check[0] != "checksum")
    throw CompatError(path + ": missing checksum");
  if (check[1] != hex64(fnv1a64(payload)))
    throw CompatError(path + ": checksum mismatch");

  const auto lines = split_lines(payload);
  if (bundle.meta.kind == "hmmset") {
    bundle.hmms = parse_hmmset(lines, bundle.meta, path);
  } else if (bundle.meta.kind == "svm") {
    bundle.svm = parse_svm(lines, path);
  } else if (bundle.meta.kind == "luts") {
    bundle.luts = parse_luts(lines, path);
  } else {
    throw CompatError(path + ": unknown bundle kind '" + bundle.meta.kind + "'");
  }
  return bundle;
}

ModelBundle bundle_hmms(HmmSet set, std::string provenance) {
  ModelBundle b;
  b.meta.kind = "hmmset";
  b.meta.script_id = set.script_id;
  b.meta.window_width = set.window_width;
  b.meta.window_shift = set.window_shift;
  b.meta.provenance = std::move(provenance);
  b.hmms = std::move(set);
  return b;
}

ModelBundle bundle_svm(SvmModel model, std::string script_id,
                       std::string provenance) {
  ModelBundle b;
  b.meta.kind = "svm";
  b.meta.script_id = std::move(script_id);
  b.meta.provenance = std::move(provenance);
  b.svm = std::move(model);
  return b;
}

ModelBundle bundle_luts(std::vector<Lut> luts, std::string script_id,
                        std::string provenance) {
  ModelBundle b;
  b.meta.kind = "luts";
  b.meta.script_id = std::move(script_id);
  b.meta.provenance = std::move(provenance);
  b.luts = std::move(luts);
  return b;
}

}  // namespace xlhwr
