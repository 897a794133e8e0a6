#include "xlhwr/formats.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "xlhwr/errors.hpp"

namespace xlhwr {

namespace fs = std::filesystem;

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("malformed float '" + s + "'");
  return v;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
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

std::ofstream open_out(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open file for writing");
  return out;
}

}  // namespace

std::string Manifest::image_path(std::size_t i) const {
  return (fs::path(dir) / rows[i].image).string();
}

std::optional<std::string> Manifest::truth_path(std::size_t i) const {
  if (!rows[i].truth) return std::nullopt;
  return (fs::path(dir) / *rows[i].truth).string();
}

Manifest load_manifest(const std::string& path) {
  Manifest m;
  m.dir = fs::path(path).parent_path().string();
  if (m.dir.empty()) m.dir = ".";
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto cols = split_tabs(line);
      if (cols[0] == "#script" && cols.size() >= 2) m.script_id = cols[1];
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() < 2 || cols[0].empty() || cols[1].empty())
      throw IoError(path + ":" + std::to_string(i + 1) +
                    ": manifest row needs image<TAB>transcription");
    ManifestRow row;
    row.image = cols[0];
    row.transcription = cols[1];
    if (cols.size() >= 3 && !cols[2].empty() && cols[2] != "-")
      row.truth = cols[2];
    m.rows.push_back(std::move(row));
  }
  return m;
}

void save_manifest(const std::string& path, const std::string& script_id,
                   const std::vector<ManifestRow>& rows) {
  auto out = open_out(path);
  out << "#script\t" << script_id << "\n";
  for (const auto& r : rows) {
    out << r.image << '\t' << r.transcription << '\t'
        << (r.truth ? *r.truth : std::string("-")) << "\n";
  }
  if (!out) throw IoError(path + ": short write");
}

void save_ground_truth(const std::string& path, const GroundTruth& gt) {
  auto out = open_out(path);
  out << "word\t" << join_word(gt.transcription) << "\n";
  out << "matra\t" << gt.matra_top << '\t' << gt.matra_bottom << "\n";
  for (std::size_t i = 0; i < gt.char_x.size(); ++i)
    out << "char\t" << gt.transcription[i] << '\t' << gt.char_x[i][0] << '\t'
        << gt.char_x[i][1] << "\n";
  for (const auto& m : gt.modifiers)
    out << "mod\t" << zone_name(m.zone) << '\t' << m.label << '\t' << m.x0
        << '\t' << m.x1 << '\t' << m.base_index << "\n";
  if (!out) throw IoError(path + ": short write");
}

GroundTruth load_ground_truth(const std::string& path) {
  GroundTruth gt;
  std::vector<std::string> char_ids;
  std::string word_utf8;
  for (const auto& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cols = split_tabs(line);
    if (cols[0] == "word" && cols.size() >= 2) {
      word_utf8 = cols[1];
    } else if (cols[0] == "matra" && cols.size() >= 3) {
      gt.matra_top = std::stoi(cols[1]);
      gt.matra_bottom = std::stoi(cols[2]);
    } else if (cols[0] == "char" && cols.size() >= 4) {
      char_ids.push_back(cols[1]);
      gt.char_x.push_back({std::stoi(cols[2]), std::stoi(cols[3])});
    } else if (cols[0] == "mod" && cols.size() >= 6) {
      gt.modifiers.push_back({zone_from_name(cols[1]), cols[2],
                              std::stoi(cols[3]), std::stoi(cols[4]),
                              std::stoi(cols[5])});
    } else {
      throw IoError(path + ": malformed ground-truth line '" + line + "'");
    }
  }
  gt.transcription = char_ids;
  return gt;
}

Config parse_config_text(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv(line);
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t'))
      sv.remove_prefix(1);
    while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t'))
      sv.remove_suffix(1);
    if (sv.empty() || sv.front() == '#') continue;
    const std::size_t eq = sv.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key=value");
    std::string key(sv.substr(0, eq));
    std::string value(sv.substr(eq + 1));
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t'))
      key.pop_back();
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
      value.erase(value.begin());
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    cfg[key] = value;
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

namespace {

std::string strokes_to_text(const std::vector<Stroke>& strokes) {
  std::string out;
  for (std::size_t s = 0; s < strokes.size(); ++s) {
    if (s) out += ';';
    for (std::size_t p = 0; p < strokes[s].size(); ++p) {
      if (p) out += ' ';
      out += fmt_double(strokes[s][p].x) + ',' + fmt_double(strokes[s][p].y);
    }
  }
  return out;
}

std::vector<Stroke> strokes_from_text(const std::string& text,
                                      const std::string& origin) {
  std::vector<Stroke> strokes;
  std::istringstream stroke_stream(text);
  std::string stroke_text;
  while (std::getline(stroke_stream, stroke_text, ';')) {
    Stroke stroke;
    std::istringstream pt_stream(stroke_text);
    std::string pt;
    while (pt_stream >> pt) {
      const std::size_t comma = pt.find(',');
      if (comma == std::string::npos)
        throw IoError(origin + ": malformed stroke point '" + pt + "'");
      stroke.push_back(
          {parse_double(pt.substr(0, comma)), parse_double(pt.substr(comma + 1))});
    }
    if (stroke.empty()) throw IoError(origin + ": empty stroke");
    strokes.push_back(std::move(stroke));
  }
  if (strokes.empty()) throw IoError(origin + ": glyph with no strokes");
  return strokes;
}

std::string decomp_to_text(const std::string& ch, const Decomp& d) {
  std::string out = ch + " = " + d.base;
  if (d.upper) out += " +upper:" + *d.upper;
  if (d.lower) out += " +lower:" + *d.lower;
  return out;
}

}  // namespace

std::map<std::string, Decomp> parse_decomposition_line_set(
    const std::vector<std::string>& lines, const std::string& origin) {
  std::map<std::string, Decomp> table;
  for (const auto& raw : lines) {
    std::istringstream in(raw);
    std::string ch, eq, base;
    if (!(in >> ch >> eq >> base) || eq != "=")
      throw IoError(origin + ": malformed decomposition line '" + raw + "'");
    Decomp d;
    d.base = base;
    std::string part;
    while (in >> part) {
      if (part.rfind("+upper:", 0) == 0)
        d.upper = part.substr(7);
      else if (part.rfind("+lower:", 0) == 0)
        d.lower = part.substr(7);
      else
        throw IoError(origin + ": unknown decomposition part '" + part + "'");
    }
    if (table.count(ch))
      throw IoError(origin + ": duplicate decomposition for '" + ch + "'");
    table[ch] = std::move(d);
  }
  return table;
}

std::map<std::string, Decomp> load_decomposition(const std::string& path) {
  std::vector<std::string> body;
  for (const auto& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    body.push_back(line);
  }
  return parse_decomposition_line_set(body, path);
}

void save_script(const std::string& path, const SyntheticScript& script) {
  auto out = open_out(path);
  out << "XLHWR-SCRIPT 1\n";
  out << "id\t" << script.id << "\n";
  out << "matra\t" << (script.has_matra ? 1 : 0) << "\n";
  auto dump_pool = [&](const std::vector<GlyphDef>& pool) {
    for (const auto& g : pool)
      out << "glyph\t" << zone_name(g.zone) << '\t' << g.id << '\t'
          << strokes_to_text(g.strokes) << "\n";
  };
  dump_pool(script.middle);
  dump_pool(script.upper);
  dump_pool(script.lower);
  for (const auto& [ch, d] : script.decomposition)
    out << "decomp\t" << decomp_to_text(ch, d) << "\n";
  if (!out) throw IoError(path + ": short write");
}

SyntheticScript load_script(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "XLHWR-SCRIPT 1")
    throw CompatError(path + ": missing XLHWR-SCRIPT 1 header");
  SyntheticScript script;
  std::vector<std::string> decomp_lines;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    const auto cols = split_tabs(line);
    const std::string where = path + ":" + std::to_string(i + 1);
    if (cols[0] == "id" && cols.size() >= 2) {
      script.id = cols[1];
    } else if (cols[0] == "matra" && cols.size() >= 2) {
      script.has_matra = cols[1] != "0";
    } else if (cols[0] == "glyph" && cols.size() >= 4) {
      GlyphDef g;
      g.zone = zone_from_name(cols[1]);
      g.id = cols[2];
      g.strokes = strokes_from_text(cols[3], where);
      if (g.zone == Zone::kMiddle)
        script.middle.push_back(std::move(g));
      else if (g.zone == Zone::kUpper)
        script.upper.push_back(std::move(g));
      else
        script.lower.push_back(std::move(g));
    } else if (cols[0] == "decomp" && cols.size() >= 2) {
      decomp_lines.push_back(cols[1]);
    } else {
      throw IoError(where + ": unknown script line '" + line + "'");
    }
  }
  script.decomposition = parse_decomposition_line_set(decomp_lines, path);
  for (const auto& [ch, d] : script.decomposition) {
    if (!script.find_glyph(Zone::kMiddle, d.base))
      throw IoError(path + ": decomposition of '" + ch +
                    "' references missing base '" + d.base + "'");
    if (d.upper && !script.find_glyph(Zone::kUpper, *d.upper))
      throw IoError(path + ": decomposition of '" + ch +
                    "' references missing upper '" + *d.upper + "'");
    if (d.lower && !script.find_glyph(Zone::kLower, *d.lower))
      throw IoError(path + ": decomposition of '" + ch +
                    "' references missing lower '" + *d.lower + "'");
  }
  return script;
}

std::vector<Word> load_wordlist(const std::string& path,
                                const std::set<std::string>& tokens) {
  std::vector<Word> out;
  for (const auto& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(tokenize_word(line, tokens));
  }
  return out;
}

void save_wordlist(const std::string& path, const std::vector<Word>& words) {
  auto out = open_out(path);
  for (const auto& w : words) out << join_word(w) << "\n";
  if (!out) throw IoError(path + ": short write");
}

void save_mapping(const std::string& path,
                  const std::map<std::string, std::string>& mapping) {
  auto out = open_out(path);
  for (const auto& [tgt, src] : mapping) out << tgt << '\t' << src << "\n";
  if (!out) throw IoError(path + ": short write");
}

std::map<std::string, std::string> load_mapping(const std::string& path) {
  std::map<std::string, std::string> mapping;
  for (const auto& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 2)
      throw IoError(path + ": malformed mapping line '" + line + "'");
    mapping[cols[0]] = cols[1];
  }
  return mapping;
}

}  // namespace xlhwr
