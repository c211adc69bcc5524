#include "cait/conllu.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "cait/text.h"

namespace cait {
namespace {

constexpr std::string_view kBeginComment = "#";

bool FeatureNameLess(const std::string& a, const std::string& b) {
  std::string la = AsciiLower(a);
  std::string lb = AsciiLower(b);
  if (la != lb) return la < lb;
  return a < b;
}

// "# key = value" -> (key, value); nullopt for free-form comments.
std::optional<std::pair<std::string, std::string>> SplitComment(
    std::string_view line) {
  if (line.empty() || line[0] != '#') return std::nullopt;
  std::string_view body = Trim(line.substr(1));
  size_t eq = body.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  std::string key(Trim(body.substr(0, eq)));
  if (key.empty() || key.find(' ') != std::string::npos) return std::nullopt;
  return std::make_pair(key, std::string(Trim(body.substr(eq + 1))));
}

std::string JoinIds(const std::vector<int>& ids) {
  std::string out = "{";
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(ids[i]);
  }
  return out + "}";
}

// Every cycle among head pointers, each as sorted member ids. Pointers that
// leave [1, n] or point at the token itself terminate a walk.
std::vector<std::vector<int>> FindCycles(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  std::vector<int> state(n + 1, 0);  // 0 new, 1 on current path, 2 done
  std::vector<std::vector<int>> cycles;
  for (int start = 1; start <= n; ++start) {
    if (state[start]) continue;
    std::vector<int> path;
    int cur = start;
    while (true) {
      if (state[cur] == 2) break;
      if (state[cur] == 1) {
        auto it = std::find(path.begin(), path.end(), cur);
        std::vector<int> cycle(it, path.end());
        std::sort(cycle.begin(), cycle.end());
        cycles.push_back(std::move(cycle));
        break;
      }
      state[cur] = 1;
      path.push_back(cur);
      int h = heads[cur - 1];
      if (h < 1 || h > n || h == cur) break;
      cur = h;
    }
    for (int v : path) state[v] = 2;
  }
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

}  // namespace

std::string_view SpeakerRoleName(SpeakerRole role) {
  switch (role) {
    case SpeakerRole::kCS:
      return "CS";
    case SpeakerRole::kCDS:
      return "CDS";
    case SpeakerRole::kOther:
      return "OTHER";
  }
  return "OTHER";
}

std::string_view Token::Feature(std::string_view name) const {
  for (const auto& [k, v] : feats) {
    if (k == name) return v;
  }
  return {};
}

bool Token::HasFeature(std::string_view name, std::string_view value) const {
  for (const auto& [k, v] : feats) {
    if (k != name) continue;
    // Multi-valued features are comma-separated.
    for (const std::string& part : Split(v, ',')) {
      if (part == value) return true;
    }
  }
  return false;
}

std::string_view Token::UniversalDeprel() const {
  std::string_view d = deprel;
  return d.substr(0, d.find(':'));
}

void Sentence::SetComment(std::string_view key, std::string_view value) {
  std::string line = "# " + std::string(key) + " = " + std::string(value);
  for (std::string& c : comments) {
    auto kv = SplitComment(c);
    if (kv && kv->first == key) {
      c = line;
      return;
    }
  }
  comments.push_back(std::move(line));
}

RoleMap::RoleMap() {
  Set("CHI", SpeakerRole::kCS);
  for (const char* code : {"MOT", "FAT", "ADU", "INV", "caregiver", "adult"}) {
    Set(code, SpeakerRole::kCDS);
  }
}

RoleMap RoleMap::FromTsv(std::istream& in) {
  RoleMap map;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> f = Split(t, '\t');
    if (f.size() != 2) {
      throw FormatError(lineno, "role map: expected 2 tab-separated columns");
    }
    std::string role = AsciiLower(Trim(f[1]));
    if (role == "cs") {
      map.Set(Trim(f[0]), SpeakerRole::kCS);
    } else if (role == "cds") {
      map.Set(Trim(f[0]), SpeakerRole::kCDS);
    } else if (role == "other") {
      map.Set(Trim(f[0]), SpeakerRole::kOther);
    } else {
      throw FormatError(lineno, "role map: unknown role '" + f[1] + "'");
    }
  }
  return map;
}

void RoleMap::Set(std::string_view code, SpeakerRole role) {
  roles_[AsciiLower(code)] = role;
}

SpeakerRole RoleMap::Lookup(std::string_view code) const {
  auto it = roles_.find(AsciiLower(Trim(code)));
  return it == roles_.end() ? SpeakerRole::kOther : it->second;
}

FormatError::FormatError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what),
      line_(line) {}

ValidationError::ValidationError(std::string sent_id, const std::string& what)
    : std::runtime_error("sentence " + sent_id + ": " + what),
      sent_id_(std::move(sent_id)) {}

std::optional<double> ParseChatAge(std::string_view age) {
  age = Trim(age);
  size_t semi = age.find(';');
  if (semi == std::string_view::npos) return std::nullopt;
  int years = 0;
  if (!ParseInt(age.substr(0, semi), &years) || years < 0) return std::nullopt;
  std::string_view rest = age.substr(semi + 1);
  int months = 0;
  int days = 0;
  size_t dot = rest.find('.');
  std::string_view mm = rest.substr(0, dot);
  if (!mm.empty() && !ParseInt(mm, &months)) return std::nullopt;
  if (dot != std::string_view::npos) {
    std::string_view dd = rest.substr(dot + 1);
    if (!dd.empty() && !ParseInt(dd, &days)) return std::nullopt;
  }
  if (months < 0 || months > 11 || days < 0 || days > 31) return std::nullopt;
  // Mean Gregorian month length.
  return 12.0 * years + months + days / 30.436875;
}

void ExtractMetadata(Sentence& sentence, const RoleMap& roles) {
  for (const std::string& c : sentence.comments) {
    auto kv = SplitComment(c);
    if (!kv) continue;
    const auto& [key, value] = *kv;
    if (key == "sent_id") {
      sentence.sent_id = value;
    } else if (key == "text") {
      sentence.text = value;
    } else if (key == "speaker") {
      sentence.speaker_role = roles.Lookup(value);
    } else if (key == "child_age") {
      sentence.child_age_months = ParseChatAge(value);
    } else if (key == "age_months") {
      double m = 0;
      if (ParseDouble(value, &m) && m >= 0 && std::isfinite(m)) {
        sentence.child_age_months = m;
      } else {
        sentence.child_age_months.reset();
      }
    }
  }
}

Features ParseFeatures(std::string_view column) {
  Features feats;
  if (column == "_" || column.empty()) return feats;
  for (const std::string& item : Split(column, '|')) {
    size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw std::invalid_argument("malformed feature '" + item + "'");
    }
    feats.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  std::sort(feats.begin(), feats.end(), [](const auto& a, const auto& b) {
    return FeatureNameLess(a.first, b.first);
  });
  for (size_t i = 1; i < feats.size(); ++i) {
    if (feats[i].first == feats[i - 1].first) {
      throw std::invalid_argument("duplicate feature '" + feats[i].first + "'");
    }
  }
  return feats;
}

std::string FormatFeatures(const Features& feats) {
  if (feats.empty()) return "_";
  Features sorted = feats;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return FeatureNameLess(a.first, b.first);
  });
  std::string out;
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i) out += '|';
    out += sorted[i].first;
    out += '=';
    out += sorted[i].second;
  }
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(const ReadOptions& options) : options_(options) {}

  void Line(std::string_view line, int lineno) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (Trim(line).empty()) {
      Flush(lineno);
      return;
    }
    if (!in_sentence_) {
      in_sentence_ = true;
      first_line_ = lineno;
    }
    if (line.substr(0, 1) == kBeginComment) {
      if (!cur_.tokens.empty() || !cur_.mwt.empty() ||
          !cur_.empty_nodes.empty()) {
        throw FormatError(lineno, "comment line after token lines");
      }
      cur_.comments.emplace_back(line);
      return;
    }
    TokenLine(line, lineno);
  }

  Treebank Finish(int lineno) {
    Flush(lineno);
    tb_.split = options_.split;
    tb_.provenance = options_.provenance;
    return std::move(tb_);
  }

 private:
  void TokenLine(std::string_view line, int lineno) {
    std::vector<std::string> f = Split(line, '\t');
    if (f.size() != 10) {
      throw FormatError(lineno, "expected 10 tab-separated fields, got " +
                                    std::to_string(f.size()));
    }
    const std::string& id = f[0];
    const int next = static_cast<int>(cur_.tokens.size()) + 1;
    if (size_t dash = id.find('-'); dash != std::string::npos) {
      MwtRange r;
      if (!ParseInt(std::string_view(id).substr(0, dash), &r.start) ||
          !ParseInt(std::string_view(id).substr(dash + 1), &r.end)) {
        throw FormatError(lineno, "non-integer range id '" + id + "'");
      }
      r.form = f[1];
      r.rest = line.substr(line.find('\t', line.find('\t') + 1) + 1);
      cur_.mwt.push_back(std::move(r));
      return;
    }
    if (size_t dot = id.find('.'); dot != std::string::npos) {
      int after = 0;
      int sub = 0;
      if (!ParseInt(std::string_view(id).substr(0, dot), &after) ||
          !ParseInt(std::string_view(id).substr(dot + 1), &sub)) {
        throw FormatError(lineno, "non-integer empty node id '" + id + "'");
      }
      if (after != next - 1) {
        throw FormatError(lineno, "empty node " + id + " out of sequence");
      }
      cur_.empty_nodes.push_back({after, std::string(line)});
      return;
    }
    Token t;
    if (!ParseInt(id, &t.id)) {
      throw FormatError(lineno, "non-integer token id '" + id + "'");
    }
    if (t.id >= 1 && t.id < next) {
      throw FormatError(lineno, "duplicate token id " + id);
    }
    if (t.id != next) {
      throw FormatError(lineno, "token id " + id + " out of sequence, expected " +
                                    std::to_string(next));
    }
    if (!ParseInt(f[6], &t.head)) {
      throw FormatError(lineno, "non-integer head '" + f[6] + "'");
    }
    t.form = f[1];
    t.lemma = f[2];
    t.upos = f[3];
    t.xpos = f[4];
    try {
      t.feats = ParseFeatures(f[5]);
    } catch (const std::invalid_argument& e) {
      throw FormatError(lineno, e.what());
    }
    t.deprel = f[7];
    t.deps = f[8];
    t.misc = f[9];
    cur_.tokens.push_back(std::move(t));
  }

  void Flush(int lineno) {
    if (!in_sentence_) return;
    in_sentence_ = false;
    if (cur_.tokens.empty()) {
      throw FormatError(first_line_, "sentence has no token lines");
    }
    ExtractMetadata(cur_, options_.roles);
    if (cur_.sent_id.empty()) {
      cur_.sent_id = std::to_string(tb_.sentences.size() + 1);
    }
    std::vector<Diagnostic> diags = Validate(cur_);
    if (!seen_ids_.insert(cur_.sent_id).second) {
      diags.push_back({Diagnostic::Kind::kDuplicateSentId, cur_.sent_id, {},
                       "duplicate sent_id " + cur_.sent_id});
    }
    if (!diags.empty()) {
      if (options_.strictness == Strictness::kStrict) {
        throw ValidationError(cur_.sent_id, diags.front().message);
      }
      cur_.diagnostics = std::move(diags);
    }
    (void)lineno;
    tb_.sentences.push_back(std::move(cur_));
    cur_ = Sentence();
  }

  const ReadOptions& options_;
  Treebank tb_;
  Sentence cur_;
  bool in_sentence_ = false;
  int first_line_ = 0;
  std::set<std::string> seen_ids_;
};

}  // namespace

Treebank ReadConllu(std::istream& in, const ReadOptions& options) {
  Reader reader(options);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    reader.Line(line, lineno);
  }
  return reader.Finish(lineno + 1);
}

Treebank ReadConlluString(std::string_view text, const ReadOptions& options) {
  std::istringstream in{std::string(text)};
  return ReadConllu(in, options);
}

void WriteSentence(const Sentence& s, std::ostream& out) {
  for (const std::string& c : s.comments) out << c << '\n';
  auto empty_after = [&](int id) {
    for (const EmptyNode& e : s.empty_nodes) {
      if (e.after == id) out << e.line << '\n';
    }
  };
  empty_after(0);
  for (const Token& t : s.tokens) {
    for (const MwtRange& r : s.mwt) {
      if (r.start == t.id) {
        out << r.start << '-' << r.end << '\t' << r.form << '\t' << r.rest
            << '\n';
      }
    }
    out << t.id << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t'
        << t.xpos << '\t' << FormatFeatures(t.feats) << '\t' << t.head << '\t'
        << t.deprel << '\t' << t.deps << '\t' << t.misc << '\n';
    empty_after(t.id);
  }
  out << '\n';
}

void WriteConllu(const Treebank& tb, std::ostream& out) {
  for (const Sentence& s : tb.sentences) WriteSentence(s, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed");
}

std::string ToConllu(const Treebank& tb) {
  std::ostringstream out;
  WriteConllu(tb, out);
  return out.str();
}

std::string SurfaceText(const Sentence& s) {
  std::vector<std::string> parts;
  const int n = static_cast<int>(s.tokens.size());
  for (int id = 1; id <= n;) {
    const MwtRange* range = nullptr;
    for (const MwtRange& r : s.mwt) {
      if (r.start == id && r.end >= id && r.end <= n) range = &r;
    }
    if (range) {
      parts.push_back(range->form);
      id = range->end + 1;
    } else {
      parts.push_back(s.at(id).form);
      ++id;
    }
  }
  return Join(parts, " ");
}

std::vector<Diagnostic> Validate(const Sentence& s) {
  using Kind = Diagnostic::Kind;
  std::vector<Diagnostic> out;
  auto add = [&](Kind k, std::vector<int> ids, std::string msg) {
    out.push_back({k, s.sent_id, std::move(ids), std::move(msg)});
  };
  const int n = static_cast<int>(s.tokens.size());
  std::vector<int> heads;
  std::vector<int> roots;
  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[i];
    if (t.id != i + 1) {
      add(Kind::kIdSequence, {t.id},
          "token id " + std::to_string(t.id) + " at position " +
              std::to_string(i + 1));
    }
    heads.push_back(t.head);
    if (t.head < 0 || t.head > n) {
      add(Kind::kHeadRange, {i + 1},
          "head " + std::to_string(t.head) + " out of range at token " +
              std::to_string(i + 1));
    } else if (t.head == i + 1) {
      add(Kind::kSelfLoop, {i + 1}, "self-loop at token " + std::to_string(i + 1));
    } else if (t.head == 0) {
      roots.push_back(i + 1);
    }
    // "_" marks an unannotated relation; only annotated labels are checked.
    if (t.deprel != "_") {
      bool is_root_label = t.UniversalDeprel() == "root";
      if (t.head == 0 && !is_root_label) {
        add(Kind::kRootLabel, {i + 1},
            "token " + std::to_string(i + 1) + " attached to 0 as " + t.deprel);
      } else if (t.head != 0 && is_root_label) {
        add(Kind::kRootLabel, {i + 1},
            "token " + std::to_string(i + 1) + " labelled root but has head " +
                std::to_string(t.head));
      }
    }
  }
  if (n > 0 && roots.empty()) add(Kind::kNoRoot, {}, "no root");
  if (roots.size() > 1) add(Kind::kMultipleRoots, roots, "multiple roots");
  for (auto& cycle : FindCycles(heads)) {
    std::string msg = "cycle " + JoinIds(cycle);
    add(Kind::kCycle, std::move(cycle), std::move(msg));
  }
  int prev_end = 0;
  std::vector<MwtRange> ranges = s.mwt;
  std::sort(ranges.begin(), ranges.end(),
            [](const MwtRange& a, const MwtRange& b) { return a.start < b.start; });
  for (const MwtRange& r : ranges) {
    std::string name = std::to_string(r.start) + "-" + std::to_string(r.end);
    if (r.start >= r.end || r.start < 1 || r.end > n) {
      add(Kind::kMwtRange, {r.start, r.end}, "invalid range " + name);
    } else if (r.start <= prev_end) {
      add(Kind::kMwtRange, {r.start, r.end}, "overlapping range " + name);
    }
    prev_end = std::max(prev_end, r.end);
  }
  return out;
}

LabelMap LabelMap::FromTsv(std::istream& in) {
  LabelMap map;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> f = Split(t, '\t');
    if (f.size() != 2 || Trim(f[0]).empty() || Trim(f[1]).empty()) {
      throw FormatError(lineno, "label map: expected source TAB target");
    }
    map.map_[std::string(Trim(f[0]))] = std::string(Trim(f[1]));
  }
  map.Close();
  return map;
}

const LabelMap& LabelMap::ClearNlpToUd() {
  static const LabelMap* map = [] {
    auto* m = new LabelMap();
    const std::pair<const char*, const char*> kTable[] = {
        {"ROOT", "root"},          {"nsubjpass", "nsubj:pass"},
        {"csubjpass", "csubj:pass"}, {"auxpass", "aux:pass"},
        {"dobj", "obj"},           {"dative", "iobj"},
        {"pobj", "obl"},           {"prep", "case"},
        {"poss", "nmod:poss"},     {"possessive", "case"},
        {"neg", "advmod"},         {"acomp", "xcomp"},
        {"oprd", "xcomp"},         {"attr", "xcomp"},
        {"relcl", "acl:relcl"},    {"prt", "compound:prt"},
        {"npadvmod", "obl:npmod"}, {"quantmod", "advmod"},
        {"predet", "det:predet"},  {"preconj", "cc:preconj"},
        {"intj", "discourse"},     {"meta", "dep"},
        {"agent", "obl:agent"},    {"nn", "compound"},
        {"num", "nummod"},         {"infmod", "acl"},
        {"partmod", "acl"},        {"rcmod", "acl:relcl"},
        {"hmod", "compound"},      {"hyph", "punct"},
    };
    for (const auto& [from, to] : kTable) m->map_[from] = to;
    m->Close();
    return m;
  }();
  return *map;
}

void LabelMap::Add(std::string from, std::string to) {
  map_[std::move(from)] = std::move(to);
  Close();
}

std::string_view LabelMap::Map(std::string_view label) const {
  auto it = map_.find(label);
  return it == map_.end() ? label : std::string_view(it->second);
}

void LabelMap::Close() {
  // Follow chains a->b->c so that every target is a fixed point.
  std::map<std::string, std::string, std::less<>> closed;
  for (const auto& [from, target] : map_) {
    std::string to = target;
    std::set<std::string> seen{from};
    while (true) {
      auto it = map_.find(to);
      if (it == map_.end() || it->second == to) break;
      if (!seen.insert(to).second) {
        throw std::invalid_argument("label map has a cycle through '" + from + "'");
      }
      to = it->second;
    }
    closed[from] = std::move(to);
  }
  map_ = std::move(closed);
  // Labels introduced by tree repair must map to themselves.
  for (const char* reserved : {"root", "dep", "parataxis"}) {
    auto it = map_.find(reserved);
    if (it != map_.end() && it->second != reserved) {
      throw std::invalid_argument(std::string("label map may not rewrite '") +
                                  reserved + "'");
    }
  }
}

Sentence Normalize(const Sentence& input, const LabelMap& labels) {
  using Kind = Diagnostic::Kind;
  Sentence s = input;
  s.diagnostics.clear();
  auto repair = [&](std::vector<int> ids, std::string msg) {
    s.diagnostics.push_back({Kind::kRepair, s.sent_id, std::move(ids), std::move(msg)});
  };

  for (Token& t : s.tokens) {
    std::string_view mapped = labels.Map(t.deprel);
    if (mapped != t.deprel) t.deprel = std::string(mapped);
  }

  const int n = static_cast<int>(s.tokens.size());
  for (int i = 0; i < n; ++i) {
    if (s.tokens[i].id != i + 1) {
      repair({s.tokens[i].id}, "renumbered token at position " + std::to_string(i + 1));
      s.tokens[i].id = i + 1;
    }
  }
  if (n == 0) return s;

  // -1 marks a head that cannot be kept (out of range or self-loop).
  std::vector<int> heads(n);
  for (int i = 0; i < n; ++i) {
    int h = s.tokens[i].head;
    heads[i] = (h < 0 || h > n || h == i + 1) ? -1 : h;
  }

  std::vector<int> roots;
  for (int i = 0; i < n; ++i) {
    if (heads[i] == 0) roots.push_back(i + 1);
  }
  int root = 0;
  if (roots.empty()) {
    // The shallowest cycle-free token is one whose own head is unusable;
    // with none available, every chain ends in a cycle.
    for (int i = 0; i < n && !root; ++i) {
      if (heads[i] == -1) root = i + 1;
    }
    if (!root) {
      auto cycles = FindCycles(heads);
      root = n;
      for (const auto& c : cycles) root = std::min(root, c.front());
    }
    heads[root - 1] = 0;
    repair({root}, "no root: token " + std::to_string(root) + " made root");
  } else {
    root = roots.front();
    for (size_t k = 1; k < roots.size(); ++k) {
      int r = roots[k];
      heads[r - 1] = root;
      s.tokens[r - 1].deprel = "parataxis";
      repair({r}, "extra root " + std::to_string(r) + " attached to " +
                      std::to_string(root) + " as parataxis");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (heads[i] == -1) {
      heads[i] = root;
      repair({i + 1}, "invalid head of token " + std::to_string(i + 1) +
                          " replaced by root " + std::to_string(root));
    }
  }
  while (true) {
    auto cycles = FindCycles(heads);
    if (cycles.empty()) break;
    for (const auto& c : cycles) {
      heads[c.front() - 1] = root;
      repair(c, "cycle " + JoinIds(c) + " broken at token " +
                    std::to_string(c.front()));
    }
  }
  for (int i = 0; i < n; ++i) {
    Token& t = s.tokens[i];
    t.head = heads[i];
    if (t.deprel == "_") continue;
    bool is_root_label = t.UniversalDeprel() == "root";
    if (t.head == 0 && !is_root_label) {
      repair({i + 1}, "relabelled root token " + std::to_string(i + 1) + " (" +
                          t.deprel + ") as root");
      t.deprel = "root";
    } else if (t.head != 0 && is_root_label) {
      repair({i + 1}, "relabelled non-root token " + std::to_string(i + 1) +
                          " (" + t.deprel + ") as dep");
      t.deprel = "dep";
    }
  }

  std::vector<MwtRange> kept;
  int prev_end = 0;
  std::vector<MwtRange> ranges = s.mwt;
  std::stable_sort(ranges.begin(), ranges.end(),
                   [](const MwtRange& a, const MwtRange& b) { return a.start < b.start; });
  for (MwtRange& r : ranges) {
    if (r.start < r.end && r.start >= 1 && r.end <= n && r.start > prev_end) {
      prev_end = r.end;
      kept.push_back(std::move(r));
    } else {
      repair({r.start, r.end}, "dropped invalid range " + std::to_string(r.start) +
                                   "-" + std::to_string(r.end));
    }
  }
  s.mwt = std::move(kept);
  return s;
}

}  // namespace cait
