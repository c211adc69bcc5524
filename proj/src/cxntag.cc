#include "cait/cxntag.h"

#include <algorithm>
#include <istream>
#include <ostream>

#include "cait/parallel.h"
#include "cait/text.h"

namespace cait {
namespace {

const std::set<std::string, std::less<>> kBeForms = {
    "be", "am", "is", "are", "was", "were", "been", "being", "'s", "'re", "'m"};
const std::set<std::string, std::less<>> kWhWords = {
    "who", "what", "where", "when", "why", "how", "which", "whose", "whom"};
const std::set<std::string, std::less<>> kControlVerbs = {
    "want", "need", "try", "like", "have", "go", "start", "begin", "love", "hate"};
const std::set<std::string, std::less<>> kLeadingSkip = {
    "discourse", "vocative", "punct", "reparandum", "cc"};
const std::set<std::string, std::less<>> kFunctional = {
    "punct", "discourse", "vocative", "reparandum", "cc", "mark", "aux", "cop"};
const std::set<std::string, std::less<>> kSubjects = {"nsubj", "csubj", "expl"};
const std::set<std::string, std::less<>> kClausalDeps = {"ccomp", "advcl", "acl",
                                                         "parataxis"};
const std::set<std::string, std::less<>> kExclusionMarkers = {"xxx", "yyy", "www"};

// Tag-question vocabulary.
const std::set<std::string, std::less<>> kTagAux = {
    "is", "are", "was", "were", "am", "do", "does", "did", "have", "has", "had",
    "can", "could", "will", "would", "shall", "should", "may", "might", "must",
    "wo", "ca", "ai", "sha"};
const std::set<std::string, std::less<>> kTagAuxNeg = {
    "isn't", "aren't", "wasn't", "weren't", "don't", "doesn't", "didn't",
    "haven't", "hasn't", "hadn't", "can't", "couldn't", "won't", "wouldn't",
    "shouldn't", "ain't", "mustn't", "shan't", "mightn't"};
const std::set<std::string, std::less<>> kTagPronouns = {
    "it", "you", "i", "we", "they", "he", "she", "there", "that", "ya"};
const std::set<std::string, std::less<>> kTagWords = {
    "okay", "ok", "right", "huh", "eh", "yeah"};

std::string Lower(std::string_view s) {
  std::string out = AsciiLower(s);
  // Curly apostrophe to ASCII so "isn’t" and "isn't" agree.
  for (size_t pos; (pos = out.find("\xE2\x80\x99")) != std::string::npos;) {
    out.replace(pos, 3, "'");
  }
  return out;
}

// Read-only view of a sentence with the lookups the rules need.
class Tree {
 public:
  explicit Tree(const Sentence& s) : s_(s), children_(s.size() + 1) {
    forms_.reserve(s.size());
    lemmas_.reserve(s.size());
    for (const Token& t : s.tokens) {
      forms_.push_back(Lower(t.form));
      lemmas_.push_back(t.lemma == "_" ? forms_.back() : Lower(t.lemma));
      if (t.head >= 0 && static_cast<size_t>(t.head) <= s.size()) {
        children_[t.head].push_back(t.id);
      }
      if (t.head == 0 && root_ == 0) root_ = t.id;
    }
    for (const Token& t : s.tokens) {
      if (!kLeadingSkip.contains(t.UniversalDeprel()) && t.upos != "PUNCT") {
        first_core_ = t.id;
        break;
      }
    }
  }

  int size() const { return static_cast<int>(s_.size()); }
  int root() const { return root_; }
  int first_core() const { return first_core_; }
  const Token& tok(int id) const { return s_.at(id); }
  const std::string& form(int id) const { return forms_[id - 1]; }
  const std::string& lemma(int id) const { return lemmas_[id - 1]; }
  const std::vector<int>& children(int id) const { return children_[id]; }
  std::string_view rel(int id) const { return tok(id).UniversalDeprel(); }

  bool IsBe(int id) const {
    return lemma(id) == "be" || kBeForms.contains(form(id));
  }
  bool IsVerbal(int id) const {
    return tok(id).upos == "VERB" || tok(id).upos == "AUX";
  }
  bool AnyUpos(std::string_view upos) const {
    return std::any_of(s_.tokens.begin(), s_.tokens.end(),
                       [&](const Token& t) { return t.upos == upos; });
  }
  bool EndsWithQuestion() const {
    return !s_.tokens.empty() && s_.tokens.back().form.find('?') != std::string::npos;
  }
  bool HasQuestionMark() const {
    return std::any_of(s_.tokens.begin(), s_.tokens.end(), [](const Token& t) {
      return t.form.find('?') != std::string::npos;
    });
  }
  // First child of `id` whose universal relation is in `rels`, else 0.
  int Child(int id, const std::set<std::string, std::less<>>& rels) const {
    for (int c : children(id)) {
      if (rels.contains(rel(c))) return c;
    }
    return 0;
  }
  int ChildWithDeprel(int id, std::string_view deprel) const {
    for (int c : children(id)) {
      if (tok(c).deprel == deprel) return c;
    }
    return 0;
  }
  int Subject(int id) const { return Child(id, kSubjects); }
  bool IsNegation(int id) const {
    return form(id) == "not" || form(id) == "n't" || tok(id).HasFeature("Polarity", "Neg");
  }
  bool IsPastParticiple(int id) const {
    const Token& t = tok(id);
    return t.xpos == "VBN" ||
           (t.HasFeature("VerbForm", "Part") && t.HasFeature("Tense", "Past"));
  }
  bool IsParticiple(int id) const {
    const Token& t = tok(id);
    return t.xpos == "VBN" || t.xpos == "VBG" || t.HasFeature("VerbForm", "Part") ||
           t.HasFeature("VerbForm", "Ger");
  }
  bool IsBaseForm(int id) const {
    const Token& t = tok(id);
    if (t.xpos == "VB" || t.HasFeature("VerbForm", "Inf")) return true;
    if (t.xpos != "_" || !t.feats.empty()) return false;
    return form(id) == lemma(id);
  }
  bool IsWh(int id) const {
    return tok(id).HasFeature("PronType", "Int") || kWhWords.contains(lemma(id)) ||
           kWhWords.contains(form(id));
  }

 private:
  const Sentence& s_;
  std::vector<std::string> forms_;
  std::vector<std::string> lemmas_;
  std::vector<std::vector<int>> children_;
  int root_ = 0;
  int first_core_ = 0;
};

bool FullyAnnotated(const Sentence& s) {
  return std::all_of(s.tokens.begin(), s.tokens.end(), [](const Token& t) {
    return t.upos != "_" && t.deprel != "_";
  });
}

// Rule 2: "she's." style copula with nothing but a subject, or an
// exclamative "what a mess!".
bool IncompleteCopulaOrExclamative(const Tree& t) {
  const int root = t.root();
  if (root != 0 && t.IsBe(root) && t.IsVerbal(root)) {
    int subjects = 0;
    bool functional_only = true;
    for (int c : t.children(root)) {
      std::string_view rel = t.rel(c);
      if (rel == "nsubj" || rel == "expl") {
        ++subjects;
      } else if (!kFunctional.contains(rel) && !(rel == "advmod" && t.IsNegation(c))) {
        functional_only = false;
      }
    }
    if (subjects <= 1 && functional_only) return true;
  }
  const int fc = t.first_core();
  if (fc != 0 && fc < t.size() && (t.form(fc) == "what" || t.form(fc) == "such") &&
      (t.form(fc + 1) == "a" || t.form(fc + 1) == "an") && !t.AnyUpos("VERB") &&
      !t.AnyUpos("AUX")) {
    return true;
  }
  return false;
}

// Rule 3: clause-initial auxiliary before the subject, ending in "?".
bool AuxInversion(const Tree& t) {
  if (!t.EndsWithQuestion()) return false;
  const int fc = t.first_core();
  const int root = t.root();
  if (fc == 0 || root == 0 || t.tok(fc).upos != "AUX") return false;
  const bool main_aux =
      fc == root || (t.tok(fc).head == root && (t.rel(fc) == "aux" || t.rel(fc) == "cop"));
  if (!main_aux) return false;
  const int subj = t.Subject(root);
  return subj > fc;
}

// Rule 4: wh-word fronted in the main clause.
bool FrontedWh(const Tree& t) {
  const int fc = t.first_core();
  const int root = t.root();
  if (fc == 0 || root == 0 || !t.IsWh(fc) || t.rel(fc) == "mark") return false;
  int steps = 0;
  for (int h = t.tok(fc).head; h != 0 && h != root && steps++ < t.size();
       h = t.tok(h).head) {
    if (kClausalDeps.contains(t.rel(h)) || t.rel(h) == "csubj") return false;
  }
  // Also reject a wh-word that itself heads an embedded clause.
  if (fc != root && (kClausalDeps.contains(t.rel(fc)) || t.rel(fc) == "csubj")) {
    return false;
  }
  int anchor = fc == root ? t.size() + 1 : root;
  for (int c : t.children(root)) {
    if (c == fc) continue;
    std::string_view rel = t.rel(c);
    if (rel == "aux" || rel == "cop" || kSubjects.contains(rel)) anchor = std::min(anchor, c);
  }
  return fc < anchor;
}

// Rule 5: any clausal dependent, or coordinated verbs.
bool Complex(const Tree& t) {
  for (int id = 1; id <= t.size(); ++id) {
    if (kClausalDeps.contains(t.rel(id))) return true;
    const Token& tok = t.tok(id);
    if (t.rel(id) == "conj" && tok.upos == "VERB" && tok.head > 0 &&
        t.tok(tok.head).upos == "VERB") {
      return true;
    }
  }
  return false;
}

// Rule 6: copula, existential or passive/resultative "be".
bool Copular(const Tree& t) {
  const int root = t.root();
  if (root == 0) return false;
  if (t.Child(root, {"cop"}) != 0) return true;
  if (t.IsBe(root)) {
    for (int c : t.children(root)) {
      if (t.rel(c) == "expl" && t.form(c) == "there") return true;
    }
  }
  if (t.IsPastParticiple(root)) {
    for (int c : t.children(root)) {
      if (t.tok(c).deprel == "aux:pass" || (t.rel(c) == "aux" && t.IsBe(c))) return true;
    }
  }
  return false;
}

// Rule 7: verbless root or bare participle.
bool Fragment(const Tree& t) {
  const int root = t.root();
  if (root == 0 || !t.IsVerbal(root)) return true;
  return t.IsParticiple(root) && t.Child(root, {"aux"}) == 0 && t.Subject(root) == 0;
}

// Rule 8: imperative or hortative.
bool Imperative(const Tree& t) {
  const int root = t.root();
  if (root == 0) return false;
  if (t.tok(root).HasFeature("Mood", "Imp")) return true;
  const int subj = t.Subject(root);
  if (t.tok(root).upos == "VERB" && subj == 0) {
    const int fc = t.first_core();
    if (fc == root) return true;
    if (fc != 0 && t.tok(fc).head == root && t.rel(fc) == "aux" && t.lemma(fc) == "do") {
      return true;
    }
  }
  if (t.lemma(root) == "let") {
    for (int c : t.children(root)) {
      if (t.form(c) == "'s" || t.form(c) == "us") return true;
    }
  }
  if (subj != 0 && subj + 1 == root && t.form(subj) == "you" && t.rel(subj) == "nsubj" &&
      t.tok(root).upos == "VERB" && t.IsBaseForm(root) && !t.HasQuestionMark()) {
    return true;
  }
  return false;
}

// Rule 9: elliptical auxiliary clause ("we did").
bool EllipticalAux(const Tree& t) {
  const int root = t.root();
  return root != 0 && t.tok(root).upos == "AUX" && t.Child(root, {"nsubj"}) != 0 &&
         t.Child(root, {"cop"}) == 0;
}

// Rule 10: transitive root, or a control verb with an xcomp.
bool Transitive(const Tree& t) {
  const int root = t.root();
  if (root == 0) return false;
  if (t.Child(root, {"obj"}) != 0) return true;
  return kControlVerbs.contains(t.lemma(root)) && t.Child(root, {"xcomp"}) != 0;
}

bool VerbRooted(const Tree& t) { return t.root() != 0 && t.IsVerbal(t.root()); }

std::vector<int> TrailingPunct(const Sentence& s) {
  std::vector<int> out;
  for (int id = static_cast<int>(s.size()); id >= 1; --id) {
    const Token& t = s.at(id);
    if (t.upos == "PUNCT" || IsPunctuationOnly(t.form)) {
      out.push_back(id);
    } else {
      break;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Candidate tag spans ending at `last` (inclusive), shortest first.
std::vector<std::vector<int>> TagCandidates(const Sentence& s, int last) {
  std::vector<std::vector<int>> out;
  if (last < 1) return out;
  auto f = [&](int id) { return Lower(s.at(id).form); };
  if (kTagWords.contains(f(last))) out.push_back({last});
  if (kTagPronouns.contains(f(last))) {
    if (last >= 2 && (kTagAux.contains(f(last - 1)) || kTagAuxNeg.contains(f(last - 1)))) {
      out.push_back({last - 1, last});
    }
    if (last >= 3 && (f(last - 1) == "n't" || f(last - 1) == "not") &&
        kTagAux.contains(f(last - 2))) {
      out.push_back({last - 2, last - 1, last});
    }
  }
  return out;
}

bool TagIsNegated(const Sentence& s, const std::vector<int>& span) {
  for (int id : span) {
    std::string f = Lower(s.at(id).form);
    if (f == "n't" || f == "not" || kTagAuxNeg.contains(f)) return true;
  }
  return false;
}

// Ids to delete for one tag question, or empty if none applies.
std::vector<int> FindTag(const Sentence& s) {
  const std::vector<int> trail = TrailingPunct(s);
  const int last = static_cast<int>(s.size()) - static_cast<int>(trail.size());
  const bool syntactic = FullyAnnotated(s);
  bool question = false;
  for (int id : trail) question |= s.at(id).form.find('?') != std::string::npos;

  for (std::vector<int> span : TagCandidates(s, last)) {
    const int first = span.front();
    const bool comma = first >= 2 && s.at(first - 1).form == ",";
    std::vector<int> removed = span;
    if (comma) removed.insert(removed.begin(), first - 1);
    const int lo = removed.front();
    // Something other than punctuation must remain.
    bool content_left = false;
    for (int id = 1; id < lo; ++id) {
      if (s.at(id).upos != "PUNCT" && !IsPunctuationOnly(s.at(id).form)) content_left = true;
    }
    if (!content_left) continue;
    const bool is_word_tag = span.size() == 1;

    if (syntactic) {
      auto inside = [&](int id) { return id >= first && id <= last; };
      int external = 0;
      bool ok = true;
      for (int id : span) {
        const Token& t = s.at(id);
        if (t.head == 0) ok = false;
        if (!inside(t.head)) {
          ++external;
          std::string_view rel = t.UniversalDeprel();
          if (rel != "parataxis" && rel != "discourse" && rel != "dep") ok = false;
        }
      }
      for (int id = 1; id <= static_cast<int>(s.size()) && ok; ++id) {
        if (inside(id) || (comma && id == first - 1)) continue;
        if (inside(s.at(id).head) && s.at(id).upos != "PUNCT") ok = false;
      }
      if (!ok || external != 1) continue;
    } else {
      if (!question) continue;
      bool verbal_before = false;
      for (int id = 1; id < lo; ++id) {
        verbal_before |= s.at(id).upos == "VERB" || s.at(id).upos == "AUX";
      }
      if (!verbal_before) continue;
      if (is_word_tag ? !comma : !(comma || TagIsNegated(s, span))) continue;
    }

    // Multiword tokens must not straddle the tag boundary.
    bool straddles = false;
    for (const MwtRange& m : s.mwt) {
      const bool a = m.start >= lo && m.start <= last;
      const bool b = m.end >= lo && m.end <= last;
      if (a != b) straddles = true;
    }
    if (straddles) continue;

    for (int id : trail) {
      if (s.at(id).form.find('?') != std::string::npos) removed.push_back(id);
    }
    return removed;
  }
  return {};
}

Sentence RemoveTokens(const Sentence& s, const std::vector<int>& removed, bool* dropped_q) {
  std::vector<bool> gone(s.size() + 1, false);
  for (int id : removed) gone[id] = true;
  int root = 0;
  for (const Token& t : s.tokens) {
    if (t.head == 0 && !gone[t.id]) {
      root = t.id;
      break;
    }
  }
  std::vector<int> new_id(s.size() + 1, 0);
  int next = 1;
  for (const Token& t : s.tokens) {
    if (!gone[t.id]) new_id[t.id] = next++;
  }
  Sentence out = s;
  out.tokens.clear();
  out.empty_nodes.clear();
  out.mwt.clear();
  *dropped_q = false;
  for (const Token& t : s.tokens) {
    if (gone[t.id]) {
      *dropped_q |= t.form.find('?') != std::string::npos;
      continue;
    }
    Token n = t;
    n.id = new_id[t.id];
    int head = t.head;
    if (head > 0 && gone[head]) head = root;
    n.head = head == 0 ? 0 : new_id[head];
    out.tokens.push_back(std::move(n));
  }
  for (const MwtRange& m : s.mwt) {
    if (gone[m.start]) continue;
    MwtRange r = m;
    r.start = new_id[m.start];
    r.end = new_id[m.end];
    out.mwt.push_back(std::move(r));
  }
  return out;
}

CxnLabel Label(int rule) { return UdRuleLabel(rule); }

}  // namespace

std::string_view CxnLabelName(CxnLabel label) {
  switch (label) {
    case CxnLabel::kFOR: return "FOR";
    case CxnLabel::kFRA: return "FRA";
    case CxnLabel::kQWH: return "QWH";
    case CxnLabel::kQYN: return "QYN";
    case CxnLabel::kCOP: return "COP";
    case CxnLabel::kIMP: return "IMP";
    case CxnLabel::kSPI: return "SPI";
    case CxnLabel::kSPT: return "SPT";
    case CxnLabel::kCOM: return "COM";
    case CxnLabel::kX: return "X";
  }
  return "?";
}

std::optional<CxnLabel> ParseCxnLabel(std::string_view name) {
  for (CxnLabel l : kAllCxnLabels) {
    if (CxnLabelName(l) == name) return l;
  }
  return std::nullopt;
}

std::string_view BackendName(Backend backend) {
  return backend == Backend::kUdRules ? "ud" : "pos";
}

Sentence StripTagQuestion(const Sentence& sentence, std::string* removed) {
  Sentence s = sentence;
  std::vector<std::string> removed_forms;
  bool changed = false;
  while (true) {
    std::vector<int> ids = FindTag(s);
    if (ids.empty()) break;
    for (int id : ids) removed_forms.push_back(s.at(id).form);
    bool dropped_q = false;
    s = RemoveTokens(s, ids, &dropped_q);
    changed = true;
    const bool q_left = std::any_of(s.tokens.begin(), s.tokens.end(), [](const Token& t) {
      return t.form.find('?') != std::string::npos;
    });
    if (dropped_q && !q_left) {
      const bool has_deprels = FullyAnnotated(sentence);
      const bool has_xpos = std::any_of(sentence.tokens.begin(), sentence.tokens.end(),
                                        [](const Token& t) { return t.xpos != "_"; });
      int root = 0;
      for (const Token& t : s.tokens) {
        if (t.head == 0) {
          root = t.id;
          break;
        }
      }
      Token dot;
      dot.id = static_cast<int>(s.size()) + 1;
      dot.form = ".";
      dot.lemma = ".";
      dot.upos = "PUNCT";
      dot.xpos = has_xpos ? "." : "_";
      dot.head = has_deprels ? root : 0;
      dot.deprel = has_deprels ? "punct" : "_";
      s.tokens.push_back(std::move(dot));
    }
  }
  if (changed && sentence.text) {
    s.text = SurfaceText(s);
    s.SetComment("text", *s.text);
  }
  if (removed != nullptr) *removed = Join(removed_forms, " ");
  return s;
}

bool IsExclusionUtterance(const Sentence& sentence) {
  if (sentence.tokens.empty()) return true;
  for (const Token& t : sentence.tokens) {
    if (t.upos == "PUNCT" || IsPunctuationOnly(t.form)) continue;
    if (!kExclusionMarkers.contains(Lower(t.form))) return false;
  }
  return true;
}

CxnLabel UdRuleLabel(int rule) {
  switch (rule) {
    case 1: return CxnLabel::kFOR;
    case 2: return CxnLabel::kFRA;
    case 3: return CxnLabel::kQYN;
    case 4: return CxnLabel::kQWH;
    case 5: return CxnLabel::kCOM;
    case 6: return CxnLabel::kCOP;
    case 7: return CxnLabel::kFRA;
    case 8: return CxnLabel::kIMP;
    case 9: return CxnLabel::kSPI;
    case 10: return CxnLabel::kSPT;
    case 11: return CxnLabel::kSPI;
    case 12: return CxnLabel::kFRA;
  }
  throw std::out_of_range("no such rule: " + std::to_string(rule));
}

bool UdRuleMatches(int rule, const Sentence& sentence, const FormulaicLexicon& lexicon) {
  const Tree t(sentence);
  switch (rule) {
    case 1: return lexicon.Matches(sentence);
    case 2: return IncompleteCopulaOrExclamative(t);
    case 3: return AuxInversion(t);
    case 4: return FrontedWh(t);
    case 5: return Complex(t);
    case 6: return Copular(t);
    case 7: return Fragment(t);
    case 8: return Imperative(t);
    case 9: return EllipticalAux(t);
    case 10: return Transitive(t);
    case 11: return VerbRooted(t);
    case 12: return true;
  }
  throw std::out_of_range("no such rule: " + std::to_string(rule));
}

TaggedUtterance TagUd(const Sentence& sentence, const FormulaicLexicon& lexicon) {
  TaggedUtterance out;
  out.sent_id = sentence.sent_id;
  out.backend = Backend::kUdRules;
  out.speaker_role = sentence.speaker_role;
  out.child_age_months = sentence.child_age_months;
  if (IsExclusionUtterance(sentence)) {
    out.label = CxnLabel::kX;
    out.fired_rule = 0;
    return out;
  }
  if (!FullyAnnotated(sentence)) {
    throw MissingAnnotationError("sentence " + sentence.sent_id +
                                 " lacks UPOS or deprel annotation; use the pos backend");
  }
  for (int rule = 1; rule <= kNumUdRules; ++rule) {
    if (UdRuleMatches(rule, sentence, lexicon)) {
      out.label = Label(rule);
      out.fired_rule = rule;
      return out;
    }
  }
  return out;  // unreachable: rule 12 always matches
}

TaggedUtterance TagPos(const Sentence& sentence, const FormulaicLexicon& lexicon) {
  TaggedUtterance out;
  out.sent_id = sentence.sent_id;
  out.backend = Backend::kPosRules;
  out.speaker_role = sentence.speaker_role;
  out.child_age_months = sentence.child_age_months;
  auto result = [&](CxnLabel label, int rule) {
    out.label = label;
    out.fired_rule = rule;
    return out;
  };
  if (IsExclusionUtterance(sentence)) return result(CxnLabel::kX, 0);
  if (lexicon.Matches(sentence)) return result(CxnLabel::kFOR, 1);

  const Tree t(sentence);
  std::vector<int> words;  // non-punctuation ids
  for (const Token& tok : sentence.tokens) {
    if (tok.upos != "PUNCT" && !IsPunctuationOnly(tok.form)) words.push_back(tok.id);
  }
  const int first = words.empty() ? 0 : words.front();
  const bool question = t.HasQuestionMark();
  if (question && first != 0 && t.IsWh(first)) return result(CxnLabel::kQWH, 2);
  if (question && first != 0 && t.tok(first).upos == "AUX") return result(CxnLabel::kQYN, 3);

  std::vector<int> verbs;
  int n_verb = 0;
  for (int id : words) {
    if (t.IsVerbal(id)) verbs.push_back(id);
    if (t.tok(id).upos == "VERB") ++n_verb;
  }
  if (verbs.empty()) return result(CxnLabel::kFRA, 4);
  if (std::all_of(verbs.begin(), verbs.end(), [&](int id) { return t.IsBe(id); })) {
    return result(CxnLabel::kCOP, 5);
  }
  const bool verb_initial = t.tok(first).upos == "VERB";
  const bool lets = words.size() >= 2 && t.form(first) == "let" &&
                    (t.form(words[1]) == "'s" || t.form(words[1]) == "us");
  const bool dont = words.size() >= 3 && t.lemma(first) == "do" &&
                    t.IsNegation(words[1]) && t.tok(words[2]).upos == "VERB";
  if (verb_initial || lets || dont) return result(CxnLabel::kIMP, 6);
  if (n_verb >= 2 || t.AnyUpos("SCONJ")) return result(CxnLabel::kCOM, 7);
  for (int v : words) {
    if (t.tok(v).upos != "VERB") continue;
    for (int id : words) {
      if (id <= v) continue;
      const std::string& u = t.tok(id).upos;
      if (u == "NOUN" || u == "PRON" || u == "PROPN") return result(CxnLabel::kSPT, 8);
    }
  }
  return result(CxnLabel::kSPI, 9);
}

TagBatch TagTreebank(const Treebank& tb, Backend backend, const FormulaicLexicon& lexicon,
                     int jobs) {
  const size_t n = tb.sentences.size();
  std::vector<std::optional<TaggedUtterance>> results(n);
  std::vector<std::string> errors(n);
  ParallelFor(n, jobs, [&](size_t i) {
    const Sentence& s = tb.sentences[i];
    try {
      if (IsExclusionUtterance(s)) {
        results[i] = backend == Backend::kUdRules ? TagUd(s, lexicon) : TagPos(s, lexicon);
        return;
      }
      std::string removed;
      Sentence stripped = StripTagQuestion(s, &removed);
      TaggedUtterance u = backend == Backend::kUdRules ? TagUd(stripped, lexicon)
                                                       : TagPos(stripped, lexicon);
      if (!removed.empty()) u.stripped_tag_question = removed;
      results[i] = std::move(u);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  TagBatch batch;
  for (size_t i = 0; i < n; ++i) {
    if (results[i]) {
      batch.tagged.push_back(std::move(*results[i]));
    } else {
      batch.failures.push_back({i, tb.sentences[i].sent_id, errors[i]});
    }
  }
  return batch;
}

void WriteTaggedTsv(const std::vector<TaggedUtterance>& tagged, std::ostream& out) {
  for (const TaggedUtterance& u : tagged) {
    out << u.sent_id << '\t' << CxnLabelName(u.label) << '\t' << u.fired_rule << '\t'
        << BackendName(u.backend) << '\n';
  }
}

std::map<std::string, CxnLabel> ReadGoldLabels(std::istream& in) {
  std::map<std::string, CxnLabel> gold;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty() || line.starts_with('#')) continue;
    std::vector<std::string> cols = Split(line, '\t');
    std::optional<CxnLabel> label =
        cols.size() >= 2 ? ParseCxnLabel(Trim(cols[1])) : std::nullopt;
    if (!label) {
      throw FormatError(line_no, "expected 'sent_id TAB label', got '" + line + "'");
    }
    gold[std::string(Trim(cols[0]))] = *label;
  }
  return gold;
}

CxnAccuracy ScoreCxn(const std::vector<TaggedUtterance>& pred,
                     const std::map<std::string, CxnLabel>& gold) {
  if (pred.empty()) throw std::invalid_argument("no tagged utterances to score");
  auto index = [](CxnLabel l) {
    return static_cast<size_t>(std::find(kAllCxnLabels.begin(), kAllCxnLabels.end(), l) -
                               kAllCxnLabels.begin());
  };
  CxnAccuracy acc;
  int64_t correct = 0;
  int64_t cs_n = 0, cs_ok = 0, cds_n = 0, cds_ok = 0;
  for (const TaggedUtterance& u : pred) {
    auto it = gold.find(u.sent_id);
    if (it == gold.end()) throw std::invalid_argument("no gold label for " + u.sent_id);
    const bool ok = it->second == u.label;
    ++acc.n;
    correct += ok;
    ++acc.confusion[index(it->second)][index(u.label)];
    if (u.speaker_role == SpeakerRole::kCS) {
      ++cs_n;
      cs_ok += ok;
    } else if (u.speaker_role == SpeakerRole::kCDS) {
      ++cds_n;
      cds_ok += ok;
    }
  }
  acc.overall = 100.0 * static_cast<double>(correct) / static_cast<double>(acc.n);
  for (CxnLabel l : kAllCxnLabels) {
    const auto& row = acc.confusion[index(l)];
    int64_t total = 0;
    for (int64_t c : row) total += c;
    acc.per_category[l] =
        total ? std::optional(100.0 * static_cast<double>(row[index(l)]) / total)
              : std::nullopt;
  }
  if (cs_n) acc.cs = 100.0 * static_cast<double>(cs_ok) / static_cast<double>(cs_n);
  if (cds_n) acc.cds = 100.0 * static_cast<double>(cds_ok) / static_cast<double>(cds_n);
  return acc;
}

}  // namespace cait
