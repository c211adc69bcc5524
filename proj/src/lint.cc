#include "cait/lint.h"

#include <algorithm>
#include <map>
#include <ostream>
#include <tuple>

#include "cait/parallel.h"

namespace cait {
namespace {

struct SentenceLint {
  std::vector<LintFinding> findings;
  int64_t candidates = 0;
};

std::string Context(const Sentence& s, int id) {
  std::string out;
  const int lo = std::max(1, id - 2);
  const int hi = std::min(static_cast<int>(s.size()), id + 2);
  for (int i = lo; i <= hi; ++i) {
    if (!out.empty()) out += ' ';
    out += i == id ? "[" + s.at(i).form + "]" : s.at(i).form;
  }
  return out;
}

bool IsNominal(const Token& t) { return t.upos == "NOUN" || t.upos == "PROPN"; }

bool HasCaseChild(const Sentence& s, int id) {
  return std::any_of(s.tokens.begin(), s.tokens.end(), [&](const Token& t) {
    return t.head == id && t.UniversalDeprel() == "case";
  });
}

SentenceLint PossDet(const Sentence& s) {
  SentenceLint out;
  for (const Token& t : s.tokens) {
    if (t.upos != "PRON" || !t.HasFeature("Poss", "Yes")) continue;
    if (t.deprel == "nmod:poss") {
      ++out.candidates;
    } else if (t.deprel == "det") {
      ++out.candidates;
      out.findings.push_back({s.sent_id, t.id, LintRule::kPossAsDet, t.deprel, "nmod:poss",
                              Context(s, t.id)});
    }
  }
  return out;
}

SentenceLint NnNmod(const Sentence& s) {
  SentenceLint out;
  for (const Token& t : s.tokens) {
    if (!IsNominal(t) || t.head != t.id + 1 || !IsNominal(s.at(t.head))) continue;
    if (t.deprel != "nmod" && t.deprel != "compound") continue;
    if (HasCaseChild(s, t.id)) continue;
    ++out.candidates;
    if (t.deprel == "nmod") {
      out.findings.push_back({s.sent_id, t.id, LintRule::kNnAsNmod, t.deprel, "compound",
                              Context(s, t.id)});
    }
  }
  return out;
}

template <typename Fn>
LintResult Run(const Treebank& tb, int jobs, Fn&& fn) {
  std::vector<SentenceLint> per(tb.sentences.size());
  ParallelFor(per.size(), jobs, [&](size_t i) { per[i] = fn(tb.sentences[i]); });
  LintResult result;
  for (SentenceLint& p : per) {
    result.candidates += p.candidates;
    for (LintFinding& f : p.findings) result.findings.push_back(std::move(f));
  }
  std::stable_sort(result.findings.begin(), result.findings.end(),
                   [](const LintFinding& a, const LintFinding& b) {
                     return std::tie(a.sent_id, a.token_id) < std::tie(b.sent_id, b.token_id);
                   });
  return result;
}

}  // namespace

std::string_view LintRuleName(LintRule rule) {
  return rule == LintRule::kPossAsDet ? "POSS_AS_DET" : "NN_AS_NMOD";
}

double LintResult::rate() const {
  if (candidates == 0) return 0.0;
  return static_cast<double>(findings.size()) / static_cast<double>(candidates);
}

LintResult LintPossDet(const Treebank& tb, int jobs) { return Run(tb, jobs, PossDet); }

LintResult LintNnNmod(const Treebank& tb, int jobs) { return Run(tb, jobs, NnNmod); }

Treebank ApplyFixes(const Treebank& tb, const std::vector<LintFinding>& findings) {
  std::map<std::string, std::vector<const LintFinding*>> by_sentence;
  for (const LintFinding& f : findings) by_sentence[f.sent_id].push_back(&f);
  Treebank out = tb;
  for (Sentence& s : out.sentences) {
    auto it = by_sentence.find(s.sent_id);
    if (it == by_sentence.end()) continue;
    for (const LintFinding* f : it->second) {
      if (f->token_id < 1 || f->token_id > static_cast<int>(s.size())) continue;
      Token& t = s.at(f->token_id);
      if (t.deprel == f->gold_deprel) t.deprel = f->suggested_deprel;
    }
  }
  return out;
}

void WriteFindingsTsv(const std::vector<LintFinding>& findings, std::ostream& out) {
  out << "sent_id\ttoken_id\trule\tgold_deprel\tsuggested_deprel\tcontext\n";
  for (const LintFinding& f : findings) {
    out << f.sent_id << '\t' << f.token_id << '\t' << LintRuleName(f.rule) << '\t'
        << f.gold_deprel << '\t' << f.suggested_deprel << '\t' << f.context << '\n';
  }
}

}  // namespace cait
