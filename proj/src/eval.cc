#include "cait/eval.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "cait/parallel.h"
#include "cait/text.h"

namespace cait {
namespace {

struct Counts {
  int64_t sentences = 0;
  int64_t tokens = 0;
  int64_t head = 0;
  int64_t las = 0;

  void Add(const SentencePairScore& s) {
    ++sentences;
    tokens += s.n_scored;
    head += s.n_head_correct;
    las += s.n_las_correct;
  }
  SliceScore ToSlice() const {
    SliceScore out;
    out.n_sentences = sentences;
    out.n_tokens = tokens;
    if (tokens > 0) {
      out.las = 100.0 * static_cast<double>(las) / static_cast<double>(tokens);
      out.uas = 100.0 * static_cast<double>(head) / static_cast<double>(tokens);
    }
    return out;
  }
};

bool LasCorrect(const Token& g, const Token& p, DeprelMatch match) {
  return g.head == p.head && DeprelEqual(g.deprel, p.deprel, match);
}

// Calls fn(gold_token, pred_token) for every aligned word of every sentence.
template <typename Fn>
void ForEachAlignedToken(const Treebank& gold, const Treebank& pred, Fn&& fn) {
  CheckSentencePairing(gold, pred);
  for (size_t i = 0; i < gold.sentences.size(); ++i) {
    const Sentence& g = gold.sentences[i];
    const Sentence& p = pred.sentences[i];
    for (auto [gi, pi] : Align(g, p)) fn(g.tokens[gi], p.tokens[pi]);
  }
}

}  // namespace

AlignmentError::AlignmentError(std::string sent_id, int position,
                               const std::string& what)
    : std::runtime_error("sentence " + sent_id + ": " + what),
      sent_id_(std::move(sent_id)),
      position_(position) {}

std::vector<std::pair<int, int>> Align(const Sentence& gold, const Sentence& pred) {
  if (gold.tokens.size() != pred.tokens.size()) {
    throw AlignmentError(gold.sent_id, 0,
                         "word count mismatch (gold " +
                             std::to_string(gold.tokens.size()) + ", pred " +
                             std::to_string(pred.tokens.size()) + ")");
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(gold.tokens.size());
  for (size_t i = 0; i < gold.tokens.size(); ++i) {
    const std::string& gf = gold.tokens[i].form;
    const std::string& pf = pred.tokens[i].form;
    if (gf != pf && NfcNormalize(Trim(gf)) != NfcNormalize(Trim(pf))) {
      throw AlignmentError(gold.sent_id, static_cast<int>(i + 1),
                           "form mismatch at word " + std::to_string(i + 1) +
                               " ('" + gf + "' vs '" + pf + "')");
    }
    pairs.emplace_back(static_cast<int>(i), static_cast<int>(i));
  }
  return pairs;
}

bool DeprelEqual(std::string_view a, std::string_view b, DeprelMatch match) {
  if (match == DeprelMatch::kExact) return a == b;
  return a.substr(0, a.find(':')) == b.substr(0, b.find(':'));
}

SentencePairScore ScoreSentence(const Sentence& gold, const Sentence& pred,
                                DeprelMatch match) {
  SentencePairScore s;
  s.sent_id = gold.sent_id;
  s.speaker_role = gold.speaker_role;
  for (auto [gi, pi] : Align(gold, pred)) {
    const Token& g = gold.tokens[gi];
    const Token& p = pred.tokens[pi];
    ++s.n_scored;
    if (g.head == p.head) {
      ++s.n_head_correct;
      if (DeprelEqual(g.deprel, p.deprel, match)) ++s.n_las_correct;
    }
    if (g.upos != "PUNCT") ++s.length_nopunct;
  }
  s.exact = s.n_las_correct == s.n_scored;
  s.unlabeled_exact = s.n_head_correct == s.n_scored;
  return s;
}

std::string_view LengthBin(int length_nopunct) {
  if (length_nopunct <= 3) return "<=3";
  if (length_nopunct <= 6) return "4-6";
  if (length_nopunct <= 10) return "7-10";
  return ">10";
}

EvalReport Aggregate(const std::vector<SentencePairScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("aggregate: no sentences");
  Counts total;
  int64_t exact = 0;
  int64_t uexact = 0;
  std::map<std::string, Counts> slices;
  for (const char* role : {"CS", "CDS", "OTHER"}) slices[role];
  for (const char* bin : {"<=3", "4-6", "7-10", ">10"}) {
    slices[bin];
    slices[std::string("CS ") + bin];
    slices[std::string("CDS ") + bin];
  }
  for (const SentencePairScore& s : scores) {
    total.Add(s);
    exact += s.exact;
    uexact += s.unlabeled_exact;
    std::string role(SpeakerRoleName(s.speaker_role));
    std::string bin(LengthBin(s.length_nopunct));
    slices[role].Add(s);
    slices[bin].Add(s);
    if (s.speaker_role != SpeakerRole::kOther) slices[role + " " + bin].Add(s);
  }
  EvalReport r;
  const double n = static_cast<double>(scores.size());
  const double tokens = static_cast<double>(total.tokens);
  r.uas = total.tokens ? 100.0 * static_cast<double>(total.head) / tokens : 0.0;
  r.las = total.tokens ? 100.0 * static_cast<double>(total.las) / tokens : 0.0;
  r.em = 100.0 * static_cast<double>(exact) / n;
  r.uem = 100.0 * static_cast<double>(uexact) / n;
  r.per_sentence = scores;
  for (const auto& [name, c] : slices) r.slices[name] = c.ToSlice();
  return r;
}

void CheckSentencePairing(const Treebank& gold, const Treebank& pred) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw AlignmentError("*", 0,
                         "sentence count mismatch (gold " +
                             std::to_string(gold.sentences.size()) + ", pred " +
                             std::to_string(pred.sentences.size()) + ")");
  }
  for (size_t i = 0; i < gold.sentences.size(); ++i) {
    const std::string& g = gold.sentences[i].sent_id;
    const std::string& p = pred.sentences[i].sent_id;
    if (g != p) {
      throw AlignmentError(g, 0, "paired with pred sentence " + p +
                                     " at position " + std::to_string(i + 1));
    }
  }
}

std::vector<SentencePairScore> ScoreTreebank(const Treebank& gold, const Treebank& pred,
                                             DeprelMatch match, int jobs) {
  CheckSentencePairing(gold, pred);
  std::vector<SentencePairScore> out(gold.sentences.size());
  ParallelFor(out.size(), jobs, [&](size_t i) {
    out[i] = ScoreSentence(gold.sentences[i], pred.sentences[i], match);
  });
  return out;
}

double TagAccuracy(const Treebank& gold, const Treebank& pred, TagField field) {
  int64_t total = 0;
  int64_t correct = 0;
  ForEachAlignedToken(gold, pred, [&](const Token& g, const Token& p) {
    ++total;
    if (field == TagField::kUpos ? g.upos == p.upos : g.xpos == p.xpos) ++correct;
  });
  if (total == 0) throw std::invalid_argument("tag accuracy: no tokens");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::map<std::string, LabelError> PerLabelErrorRates(const Treebank& gold,
                                                     const Treebank& pred,
                                                     int64_t min_gold,
                                                     DeprelMatch match) {
  if (min_gold < 1) throw std::invalid_argument("min_gold must be >= 1");
  std::map<std::string, LabelError> all;
  ForEachAlignedToken(gold, pred, [&](const Token& g, const Token& p) {
    LabelError& e = all[g.deprel];
    ++e.gold_count;
    if (!LasCorrect(g, p, match)) ++e.errors;
  });
  std::map<std::string, LabelError> out;
  for (auto& [label, e] : all) {
    if (e.gold_count < min_gold) continue;
    e.rate = static_cast<double>(e.errors) / static_cast<double>(e.gold_count);
    out.emplace(label, e);
  }
  return out;
}

int ConfusionMatrix::Index(std::string_view label) const {
  auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label) return -1;
  return static_cast<int>(it - labels.begin());
}

ConfusionMatrix ConfusionMatrix::RowNormalized() const {
  ConfusionMatrix out = *this;
  out.normalization = Normalization::kRowNormalized;
  for (size_t r = 0; r < counts.size(); ++r) {
    int64_t sum = 0;
    for (int64_t c : counts[r]) sum += c;
    for (size_t c = 0; c < counts[r].size(); ++c) {
      out.values[r][c] = sum ? static_cast<double>(counts[r][c]) / static_cast<double>(sum) : 0.0;
    }
  }
  return out;
}

ConfusionMatrix ConfusionMatrix::Padded(const std::vector<std::string>& all) const {
  ConfusionMatrix out;
  out.labels = all;
  out.normalization = normalization;
  const size_t k = all.size();
  out.counts.assign(k, std::vector<int64_t>(k, 0));
  out.values.assign(k, std::vector<double>(k, 0.0));
  for (size_t r = 0; r < labels.size(); ++r) {
    int rr = out.Index(labels[r]);
    if (rr < 0) throw std::invalid_argument("padding must be a superset of labels");
    for (size_t c = 0; c < labels.size(); ++c) {
      int cc = out.Index(labels[c]);
      out.counts[rr][cc] = counts[r][c];
      out.values[rr][cc] = values[r][c];
    }
  }
  return out;
}

ConfusionMatrix Confusion(const Treebank& gold, const Treebank& pred,
                          ConfusionScope scope) {
  std::vector<std::pair<std::string, std::string>> cells;
  std::set<std::string> label_set;
  ForEachAlignedToken(gold, pred, [&](const Token& g, const Token& p) {
    if (scope == ConfusionScope::kLasErrors && LasCorrect(g, p, DeprelMatch::kExact)) {
      return;
    }
    cells.emplace_back(g.deprel, p.deprel);
    label_set.insert(g.deprel);
    label_set.insert(p.deprel);
  });
  ConfusionMatrix m;
  m.labels.assign(label_set.begin(), label_set.end());
  const size_t k = m.labels.size();
  m.counts.assign(k, std::vector<int64_t>(k, 0));
  for (const auto& [g, p] : cells) ++m.counts[m.Index(g)][m.Index(p)];
  m.values.assign(k, std::vector<double>(k, 0.0));
  for (size_t r = 0; r < k; ++r) {
    for (size_t c = 0; c < k; ++c) m.values[r][c] = static_cast<double>(m.counts[r][c]);
  }
  return m;
}

DeltaMatrix ConfusionDelta(const ConfusionMatrix& a, const ConfusionMatrix& b) {
  if (a.normalization != Normalization::kRowNormalized ||
      b.normalization != Normalization::kRowNormalized) {
    throw std::invalid_argument("confusion delta needs row-normalized matrices");
  }
  std::set<std::string> all(a.labels.begin(), a.labels.end());
  all.insert(b.labels.begin(), b.labels.end());
  std::vector<std::string> labels(all.begin(), all.end());
  ConfusionMatrix pa = a.Padded(labels);
  ConfusionMatrix pb = b.Padded(labels);
  DeltaMatrix d;
  d.labels = labels;
  d.values.assign(labels.size(), std::vector<double>(labels.size(), 0.0));
  for (size_t r = 0; r < labels.size(); ++r) {
    for (size_t c = 0; c < labels.size(); ++c) {
      d.values[r][c] = pa.values[r][c] - pb.values[r][c];
    }
  }
  return d;
}

std::string MatrixToTsv(const std::vector<std::string>& labels,
                        const std::vector<std::vector<double>>& values) {
  std::ostringstream out;
  out << "gold\\pred";
  for (const std::string& l : labels) out << '\t' << l;
  out << '\n';
  for (size_t r = 0; r < labels.size(); ++r) {
    out << labels[r];
    for (double v : values[r]) {
      // Avoid printing "-0.0000".
      std::string cell = FormatFixed(v, 4);
      if (cell == "-0.0000") cell = "0.0000";
      out << '\t' << cell;
    }
    out << '\n';
  }
  return out.str();
}

FullEvaluation Evaluate(const Treebank& gold, const Treebank& pred,
                        const EvalOptions& options) {
  FullEvaluation out;
  out.report = Aggregate(ScoreTreebank(gold, pred, options.match, options.jobs));
  auto annotated = [](const Treebank& tb, TagField field) {
    for (const Sentence& s : tb.sentences) {
      for (const Token& t : s.tokens) {
        if ((field == TagField::kUpos ? t.upos : t.xpos) != "_") return true;
      }
    }
    return false;
  };
  for (TagField f : {TagField::kUpos, TagField::kXpos}) {
    if (!annotated(gold, f)) continue;
    double acc = TagAccuracy(gold, pred, f);
    (f == TagField::kUpos ? out.report.upos_acc : out.report.xpos_acc) = acc;
  }
  out.per_label_error = PerLabelErrorRates(gold, pred, options.min_gold, options.match);
  return out;
}

SignificanceTests CompareSystems(const std::vector<SentencePairScore>& a,
                                 const std::vector<SentencePairScore>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("compare systems: sentence count mismatch");
  }
  std::vector<double> ua, ub, la, lb;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].sent_id != b[i].sent_id) {
      throw std::invalid_argument("compare systems: sentence " + a[i].sent_id +
                                  " paired with " + b[i].sent_id);
    }
    ua.push_back(a[i].Uas());
    ub.push_back(b[i].Uas());
    la.push_back(a[i].Las());
    lb.push_back(b[i].Las());
  }
  return {PairedTTest(ua, ub), PairedTTest(la, lb)};
}

}  // namespace cait
