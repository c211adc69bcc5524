// Dependency-parse evaluation: attachment scores, exact match, tag accuracy,
// speaker and length slices, per-label error rates, confusion matrices.
//
// Punctuation is scored. Length bins use the number of non-PUNCT words.
// Aggregates are computed from integer counts, so they do not depend on
// sentence order or on how scoring work was split across threads.

#ifndef CAIT_EVAL_H_
#define CAIT_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cait/conllu.h"
#include "cait/stats.h"

namespace cait {

class AlignmentError : public std::runtime_error {
 public:
  AlignmentError(std::string sent_id, int position, const std::string& what);
  const std::string& sent_id() const { return sent_id_; }
  // 1-based word position of the first divergence (0 for count mismatch).
  int position() const { return position_; }

 private:
  std::string sent_id_;
  int position_;
};

enum class DeprelMatch {
  kExact,          // "nmod:poss" != "nmod"
  kUniversalOnly,  // subtypes ignored
};

// Pairs syntactic words of gold and pred by position (0-based indices into
// Sentence::tokens). Forms are compared after trimming and NFC.
std::vector<std::pair<int, int>> Align(const Sentence& gold, const Sentence& pred);

struct SentencePairScore {
  std::string sent_id;
  int n_scored = 0;
  int n_head_correct = 0;
  int n_las_correct = 0;
  bool exact = false;
  bool unlabeled_exact = false;
  SpeakerRole speaker_role = SpeakerRole::kOther;
  int length_nopunct = 0;

  double Uas() const { return n_scored ? 100.0 * n_head_correct / n_scored : 0.0; }
  double Las() const { return n_scored ? 100.0 * n_las_correct / n_scored : 0.0; }
};

SentencePairScore ScoreSentence(const Sentence& gold, const Sentence& pred,
                                DeprelMatch match = DeprelMatch::kExact);

bool DeprelEqual(std::string_view a, std::string_view b, DeprelMatch match);

// "<=3", "4-6", "7-10", ">10".
std::string_view LengthBin(int length_nopunct);

struct SliceScore {
  std::optional<double> las;
  std::optional<double> uas;
  int64_t n_sentences = 0;
  int64_t n_tokens = 0;
};

struct EvalReport {
  double las = 0;
  double uas = 0;
  double em = 0;
  double uem = 0;
  std::optional<double> upos_acc;
  std::optional<double> xpos_acc;
  std::vector<SentencePairScore> per_sentence;
  // Keys: "CS", "CDS", "OTHER", the four length bins, and "CS <=3" style
  // speaker x length crossings.
  std::map<std::string, SliceScore> slices;
};

// Throws std::invalid_argument on empty input.
EvalReport Aggregate(const std::vector<SentencePairScore>& scores);

// Sentences are paired by position; differing counts or differing non-empty
// sent_ids raise AlignmentError.
void CheckSentencePairing(const Treebank& gold, const Treebank& pred);

// Scores every sentence pair, using up to `jobs` threads.
std::vector<SentencePairScore> ScoreTreebank(const Treebank& gold, const Treebank& pred,
                                             DeprelMatch match = DeprelMatch::kExact,
                                             int jobs = 1);

enum class TagField { kUpos, kXpos };

double TagAccuracy(const Treebank& gold, const Treebank& pred, TagField field);

struct LabelError {
  int64_t gold_count = 0;
  int64_t errors = 0;
  double rate = 0;
};

// Error = wrong head or wrong label. Only labels with at least `min_gold`
// gold tokens are reported.
std::map<std::string, LabelError> PerLabelErrorRates(
    const Treebank& gold, const Treebank& pred, int64_t min_gold = 100,
    DeprelMatch match = DeprelMatch::kExact);

enum class ConfusionScope {
  kLabelOnly,  // every token
  kLasErrors,  // tokens with a wrong head or label
};

enum class Normalization { kRaw, kRowNormalized };

struct ConfusionMatrix {
  std::vector<std::string> labels;  // sorted; rows gold, columns predicted
  std::vector<std::vector<int64_t>> counts;
  // counts as doubles (kRaw) or divided by row sums (kRowNormalized).
  std::vector<std::vector<double>> values;
  Normalization normalization = Normalization::kRaw;

  int Index(std::string_view label) const;  // -1 if absent
  ConfusionMatrix RowNormalized() const;
  // Copy over a superset of labels, zero-padded.
  ConfusionMatrix Padded(const std::vector<std::string>& labels) const;
};

ConfusionMatrix Confusion(const Treebank& gold, const Treebank& pred,
                          ConfusionScope scope);

struct DeltaMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;
};

// a - b over the union of labels. Both inputs must be row-normalized.
DeltaMatrix ConfusionDelta(const ConfusionMatrix& a, const ConfusionMatrix& b);

// Header row and column of labels; cells with 4 fractional digits.
std::string MatrixToTsv(const std::vector<std::string>& labels,
                        const std::vector<std::vector<double>>& values);

struct EvalOptions {
  int64_t min_gold = 100;
  DeprelMatch match = DeprelMatch::kExact;
  int jobs = 1;
};

struct FullEvaluation {
  EvalReport report;
  std::map<std::string, LabelError> per_label_error;
};

// Scores, aggregates and fills tag accuracies for one gold/pred pair.
FullEvaluation Evaluate(const Treebank& gold, const Treebank& pred,
                        const EvalOptions& options = {});

struct SignificanceTests {
  TTestResult uas;
  TTestResult las;
};

// Paired t-tests of per-sentence UAS and LAS (system a minus system b).
SignificanceTests CompareSystems(const std::vector<SentencePairScore>& a,
                                 const std::vector<SentencePairScore>& b);

}  // namespace cait

#endif  // CAIT_EVAL_H_
