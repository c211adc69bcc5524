// Utterance-level construction tagging.
//
// Two backends share one label set. UD_RULES walks a fixed twelve-step
// decision list over the dependency tree and returns the first step that
// matches; POS_RULES uses only UPOS tags and word order. Utterance-final tag
// questions ("..., isn't it?") are removed before either backend runs.

#ifndef CAIT_CXNTAG_H_
#define CAIT_CXNTAG_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cait/conllu.h"

namespace cait {

enum class CxnLabel { kFOR, kFRA, kQWH, kQYN, kCOP, kIMP, kSPI, kSPT, kCOM, kX };

inline constexpr std::array<CxnLabel, 10> kAllCxnLabels = {
    CxnLabel::kFOR, CxnLabel::kFRA, CxnLabel::kQWH, CxnLabel::kQYN, CxnLabel::kCOP,
    CxnLabel::kIMP, CxnLabel::kSPI, CxnLabel::kSPT, CxnLabel::kCOM, CxnLabel::kX};

std::string_view CxnLabelName(CxnLabel label);
std::optional<CxnLabel> ParseCxnLabel(std::string_view name);

// Exact-match set of formulaic utterances, compared after Normalize().
class FormulaicLexicon {
 public:
  // The seed list also shipped as data/formulaic_lexicon.txt.
  static const FormulaicLexicon& BuiltIn();
  // One pattern per line; blank lines and '#' comments skipped. Throws
  // std::invalid_argument if no pattern remains.
  static FormulaicLexicon FromStream(std::istream& in);
  static FormulaicLexicon FromFile(const std::string& path);
  // path from flag, else $CAIT_LEXICON, else BuiltIn().
  static FormulaicLexicon Resolve(const std::optional<std::string>& flag_path);

  // Case-folds, maps '-' to a space, drops punctuation except apostrophes,
  // collapses whitespace.
  static std::string Normalize(std::string_view utterance);
  // Joins token forms (clitics such as 's and n't attach to the preceding
  // word) and normalizes the result.
  static std::string NormalizeSentence(const Sentence& sentence);

  bool Contains(std::string_view normalized) const;
  bool Matches(const Sentence& sentence) const;
  const std::set<std::string>& patterns() const { return patterns_; }

 private:
  std::set<std::string> patterns_;
};

enum class Backend { kUdRules, kPosRules };
std::string_view BackendName(Backend backend);

struct TaggedUtterance {
  std::string sent_id;
  CxnLabel label = CxnLabel::kFRA;
  Backend backend = Backend::kUdRules;
  // 1..12 for UD_RULES, 1..9 for POS_RULES, 0 for the X exclusion check.
  int fired_rule = 0;
  std::optional<std::string> stripped_tag_question;
  SpeakerRole speaker_role = SpeakerRole::kOther;
  std::optional<double> child_age_months;

  bool operator==(const TaggedUtterance&) const = default;
};

// Raised by TagUd when UPOS or deprel columns are unannotated.
class MissingAnnotationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Removes utterance-final tag questions until none remains. If `removed` is
// given it receives the removed surface text (empty when nothing changed).
Sentence StripTagQuestion(const Sentence& sentence, std::string* removed = nullptr);

// Only transcription markers (xxx, yyy, www) and punctuation.
bool IsExclusionUtterance(const Sentence& sentence);

inline constexpr int kNumUdRules = 12;

// Predicate of a single decision step (1-based), evaluated in isolation.
bool UdRuleMatches(int rule, const Sentence& sentence, const FormulaicLexicon& lexicon);
CxnLabel UdRuleLabel(int rule);

TaggedUtterance TagUd(const Sentence& sentence, const FormulaicLexicon& lexicon);
TaggedUtterance TagPos(const Sentence& sentence, const FormulaicLexicon& lexicon);

struct TagFailure {
  size_t index = 0;
  std::string sent_id;
  std::string message;
};

struct TagBatch {
  std::vector<TaggedUtterance> tagged;  // input order, failures omitted
  std::vector<TagFailure> failures;
};

// Strips tag questions, then tags every sentence with `backend`.
TagBatch TagTreebank(const Treebank& tb, Backend backend, const FormulaicLexicon& lexicon,
                     int jobs = 1);

void WriteTaggedTsv(const std::vector<TaggedUtterance>& tagged, std::ostream& out);

// "sent_id TAB label" lines; blank and '#' lines skipped.
std::map<std::string, CxnLabel> ReadGoldLabels(std::istream& in);

// Accuracies and recalls are percentages.
struct CxnAccuracy {
  int64_t n = 0;
  double overall = 0;
  // Recall per gold category; absent categories are nullopt.
  std::map<CxnLabel, std::optional<double>> per_category;
  // Rows gold, columns predicted, both in kAllCxnLabels order.
  std::array<std::array<int64_t, 10>, 10> confusion{};
  std::optional<double> cs;
  std::optional<double> cds;
};

// Throws std::invalid_argument when a predicted sent_id has no gold label or
// when `pred` is empty.
CxnAccuracy ScoreCxn(const std::vector<TaggedUtterance>& pred,
                     const std::map<std::string, CxnLabel>& gold);

}  // namespace cait

#endif  // CAIT_CXNTAG_H_
