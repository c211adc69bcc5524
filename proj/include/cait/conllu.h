// CoNLL-U data model, reader/writer, tree validation and repair.
//
// Sentences carry CHILDES-style metadata read from comment lines:
//   # sent_id = ...
//   # text = ...
//   # speaker = CHI | MOT | ...       (mapped to CS / CDS / OTHER)
//   # child_age = 2;06.15             (CHAT age, years;months.days)
//   # age_months = 30.5
// Comment lines are kept verbatim so that writing a sentence reproduces the
// input bytes. Multiword-token ranges and empty nodes are preserved but are
// not syntactic words: they never appear in Sentence::tokens.

#ifndef CAIT_CONLLU_H_
#define CAIT_CONLLU_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cait {

enum class SpeakerRole { kCS, kCDS, kOther };
enum class Split { kTrain, kDev, kTest, kUnsplit };
enum class Provenance { kGold, kSilver, kPredicted };
enum class Strictness { kStrict, kLenient };

std::string_view SpeakerRoleName(SpeakerRole role);

// Attribute/value pairs, kept sorted case-insensitively by attribute.
using Features = std::vector<std::pair<std::string, std::string>>;

struct Token {
  int id = 0;
  std::string form;
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";
  Features feats;
  int head = 0;
  std::string deprel = "_";
  std::string deps = "_";
  std::string misc = "_";

  // Empty view when the attribute is absent.
  std::string_view Feature(std::string_view name) const;
  bool HasFeature(std::string_view name, std::string_view value) const;
  // "nmod" for "nmod:poss".
  std::string_view UniversalDeprel() const;

  bool operator==(const Token&) const = default;
};

struct MwtRange {
  int start = 0;
  int end = 0;
  std::string form;
  // Columns 3..10 of the range line, verbatim.
  std::string rest = "_\t_\t_\t_\t_\t_\t_\t_";

  bool operator==(const MwtRange&) const = default;
};

// Empty node line (decimal id), kept verbatim; `after` is the integer part.
struct EmptyNode {
  int after = 0;
  std::string line;

  bool operator==(const EmptyNode&) const = default;
};

struct Diagnostic {
  enum class Kind {
    kIdSequence,
    kHeadRange,
    kSelfLoop,
    kNoRoot,
    kMultipleRoots,
    kCycle,
    kRootLabel,
    kMwtRange,
    kDuplicateSentId,
    kRepair,
  };
  Kind kind;
  std::string sent_id;
  std::vector<int> token_ids;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

struct Sentence {
  std::string sent_id;
  SpeakerRole speaker_role = SpeakerRole::kOther;
  std::optional<double> child_age_months;
  std::optional<std::string> text;
  std::vector<Token> tokens;
  std::vector<MwtRange> mwt;
  std::vector<EmptyNode> empty_nodes;
  // Raw comment lines including the leading '#'.
  std::vector<std::string> comments;
  // Lenient-read problems and normalize() repairs. Not serialized.
  std::vector<Diagnostic> diagnostics;

  size_t size() const { return tokens.size(); }
  // 1-based access.
  const Token& at(int id) const { return tokens.at(static_cast<size_t>(id - 1)); }
  Token& at(int id) { return tokens.at(static_cast<size_t>(id - 1)); }

  // Replaces the "# key = value" comment line, or appends one.
  void SetComment(std::string_view key, std::string_view value);
};

struct Treebank {
  std::vector<Sentence> sentences;
  Split split = Split::kUnsplit;
  Provenance provenance = Provenance::kGold;
};

// Speaker code -> role. Codes are matched case-insensitively.
class RoleMap {
 public:
  // CHI -> CS; MOT, FAT, ADU, INV, caregiver, adult -> CDS.
  RoleMap();
  // Two-column TSV: code TAB {CS, CDS, OTHER}. Entries override defaults.
  static RoleMap FromTsv(std::istream& in);

  void Set(std::string_view code, SpeakerRole role);
  SpeakerRole Lookup(std::string_view code) const;

 private:
  std::map<std::string, SpeakerRole> roles_;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string sent_id, const std::string& what);
  const std::string& sent_id() const { return sent_id_; }

 private:
  std::string sent_id_;
};

struct ReadOptions {
  Strictness strictness = Strictness::kStrict;
  RoleMap roles;
  Split split = Split::kUnsplit;
  Provenance provenance = Provenance::kGold;
};

Treebank ReadConllu(std::istream& in, const ReadOptions& options = {});
Treebank ReadConlluString(std::string_view text, const ReadOptions& options = {});

void WriteConllu(const Treebank& tb, std::ostream& out);
void WriteSentence(const Sentence& sentence, std::ostream& out);
std::string ToConllu(const Treebank& tb);

// Re-derives sent_id, speaker, age and text from the comment lines.
void ExtractMetadata(Sentence& sentence, const RoleMap& roles);

// "2;06.15" -> months. Returns nullopt on malformed input.
std::optional<double> ParseChatAge(std::string_view age);

// Feature column text ("_" or "A=B|C=D") to sorted pairs; throws
// std::invalid_argument on duplicate or malformed attributes.
Features ParseFeatures(std::string_view column);
std::string FormatFeatures(const Features& feats);

// Space-joined surface forms, using the multiword-token form where a range
// covers the words.
std::string SurfaceText(const Sentence& sentence);

// Empty iff the sentence is a well-formed single-rooted tree.
std::vector<Diagnostic> Validate(const Sentence& sentence);

// Source deprel -> UD deprel. The table is closed under composition, so
// applying it twice equals applying it once.
class LabelMap {
 public:
  LabelMap() = default;
  // Two-column TSV: source_label TAB ud_label. Blank and '#' lines skipped.
  static LabelMap FromTsv(std::istream& in);
  // ClearNLP (spaCy English) labels to UD v2.
  static const LabelMap& ClearNlpToUd();

  void Add(std::string from, std::string to);
  std::string_view Map(std::string_view label) const;
  size_t size() const { return map_.size(); }

 private:
  void Close();
  std::map<std::string, std::string, std::less<>> map_;
};

// Relabels through `labels`, then repairs the tree so that Validate() is
// empty. Repairs are recorded in the returned sentence's diagnostics.
Sentence Normalize(const Sentence& sentence, const LabelMap& labels);

}  // namespace cait

#endif  // CAIT_CONLLU_H_
