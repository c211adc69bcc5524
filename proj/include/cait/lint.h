// Gold-annotation consistency checks for two known error patterns:
// possessive pronouns labelled det instead of nmod:poss, and prenominal
// noun modifiers labelled nmod instead of compound. Rates are token-level.

#ifndef CAIT_LINT_H_
#define CAIT_LINT_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cait/conllu.h"

namespace cait {

enum class LintRule { kPossAsDet, kNnAsNmod };

std::string_view LintRuleName(LintRule rule);

struct LintFinding {
  std::string sent_id;
  int token_id = 0;
  LintRule rule = LintRule::kPossAsDet;
  std::string gold_deprel;
  std::string suggested_deprel;
  // Forms within two words either side; the flagged word is bracketed.
  std::string context;

  bool operator==(const LintFinding&) const = default;
};

struct LintResult {
  std::vector<LintFinding> findings;  // sorted by (sent_id, token_id)
  int64_t candidates = 0;

  // findings / candidates, or 0 when there are no candidates.
  double rate() const;
};

// PRON with Poss=Yes attached as det. Candidates: such pronouns attached as
// det or nmod:poss.
LintResult LintPossDet(const Treebank& tb, int jobs = 1);

// NOUN/PROPN immediately before a NOUN/PROPN head, with no case dependent,
// attached as nmod. Candidates: the same configuration attached as nmod or
// compound.
LintResult LintNnNmod(const Treebank& tb, int jobs = 1);

// Rewrites each flagged token's deprel to the suggestion.
Treebank ApplyFixes(const Treebank& tb, const std::vector<LintFinding>& findings);

void WriteFindingsTsv(const std::vector<LintFinding>& findings, std::ostream& out);

}  // namespace cait

#endif  // CAIT_LINT_H_
