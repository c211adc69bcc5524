// Seeded synthetic treebanks and corruptions for property tests.

#ifndef CAIT_TESTS_SUPPORT_SYNTHETIC_H_
#define CAIT_TESTS_SUPPORT_SYNTHETIC_H_

#include <cstdint>
#include <random>

#include "cait/conllu.h"

namespace cait::testing {

// Short conversational utterances: vocatives, discourse particles,
// questions, imperatives, copulas. Carries speaker and age metadata.
Treebank InDomainTreebank(int n, uint64_t seed);

// Longer written-register sentences: determiners, prepositional modifiers,
// passives, clausal complements.
Treebank OutOfDomainTreebank(int n, uint64_t seed);

// Random forms and UPOS, no tree.
Sentence RandomTokens(std::mt19937_64& rng, int n_tokens, const std::string& sent_id);

// Copy of `gold` where each token's head and/or deprel is corrupted with
// probability `rate`. The result need not be a tree.
Sentence Perturb(const Sentence& gold, double rate, std::mt19937_64& rng);

// Arbitrary heads (self-loops, cycles, out of range, several roots) and
// labels, including ClearNLP labels and misplaced "root".
Sentence RandomMalformed(std::mt19937_64& rng, const std::string& sent_id);

// Utterances with `poss` possessive pronouns, `poss_as_det` of them attached
// as det, and `nn` prenominal noun modifiers, `nn_as_nmod` of them attached
// as nmod. All other attachments are the expected UD ones.
Treebank LintCorpus(int poss, int poss_as_det, int nn, int nn_as_nmod);

}  // namespace cait::testing

#endif  // CAIT_TESTS_SUPPORT_SYNTHETIC_H_
