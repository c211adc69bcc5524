#include "cait/eval.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "builders.h"
#include "cait/conllu.h"
#include "synthetic.h"

namespace cait {
namespace {

using testing::Bank;
using testing::Compact;
using testing::DataPath;
using testing::ReadFile;

Treebank Load(const char* name) { return ReadConlluString(ReadFile(DataPath(name))); }

TEST(ScoreSentenceTest, RunningExampleCountedByHand) {
  // Tokens 4 to 8 all receive a different head in the prediction.
  Treebank gold = Load("fig1_gold.conllu");
  Treebank pred = Load("fig1_pred.conllu");
  SentencePairScore s = ScoreSentence(gold.sentences[0], pred.sentences[0]);
  EXPECT_EQ(s.n_scored, 8);
  EXPECT_EQ(s.n_head_correct, 3);
  EXPECT_EQ(s.n_las_correct, 3);
  EXPECT_DOUBLE_EQ(s.Uas(), 37.5);
  EXPECT_DOUBLE_EQ(s.Las(), 37.5);
  EXPECT_FALSE(s.exact);
  EXPECT_EQ(s.length_nopunct, 7);
  EXPECT_EQ(s.speaker_role, SpeakerRole::kCDS);
}

TEST(ScoreSentenceTest, PunctuationIsScored) {
  Sentence g = Compact("hi/INTJ/0/root ./PUNCT/1/punct");
  Sentence p = Compact("hi/INTJ/0/root ./PUNCT/1/dep");
  SentencePairScore s = ScoreSentence(g, p);
  EXPECT_EQ(s.n_scored, 2);
  EXPECT_EQ(s.n_las_correct, 1);
  EXPECT_TRUE(s.unlabeled_exact);
  EXPECT_FALSE(s.exact);
}

TEST(DeprelEqualTest, Subtypes) {
  EXPECT_FALSE(DeprelEqual("nmod:poss", "nmod", DeprelMatch::kExact));
  EXPECT_TRUE(DeprelEqual("nmod:poss", "nmod", DeprelMatch::kUniversalOnly));
  EXPECT_TRUE(DeprelEqual("obl:tmod", "obl:npmod", DeprelMatch::kUniversalOnly));
  EXPECT_FALSE(DeprelEqual("det", "nmod", DeprelMatch::kUniversalOnly));
}

TEST(AlignTest, NfcEquivalentFormsAlign) {
  Sentence g = Compact("caf\xC3\xA9/NOUN/0/root");
  Sentence p = Compact("cafe\xCC\x81/NOUN/0/root");
  EXPECT_EQ(Align(g, p).size(), 1u);
}

TEST(AlignTest, MismatchReportsPosition) {
  Sentence g = Compact("a/X/0/root b/X/1/dep c/X/1/dep", "x");
  Sentence p = Compact("a/X/0/root B/X/1/dep c/X/1/dep", "x");
  try {
    Align(g, p);
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_EQ(e.sent_id(), "x");
    EXPECT_EQ(e.position(), 2);
  }
  Sentence shorter = Compact("a/X/0/root b/X/1/dep", "x");
  EXPECT_THROW(Align(g, shorter), AlignmentError);
}

TEST(PairingTest, SentIdsAndCounts) {
  Treebank a = Bank({Compact("a/X/0/root", "1"), Compact("a/X/0/root", "2")});
  Treebank b = Bank({Compact("a/X/0/root", "1"), Compact("a/X/0/root", "3")});
  EXPECT_THROW(CheckSentencePairing(a, b), AlignmentError);
  Treebank c = Bank({Compact("a/X/0/root", "1")});
  EXPECT_THROW(CheckSentencePairing(a, c), AlignmentError);
  EXPECT_NO_THROW(CheckSentencePairing(a, a));
}

TEST(AggregateTest, MicroAveragesCounts) {
  // 5/5 heads, 5/5 labels; then 3/5 heads with 2 of them labelled right.
  std::vector<SentencePairScore> scores(2);
  scores[0] = {"a", 5, 5, 5, true, true, SpeakerRole::kCS, 4};
  scores[1] = {"b", 5, 3, 2, false, false, SpeakerRole::kCDS, 5};
  EvalReport r = Aggregate(scores);
  EXPECT_DOUBLE_EQ(r.uas, 80.0);
  EXPECT_DOUBLE_EQ(r.las, 70.0);
  EXPECT_DOUBLE_EQ(r.em, 50.0);
  EXPECT_DOUBLE_EQ(r.uem, 50.0);
  EXPECT_DOUBLE_EQ(*r.slices.at("CS").las, 100.0);
  EXPECT_DOUBLE_EQ(*r.slices.at("CDS").uas, 60.0);
  EXPECT_EQ(r.slices.at("4-6").n_sentences, 2);
  EXPECT_EQ(r.slices.at("4-6").n_tokens, 10);
  EXPECT_FALSE(r.slices.at("OTHER").las.has_value());
  EXPECT_FALSE(r.slices.at(">10").las.has_value());
  EXPECT_DOUBLE_EQ(*r.slices.at("CDS 4-6").las, 40.0);
  EXPECT_THROW(Aggregate({}), std::invalid_argument);
}

TEST(LengthBinTest, Boundaries) {
  EXPECT_EQ(LengthBin(0), "<=3");
  EXPECT_EQ(LengthBin(3), "<=3");
  EXPECT_EQ(LengthBin(4), "4-6");
  EXPECT_EQ(LengthBin(6), "4-6");
  EXPECT_EQ(LengthBin(7), "7-10");
  EXPECT_EQ(LengthBin(10), "7-10");
  EXPECT_EQ(LengthBin(11), ">10");
}

TEST(ScoreTreebankTest, IndependentOfJobs) {
  Treebank gold = testing::InDomainTreebank(300, 3);
  std::mt19937_64 rng(11);
  Treebank pred = gold;
  for (Sentence& s : pred.sentences) s = testing::Perturb(s, 0.2, rng);
  auto one = ScoreTreebank(gold, pred, DeprelMatch::kExact, 1);
  auto many = ScoreTreebank(gold, pred, DeprelMatch::kExact, 8);
  ASSERT_EQ(one.size(), many.size());
  for (size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].n_las_correct, many[i].n_las_correct);
    EXPECT_EQ(one[i].sent_id, many[i].sent_id);
  }
}

TEST(TagAccuracyTest, CountsUpos) {
  Treebank g = Bank({Compact("a/DET/2/det b/NOUN/0/root")});
  Treebank p = Bank({Compact("a/PRON/2/det b/NOUN/0/root")});
  EXPECT_DOUBLE_EQ(TagAccuracy(g, p, TagField::kUpos), 50.0);
}

TEST(PerLabelErrorTest, RunningExample) {
  Treebank gold = Load("fig1_gold.conllu");
  Treebank pred = Load("fig1_pred.conllu");
  auto rates = PerLabelErrorRates(gold, pred, 1);
  EXPECT_EQ(rates.at("nsubj").gold_count, 2);
  EXPECT_EQ(rates.at("nsubj").errors, 1);
  EXPECT_DOUBLE_EQ(rates.at("nsubj").rate, 0.5);
  EXPECT_DOUBLE_EQ(rates.at("cop").rate, 0.0);
  EXPECT_DOUBLE_EQ(rates.at("root").rate, 1.0);
  EXPECT_DOUBLE_EQ(rates.at("punct").rate, 1.0);
  EXPECT_EQ(PerLabelErrorRates(gold, pred, 2).size(), 1u);
  EXPECT_THROW(PerLabelErrorRates(gold, pred, 0), std::invalid_argument);
}

TEST(ConfusionTest, LabelOnlyAndLasErrors) {
  Treebank gold = Load("fig1_gold.conllu");
  Treebank pred = Load("fig1_pred.conllu");
  ConfusionMatrix m = Confusion(gold, pred, ConfusionScope::kLabelOnly);
  EXPECT_EQ(m.labels, (std::vector<std::string>{"advmod", "case", "cop", "nsubj", "obl",
                                                 "parataxis", "punct", "root"}));
  const int nsubj = m.Index("nsubj");
  EXPECT_EQ(m.counts[nsubj][nsubj], 1);
  EXPECT_EQ(m.counts[nsubj][m.Index("root")], 1);
  EXPECT_EQ(m.counts[m.Index("parataxis")][m.Index("cop")], 1);
  ConfusionMatrix norm = m.RowNormalized();
  EXPECT_DOUBLE_EQ(norm.values[nsubj][nsubj], 0.5);
  EXPECT_EQ(m.Index("xcomp"), -1);

  ConfusionMatrix errs = Confusion(gold, pred, ConfusionScope::kLasErrors);
  int64_t total = 0;
  for (const auto& row : errs.counts) {
    for (int64_t c : row) total += c;
  }
  EXPECT_EQ(total, 5);
}

TEST(ConfusionTest, VocativeMisreadAsSubject) {
  Treebank gold = Load("appendix_gold.conllu");
  Treebank pred = Load("appendix_pred.conllu");
  ConfusionMatrix m = Confusion(gold, pred, ConfusionScope::kLabelOnly);
  EXPECT_GE(m.counts[m.Index("vocative")][m.Index("nsubj")], 1);
}

TEST(DeltaTest, RowNormalizedDifference) {
  Treebank gold = Bank({Compact("a/X/0/root b/X/1/nsubj c/X/1/obj")});
  Treebank p1 = Bank({Compact("a/X/0/root b/X/1/obj c/X/1/obj")});
  Treebank p2 = gold;
  ConfusionMatrix a = Confusion(gold, p1, ConfusionScope::kLabelOnly).RowNormalized();
  ConfusionMatrix b = Confusion(gold, p2, ConfusionScope::kLabelOnly).RowNormalized();
  DeltaMatrix d = ConfusionDelta(a, b);
  ASSERT_EQ(d.labels, (std::vector<std::string>{"nsubj", "obj", "root"}));
  EXPECT_DOUBLE_EQ(d.values[0][0], -1.0);
  EXPECT_DOUBLE_EQ(d.values[0][1], 1.0);
  EXPECT_DOUBLE_EQ(d.values[1][1], 0.0);
  EXPECT_THROW(ConfusionDelta(Confusion(gold, p1, ConfusionScope::kLabelOnly), b),
               std::invalid_argument);
}

TEST(MatrixTsvTest, Format) {
  std::string tsv = MatrixToTsv({"a", "b"}, {{0.25, -0.0}, {1.0 / 3, 1}});
  EXPECT_EQ(tsv, "gold\\pred\ta\tb\na\t0.2500\t0.0000\nb\t0.3333\t1.0000\n");
}

TEST(EvaluateTest, TagAccuracyOnlyWhenAnnotated) {
  Treebank gold = Load("fig1_gold.conllu");
  FullEvaluation e = Evaluate(gold, gold, {1, DeprelMatch::kExact, 1});
  EXPECT_DOUBLE_EQ(e.report.las, 100.0);
  ASSERT_TRUE(e.report.upos_acc.has_value());
  EXPECT_FALSE(e.report.xpos_acc.has_value());
}

TEST(CompareSystemsTest, UsesPerSentenceScores) {
  std::vector<SentencePairScore> a(3), b(3);
  int heads_a[] = {4, 3, 5};
  int heads_b[] = {3, 1, 2};
  for (int i = 0; i < 3; ++i) {
    a[i] = {std::to_string(i), 5, heads_a[i], heads_a[i], false, false, SpeakerRole::kCS, 5};
    b[i] = {std::to_string(i), 5, heads_b[i], heads_b[i], false, false, SpeakerRole::kCS, 5};
  }
  // Differences 20, 40, 60 points: t = 40 / (20 / sqrt 3).
  SignificanceTests t = CompareSystems(a, b);
  EXPECT_NEAR(t.uas.t_stat, 2 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(t.las.p_value, 0.07417990022744858, 1e-12);
  b[1].sent_id = "z";
  EXPECT_THROW(CompareSystems(a, b), std::invalid_argument);
}

}  // namespace
}  // namespace cait
