// Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "builders.h"
#include "cait/casestudy.h"
#include "cait/cli.h"
#include "cait/conllu.h"
#include "cait/cxntag.h"
#include "cait/eval.h"
#include "cait/lint.h"
#include "cait/parser.h"
#include "cait/stats.h"
#include "cait/text.h"
#include "synthetic.h"

namespace cait {
namespace {

namespace fs = std::filesystem;
using testing::DataPath;
using testing::ReadFile;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

Treebank Load(const std::string& name) { return ReadConlluString(ReadFile(DataPath(name))); }

std::vector<std::string> FixtureFiles() {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(CAIT_TEST_DATA_DIR)) {
    if (e.path().extension() == ".conllu") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string F(double v, int digits = 4) { return FormatFixed(v, digits); }

Outcome MetricOracle() {
  const auto start = Clock::now();
  Treebank fixture = Load("cxn_hand100.conllu");
  Treebank gold, pred;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> rate(0.0, 0.5);
  for (int copy = 0; copy < 2; ++copy) {
    for (const Sentence& s : fixture.sentences) {
      Sentence g = s;
      g.sent_id += "-" + std::to_string(copy);
      gold.sentences.push_back(g);
      pred.sentences.push_back(testing::Perturb(g, rate(rng), rng));
    }
  }
  // Concatenate every token of every sentence and count directly.
  int64_t n = 0, head = 0, las = 0, em = 0, uem = 0;
  for (size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& gt = gold.sentences[i].tokens;
    const auto& pt = pred.sentences[i].tokens;
    bool all_head = true, all_las = true;
    for (size_t j = 0; j < gt.size(); ++j) {
      ++n;
      bool h = gt[j].head == pt[j].head;
      bool l = h && gt[j].deprel == pt[j].deprel;
      head += h;
      las += l;
      all_head = all_head && h;
      all_las = all_las && l;
    }
    em += all_las;
    uem += all_head;
  }
  const int64_t sentences = static_cast<int64_t>(gold.sentences.size());
  FullEvaluation ev = Evaluate(gold, pred, {1, DeprelMatch::kExact, 4});
  int64_t sum_n = 0, sum_head = 0, sum_las = 0, sum_em = 0, sum_uem = 0;
  for (const auto& s : ev.report.per_sentence) {
    sum_n += s.n_scored;
    sum_head += s.n_head_correct;
    sum_las += s.n_las_correct;
    sum_em += s.exact;
    sum_uem += s.unlabeled_exact;
  }
  const double secs = Seconds(start);
  bool ok = sum_n == n && sum_head == head && sum_las == las && sum_em == em &&
            sum_uem == uem && ev.report.uas == 100.0 * head / n &&
            ev.report.las == 100.0 * las / n && ev.report.em == 100.0 * em / sentences &&
            ev.report.uem == 100.0 * uem / sentences && secs < 5.0;
  return {ok, std::to_string(sentences) + " sentences, " + std::to_string(n) +
                  " tokens, LAS " + F(ev.report.las) + " UAS " + F(ev.report.uas) + " EM " +
                  F(ev.report.em) + " UEM " + F(ev.report.uem) + ", " + F(secs, 2) + " s"};
}

Outcome RunningExample() {
  Treebank gold = Load("fig1_gold.conllu");
  Treebank pred = Load("fig1_pred.conllu");
  SentencePairScore s = ScoreSentence(gold.sentences[0], pred.sentences[0]);
  bool ok = s.n_scored == 8 && s.Uas() == 62.5 && s.Las() == 50.0;
  return {ok, "expected UAS 62.5 LAS 50.0 on 8 tokens, got UAS " + F(s.Uas(), 1) + " LAS " +
                  F(s.Las(), 1) + " on " + std::to_string(s.n_scored)};
}

double TailByQuadrature(double t, double df) {
  auto pdf = [df](double x) {
    double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
               std::sqrt(df * M_PI);
    return c * std::pow(1 + x * x / df, -(df + 1) / 2);
  };
  const int n = 200000;
  const double h = t / n;
  double s = pdf(0) + pdf(t);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * pdf(i * h);
  return 1.0 - 2.0 * s * h / 3.0;
}

Outcome TTestOracle() {
  std::vector<double> a = {2, 4, 6}, b = {1, 2, 3};
  TTestResult r = PairedTTest(a, b);
  const double oracle = TailByQuadrature(r.t_stat, r.df);
  TTestResult same = PairedTTest(a, a);
  bool ok = std::fabs(r.t_stat - 3.464101615) < 1e-9 && std::fabs(r.p_value - oracle) < 1e-6 &&
            same.p_value == 1.0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "t %.10f, p %.10f vs quadrature %.10f, identical p %.1f",
                r.t_stat, r.p_value, oracle, same.p_value);
  return {ok, buf};
}

Outcome SchemeFidelity() {
  const FormulaicLexicon& lex = FormulaicLexicon::BuiltIn();
  int correct = 0, total = 0;
  std::string misses;
  for (const char* base : {"exemplars", "exemplars_extra"}) {
    Treebank tb = Load(std::string(base) + ".conllu");
    std::istringstream gin(ReadFile(DataPath(std::string(base) + "_gold.tsv")));
    auto gold = ReadGoldLabels(gin);
    for (Backend backend : {Backend::kUdRules, Backend::kPosRules}) {
      TagBatch batch = TagTreebank(tb, backend, lex);
      total += static_cast<int>(tb.sentences.size());
      for (const auto& u : batch.tagged) {
        if (u.label == gold.at(u.sent_id)) {
          ++correct;
        } else {
          misses += " " + u.sent_id + "/" + std::string(BackendName(backend));
        }
      }
    }
  }
  std::string stripped;
  for (const Sentence& s : Load("exemplars_extra.conllu").sentences) {
    if (s.sent_id == "thats-good-tag") stripped = SurfaceText(StripTagQuestion(s));
  }
  bool ok = correct == total && stripped == "that's good .";
  return {ok, std::to_string(correct) + "/" + std::to_string(total) +
                  " exemplar taggings correct across both backends, tag question stripped to \"" +
                  stripped + "\"" + misses};
}

int RunCliToString(const std::vector<std::string>& args, std::string* out) {
  std::istringstream in;
  std::ostringstream o, e;
  int code = cli::Run(args, in, o, e);
  *out = o.str();
  return code;
}

Outcome DecisionProcedure() {
  const FormulaicLexicon& lex = FormulaicLexicon::BuiltIn();
  Treebank tb = Load("cxn_hand100.conllu");
  int checked = 0, violations = 0;
  for (const Sentence& raw : tb.sentences) {
    Sentence s = StripTagQuestion(raw);
    if (IsExclusionUtterance(s)) continue;
    TaggedUtterance u = TagUd(s, lex);
    ++checked;
    bool ok = UdRuleMatches(u.fired_rule, s, lex) && u.label == UdRuleLabel(u.fired_rule);
    for (int r = 1; r < u.fired_rule; ++r) ok = ok && !UdRuleMatches(r, s, lex);
    violations += !ok;
  }
  bool identical = true;
  for (const char* backend : {"ud", "pos"}) {
    std::string one, eight;
    int c1 = RunCliToString({"--jobs", "1", "tag-cxn", "--backend", backend, "--input",
                             DataPath("cxn_hand100.conllu")},
                            &one);
    int c8 = RunCliToString({"--jobs", "8", "tag-cxn", "--backend", backend, "--input",
                             DataPath("cxn_hand100.conllu")},
                            &eight);
    identical = identical && c1 == 0 && c8 == 0 && !one.empty() && one == eight;
  }
  return {violations == 0 && checked > 0 && identical,
          std::to_string(checked) + " utterances checked, " + std::to_string(violations) +
              " first-match violations, jobs 1 vs 8 " +
              (identical ? "byte-identical" : "differ")};
}

Outcome LintFixedPoint() {
  Treebank tb = testing::LintCorpus(100, 7, 100, 5);
  LintResult poss = LintPossDet(tb);
  LintResult nn = LintNnNmod(tb);
  const fs::path dir = fs::temp_directory_path() / "cait_acceptance_lint";
  fs::create_directories(dir);
  const std::string in = (dir / "corpus.conllu").string();
  const std::string fixed = (dir / "fixed.conllu").string();
  {
    std::ofstream f(in);
    WriteConllu(tb, f);
  }
  std::string out;
  int code = RunCliToString({"lint", "--input", in, "--fix", fixed, "--tsv", "-"}, &out);
  Treebank after = ReadConlluString(ReadFile(fixed));
  size_t remaining = LintPossDet(after).findings.size() + LintNnNmod(after).findings.size();
  std::string relint;
  RunCliToString({"lint", "--input", fixed, "--tsv", "-"}, &relint);
  const bool relint_empty =
      relint == "sent_id\ttoken_id\trule\tgold_deprel\tsuggested_deprel\tcontext\n";
  bool ok = code == 0 && poss.candidates == 100 && nn.candidates == 100 && poss.rate() == 0.07 &&
            nn.rate() == 0.05 && remaining == 0 && relint_empty;
  return {ok, "POSS_AS_DET " + F(poss.rate(), 2) + ", NN_AS_NMOD " + F(nn.rate(), 2) +
                  ", findings after fix " + std::to_string(remaining)};
}

Outcome LearningEffect() {
  const auto start = Clock::now();
  int wins = 0;
  std::string detail;
  for (uint64_t seed : {1, 2, 3}) {
    Treebank all = testing::InDomainTreebank(600, seed);
    Treebank train, test;
    for (size_t i = 0; i < all.sentences.size(); ++i) {
      (i % 5 == 4 ? test : train).sentences.push_back(all.sentences[i]);
    }
    ParserModel in_domain = TrainParser(train, {10, seed});
    ParserModel out_domain =
        TrainParser(testing::OutOfDomainTreebank(static_cast<int>(train.sentences.size()),
                                                 seed + 100),
                    {10, seed});
    ParserModel zero = ZeroParserModel(in_domain.labels);
    auto las = [&](const ParserModel& m) {
      return Evaluate(test, ParseTreebank(m, test), {1, DeprelMatch::kExact, 1}).report.las;
    };
    double l_in = las(in_domain), l_out = las(out_domain), l_zero = las(zero);
    wins += l_in > l_out && l_in > l_zero;
    detail += " seed " + std::to_string(seed) + ": " + F(l_in, 1) + " vs OOD " + F(l_out, 1) +
              " vs zero " + F(l_zero, 1) + ";";
  }
  const double secs = Seconds(start);

  Treebank fuzz_train = testing::InDomainTreebank(200, 77);
  ParserModel model = TrainParser(fuzz_train, {3, 77});
  std::mt19937_64 rng(99);
  int clean = 0;
  for (int i = 0; i < 1000; ++i) {
    Sentence s = testing::RandomTokens(rng, 1 + static_cast<int>(rng() % 30),
                                       "fuzz-" + std::to_string(i));
    clean += Validate(Parse(model, s)).empty();
  }
  bool ok = wins == 3 && secs < 60.0 && clean == 1000;
  return {ok, std::to_string(wins) + "/3 seeds," + detail + " " + F(secs, 1) + " s; " +
                  std::to_string(clean) + "/1000 fuzz parses valid"};
}

Outcome OracleSoundness() {
  int checked = 0, failures = 0;
  bool fig1_checked = false;
  for (const std::string& path : FixtureFiles()) {
    for (const Sentence& s : ReadConlluString(ReadFile(path)).sentences) {
      std::vector<int> heads;
      for (const Token& t : s.tokens) heads.push_back(t.head);
      if (!Validate(s).empty() || !IsProjective(heads)) continue;
      ParserState state(static_cast<int>(s.size()));
      for (const Transition& t : OracleSequence(s)) state.Apply(t);
      bool ok = state.Terminal();
      for (const Token& t : s.tokens) {
        if (t.head == 0) {
          ok = ok && state.heads[t.id] == -1;
        } else {
          ok = ok && state.heads[t.id] == t.head && state.deprels[t.id] == t.deprel;
        }
      }
      ++checked;
      failures += !ok;
      if (path.ends_with("fig1_gold.conllu")) fig1_checked = ok;
    }
  }
  return {failures == 0 && fig1_checked && checked > 0,
          std::to_string(checked) + " projective fixture sentences replayed, " +
              std::to_string(failures) + " mismatches, running example " +
              (fig1_checked ? "ok" : "not reconstructed")};
}

Outcome RoundTrip() {
  int files = 0, identical = 0;
  for (const std::string& path : FixtureFiles()) {
    std::string text = ReadFile(path);
    ++files;
    identical += ToConllu(ReadConlluString(text)) == text;
  }
  std::mt19937_64 rng(4242);
  const LabelMap& labels = LabelMap::ClearNlpToUd();
  int idempotent = 0, valid = 0;
  for (int i = 0; i < 1000; ++i) {
    Sentence bad = testing::RandomMalformed(rng, "m" + std::to_string(i));
    Sentence once = Normalize(bad, labels);
    Sentence twice = Normalize(once, labels);
    valid += Validate(once).empty();
    idempotent += twice.tokens == once.tokens && twice.mwt == once.mwt;
  }
  bool ok = files > 0 && identical == files && idempotent == 1000 && valid == 1000;
  return {ok, std::to_string(identical) + "/" + std::to_string(files) +
                  " fixture files byte-identical, " + std::to_string(idempotent) +
                  "/1000 idempotent, " + std::to_string(valid) + "/1000 validate"};
}

Outcome CaseStudyPartition() {
  const FormulaicLexicon& lex = FormulaicLexicon::BuiltIn();
  std::vector<Treebank> inputs;
  for (const std::string& path : FixtureFiles()) {
    inputs.push_back(ReadConlluString(ReadFile(path)));
  }
  inputs.push_back(testing::InDomainTreebank(1000, 8));
  int corpora = 0, partitions = 0, bins = 0, sums_ok = 0;
  double worst = 0;
  for (const Treebank& tb : inputs) {
    TagBatch batch = TagTreebank(tb, Backend::kUdRules, lex, 2);
    Binning b = BinByAge(batch.tagged, 3);
    int64_t total = b.unbinned + static_cast<int64_t>(batch.failures.size());
    for (const auto& d : b.bins) total += d.n_utterances;
    ++corpora;
    partitions += total == static_cast<int64_t>(tb.sentences.size());
    for (const auto& d : b.bins) {
      auto p = ClausalProportions(d, false);
      if (p.empty()) continue;
      ++bins;
      double sum = 0;
      for (const auto& [label, v] : p) sum += v;
      worst = std::max(worst, std::fabs(sum - 1.0));
      sums_ok += std::fabs(sum - 1.0) <= 1e-9;
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", worst);
  return {partitions == corpora && sums_ok == bins,
          std::to_string(partitions) + "/" + std::to_string(corpora) + " corpora partition, " +
              std::to_string(sums_ok) + "/" + std::to_string(bins) +
              " clausal bins sum to 1 (worst deviation " + buf + ")"};
}

}  // namespace
}  // namespace cait

int main() {
  using cait::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"metric-oracle-equivalence", cait::MetricOracle},
      {"running-example-scores", cait::RunningExample},
      {"ttest-oracle", cait::TTestOracle},
      {"construction-scheme-fidelity", cait::SchemeFidelity},
      {"decision-procedure-soundness", cait::DecisionProcedure},
      {"lint-fixed-point", cait::LintFixedPoint},
      {"baseline-learning-effect", cait::LearningEffect},
      {"oracle-soundness", cait::OracleSoundness},
      {"round-trip", cait::RoundTrip},
      {"case-study-partition", cait::CaseStudyPartition},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
