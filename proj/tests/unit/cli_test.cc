#include "cait/cli.h"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "builders.h"
#include "cait/conllu.h"
#include "cait/lint.h"
#include "synthetic.h"

namespace cait {
namespace {

using testing::DataPath;
using testing::ReadFile;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result RunCli(const std::vector<std::string>& args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  int code = cli::Run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string Temp(const std::string& name) { return ::testing::TempDir() + "/" + name; }

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

TEST(CliTest, HelpAndUsageErrors) {
  Result help = RunCli({"--help"});
  EXPECT_EQ(help.code, cli::kExitOk);
  EXPECT_NE(help.out.find("tag-cxn"), std::string::npos);
  EXPECT_EQ(RunCli({}).code, cli::kExitUsage);
  EXPECT_EQ(RunCli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(RunCli({"eval", "--gold", "/no/such/file", "--pred", "-"}).code,
            cli::kExitUsage);
  EXPECT_EQ(RunCli({"tag-cxn", "--input", "-", "--backend", "neural"}).code,
            cli::kExitUsage);
  EXPECT_EQ(RunCli({"--jobs", "0", "validate", "--input", "-"}).code, cli::kExitUsage);
}

TEST(CliTest, EvalJsonReport) {
  Result r = RunCli({"eval", "--gold", DataPath("fig1_gold.conllu"), "--pred",
                     DataPath("fig1_pred.conllu"), "--min-gold", "1", "--json", "-"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["las"].get<double>(), 37.5);
  EXPECT_DOUBLE_EQ(j["uas"].get<double>(), 37.5);
  EXPECT_DOUBLE_EQ(j["em"].get<double>(), 0.0);
  EXPECT_TRUE(j["ttest"].is_null());
  EXPECT_TRUE(j["xpos_acc"].is_null());
  EXPECT_TRUE(j["slices"]["CS"]["las"].is_null());
  EXPECT_EQ(j["slices"]["CDS"]["n_tokens"].get<int>(), 8);
  EXPECT_DOUBLE_EQ(j["per_label_error"]["nsubj"]["rate"].get<double>(), 0.5);
}

TEST(CliTest, EvalTableBaselineAndMatrices) {
  const std::string tsv = Temp("conf.tsv");
  const std::string delta = Temp("delta.tsv");
  Result r = RunCli({"eval", "--gold", DataPath("appendix_gold.conllu"), "--pred",
                     DataPath("appendix_pred.conllu"), "--baseline",
                     DataPath("appendix_gold.conllu"), "--tsv", tsv, "--delta-tsv", delta});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("LAS"), std::string::npos);
  std::string m = ReadFile(tsv);
  EXPECT_TRUE(m.starts_with("gold\\pred\t"));
  EXPECT_NE(ReadFile(delta).find("-1.0000"), std::string::npos);
}

TEST(CliTest, EvalMismatchIsDataError) {
  Result r = RunCli({"eval", "--gold", DataPath("fig1_gold.conllu"), "--pred",
                     DataPath("appendix_pred.conllu")});
  EXPECT_EQ(r.code, cli::kExitDataError);
  EXPECT_NE(r.err.find("cait: error"), std::string::npos);
}

TEST(CliTest, TagCxnDeterministicAcrossJobs) {
  const std::string input = DataPath("cxn_hand100.conllu");
  Result one = RunCli({"--jobs", "1", "tag-cxn", "--input", input});
  Result eight = RunCli({"--jobs", "8", "tag-cxn", "--input", input});
  ASSERT_EQ(one.code, cli::kExitOk);
  EXPECT_EQ(one.out, eight.out);
  EXPECT_TRUE(one.out.starts_with("h001\tFOR\t1\tud\n"));
}

TEST(CliTest, TagCxnGoldReportAndStdin) {
  Result r = RunCli({"tag-cxn", "--input", "-", "--backend", "pos", "--gold",
                     DataPath("exemplars_gold.tsv")},
                    ReadFile(DataPath("exemplars.conllu")));
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("# accuracy\t100.00\tn=9"), std::string::npos);
}

TEST(CliTest, LintFindingsAndFix) {
  const std::string corpus = Temp("lint.conllu");
  WriteFile(corpus, ToConllu(testing::LintCorpus(100, 7, 100, 5)));
  const std::string fixed = Temp("fixed.conllu");
  Result r = RunCli({"lint", "--input", corpus, "--tsv", "-", "--fix", fixed});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  int rows = 0;
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_EQ(rows, 13);
  Treebank after = ReadConlluString(ReadFile(fixed));
  EXPECT_TRUE(LintPossDet(after).findings.empty());
  EXPECT_TRUE(LintNnNmod(after).findings.empty());
  Result summary = RunCli({"lint", "--input", corpus});
  EXPECT_NE(summary.out.find("POSS_AS_DET"), std::string::npos);
}

TEST(CliTest, CaseStudyCsv) {
  Result r = RunCli({"case-study", "--input", DataPath("cxn_hand100.conllu"), "--width", "6"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(r.out.starts_with("bin_start,speaker,label,count,proportion,n_utterances\n"));
  EXPECT_EQ(r.out.find(",FOR,"), std::string::npos);
  Result all = RunCli({"case-study", "--input", DataPath("cxn_hand100.conllu"),
                       "--include-nonclausal"});
  EXPECT_NE(all.out.find(",FOR,"), std::string::npos);
}

TEST(CliTest, TrainParseTagPipeline) {
  const std::string train = Temp("train.conllu");
  WriteFile(train, ToConllu(testing::InDomainTreebank(150, 12)));
  const std::string pmodel = Temp("parser.model");
  const std::string tmodel = Temp("tagger.model");
  ASSERT_EQ(RunCli({"train", "--kind", "parser", "--input", train, "--model", pmodel,
                    "--epochs", "3"})
                .code,
            cli::kExitOk);
  ASSERT_EQ(RunCli({"train", "--kind", "tagger", "--input", train, "--model", tmodel,
                    "--epochs", "3"})
                .code,
            cli::kExitOk);
  const std::string test = ToConllu(testing::InDomainTreebank(20, 13));
  Result parsed = RunCli({"parse", "--model", pmodel, "--input", "-"}, test);
  ASSERT_EQ(parsed.code, cli::kExitOk) << parsed.err;
  Treebank tb = ReadConlluString(parsed.out);
  EXPECT_EQ(tb.sentences.size(), 20u);
  Result tagged = RunCli({"tag", "--model", tmodel, "--input", "-"}, test);
  ASSERT_EQ(tagged.code, cli::kExitOk) << tagged.err;
  Result bad = RunCli({"parse", "--model", DataPath("fig1_gold.conllu"), "--input", "-"}, test);
  EXPECT_EQ(bad.code, cli::kExitDataError);
}

TEST(CliTest, ValidateAndNormalize) {
  const std::string broken =
      "# sent_id = b\n"
      "1\ta\ta\tX\t_\t_\t2\tnsubj\t_\t_\n"
      "2\tb\tb\tX\t_\t_\t2\tROOT\t_\t_\n"
      "3\tc\tc\tX\t_\t_\t2\tdobj\t_\t_\n\n";
  Result v = RunCli({"validate", "--input", "-"}, broken);
  EXPECT_EQ(v.code, cli::kExitDataError);
  EXPECT_NE(v.out.find("b\tno-root"), std::string::npos);
  Result n = RunCli({"normalize", "--input", "-"}, broken);
  ASSERT_EQ(n.code, cli::kExitOk);
  EXPECT_EQ(RunCli({"validate", "--input", "-"}, n.out).code, cli::kExitOk);
  Result again = RunCli({"normalize", "--input", "-"}, n.out);
  EXPECT_EQ(again.out, n.out);
  EXPECT_NE(n.out.find("\tobj\t"), std::string::npos);
  Result raw = RunCli({"normalize", "--no-label-map", "--input", "-"}, broken);
  EXPECT_NE(raw.out.find("\tdobj\t"), std::string::npos);
}

TEST(CliTest, LogLevelSilencesInfo) {
  Result r = RunCli({"--log-level", "error", "validate", "--input",
                     DataPath("exemplars.conllu")});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_EQ(r.err, "");
}

}  // namespace
}  // namespace cait
