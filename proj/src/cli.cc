#include "cait/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <tuple>

#include "cait/casestudy.h"
#include "cait/conllu.h"
#include "cait/cxntag.h"
#include "cait/eval.h"
#include "cait/lint.h"
#include "cait/parallel.h"
#include "cait/parser.h"
#include "cait/tagger.h"
#include "cait/text.h"

namespace cait::cli {
namespace {

using Json = nlohmann::ordered_json;

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}
  void set_level(Level l) { level_ = l; }
  void Error(const std::string& m) { Emit(Level::kError, "error", m); }
  void Warn(const std::string& m) { Emit(Level::kWarn, "warn", m); }
  void Info(const std::string& m) { Emit(Level::kInfo, "info", m); }

 private:
  void Emit(Level l, const char* tag, const std::string& m) {
    if (l <= level_) err_ << "cait: " << tag << ": " << m << '\n';
  }
  std::ostream& err_;
  Level level_ = Level::kInfo;
};

struct Io {
  std::istream& in;
  std::ostream& out;
};

// Input stream for a path or "-".
class Input {
 public:
  Input(const std::string& path, std::istream& stdin_stream) {
    if (path == "-") {
      stream_ = &stdin_stream;
    } else {
      file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (!*file_) throw DataError("cannot open " + path);
      stream_ = file_.get();
    }
  }
  std::istream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

// Output stream for a path or "-".
class Output {
 public:
  Output(const std::string& path, std::ostream& stdout_stream) : path_(path) {
    if (path == "-") {
      stream_ = &stdout_stream;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw DataError("cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }
  void Close() {
    stream_->flush();
    if (!*stream_) throw DataError("write failed: " + path_);
    if (file_) file_->close();
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

struct Globals {
  int jobs = DefaultJobs();
  std::string log_level = "info";
  std::string role_map;
};

RoleMap LoadRoles(const Globals& g, Io& io) {
  if (g.role_map.empty()) return RoleMap();
  Input in(g.role_map, io.in);
  return RoleMap::FromTsv(in.get());
}

Treebank Read(const std::string& path, const Globals& g, Io& io, Strictness strictness) {
  Input in(path, io.in);
  ReadOptions opts;
  opts.strictness = strictness;
  opts.roles = LoadRoles(g, io);
  return ReadConllu(in.get(), opts);
}

Json Number(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

Json TTestJson(const TTestResult& r) {
  Json j;
  j["n"] = r.n;
  j["df"] = r.df;
  j["mean_diff"] = r.mean_diff;
  j["t_stat"] = Number(r.t_stat);
  j["p_value"] = r.p_value;
  j["degenerate_variance"] = r.degenerate_variance;
  return j;
}

std::string Pct(std::optional<double> v) { return v ? FormatFixed(*v, 2) : "-"; }

void WriteEvalTable(const FullEvaluation& ev, const std::optional<SignificanceTests>& tt,
                    std::ostream& out) {
  const EvalReport& r = ev.report;
  out << "metric\tvalue\n";
  out << "LAS\t" << FormatFixed(r.las, 2) << '\n';
  out << "UAS\t" << FormatFixed(r.uas, 2) << '\n';
  out << "EM\t" << FormatFixed(r.em, 2) << '\n';
  out << "UEM\t" << FormatFixed(r.uem, 2) << '\n';
  out << "UPOS\t" << Pct(r.upos_acc) << '\n';
  out << "XPOS\t" << Pct(r.xpos_acc) << '\n';
  out << "\nslice\tsentences\ttokens\tLAS\tUAS\n";
  for (const auto& [name, s] : r.slices) {
    if (s.n_sentences == 0) continue;
    out << name << '\t' << s.n_sentences << '\t' << s.n_tokens << '\t' << Pct(s.las) << '\t'
        << Pct(s.uas) << '\n';
  }
  if (!ev.per_label_error.empty()) {
    out << "\nlabel\tgold\terrors\terror_rate\n";
    for (const auto& [label, e] : ev.per_label_error) {
      out << label << '\t' << e.gold_count << '\t' << e.errors << '\t'
          << FormatFixed(e.rate, 4) << '\n';
    }
  }
  if (tt) {
    out << "\ntest\tn\tmean_diff\tt\tp\n";
    for (auto [name, res] : {std::pair{"UAS", &tt->uas}, std::pair{"LAS", &tt->las}}) {
      out << name << '\t' << res->n << '\t' << FormatFixed(res->mean_diff, 4) << '\t'
          << FormatFixed(res->t_stat, 4) << '\t' << FormatShortest(res->p_value) << '\n';
    }
  }
}

Json EvalJson(const FullEvaluation& ev, const std::optional<SignificanceTests>& tt) {
  const EvalReport& r = ev.report;
  Json j;
  j["las"] = r.las;
  j["uas"] = r.uas;
  j["em"] = r.em;
  j["uem"] = r.uem;
  j["upos_acc"] = Number(r.upos_acc);
  j["xpos_acc"] = Number(r.xpos_acc);
  Json slices = Json::object();
  for (const auto& [name, s] : r.slices) {
    slices[name] = {{"las", Number(s.las)},
                    {"uas", Number(s.uas)},
                    {"n_sentences", s.n_sentences},
                    {"n_tokens", s.n_tokens}};
  }
  j["slices"] = std::move(slices);
  Json labels = Json::object();
  for (const auto& [label, e] : ev.per_label_error) {
    labels[label] = {{"gold_count", e.gold_count}, {"errors", e.errors}, {"rate", e.rate}};
  }
  j["per_label_error"] = std::move(labels);
  if (tt) {
    j["ttest"] = {{"uas", TTestJson(tt->uas)}, {"las", TTestJson(tt->las)}};
  } else {
    j["ttest"] = nullptr;
  }
  return j;
}

struct EvalArgs {
  std::string gold, pred, baseline;
  int64_t min_gold = 100;
  std::string confusion = "label";
  std::string json, tsv, delta_tsv;
  bool universal = false;
};

int RunEval(const EvalArgs& a, const Globals& g, Io& io, Log& log) {
  const Treebank gold = Read(a.gold, g, io, Strictness::kStrict);
  const Treebank pred = Read(a.pred, g, io, Strictness::kStrict);
  if (gold.sentences.empty()) throw DataError("gold treebank is empty");
  EvalOptions opts;
  opts.min_gold = a.min_gold;
  opts.match = a.universal ? DeprelMatch::kUniversalOnly : DeprelMatch::kExact;
  opts.jobs = g.jobs;
  const FullEvaluation ev = Evaluate(gold, pred, opts);
  const ConfusionScope scope =
      a.confusion == "las" ? ConfusionScope::kLasErrors : ConfusionScope::kLabelOnly;

  std::optional<SignificanceTests> tt;
  std::optional<Treebank> base;
  if (!a.baseline.empty()) {
    base = Read(a.baseline, g, io, Strictness::kStrict);
    const auto base_scores = ScoreTreebank(gold, *base, opts.match, g.jobs);
    tt = CompareSystems(ev.report.per_sentence, base_scores);
  }

  if (a.json != "-") WriteEvalTable(ev, tt, io.out);
  if (!a.json.empty()) {
    Output o(a.json, io.out);
    o.get() << EvalJson(ev, tt).dump(2) << '\n';
    o.Close();
  }
  if (!a.tsv.empty()) {
    const ConfusionMatrix m = Confusion(gold, pred, scope).RowNormalized();
    Output o(a.tsv, io.out);
    o.get() << MatrixToTsv(m.labels, m.values);
    o.Close();
  }
  if (!a.delta_tsv.empty()) {
    if (!base) throw DataError("--delta-tsv requires --baseline");
    const DeltaMatrix d = ConfusionDelta(Confusion(gold, pred, scope).RowNormalized(),
                                         Confusion(gold, *base, scope).RowNormalized());
    Output o(a.delta_tsv, io.out);
    o.get() << MatrixToTsv(d.labels, d.values);
    o.Close();
  }
  log.Info("evaluated " + std::to_string(gold.sentences.size()) + " sentences");
  return kExitOk;
}

Backend ParseBackend(const std::string& s) {
  return s == "pos" ? Backend::kPosRules : Backend::kUdRules;
}

int ReportFailures(const std::vector<TagFailure>& failures, Log& log) {
  for (const TagFailure& f : failures) log.Error("sentence " + f.sent_id + ": " + f.message);
  return failures.empty() ? kExitOk : kExitDataError;
}

struct TagCxnArgs {
  std::string input, backend = "ud", out = "-", gold;
  std::optional<std::string> lexicon;
};

int RunTagCxn(const TagCxnArgs& a, const Globals& g, Io& io, Log& log) {
  const Treebank tb = Read(a.input, g, io, Strictness::kStrict);
  const FormulaicLexicon lex = FormulaicLexicon::Resolve(a.lexicon);
  const TagBatch batch = TagTreebank(tb, ParseBackend(a.backend), lex, g.jobs);
  Output o(a.out, io.out);
  WriteTaggedTsv(batch.tagged, o.get());
  o.Close();
  if (!a.gold.empty()) {
    Input gin(a.gold, io.in);
    const CxnAccuracy acc = ScoreCxn(batch.tagged, ReadGoldLabels(gin.get()));
    // Report lines are '#'-prefixed so they never parse as tagged rows.
    std::ostream& out = io.out;
    out << "# accuracy\t" << FormatFixed(acc.overall, 2) << "\tn=" << acc.n << '\n';
    if (acc.cs) out << "# accuracy_CS\t" << FormatFixed(*acc.cs, 2) << '\n';
    if (acc.cds) out << "# accuracy_CDS\t" << FormatFixed(*acc.cds, 2) << '\n';
    for (CxnLabel l : kAllCxnLabels) {
      out << "# recall_" << CxnLabelName(l) << '\t' << Pct(acc.per_category.at(l)) << '\n';
    }
    out << "# confusion";
    for (CxnLabel l : kAllCxnLabels) out << '\t' << CxnLabelName(l);
    out << '\n';
    for (size_t r = 0; r < kAllCxnLabels.size(); ++r) {
      out << "# " << CxnLabelName(kAllCxnLabels[r]);
      for (int64_t c : acc.confusion[r]) out << '\t' << c;
      out << '\n';
    }
  }
  return ReportFailures(batch.failures, log);
}

struct LintArgs {
  std::string input, fix, tsv;
};

int RunLint(const LintArgs& a, const Globals& g, Io& io, Log&) {
  const Treebank tb = Read(a.input, g, io, Strictness::kStrict);
  const LintResult poss = LintPossDet(tb, g.jobs);
  const LintResult nn = LintNnNmod(tb, g.jobs);
  std::vector<LintFinding> all = poss.findings;
  all.insert(all.end(), nn.findings.begin(), nn.findings.end());
  std::stable_sort(all.begin(), all.end(), [](const LintFinding& x, const LintFinding& y) {
    return std::tie(x.sent_id, x.token_id) < std::tie(y.sent_id, y.token_id);
  });
  if (a.tsv != "-") {
    io.out << "rule\tfindings\tcandidates\trate\n";
    for (auto [rule, res] : {std::pair{LintRule::kPossAsDet, &poss},
                             std::pair{LintRule::kNnAsNmod, &nn}}) {
      io.out << LintRuleName(rule) << '\t' << res->findings.size() << '\t' << res->candidates
             << '\t' << FormatFixed(res->rate(), 4) << '\n';
    }
  }
  if (!a.tsv.empty()) {
    Output o(a.tsv, io.out);
    WriteFindingsTsv(all, o.get());
    o.Close();
  }
  if (!a.fix.empty()) {
    Output o(a.fix, io.out);
    WriteConllu(ApplyFixes(tb, all), o.get());
    o.Close();
  }
  return kExitOk;
}

struct CaseStudyArgs {
  std::string input, backend = "ud", out = "-";
  int width = 3;
  bool include_nonclausal = false;
  std::optional<std::string> lexicon;
};

int RunCaseStudy(const CaseStudyArgs& a, const Globals& g, Io& io, Log& log) {
  const Treebank tb = Read(a.input, g, io, Strictness::kStrict);
  const FormulaicLexicon lex = FormulaicLexicon::Resolve(a.lexicon);
  const TagBatch batch = TagTreebank(tb, ParseBackend(a.backend), lex, g.jobs);
  const Binning binning = BinByAge(batch.tagged, a.width);
  Output o(a.out, io.out);
  EmitCurves(binning.bins, o.get(), a.include_nonclausal);
  o.Close();
  log.Info(std::to_string(batch.tagged.size()) + " utterances tagged, " +
           std::to_string(binning.unbinned) + " unbinned (no age or speaker not CS/CDS)");
  return ReportFailures(batch.failures, log);
}

struct TrainArgs {
  std::string kind = "parser", input, model;
  int epochs = 10;
  uint64_t seed = 1;
};

int RunTrain(const TrainArgs& a, const Globals& g, Io& io, Log& log) {
  const Treebank tb = Read(a.input, g, io, Strictness::kStrict);
  TrainOptions opts{a.epochs, a.seed};
  Output o(a.model, io.out);
  if (a.kind == "parser") {
    const ParserModel m = TrainParser(tb, opts);
    m.Save(o.get());
    log.Info("trained parser on " + std::to_string(tb.sentences.size()) + " sentences, " +
             std::to_string(m.skipped_nonprojective) + " non-projective skipped");
  } else {
    const TaggerModel m = TrainTagger(tb, opts);
    m.Save(o.get());
    log.Info("trained tagger with " + std::to_string(m.tags.size()) + " tags");
  }
  o.Close();
  return kExitOk;
}

struct ApplyArgs {
  std::string model, input, out = "-";
};

int RunParse(const ApplyArgs& a, const Globals& g, Io& io, Log&) {
  Input min(a.model, io.in);
  const ParserModel m = ParserModel::Load(min.get());
  const Treebank tb = Read(a.input, g, io, Strictness::kLenient);
  Output o(a.out, io.out);
  WriteConllu(ParseTreebank(m, tb, g.jobs), o.get());
  o.Close();
  return kExitOk;
}

int RunTag(const ApplyArgs& a, const Globals& g, Io& io, Log&) {
  Input min(a.model, io.in);
  const TaggerModel m = TaggerModel::Load(min.get());
  const Treebank tb = Read(a.input, g, io, Strictness::kLenient);
  Output o(a.out, io.out);
  WriteConllu(TagTreebankUpos(m, tb, g.jobs), o.get());
  o.Close();
  return kExitOk;
}

std::string_view KindName(Diagnostic::Kind k) {
  switch (k) {
    case Diagnostic::Kind::kIdSequence: return "id-sequence";
    case Diagnostic::Kind::kHeadRange: return "head-range";
    case Diagnostic::Kind::kSelfLoop: return "self-loop";
    case Diagnostic::Kind::kNoRoot: return "no-root";
    case Diagnostic::Kind::kMultipleRoots: return "multiple-roots";
    case Diagnostic::Kind::kCycle: return "cycle";
    case Diagnostic::Kind::kRootLabel: return "root-label";
    case Diagnostic::Kind::kMwtRange: return "mwt-range";
    case Diagnostic::Kind::kDuplicateSentId: return "duplicate-sent-id";
    case Diagnostic::Kind::kRepair: return "repair";
  }
  return "?";
}

void WriteDiagnostic(const Diagnostic& d, std::ostream& out) {
  std::vector<std::string> ids;
  for (int id : d.token_ids) ids.push_back(std::to_string(id));
  out << d.sent_id << '\t' << KindName(d.kind) << '\t' << (ids.empty() ? "-" : Join(ids, ","))
      << '\t' << d.message << '\n';
}

struct ValidateArgs {
  std::string input;
};

int RunValidate(const ValidateArgs& a, const Globals& g, Io& io, Log& log) {
  const Treebank tb = Read(a.input, g, io, Strictness::kLenient);
  size_t bad = 0;
  for (const Sentence& s : tb.sentences) {
    if (!s.diagnostics.empty()) ++bad;
    for (const Diagnostic& d : s.diagnostics) WriteDiagnostic(d, io.out);
  }
  log.Info(std::to_string(tb.sentences.size()) + " sentences, " + std::to_string(bad) +
           " with problems");
  return bad == 0 ? kExitOk : kExitDataError;
}

struct NormalizeArgs {
  std::string input, out = "-", label_map;
  bool no_label_map = false;
};

int RunNormalize(const NormalizeArgs& a, const Globals& g, Io& io, Log& log) {
  Treebank tb = Read(a.input, g, io, Strictness::kLenient);
  LabelMap labels;
  if (!a.label_map.empty()) {
    Input lin(a.label_map, io.in);
    labels = LabelMap::FromTsv(lin.get());
  } else if (!a.no_label_map) {
    labels = LabelMap::ClearNlpToUd();
  }
  size_t repaired = 0;
  for (Sentence& s : tb.sentences) {
    s = Normalize(s, labels);
    bool any = false;
    for (const Diagnostic& d : s.diagnostics) {
      if (d.kind != Diagnostic::Kind::kRepair) continue;
      any = true;
      log.Info("sentence " + s.sent_id + ": " + d.message);
    }
    repaired += any;
  }
  Output o(a.out, io.out);
  WriteConllu(tb, o.get());
  o.Close();
  log.Info(std::to_string(repaired) + " sentences repaired");
  return kExitOk;
}

// "-" or an existing file.
const CLI::Validator kInputPath(
    [](std::string& path) -> std::string {
      if (path == "-") return {};
      return CLI::ExistingFile(path);
    },
    "PATH");

}  // namespace

int Run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Child-adult interaction treebank toolkit", "cait"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "error, warn, info or debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  app.add_option("--role-map", g.role_map, "Speaker code to CS/CDS/OTHER TSV")
      ->check(kInputPath);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score predicted parses against gold");
  eval->add_option("--gold", ea.gold)->required()->check(kInputPath);
  eval->add_option("--pred", ea.pred)->required()->check(kInputPath);
  eval->add_option("--baseline", ea.baseline, "Second system for paired t-tests")
      ->check(kInputPath);
  eval->add_option("--min-gold", ea.min_gold, "Minimum gold count for per-label rates")
      ->check(CLI::PositiveNumber);
  eval->add_option("--confusion", ea.confusion, "Matrix scope")
      ->check(CLI::IsMember({"label", "las"}));
  eval->add_option("--json", ea.json, "JSON report path");
  eval->add_option("--tsv", ea.tsv, "Row-normalized confusion matrix path");
  eval->add_option("--delta-tsv", ea.delta_tsv, "pred minus baseline confusion delta");
  eval->add_flag("--universal-deprel", ea.universal, "Ignore deprel subtypes");

  TagCxnArgs ta;
  auto* tagcxn = app.add_subcommand("tag-cxn", "Tag utterance-level constructions");
  tagcxn->add_option("--input", ta.input)->required()->check(kInputPath);
  tagcxn->add_option("--backend", ta.backend)->check(CLI::IsMember({"ud", "pos"}));
  tagcxn->add_option("--lexicon", ta.lexicon)->check(kInputPath);
  tagcxn->add_option("--gold", ta.gold, "sent_id TAB label file")->check(kInputPath);
  tagcxn->add_option("--out", ta.out);

  LintArgs la;
  auto* lint = app.add_subcommand("lint", "Flag det/nmod:poss and nmod/compound slips");
  lint->add_option("--input", la.input)->required()->check(kInputPath);
  lint->add_option("--fix", la.fix, "Write corrected CoNLL-U here");
  lint->add_option("--tsv", la.tsv, "Write findings here");

  CaseStudyArgs ca;
  auto* cs = app.add_subcommand("case-study", "Construction proportions by age bin");
  cs->add_option("--input", ca.input)->required()->check(kInputPath);
  cs->add_option("--backend", ca.backend)->check(CLI::IsMember({"ud", "pos"}));
  cs->add_option("--width", ca.width, "Bin width in months")->check(CLI::PositiveNumber);
  cs->add_flag("--include-nonclausal", ca.include_nonclausal);
  cs->add_option("--lexicon", ca.lexicon)->check(kInputPath);
  cs->add_option("--out", ca.out);

  TrainArgs tra;
  auto* train = app.add_subcommand("train", "Train the baseline parser or tagger");
  train->add_option("--kind", tra.kind)->check(CLI::IsMember({"parser", "tagger"}));
  train->add_option("--input", tra.input)->required()->check(kInputPath);
  train->add_option("--model", tra.model)->required();
  train->add_option("--epochs", tra.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--seed", tra.seed);

  ApplyArgs pa;
  auto* parse = app.add_subcommand("parse", "Parse with a trained model");
  parse->add_option("--model", pa.model)->required()->check(kInputPath);
  parse->add_option("--input", pa.input)->required()->check(kInputPath);
  parse->add_option("--out", pa.out);

  ApplyArgs tga;
  auto* tag = app.add_subcommand("tag", "POS-tag with a trained model");
  tag->add_option("--model", tga.model)->required()->check(kInputPath);
  tag->add_option("--input", tga.input)->required()->check(kInputPath);
  tag->add_option("--out", tga.out);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Report tree and format problems");
  validate->add_option("--input", va.input)->required()->check(kInputPath);

  NormalizeArgs na;
  auto* normalize = app.add_subcommand("normalize", "Relabel to UD and repair trees");
  normalize->add_option("--input", na.input)->required()->check(kInputPath);
  normalize->add_option("--out", na.out);
  normalize->add_option("--label-map", na.label_map, "source TAB ud TSV")->check(kInputPath);
  normalize->add_flag("--no-label-map", na.no_label_map, "Only repair structure");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cait: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Log log(err);
  const std::map<std::string, Level> levels = {
      {"error", Level::kError}, {"warn", Level::kWarn}, {"info", Level::kInfo},
      {"debug", Level::kDebug}};
  log.set_level(levels.at(g.log_level));
  Io io{in, out};
  try {
    if (eval->parsed()) return RunEval(ea, g, io, log);
    if (tagcxn->parsed()) return RunTagCxn(ta, g, io, log);
    if (lint->parsed()) return RunLint(la, g, io, log);
    if (cs->parsed()) return RunCaseStudy(ca, g, io, log);
    if (train->parsed()) return RunTrain(tra, g, io, log);
    if (parse->parsed()) return RunParse(pa, g, io, log);
    if (tag->parsed()) return RunTag(tga, g, io, log);
    if (validate->parsed()) return RunValidate(va, g, io, log);
    if (normalize->parsed()) return RunNormalize(na, g, io, log);
  } catch (const std::exception& e) {
    log.Error(e.what());
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace cait::cli
