#include "cait/casestudy.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "cait/text.h"

namespace cait {
namespace {

bool IsNonClausal(CxnLabel l) {
  return l == CxnLabel::kFOR || l == CxnLabel::kFRA || l == CxnLabel::kX;
}

int SpeakerOrder(SpeakerRole r) { return r == SpeakerRole::kCS ? 0 : 1; }

// Labels in lexicographic order of their names.
std::vector<CxnLabel> LabelsByName() {
  std::vector<CxnLabel> labels(kAllCxnLabels.begin(), kAllCxnLabels.end());
  std::sort(labels.begin(), labels.end(),
            [](CxnLabel a, CxnLabel b) { return CxnLabelName(a) < CxnLabelName(b); });
  return labels;
}

}  // namespace

Binning BinByAge(const std::vector<TaggedUtterance>& tagged, int width_months) {
  if (width_months < 1) throw std::invalid_argument("bin width must be >= 1");
  std::map<std::pair<int, int>, BinnedDistribution> bins;
  Binning out;
  for (const TaggedUtterance& u : tagged) {
    const bool known_speaker =
        u.speaker_role == SpeakerRole::kCS || u.speaker_role == SpeakerRole::kCDS;
    if (!u.child_age_months || !known_speaker || !std::isfinite(*u.child_age_months) ||
        *u.child_age_months < 0) {
      ++out.unbinned;
      continue;
    }
    const int start =
        static_cast<int>(std::floor(*u.child_age_months / width_months)) * width_months;
    BinnedDistribution& d = bins[{start, SpeakerOrder(u.speaker_role)}];
    d.bin_start_months = start;
    d.bin_width_months = width_months;
    d.speaker = u.speaker_role;
    ++d.counts[u.label];
    ++d.n_utterances;
  }
  for (auto& [key, d] : bins) out.bins.push_back(std::move(d));
  return out;
}

std::map<CxnLabel, double> ClausalProportions(const BinnedDistribution& dist,
                                              bool include_nonclausal) {
  int64_t total = 0;
  for (const auto& [label, count] : dist.counts) {
    if (include_nonclausal || !IsNonClausal(label)) total += count;
  }
  std::map<CxnLabel, double> out;
  if (total == 0) return out;
  for (const auto& [label, count] : dist.counts) {
    if (!include_nonclausal && IsNonClausal(label)) continue;
    if (count == 0) continue;
    out[label] = static_cast<double>(count) / static_cast<double>(total);
  }
  return out;
}

void EmitCurves(const std::vector<BinnedDistribution>& bins, std::ostream& out,
                bool include_nonclausal) {
  std::vector<const BinnedDistribution*> sorted;
  for (const BinnedDistribution& b : bins) sorted.push_back(&b);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return std::make_tuple(a->bin_start_months, SpeakerOrder(a->speaker)) <
           std::make_tuple(b->bin_start_months, SpeakerOrder(b->speaker));
  });
  const std::vector<CxnLabel> labels = LabelsByName();
  out << "bin_start,speaker,label,count,proportion,n_utterances\n";
  for (const BinnedDistribution* b : sorted) {
    const std::map<CxnLabel, double> props = ClausalProportions(*b, include_nonclausal);
    for (CxnLabel l : labels) {
      auto it = props.find(l);
      if (it == props.end()) continue;
      out << b->bin_start_months << ',' << SpeakerRoleName(b->speaker) << ','
          << CxnLabelName(l) << ',' << b->counts.at(l) << ',' << FormatShortest(it->second)
          << ',' << b->n_utterances << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed to write curves");
}

std::vector<BinnedDistribution> ReadCurves(std::istream& in, int width_months) {
  std::vector<BinnedDistribution> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "bin_start,speaker,label,count,proportion,n_utterances") {
        throw FormatError(line_no, "unexpected curves header");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols = Split(line, ',');
    int start = 0;
    int64_t count = 0, n = 0;
    int count_i = 0, n_i = 0;
    double prop = 0;
    std::optional<CxnLabel> label = cols.size() == 6 ? ParseCxnLabel(cols[2]) : std::nullopt;
    if (!label || !ParseInt(cols[0], &start) || !ParseInt(cols[3], &count_i) ||
        !ParseDouble(cols[4], &prop) || !ParseInt(cols[5], &n_i) ||
        (cols[1] != "CS" && cols[1] != "CDS")) {
      throw FormatError(line_no, "malformed curves row '" + line + "'");
    }
    count = count_i;
    n = n_i;
    const SpeakerRole speaker = cols[1] == "CS" ? SpeakerRole::kCS : SpeakerRole::kCDS;
    if (out.empty() || out.back().bin_start_months != start || out.back().speaker != speaker) {
      BinnedDistribution d;
      d.bin_start_months = start;
      d.bin_width_months = width_months;
      d.speaker = speaker;
      d.n_utterances = n;
      out.push_back(std::move(d));
    }
    out.back().counts[*label] = count;
  }
  return out;
}

}  // namespace cait
