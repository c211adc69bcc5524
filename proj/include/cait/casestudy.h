// Developmental aggregation of construction labels by child age and speaker.

#ifndef CAIT_CASESTUDY_H_
#define CAIT_CASESTUDY_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "cait/conllu.h"
#include "cait/cxntag.h"

namespace cait {

struct BinnedDistribution {
  int bin_start_months = 0;
  int bin_width_months = 3;
  SpeakerRole speaker = SpeakerRole::kCS;
  std::map<CxnLabel, int64_t> counts;
  int64_t n_utterances = 0;

  bool operator==(const BinnedDistribution&) const = default;
};

struct Binning {
  // Ordered by bin start, then CS before CDS.
  std::vector<BinnedDistribution> bins;
  // Utterances without an age or with a speaker other than CS/CDS.
  int64_t unbinned = 0;
};

// Bins [k*w, (k+1)*w) by floor(age / w). Throws std::invalid_argument if
// width < 1.
Binning BinByAge(const std::vector<TaggedUtterance>& tagged, int width_months = 3);

// Label proportions of one bin. Without non-clausal labels, FOR, FRA and X
// are dropped and the rest renormalized; empty if nothing remains.
std::map<CxnLabel, double> ClausalProportions(const BinnedDistribution& dist,
                                              bool include_nonclausal);

// Long-format CSV with header
//   bin_start,speaker,label,count,proportion,n_utterances
// one row per non-zero label in the chosen view. Proportions use the
// shortest round-tripping decimal form.
void EmitCurves(const std::vector<BinnedDistribution>& bins, std::ostream& out,
                bool include_nonclausal = true);

// Parses EmitCurves output. Throws FormatError on malformed rows.
std::vector<BinnedDistribution> ReadCurves(std::istream& in, int width_months = 3);

}  // namespace cait

#endif  // CAIT_CASESTUDY_H_
