#include "cait/perceptron.h"

#include <stdexcept>
#include <string>

namespace cait {

void AveragedPerceptron::Check(int cls) const {
  if (cls < 0 || cls >= num_classes_) {
    throw std::out_of_range("class index " + std::to_string(cls) + " out of range");
  }
}

std::vector<double> AveragedPerceptron::Scores(
    const std::vector<std::string>& features) const {
  std::vector<double> scores(static_cast<size_t>(num_classes_), 0.0);
  for (const std::string& f : features) {
    auto it = params_.find(f);
    if (it == params_.end()) continue;
    for (int c = 0; c < num_classes_; ++c) scores[c] += it->second[c].weight;
  }
  return scores;
}

int AveragedPerceptron::Predict(const std::vector<std::string>& features,
                                const std::vector<bool>& allowed) const {
  const std::vector<double> scores = Scores(features);
  int best = -1;
  for (int c = 0; c < num_classes_; ++c) {
    if (!allowed.empty() && !allowed[c]) continue;
    if (best < 0 || scores[c] > scores[best]) best = c;
  }
  return best;
}

void AveragedPerceptron::Update(int truth, int guess,
                                const std::vector<std::string>& features) {
  if (finalized_) throw std::logic_error("perceptron is finalized");
  Check(truth);
  Check(guess);
  if (truth == guess) return;
  for (const std::string& f : features) {
    auto [it, inserted] = params_.try_emplace(f);
    if (inserted) it->second.resize(static_cast<size_t>(num_classes_));
    for (auto [cls, delta] : {std::pair{truth, 1.0}, std::pair{guess, -1.0}}) {
      Param& p = it->second[cls];
      p.total += static_cast<double>(instances_ - p.stamp) * p.weight;
      p.stamp = instances_;
      p.weight += delta;
    }
  }
}

void AveragedPerceptron::Finalize() {
  if (finalized_) throw std::logic_error("perceptron already finalized");
  finalized_ = true;
  for (auto& [f, params] : params_) {
    for (Param& p : params) {
      if (instances_ == 0) continue;
      p.total += static_cast<double>(instances_ - p.stamp) * p.weight;
      p.stamp = instances_;
      p.weight = p.total / static_cast<double>(instances_);
    }
  }
}

double AveragedPerceptron::Weight(const std::string& feature, int cls) const {
  Check(cls);
  auto it = params_.find(feature);
  return it == params_.end() ? 0.0 : it->second[cls].weight;
}

std::map<std::string, std::map<int, double>> AveragedPerceptron::NonZeroWeights() const {
  std::map<std::string, std::map<int, double>> out;
  for (const auto& [f, params] : params_) {
    for (int c = 0; c < num_classes_; ++c) {
      if (params[c].weight != 0.0) out[f][c] = params[c].weight;
    }
  }
  return out;
}

AveragedPerceptron AveragedPerceptron::FromWeights(
    int num_classes, const std::map<std::string, std::map<int, double>>& weights) {
  AveragedPerceptron p(num_classes);
  for (const auto& [f, row] : weights) {
    std::vector<Param>& params = p.params_[f];
    params.resize(static_cast<size_t>(num_classes));
    for (const auto& [c, w] : row) {
      p.Check(c);
      params[c].weight = w;
    }
  }
  p.finalized_ = true;
  return p;
}

bool AveragedPerceptron::operator==(const AveragedPerceptron& other) const {
  return num_classes_ == other.num_classes_ && finalized_ == other.finalized_ &&
         NonZeroWeights() == other.NonZeroWeights();
}

}  // namespace cait
