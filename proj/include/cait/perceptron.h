// Multi-class averaged perceptron over string features.
//
// Call Update() for each training instance (a no-op when the guess is
// right), then Advance() once the instance is done. Finalize() replaces the
// weights by their average over all instances; afterwards the model is
// read-only.

#ifndef CAIT_PERCEPTRON_H_
#define CAIT_PERCEPTRON_H_

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace cait {

class AveragedPerceptron {
 public:
  explicit AveragedPerceptron(int num_classes = 0) : num_classes_(num_classes) {}

  int num_classes() const { return num_classes_; }
  bool finalized() const { return finalized_; }
  int64_t instances() const { return instances_; }

  // One score per class.
  std::vector<double> Scores(const std::vector<std::string>& features) const;
  // Highest-scoring class among those with allowed[c] (all when empty);
  // ties go to the lowest class index. -1 if nothing is allowed.
  int Predict(const std::vector<std::string>& features,
              const std::vector<bool>& allowed = {}) const;

  void Update(int truth, int guess, const std::vector<std::string>& features);
  void Advance() { ++instances_; }
  // Throws std::logic_error when called twice.
  void Finalize();

  // Current weight (averaged once finalized); 0 for unknown features.
  double Weight(const std::string& feature, int cls) const;

  // Non-zero weights ordered by feature then class.
  std::map<std::string, std::map<int, double>> NonZeroWeights() const;
  // Builds a finalized model from stored weights.
  static AveragedPerceptron FromWeights(
      int num_classes, const std::map<std::string, std::map<int, double>>& weights);

  bool operator==(const AveragedPerceptron& other) const;

 private:
  struct Param {
    double weight = 0;
    double total = 0;
    int64_t stamp = 0;
  };
  void Check(int cls) const;

  int num_classes_;
  bool finalized_ = false;
  int64_t instances_ = 0;
  std::unordered_map<std::string, std::vector<Param>> params_;
};

}  // namespace cait

#endif  // CAIT_PERCEPTRON_H_
