#pragma once

#include <string>
#include <vector>

#include "xlhwr/phog.hpp"

namespace xlhwr {

inline constexpr double kDefaultSvmCost = 1.0;
inline constexpr double kSmoTolerance = 1e-3;
inline constexpr int kSmoMaxPasses = 200;

// One-vs-one binary machine between labels[a] and labels[b] (a < b); class a
// is +1.
struct BinarySvm {
  int label_a = 0;
  int label_b = 0;
  std::vector<PhogVector> support_vectors;
  std::vector<double> coeffs;  // alpha_i * y_i
  double bias = 0.0;

  double decision(const PhogVector& x, double gamma) const;
};

struct SvmModel {
  std::vector<std::string> labels;  // sorted, unique
  std::vector<BinarySvm> machines;  // all label pairs, lexicographic
  double gamma = 1.0 / kPhogDim;
  double cost = kDefaultSvmCost;
};

struct SvmSample {
  PhogVector features;
  std::string label;
};

// One-vs-one SMO training (KKT tolerance 1e-3, hard cap of 200 full passes,
// stops when a pass changes nothing). Deterministic given input order.
// gamma <= 0 selects the 1/dim default.
SvmModel train_svm(const std::vector<SvmSample>& data,
                   double cost = kDefaultSvmCost, double gamma = 0.0);

struct SvmVote {
  std::string label;          // winner
  std::vector<int> votes;     // per model.labels entry
  std::vector<std::string> ranking;  // labels by vote count (ties resolved)
};

// Majority vote over the pairwise machines; ties broken by summed
// |decision value|, then label order.
SvmVote classify(const SvmModel& model, const PhogVector& x);

// modifier_features + classify.
std::string classify_component(const SvmModel& model, const Component& comp);

// Largest KKT violation over a binary machine's training set; used by the
// convergence check and tests.
double kkt_violation(const BinarySvm& machine, double gamma, double cost,
                     const std::vector<PhogVector>& xs,
                     const std::vector<double>& ys);

}  // namespace xlhwr
