#include "xlhwr/rbfsvm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "xlhwr/errors.hpp"

namespace xlhwr {

namespace {

double rbf_kernel(const PhogVector& a, const PhogVector& b, double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d2 += diff * diff;
  }
  return std::exp(-gamma * d2);
}

// Platt-style SMO on one binary problem with a precomputed Gram matrix.
struct SmoProblem {
  const std::vector<const PhogVector*>& xs;
  const std::vector<double>& ys;
  std::vector<double> gram;  // n*n
  double cost;
  int n;

  std::vector<double> alpha;
  double bias = 0.0;

  double decision(int i) const {
    double f = bias;
    for (int k = 0; k < n; ++k) {
      if (alpha[k] == 0.0) continue;
      f += alpha[k] * ys[k] * gram[static_cast<std::size_t>(k) * n + i];
    }
    return f;
  }

  // Returns true if the (i, j) pair changed.
  bool take_step(int i, int j, double ei) {
    if (i == j) return false;
    const double ej = decision(j) - ys[j];
    const double yi = ys[i], yj = ys[j];
    const double ai_old = alpha[i], aj_old = alpha[j];
    double lo, hi;
    if (yi != yj) {
      lo = std::max(0.0, aj_old - ai_old);
      hi = std::min(cost, cost + aj_old - ai_old);
    } else {
      lo = std::max(0.0, ai_old + aj_old - cost);
      hi = std::min(cost, ai_old + aj_old);
    }
    if (lo >= hi) return false;
    const double kii = gram[static_cast<std::size_t>(i) * n + i];
    const double kjj = gram[static_cast<std::size_t>(j) * n + j];
    const double kij = gram[static_cast<std::size_t>(i) * n + j];
    const double eta = 2.0 * kij - kii - kjj;
    if (eta >= 0.0) return false;
    double aj = aj_old - yj * (ei - ej) / eta;
    aj = std::clamp(aj, lo, hi);
    if (std::abs(aj - aj_old) < 1e-7 * (aj + aj_old + 1e-7)) return false;
    const double ai = ai_old + yi * yj * (aj_old - aj);
    // Bias update keeping KKT on the changed pair.
    const double b1 = bias - ei - yi * (ai - ai_old) * kii -
                      yj * (aj - aj_old) * kij;
    const double b2 = bias - ej - yi * (ai - ai_old) * kij -
                      yj * (aj - aj_old) * kjj;
    if (ai > 0.0 && ai < cost)
      bias = b1;
    else if (aj > 0.0 && aj < cost)
      bias = b2;
    else
      bias = (b1 + b2) / 2.0;
    alpha[i] = ai;
    alpha[j] = aj;
    return true;
  }

  void solve() {
    alpha.assign(n, 0.0);
    bias = 0.0;
    for (int pass = 0; pass < kSmoMaxPasses; ++pass) {
      int changed = 0;
      for (int i = 0; i < n; ++i) {
        const double ei = decision(i) - ys[i];
        const bool violates = (ys[i] * ei < -kSmoTolerance && alpha[i] < cost) ||
                              (ys[i] * ei > kSmoTolerance && alpha[i] > 0.0);
        if (!violates) continue;
        // Second-choice heuristic: maximize |E_i - E_j|, deterministic scan.
        int best_j = -1;
        double best_gap = -1.0;
        for (int j = 0; j < n; ++j) {
          if (j == i || (alpha[j] <= 0.0 || alpha[j] >= cost)) continue;
          const double gap = std::abs(ei - (decision(j) - ys[j]));
          if (gap > best_gap) {
            best_gap = gap;
            best_j = j;
          }
        }
        if (best_j >= 0 && take_step(i, best_j, ei)) {
          ++changed;
          continue;
        }
        for (int j = (i + 1) % n; j != i; j = (j + 1) % n) {
          if (take_step(i, j, ei)) {
            ++changed;
            break;
          }
        }
      }
      if (changed == 0) break;
    }
  }
};

}  // namespace

double BinarySvm::decision(const PhogVector& x, double gamma) const {
  double f = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i)
    f += coeffs[i] * rbf_kernel(support_vectors[i], x, gamma);
  return f;
}

SvmModel train_svm(const std::vector<SvmSample>& data, double cost,
                   double gamma) {
  if (data.empty()) throw DataError("train_svm: empty data");
  for (const auto& s : data)
    if (static_cast<int>(s.features.size()) != kPhogDim)
      throw DataError("train_svm: feature dimension must be 168");

  SvmModel model;
  model.cost = cost;
  model.gamma = gamma > 0.0 ? gamma : 1.0 / kPhogDim;

  std::set<std::string> label_set;
  for (const auto& s : data) label_set.insert(s.label);
  if (label_set.size() < 2)
    throw DataError("train_svm: need at least 2 distinct labels");
  model.labels.assign(label_set.begin(), label_set.end());
  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < model.labels.size(); ++i)
    label_index[model.labels[i]] = static_cast<int>(i);

  const int L = static_cast<int>(model.labels.size());
  for (int a = 0; a < L; ++a) {
    for (int b = a + 1; b < L; ++b) {
      std::vector<const PhogVector*> xs;
      std::vector<double> ys;
      for (const auto& s : data) {
        const int li = label_index[s.label];
        if (li == a) {
          xs.push_back(&s.features);
          ys.push_back(1.0);
        } else if (li == b) {
          xs.push_back(&s.features);
          ys.push_back(-1.0);
        }
      }
      SmoProblem prob{xs, ys, {}, cost, static_cast<int>(xs.size()), {}, 0.0};
      prob.gram.resize(static_cast<std::size_t>(prob.n) * prob.n);
      for (int i = 0; i < prob.n; ++i)
        for (int j = i; j < prob.n; ++j) {
          const double k = rbf_kernel(*xs[i], *xs[j], model.gamma);
          prob.gram[static_cast<std::size_t>(i) * prob.n + j] = k;
          prob.gram[static_cast<std::size_t>(j) * prob.n + i] = k;
        }
      prob.solve();

      BinarySvm machine;
      machine.label_a = a;
      machine.label_b = b;
      for (int i = 0; i < prob.n; ++i) {
        if (prob.alpha[i] <= 0.0) continue;
        machine.support_vectors.push_back(*xs[i]);
        machine.coeffs.push_back(prob.alpha[i] * ys[i]);
      }
      machine.bias = prob.bias;
      if (machine.support_vectors.empty()) {
        // Degenerate separable-by-bias case: keep the closest sample so the
        // machine still has a support vector, decision = bias.
        machine.support_vectors.push_back(*xs[0]);
        machine.coeffs.push_back(0.0);
      }
      model.machines.push_back(std::move(machine));
    }
  }
  return model;
}

SvmVote classify(const SvmModel& model, const PhogVector& x) {
  if (static_cast<int>(x.size()) != kPhogDim)
    throw DataError("classify: feature dimension must be 168");
  const int L = static_cast<int>(model.labels.size());
  std::vector<int> votes(L, 0);
  std::vector<double> magnitude(L, 0.0);
  for (const auto& machine : model.machines) {
    const double f = machine.decision(x, model.gamma);
    const int winner = f >= 0.0 ? machine.label_a : machine.label_b;
    votes[winner] += 1;
    magnitude[winner] += std::abs(f);
  }
  std::vector<int> order(L);
  for (int i = 0; i < L; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (votes[a] != votes[b]) return votes[a] > votes[b];
    if (magnitude[a] != magnitude[b]) return magnitude[a] > magnitude[b];
    return a < b;
  });

  SvmVote out;
  out.votes = votes;
  for (int i = 0; i < L; ++i) out.ranking.push_back(model.labels[order[i]]);
  out.label = out.ranking.front();
  return out;
}

std::string classify_component(const SvmModel& model, const Component& comp) {
  if (comp.pixels.empty())
    throw DataError("classify_component: empty component");
  return classify(model, modifier_features(comp)).label;
}

double kkt_violation(const BinarySvm& machine, double gamma, double cost,
                     const std::vector<PhogVector>& xs,
                     const std::vector<double>& ys) {
  // Reconstruct alphas from coeffs (alpha = coeff * y for matching samples
  // is not recoverable in general); instead measure the dual feasibility via
  // margins: alpha=0 -> y*f >= 1 - tol, 0<alpha<C -> |y*f - 1| <= tol,
  // alpha=C -> y*f <= 1 + tol. Callers pass the machine's own training set
  // aligned with its support vector construction.
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = machine.decision(xs[i], gamma);
    const double margin = ys[i] * f;
    // Find this sample's alpha if it is a support vector.
    double alpha = 0.0;
    for (std::size_t k = 0; k < machine.support_vectors.size(); ++k) {
      if (machine.support_vectors[k] == xs[i]) {
        alpha = std::abs(machine.coeffs[k]);
        break;
      }
    }
    double violation = 0.0;
    if (alpha <= 1e-12) {
      violation = std::max(0.0, 1.0 - margin);
    } else if (alpha >= cost - 1e-12) {
      violation = std::max(0.0, margin - 1.0);
    } else {
      violation = std::abs(margin - 1.0);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

}  // namespace xlhwr
