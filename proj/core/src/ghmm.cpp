#include "xlhwr/ghmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "xlhwr/errors.hpp"
#include "xlhwr/parallel.hpp"

namespace xlhwr {

namespace {

double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace

void CharHmm::prepare() {
  log_weight_gconst.assign(static_cast<std::size_t>(states) * mixtures, kLogZero);
  for (int s = 0; s < states; ++s) {
    for (int m = 0; m < mixtures; ++m) {
      const std::size_t wm = static_cast<std::size_t>(s) * mixtures + m;
      if (weights[wm] <= 0.0) continue;
      double gconst = 0.0;
      const double* v = vars.data() + wm * dim;
      for (int d = 0; d < dim; ++d)
        gconst -= 0.5 * std::log(2.0 * std::numbers::pi * v[d]);
      log_weight_gconst[wm] = std::log(weights[wm]) + gconst;
    }
  }
  log_stay.resize(states);
  log_advance.resize(states);
  for (int s = 0; s < states; ++s) {
    log_stay[s] = stay[s] > 0.0 ? std::log(stay[s]) : kLogZero;
    const double adv = 1.0 - stay[s];
    log_advance[s] = adv > 0.0 ? std::log(adv) : kLogZero;
  }
}

double CharHmm::emission(int state, const double* x) const {
  const std::size_t base = static_cast<std::size_t>(state) * mixtures;
  double best = kLogZero;
  double terms[512];  // mixtures is bounded far below this at desk scale
  for (int m = 0; m < mixtures; ++m) {
    const double lwg = log_weight_gconst[base + m];
    if (lwg == kLogZero) {
      terms[m] = kLogZero;
      continue;
    }
    const double* mu = means.data() + (base + m) * dim;
    const double* va = vars.data() + (base + m) * dim;
    double quad = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double diff = x[d] - mu[d];
      quad += diff * diff / va[d];
    }
    terms[m] = lwg - 0.5 * quad;
    best = std::max(best, terms[m]);
  }
  if (best == kLogZero) return kLogZero;
  double acc = 0.0;
  for (int m = 0; m < mixtures; ++m)
    if (terms[m] != kLogZero) acc += std::exp(terms[m] - best);
  return best + std::log(acc);
}

void CharHmm::validate() const {
  if (mixtures > 512) throw DataError("CharHmm '" + id + "': mixture count cap is 512");
  if (static_cast<int>(weights.size()) != states * mixtures ||
      static_cast<int>(means.size()) != states * mixtures * dim ||
      static_cast<int>(vars.size()) != states * mixtures * dim ||
      static_cast<int>(stay.size()) != states)
    throw DataError("CharHmm '" + id + "': inconsistent parameter sizes");
  for (int s = 0; s < states; ++s) {
    double sum = 0.0;
    for (int m = 0; m < mixtures; ++m)
      sum += weights[static_cast<std::size_t>(s) * mixtures + m];
    if (std::abs(sum - 1.0) > 1e-9)
      throw DataError("CharHmm '" + id + "': mixture weights sum to " +
                      std::to_string(sum));
    if (stay[s] < 0.0 || stay[s] >= 1.0)
      throw DataError("CharHmm '" + id + "': stay probability out of [0,1)");
  }
  for (double v : vars)
    if (v < kVarianceFloor * (1.0 - 1e-12))
      throw DataError("CharHmm '" + id + "': variance below floor");
}

const CharHmm* HmmSet::find(const std::string& id) const {
  for (const auto& m : models)
    if (m.id == id) return &m;
  return nullptr;
}

const CharHmm& HmmSet::at(const std::string& id) const {
  const CharHmm* m = find(id);
  if (!m) throw CoverageError("HmmSet: no model for character '" + id + "'");
  return *m;
}

double HmmSet::log_inter() const {
  if (models.empty()) throw DataError("HmmSet: empty model set");
  return -std::log(static_cast<double>(models.size()));
}

int WordModel::total_states() const {
  int n = 0;
  for (const auto* m : chain) n += m->states;
  return n;
}

WordModel make_word_model(const HmmSet& set, const Word& chars) {
  if (chars.empty()) throw DataError("make_word_model: empty character sequence");
  WordModel wm;
  wm.chars = chars;
  wm.log_inter = set.log_inter();
  for (const auto& c : chars) wm.chain.push_back(&set.at(c));
  return wm;
}

// ---- flat start -------------------------------------------------------------

namespace {

struct KmeansOut {
  std::vector<double> centers;  // [k * dim]
  std::vector<int> assign;      // per point
  std::vector<int> counts;      // per cluster
};

KmeansOut kmeans(const std::vector<const double*>& pts, int k, int dim) {
  const int n = static_cast<int>(pts.size());
  KmeansOut out;
  out.centers.assign(static_cast<std::size_t>(k) * dim, 0.0);
  out.assign.assign(n, 0);
  out.counts.assign(k, 0);

  // Deterministic seeding: evenly spaced points.
  for (int c = 0; c < k; ++c) {
    const int src = static_cast<int>((static_cast<long long>(c) * n) / k);
    std::copy(pts[src], pts[src] + dim,
              out.centers.begin() + static_cast<std::size_t>(c) * dim);
  }

  std::vector<double> dist_to_center(n, 0.0);
  for (int iter = 0; iter < 20; ++iter) {
    bool moved = false;
    std::fill(out.counts.begin(), out.counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      int bc = 0;
      for (int c = 0; c < k; ++c) {
        const double* ctr =
            out.centers.data() + static_cast<std::size_t>(c) * dim;
        double d2 = 0.0;
        for (int d = 0; d < dim; ++d) {
          const double diff = pts[i][d] - ctr[d];
          d2 += diff * diff;
        }
        if (d2 < best) {
          best = d2;
          bc = c;
        }
      }
      if (out.assign[i] != bc) moved = true;
      out.assign[i] = bc;
      out.counts[bc] += 1;
      dist_to_center[i] = best;
    }
    // Refill empty clusters from the largest cluster's farthest point.
    for (int c = 0; c < k; ++c) {
      if (out.counts[c] > 0) continue;
      int largest = 0;
      for (int c2 = 1; c2 < k; ++c2)
        if (out.counts[c2] > out.counts[largest]) largest = c2;
      if (out.counts[largest] <= 1) continue;  // nothing left to split
      int far_i = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (out.assign[i] != largest) continue;
        if (dist_to_center[i] > far_d) {
          far_d = dist_to_center[i];
          far_i = i;
        }
      }
      out.assign[far_i] = c;
      out.counts[largest] -= 1;
      out.counts[c] += 1;
      dist_to_center[far_i] = 0.0;
      std::copy(pts[far_i], pts[far_i] + dim,
                out.centers.begin() + static_cast<std::size_t>(c) * dim);
      moved = true;
    }
    // Update step.
    std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
    for (int i = 0; i < n; ++i) {
      double* s = sums.data() + static_cast<std::size_t>(out.assign[i]) * dim;
      for (int d = 0; d < dim; ++d) s[d] += pts[i][d];
    }
    for (int c = 0; c < k; ++c) {
      if (out.counts[c] == 0) continue;
      double* ctr = out.centers.data() + static_cast<std::size_t>(c) * dim;
      for (int d = 0; d < dim; ++d)
        ctr[d] = sums[static_cast<std::size_t>(c) * dim + d] / out.counts[c];
    }
    if (!moved) break;
  }
  return out;
}

}  // namespace

CharHmm init_model(const std::string& id, int nstates, int nmix,
                   const std::vector<FeatureSequence>& sequences) {
  if (nstates < 1 || nmix < 1)
    throw DataError("init_model: states and mixtures must be >= 1");
  if (nmix > 512) throw DataError("init_model: mixture count cap is 512");
  if (sequences.empty()) throw DataError("init_model: no data for '" + id + "'");
  for (const auto& s : sequences)
    if (s.frames.empty())
      throw DataError("init_model: empty sequence for '" + id + "'");

  const int dim = kPhogDim;
  CharHmm hmm;
  hmm.id = id;
  hmm.states = nstates;
  hmm.mixtures = nmix;
  hmm.dim = dim;
  hmm.weights.assign(static_cast<std::size_t>(nstates) * nmix, 0.0);
  hmm.means.assign(static_cast<std::size_t>(nstates) * nmix * dim, 0.0);
  hmm.vars.assign(static_cast<std::size_t>(nstates) * nmix * dim,
                  kVarianceFloor);
  hmm.stay.assign(nstates, 0.5);

  // Uniform partition of each sequence's frames across states.
  std::vector<std::vector<const double*>> pools(nstates);
  for (const auto& seq : sequences) {
    const int T = static_cast<int>(seq.frames.size());
    for (int s = 0; s < nstates; ++s) {
      const int b = static_cast<int>((static_cast<long long>(s) * T) / nstates);
      const int e =
          static_cast<int>((static_cast<long long>(s + 1) * T) / nstates);
      for (int t = b; t < e; ++t) pools[s].push_back(seq.frames[t].data());
    }
  }
  // States starved by short sequences see everything.
  std::vector<const double*> all;
  for (const auto& seq : sequences)
    for (const auto& f : seq.frames) all.push_back(f.data());
  for (auto& p : pools)
    if (p.empty()) p = all;

  for (int s = 0; s < nstates; ++s) {
    const auto& pool = pools[s];
    const auto km = kmeans(pool, nmix, dim);
    const double n = static_cast<double>(pool.size());
    for (int m = 0; m < nmix; ++m) {
      const std::size_t wm = static_cast<std::size_t>(s) * nmix + m;
      hmm.weights[wm] = km.counts[m] / n;
      std::copy(km.centers.begin() + static_cast<std::size_t>(m) * dim,
                km.centers.begin() + static_cast<std::size_t>(m + 1) * dim,
                hmm.means.begin() + wm * dim);
      if (km.counts[m] > 0) {
        std::vector<double> ssq(dim, 0.0);
        for (std::size_t i = 0; i < pool.size(); ++i) {
          if (km.assign[i] != m) continue;
          const double* mu = hmm.means.data() + wm * dim;
          for (int d = 0; d < dim; ++d) {
            const double diff = pool[i][d] - mu[d];
            ssq[d] += diff * diff;
          }
        }
        for (int d = 0; d < dim; ++d)
          hmm.vars[wm * dim + d] =
              std::max(kVarianceFloor, ssq[d] / km.counts[m]);
      }
    }
    double sum = 0.0;
    for (int m = 0; m < nmix; ++m) {
      const std::size_t wm = static_cast<std::size_t>(s) * nmix + m;
      hmm.weights[wm] = std::max(hmm.weights[wm], kMixtureWeightFloor);
      sum += hmm.weights[wm];
    }
    for (int m = 0; m < nmix; ++m)
      hmm.weights[static_cast<std::size_t>(s) * nmix + m] /= sum;
  }
  hmm.prepare();
  return hmm;
}

// ---- chain machinery --------------------------------------------------------

namespace {

struct ChainState {
  const CharHmm* model;
  int char_index;
  int state;
  double log_stay;
  double log_in;  // cost of the advance edge *into* this state
};

std::vector<ChainState> build_chain(const WordModel& wm) {
  std::vector<ChainState> chain;
  for (std::size_t c = 0; c < wm.chain.size(); ++c) {
    const CharHmm* m = wm.chain[c];
    for (int s = 0; s < m->states; ++s) {
      ChainState cs;
      cs.model = m;
      cs.char_index = static_cast<int>(c);
      cs.state = s;
      cs.log_stay = m->log_stay[s];
      if (s > 0) {
        cs.log_in = m->log_advance[s - 1];
      } else if (c > 0) {
        const CharHmm* prev = wm.chain[c - 1];
        cs.log_in = prev->log_advance[prev->states - 1] + wm.log_inter;
      } else {
        cs.log_in = 0.0;  // free entry
      }
      chain.push_back(cs);
    }
  }
  return chain;
}

// Log-emission table of one model against a sequence: [T][states].
std::vector<double> emission_table(const CharHmm& m,
                                   const FeatureSequence& seq) {
  const int T = static_cast<int>(seq.frames.size());
  std::vector<double> table(static_cast<std::size_t>(T) * m.states);
  for (int t = 0; t < T; ++t)
    for (int s = 0; s < m.states; ++s)
      table[static_cast<std::size_t>(t) * m.states + s] =
          m.emission(s, seq.frames[t].data());
  return table;
}

using EmissionCache = std::map<const CharHmm*, std::vector<double>>;

const std::vector<double>& cached_emissions(EmissionCache& cache,
                                            const CharHmm& m,
                                            const FeatureSequence& seq) {
  auto it = cache.find(&m);
  if (it == cache.end()) it = cache.emplace(&m, emission_table(m, seq)).first;
  return it->second;
}

Alignment viterbi_impl(const FeatureSequence& seq, const WordModel& wm,
                       EmissionCache& cache) {
  const int T = static_cast<int>(seq.frames.size());
  const auto chain = build_chain(wm);
  const int N = static_cast<int>(chain.size());
  if (T < N)
    throw DataError("viterbi: " + std::to_string(T) + " frames for " +
                    std::to_string(N) + " states");

  std::vector<const std::vector<double>*> emis(wm.chain.size());
  for (std::size_t c = 0; c < wm.chain.size(); ++c)
    emis[c] = &cached_emissions(cache, *wm.chain[c], seq);
  auto e = [&](int t, int j) {
    const auto& cs = chain[j];
    return (*emis[cs.char_index])[static_cast<std::size_t>(t) *
                                      cs.model->states +
                                  cs.state];
  };

  std::vector<double> prev(N, kLogZero), cur(N, kLogZero);
  std::vector<std::uint8_t> from_prev(static_cast<std::size_t>(T) * N, 0);
  prev[0] = e(0, 0);
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < N; ++j) {
      const double stay_score = prev[j] + chain[j].log_stay;
      const double in_score =
          j > 0 ? prev[j - 1] + chain[j].log_in : kLogZero;
      if (in_score > stay_score) {
        cur[j] = in_score + e(t, j);
        from_prev[static_cast<std::size_t>(t) * N + j] = 1;
      } else {
        cur[j] = stay_score + e(t, j);
      }
    }
    std::swap(prev, cur);
  }

  const CharHmm* last = wm.chain.back();
  const double exit_cost = last->log_advance[last->states - 1];
  Alignment align;
  align.log_likelihood = prev[N - 1] + exit_cost;

  align.spans.assign(wm.chain.size(), FrameSpan{0, 0});
  std::vector<int> state_at(T);
  int j = N - 1;
  for (int t = T - 1; t >= 0; --t) {
    state_at[t] = j;
    if (t > 0 && from_prev[static_cast<std::size_t>(t) * N + j]) --j;
  }
  for (int t = 0; t < T; ++t) {
    const int c = chain[state_at[t]].char_index;
    if (t == 0 || chain[state_at[t - 1]].char_index != c)
      align.spans[c].begin = t;
    align.spans[c].end = t + 1;
  }
  return align;
}

}  // namespace

Alignment viterbi(const FeatureSequence& seq, const WordModel& model) {
  EmissionCache cache;
  return viterbi_impl(seq, model, cache);
}

std::vector<NBestEntry> decode_nbest(const FeatureSequence& seq,
                                     const std::vector<WordModel>& lexicon,
                                     int n) {
  if (n < 1) throw DataError("decode_nbest: n must be >= 1");
  if (lexicon.empty()) throw DataError("decode_nbest: empty lexicon");
  const int T = static_cast<int>(seq.frames.size());

  EmissionCache cache;
  std::vector<NBestEntry> scored;
  for (std::size_t i = 0; i < lexicon.size(); ++i) {
    if (T < lexicon[i].total_states()) continue;
    NBestEntry entry;
    entry.index = static_cast<int>(i);
    entry.alignment = viterbi_impl(seq, lexicon[i], cache);
    entry.log_likelihood = entry.alignment.log_likelihood;
    scored.push_back(std::move(entry));
  }
  if (scored.empty())
    throw DataError("decode_nbest: no lexicon entry fits in " +
                    std::to_string(T) + " frames");
  std::stable_sort(scored.begin(), scored.end(),
                   [](const NBestEntry& a, const NBestEntry& b) {
                     return a.log_likelihood > b.log_likelihood;
                   });
  if (static_cast<int>(scored.size()) > n) scored.resize(n);
  return scored;
}

LoopDecode loop_score(const FeatureSequence& seq, const HmmSet& set) {
  if (set.models.empty()) throw DataError("loop_score: empty model set");
  const int T = static_cast<int>(seq.frames.size());
  int min_states = set.models.front().states;
  for (const auto& m : set.models) min_states = std::min(min_states, m.states);
  if (T < min_states)
    throw DataError("loop_score: sequence shorter than the smallest model");

  const double log_inter = set.log_inter();
  struct LoopState {
    const CharHmm* model;
    int model_index;
    int state;
  };
  std::vector<LoopState> states;
  std::vector<int> first_of(set.models.size()), last_of(set.models.size());
  for (std::size_t m = 0; m < set.models.size(); ++m) {
    first_of[m] = static_cast<int>(states.size());
    for (int s = 0; s < set.models[m].states; ++s)
      states.push_back({&set.models[m], static_cast<int>(m), s});
    last_of[m] = static_cast<int>(states.size()) - 1;
  }
  const int N = static_cast<int>(states.size());

  std::vector<std::vector<double>> emis;
  emis.reserve(set.models.size());
  for (const auto& m : set.models) emis.push_back(emission_table(m, seq));
  auto e = [&](int t, int j) {
    return emis[states[j].model_index]
               [static_cast<std::size_t>(t) * states[j].model->states +
                states[j].state];
  };

  // Full predecessor matrix, encoded as from_state*2 + reentry_flag so a
  // one-state model's stay and exit-and-reenter moves stay distinguishable.
  std::vector<double> prev(N, kLogZero), cur(N, kLogZero);
  std::vector<int> back(static_cast<std::size_t>(T) * N, -1);
  for (std::size_t m = 0; m < set.models.size(); ++m)
    prev[first_of[m]] = e(0, first_of[m]);

  for (int t = 1; t < T; ++t) {
    double best_exit = kLogZero;
    int best_exit_state = -1;
    for (std::size_t m = 0; m < set.models.size(); ++m) {
      const auto& hmm = set.models[m];
      const double score = prev[last_of[m]] + hmm.log_advance[hmm.states - 1];
      if (score > best_exit) {
        best_exit = score;
        best_exit_state = last_of[m];
      }
    }
    for (int j = 0; j < N; ++j) {
      const auto& ls = states[j];
      double best = prev[j] + ls.model->log_stay[ls.state];
      int code = j * 2;
      if (ls.state > 0) {
        const double adv = prev[j - 1] + ls.model->log_advance[ls.state - 1];
        if (adv > best) {
          best = adv;
          code = (j - 1) * 2;
        }
      } else if (best_exit_state >= 0) {
        const double enter = best_exit + log_inter;
        if (enter > best) {
          best = enter;
          code = best_exit_state * 2 + 1;
        }
      }
      cur[j] = best == kLogZero ? kLogZero : best + e(t, j);
      back[static_cast<std::size_t>(t) * N + j] = code;
    }
    std::swap(prev, cur);
  }

  LoopDecode out;
  int final_state = -1;
  for (std::size_t m = 0; m < set.models.size(); ++m) {
    const auto& hmm = set.models[m];
    const double score = prev[last_of[m]] + hmm.log_advance[hmm.states - 1];
    if (score > out.log_likelihood) {
      out.log_likelihood = score;
      final_state = last_of[m];
    }
  }
  if (final_state < 0) throw DataError("loop_score: no feasible path");

  // Character boundaries are the re-entry moves.
  std::vector<std::string> rev_path;
  int j = final_state;
  for (int t = T - 1; t >= 1; --t) {
    const int code = back[static_cast<std::size_t>(t) * N + j];
    if (code & 1) rev_path.push_back(states[j].model->id);
    j = code / 2;
  }
  rev_path.push_back(states[j].model->id);
  out.path.assign(rev_path.rbegin(), rev_path.rend());
  return out;
}

// ---- embedded Baum-Welch ----------------------------------------------------

namespace {

struct ModelStats {
  std::vector<double> occ;   // [S*M]
  std::vector<double> sum;   // [S*M*dim]
  std::vector<double> ssq;   // [S*M*dim]
  std::vector<double> stay;  // [S]
  std::vector<double> adv;   // [S]

  void resize(const CharHmm& m) {
    occ.assign(static_cast<std::size_t>(m.states) * m.mixtures, 0.0);
    sum.assign(static_cast<std::size_t>(m.states) * m.mixtures * m.dim, 0.0);
    ssq.assign(static_cast<std::size_t>(m.states) * m.mixtures * m.dim, 0.0);
    stay.assign(m.states, 0.0);
    adv.assign(m.states, 0.0);
  }
  void add(const ModelStats& o) {
    for (std::size_t i = 0; i < occ.size(); ++i) occ[i] += o.occ[i];
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += o.sum[i];
    for (std::size_t i = 0; i < ssq.size(); ++i) ssq[i] += o.ssq[i];
    for (std::size_t i = 0; i < stay.size(); ++i) stay[i] += o.stay[i];
    for (std::size_t i = 0; i < adv.size(); ++i) adv[i] += o.adv[i];
  }
};

struct Accumulator {
  std::vector<ModelStats> per_model;
  double total_ll = 0.0;

  void resize(const HmmSet& set) {
    per_model.resize(set.models.size());
    for (std::size_t i = 0; i < set.models.size(); ++i)
      per_model[i].resize(set.models[i]);
    total_ll = 0.0;
  }
  void add(const Accumulator& o) {
    for (std::size_t i = 0; i < per_model.size(); ++i)
      per_model[i].add(o.per_model[i]);
    total_ll += o.total_ll;
  }
};

// Forward-backward on one concatenated word chain; accumulates into `acc`.
// Returns the sequence log-likelihood.
double accumulate_sequence(const HmmSet& set,
                           const std::map<std::string, int>& index,
                           const TrainingPair& pair, Accumulator& acc) {
  const FeatureSequence& seq = pair.features;
  const int T = static_cast<int>(seq.frames.size());

  WordModel wm;
  wm.chars = pair.transcription;
  wm.log_inter = set.log_inter();
  std::vector<int> model_of_char;
  for (const auto& c : pair.transcription) {
    auto it = index.find(c);
    if (it == index.end())
      throw CoverageError("baum_welch: transcription character '" + c +
                          "' has no model");
    wm.chain.push_back(&set.models[it->second]);
    model_of_char.push_back(it->second);
  }
  const auto chain = build_chain(wm);
  const int N = static_cast<int>(chain.size());

  // Per-mixture log densities for the distinct models of this word:
  // terms[model][t*S*M + s*M + m] = log w + log N(x_t; mu, var).
  std::map<int, std::vector<double>> terms;
  for (int mi : model_of_char) {
    if (terms.count(mi)) continue;
    const CharHmm& m = set.models[mi];
    std::vector<double>& tt = terms[mi];
    tt.assign(static_cast<std::size_t>(T) * m.states * m.mixtures, kLogZero);
    for (int t = 0; t < T; ++t) {
      const double* x = seq.frames[t].data();
      for (int s = 0; s < m.states; ++s) {
        for (int mm = 0; mm < m.mixtures; ++mm) {
          const std::size_t wi = static_cast<std::size_t>(s) * m.mixtures + mm;
          const double lwg = m.log_weight_gconst[wi];
          if (lwg == kLogZero) continue;
          const double* mu = m.means.data() + wi * m.dim;
          const double* va = m.vars.data() + wi * m.dim;
          double quad = 0.0;
          for (int d = 0; d < m.dim; ++d) {
            const double diff = x[d] - mu[d];
            quad += diff * diff / va[d];
          }
          tt[(static_cast<std::size_t>(t) * m.states + s) * m.mixtures + mm] =
              lwg - 0.5 * quad;
        }
      }
    }
  }
  // State emissions B[t][j] by log-sum-exp over the mixture terms.
  std::vector<double> B(static_cast<std::size_t>(T) * N, kLogZero);
  for (int j = 0; j < N; ++j) {
    const int mi = model_of_char[chain[j].char_index];
    const CharHmm& m = set.models[mi];
    const auto& tt = terms[mi];
    for (int t = 0; t < T; ++t) {
      double acc_lse = kLogZero;
      for (int mm = 0; mm < m.mixtures; ++mm)
        acc_lse = log_add(
            acc_lse, tt[(static_cast<std::size_t>(t) * m.states +
                         chain[j].state) * m.mixtures + mm]);
      B[static_cast<std::size_t>(t) * N + j] = acc_lse;
    }
  }

  // Forward.
  std::vector<double> alpha(static_cast<std::size_t>(T) * N, kLogZero);
  alpha[0] = B[0];
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < N; ++j) {
      double v = alpha[static_cast<std::size_t>(t - 1) * N + j] + chain[j].log_stay;
      if (j > 0)
        v = log_add(v, alpha[static_cast<std::size_t>(t - 1) * N + j - 1] +
                           chain[j].log_in);
      alpha[static_cast<std::size_t>(t) * N + j] =
          v == kLogZero ? kLogZero : v + B[static_cast<std::size_t>(t) * N + j];
    }
  }
  const CharHmm* last_model = wm.chain.back();
  const double exit_cost = last_model->log_advance[last_model->states - 1];
  const double ll = alpha[static_cast<std::size_t>(T - 1) * N + N - 1] + exit_cost;
  if (!(ll > kLogZero))
    throw DataError("baum_welch: sequence has no feasible path");

  // Backward.
  std::vector<double> beta(static_cast<std::size_t>(T) * N, kLogZero);
  beta[static_cast<std::size_t>(T - 1) * N + N - 1] = exit_cost;
  for (int t = T - 2; t >= 0; --t) {
    for (int j = 0; j < N; ++j) {
      double v = chain[j].log_stay + B[static_cast<std::size_t>(t + 1) * N + j] +
                 beta[static_cast<std::size_t>(t + 1) * N + j];
      if (j + 1 < N)
        v = log_add(v, chain[j + 1].log_in +
                           B[static_cast<std::size_t>(t + 1) * N + j + 1] +
                           beta[static_cast<std::size_t>(t + 1) * N + j + 1]);
      beta[static_cast<std::size_t>(t) * N + j] = v;
    }
  }

  // Accumulate.
  for (int j = 0; j < N; ++j) {
    const int mi = model_of_char[chain[j].char_index];
    const CharHmm& m = set.models[mi];
    ModelStats& st = acc.per_model[mi];
    const auto& tt = terms[mi];
    const int s = chain[j].state;
    for (int t = 0; t < T; ++t) {
      const double lg = alpha[static_cast<std::size_t>(t) * N + j] +
                        beta[static_cast<std::size_t>(t) * N + j] - ll;
      if (lg == kLogZero || lg < -745.0) continue;  // exp underflows anyway
      const double gamma = std::exp(lg);
      const double b = B[static_cast<std::size_t>(t) * N + j];
      const double* x = seq.frames[t].data();
      for (int mm = 0; mm < m.mixtures; ++mm) {
        const double lt =
            tt[(static_cast<std::size_t>(t) * m.states + s) * m.mixtures + mm];
        if (lt == kLogZero) continue;
        const double g_m = gamma * std::exp(lt - b);
        if (g_m <= 0.0) continue;
        const std::size_t wi = static_cast<std::size_t>(s) * m.mixtures + mm;
        st.occ[wi] += g_m;
        double* su = st.sum.data() + wi * m.dim;
        double* sq = st.ssq.data() + wi * m.dim;
        for (int d = 0; d < m.dim; ++d) {
          su[d] += g_m * x[d];
          sq[d] += g_m * x[d] * x[d];
        }
      }
      // Transition counts.
      if (t + 1 < T) {
        const double xi_stay =
            alpha[static_cast<std::size_t>(t) * N + j] + chain[j].log_stay +
            B[static_cast<std::size_t>(t + 1) * N + j] +
            beta[static_cast<std::size_t>(t + 1) * N + j] - ll;
        if (xi_stay > -745.0) st.stay[s] += std::exp(xi_stay);
        if (j + 1 < N) {
          const double xi_adv =
              alpha[static_cast<std::size_t>(t) * N + j] + chain[j + 1].log_in +
              B[static_cast<std::size_t>(t + 1) * N + j + 1] +
              beta[static_cast<std::size_t>(t + 1) * N + j + 1] - ll;
          if (xi_adv > -745.0) st.adv[s] += std::exp(xi_adv);
        }
      }
    }
  }
  // Termination exit of the final state counts as one advance.
  {
    const int mi = model_of_char.back();
    const CharHmm& m = set.models[mi];
    acc.per_model[mi].adv[m.states - 1] += 1.0;
  }
  return ll;
}

}  // namespace

BaumWelchResult baum_welch(const HmmSet& set,
                           const std::vector<TrainingPair>& training,
                           int iters, std::size_t jobs) {
  if (iters < 1) throw DataError("baum_welch: iters must be >= 1");

  BaumWelchResult result;
  result.set = set;
  for (auto& m : result.set.models)
    if (!m.prepared()) m.prepare();

  std::map<std::string, int> index;
  for (std::size_t i = 0; i < result.set.models.size(); ++i)
    index[result.set.models[i].id] = static_cast<int>(i);

  // Feasibility: the no-skip topology needs at least one frame per state.
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < training.size(); ++i) {
    int need = 0;
    for (const auto& c : training[i].transcription) {
      auto it = index.find(c);
      if (it == index.end())
        throw CoverageError("baum_welch: transcription character '" + c +
                            "' has no model");
      need += result.set.models[it->second].states;
    }
    if (training[i].transcription.empty() ||
        static_cast<int>(training[i].features.frames.size()) < need) {
      result.skipped += 1;
    } else {
      usable.push_back(i);
    }
  }
  if (usable.empty()) throw DataError("baum_welch: no usable training pairs");

  const std::size_t workers = std::max<std::size_t>(1, jobs);
  for (int it = 0; it < iters; ++it) {
    std::vector<Accumulator> per_worker(workers);
    for (auto& a : per_worker) a.resize(result.set);

    parallel_for(workers, workers, [&](std::size_t w) {
      for (std::size_t k = w; k < usable.size(); k += workers) {
        per_worker[w].total_ll += accumulate_sequence(
            result.set, index, training[usable[k]], per_worker[w]);
      }
    });
    Accumulator acc = std::move(per_worker[0]);
    for (std::size_t w = 1; w < workers; ++w) acc.add(per_worker[w]);

    result.log_likelihood_trace.push_back(acc.total_ll);

    // M-step.
    for (std::size_t mi = 0; mi < result.set.models.size(); ++mi) {
      CharHmm& m = result.set.models[mi];
      const ModelStats& st = acc.per_model[mi];
      for (int s = 0; s < m.states; ++s) {
        double occ_state = 0.0;
        for (int mm = 0; mm < m.mixtures; ++mm)
          occ_state += st.occ[static_cast<std::size_t>(s) * m.mixtures + mm];
        if (occ_state > 1e-10) {
          for (int mm = 0; mm < m.mixtures; ++mm) {
            const std::size_t wi = static_cast<std::size_t>(s) * m.mixtures + mm;
            const double occ = st.occ[wi];
            if (occ > 1e-10) {
              for (int d = 0; d < m.dim; ++d) {
                const double mu = st.sum[wi * m.dim + d] / occ;
                m.means[wi * m.dim + d] = mu;
                m.vars[wi * m.dim + d] = std::max(
                    kVarianceFloor, st.ssq[wi * m.dim + d] / occ - mu * mu);
              }
            }
            m.weights[wi] = occ / occ_state;
          }
          // Floor + renormalize weights.
          double sum = 0.0;
          for (int mm = 0; mm < m.mixtures; ++mm) {
            const std::size_t wi = static_cast<std::size_t>(s) * m.mixtures + mm;
            m.weights[wi] = std::max(m.weights[wi], kMixtureWeightFloor);
            sum += m.weights[wi];
          }
          for (int mm = 0; mm < m.mixtures; ++mm)
            m.weights[static_cast<std::size_t>(s) * m.mixtures + mm] /= sum;
        }
        const double trans = st.stay[s] + st.adv[s];
        if (trans > 1e-10)
          m.stay[s] = std::min(1.0 - 1e-6, std::max(0.0, st.stay[s] / trans));
      }
      m.prepare();
    }

    if (it >= 1) {
      const double gain = result.log_likelihood_trace[it] -
                          result.log_likelihood_trace[it - 1];
      if (gain < 1e-4) break;
    }
  }
  return result;
}

}  // namespace xlhwr
