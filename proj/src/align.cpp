#include "artsep/align.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "artsep/common.hpp"
#include "artsep/par.hpp"

namespace artsep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kVarFloorFactor = 1e-3;
constexpr double kAbsVarFloor = 1e-8;
constexpr double kWeightFloor = 1e-5;
constexpr double kTransFloor = 1e-6;
constexpr double kOccEps = 1e-8;
constexpr double kEarlyStopPerFrame = 1e-4;

int states_for_class(int cls) { return cls == kSilClass ? kSilStates : kStatesPerManner; }

// ---------------------------------------------------------------------------
// Flat start

struct MomentAcc {
  double count = 0.0;
  std::vector<double> sum, sq;
  void init(std::size_t d) {
    sum.assign(d, 0.0);
    sq.assign(d, 0.0);
  }
  void add(const double* x, std::size_t d) {
    count += 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      sum[i] += x[i];
      sq[i] += x[i] * x[i];
    }
  }
};

Gaussian gaussian_from_moments(const MomentAcc& acc, const std::vector<double>& floor_var,
                               std::size_t d) {
  Gaussian g;
  g.mean.resize(d);
  g.var.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    g.mean[i] = acc.sum[i] / acc.count;
    double v = acc.sq[i] / acc.count - g.mean[i] * g.mean[i];
    g.var[i] = std::max(v, floor_var[i]);
  }
  g.refresh_log_norm();
  return g;
}

// Split a single Gaussian into `mixtures` components by mean perturbation,
// halving the +/-0.2 sigma offset at each doubling.
std::vector<Gaussian> split_gaussian(const Gaussian& base, int mixtures) {
  std::vector<Gaussian> comps{base};
  double step = 0.2;
  while (static_cast<int>(comps.size()) < mixtures) {
    std::vector<Gaussian> next;
    next.reserve(comps.size() * 2);
    for (const Gaussian& g : comps) {
      Gaussian lo = g, hi = g;
      for (std::size_t i = 0; i < g.mean.size(); ++i) {
        const double offs = step * std::sqrt(g.var[i]);
        lo.mean[i] -= offs;
        hi.mean[i] += offs;
      }
      lo.refresh_log_norm();
      hi.refresh_log_norm();
      next.push_back(std::move(lo));
      next.push_back(std::move(hi));
    }
    comps = std::move(next);
    step *= 0.5;
  }
  comps.resize(mixtures, comps.back());
  return comps;
}

GmmState state_from_moments(const MomentAcc& acc, const std::vector<double>& floor_var,
                            std::size_t d, int mixtures) {
  GmmState st;
  Gaussian g = gaussian_from_moments(acc, floor_var, d);
  st.comp = split_gaussian(g, mixtures);
  st.log_weight.assign(st.comp.size(), -std::log(static_cast<double>(st.comp.size())));
  st.log_self = std::log(0.5);
  st.log_next = std::log(0.5);
  return st;
}

// ---------------------------------------------------------------------------
// Chain representation shared by EM and the aligner

struct ChainLine {
  const FrameFeatures* feats = nullptr;
  std::vector<int> cls_seq;  // one entry per token, 0..6 or kSilClass
  std::string utt;
  int line_id = 0;
};

struct ChainStates {
  std::vector<const GmmState*> states;
  std::vector<int> cls_of;    // class per chain state
  std::vector<int> idx_of;    // state index within its model
};

ChainStates build_chain(const GmmHmmSet& models, const std::vector<int>& cls_seq) {
  ChainStates c;
  for (int cls : cls_seq) {
    const GmmHmm& m = cls == kSilClass ? *models.sil : models.models[cls];
    for (int s = 0; s < static_cast<int>(m.states.size()); ++s) {
      c.states.push_back(&m.states[s]);
      c.cls_of.push_back(cls);
      c.idx_of.push_back(s);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// EM accumulators

struct StateAcc {
  double occ_self = 0.0, occ_next = 0.0;
  std::vector<double> occ_k;       // K
  std::vector<double> sum_kd;      // K x D
  std::vector<double> sq_kd;       // K x D
};

struct SetAcc {
  // Indexed [class][state]; class kSilClass lives at index kNumManners.
  std::vector<std::vector<StateAcc>> acc;
  double total_ll = 0.0;
  std::size_t total_frames = 0;

  void init(const GmmHmmSet& models, std::size_t d) {
    acc.assign(kNumManners + 1, {});
    for (int cls = 0; cls <= kNumManners; ++cls) {
      const GmmHmm* m = cls == kSilClass ? (models.sil ? &*models.sil : nullptr)
                                         : &models.models[cls];
      if (!m) continue;
      acc[cls].resize(m->states.size());
      for (std::size_t s = 0; s < acc[cls].size(); ++s) {
        StateAcc& sa = acc[cls][s];
        const std::size_t k = m->states[s].comp.size();
        sa.occ_k.assign(k, 0.0);
        sa.sum_kd.assign(k * d, 0.0);
        sa.sq_kd.assign(k * d, 0.0);
      }
    }
  }

  void merge(const SetAcc& o) {
    total_ll += o.total_ll;
    total_frames += o.total_frames;
    for (std::size_t c = 0; c < acc.size(); ++c)
      for (std::size_t s = 0; s < acc[c].size(); ++s) {
        StateAcc& a = acc[c][s];
        const StateAcc& b = o.acc[c][s];
        a.occ_self += b.occ_self;
        a.occ_next += b.occ_next;
        for (std::size_t i = 0; i < a.occ_k.size(); ++i) a.occ_k[i] += b.occ_k[i];
        for (std::size_t i = 0; i < a.sum_kd.size(); ++i) {
          a.sum_kd[i] += b.sum_kd[i];
          a.sq_kd[i] += b.sq_kd[i];
        }
      }
  }
};

// Forward-backward over one left-to-right chain; accumulates into `out`.
void accumulate_line(const GmmHmmSet& models, const ChainLine& line, SetAcc& out) {
  const FrameFeatures& feats = *line.feats;
  const ChainStates chain = build_chain(models, line.cls_seq);
  const std::size_t n = feats.frames;
  const std::size_t j_n = chain.states.size();
  if (n < j_n)
    throw DataError("line " + line.utt + "#" + std::to_string(line.line_id) + " has " +
                    std::to_string(n) + " frames for " + std::to_string(j_n) +
                    " states; cannot train");

  const MatD logb = gmm_log_obs(chain.states, feats);

  MatD alpha(n, j_n, kNegInf), beta(n, j_n, kNegInf);
  alpha(0, 0) = logb(0, 0);
  for (std::size_t t = 1; t < n; ++t)
    for (std::size_t j = 0; j < j_n; ++j) {
      double v = alpha(t - 1, j) + chain.states[j]->log_self;
      if (j > 0) v = log_add(v, alpha(t - 1, j - 1) + chain.states[j - 1]->log_next);
      alpha(t, j) = v == kNegInf ? kNegInf : v + logb(t, j);
    }
  const double ll = alpha(n - 1, j_n - 1) + chain.states[j_n - 1]->log_next;
  if (!std::isfinite(ll))
    throw NumericalError("forward pass underflow on line " + line.utt + "#" +
                         std::to_string(line.line_id));

  beta(n - 1, j_n - 1) = chain.states[j_n - 1]->log_next;
  for (std::size_t t = n - 1; t-- > 0;)
    for (std::size_t j = 0; j < j_n; ++j) {
      double v = chain.states[j]->log_self + logb(t + 1, j) + beta(t + 1, j);
      if (j + 1 < j_n)
        v = log_add(v, chain.states[j]->log_next + logb(t + 1, j + 1) + beta(t + 1, j + 1));
      beta(t, j) = v;
    }

  out.total_ll += ll;
  out.total_frames += n;

  for (std::size_t t = 0; t < n; ++t) {
    const double* x = feats.row(t);
    for (std::size_t j = 0; j < j_n; ++j) {
      const double lg = alpha(t, j) + beta(t, j) - ll;
      if (lg == kNegInf || lg < -40.0) continue;  // negligible occupancy
      const double g = std::exp(lg);
      StateAcc& sa = out.acc[chain.cls_of[j]][chain.idx_of[j]];
      const GmmState& st = *chain.states[j];
      const std::size_t d = feats.dim;
      // Mixture responsibilities within the state.
      for (std::size_t k = 0; k < st.comp.size(); ++k) {
        const double lk = st.log_weight[k] + st.comp[k].log_pdf(x) - logb(t, j);
        const double gk = g * std::exp(lk);
        if (gk <= 0.0) continue;
        sa.occ_k[k] += gk;
        double* sum = sa.sum_kd.data() + k * d;
        double* sq = sa.sq_kd.data() + k * d;
        for (std::size_t i = 0; i < d; ++i) {
          sum[i] += gk * x[i];
          sq[i] += gk * x[i] * x[i];
        }
      }
      // Transition posteriors.
      if (t + 1 < n) {
        const double xs = alpha(t, j) + st.log_self + logb(t + 1, j) + beta(t + 1, j) - ll;
        if (xs > -40.0) sa.occ_self += std::exp(xs);
        if (j + 1 < j_n) {
          const double xn =
              alpha(t, j) + st.log_next + logb(t + 1, j + 1) + beta(t + 1, j + 1) - ll;
          if (xn > -40.0) sa.occ_next += std::exp(xn);
        }
      } else if (j == j_n - 1) {
        sa.occ_next += 1.0;  // forced exit from the final state
      }
    }
  }
}

// M-step: re-estimate every state that saw data; others keep their parameters.
GmmHmmSet reestimate(const GmmHmmSet& models, const SetAcc& acc) {
  GmmHmmSet out = models;
  for (int cls = 0; cls <= kNumManners; ++cls) {
    GmmHmm* m = cls == kSilClass ? (out.sil ? &*out.sil : nullptr) : &out.models[cls];
    if (!m || acc.acc[cls].empty()) continue;
    for (std::size_t s = 0; s < m->states.size(); ++s) {
      const StateAcc& sa = acc.acc[cls][s];
      GmmState& st = m->states[s];
      const std::size_t d = out.dim;

      double occ = 0.0;
      for (double o : sa.occ_k) occ += o;
      if (occ < kOccEps) continue;

      for (std::size_t k = 0; k < st.comp.size(); ++k) {
        if (sa.occ_k[k] < kOccEps) continue;  // starved component keeps old params
        Gaussian& g = st.comp[k];
        const double* sum = sa.sum_kd.data() + k * d;
        const double* sq = sa.sq_kd.data() + k * d;
        for (std::size_t i = 0; i < d; ++i) {
          g.mean[i] = sum[i] / sa.occ_k[k];
          double v = sq[i] / sa.occ_k[k] - g.mean[i] * g.mean[i];
          g.var[i] = std::max(v, out.var_floor[i]);
        }
        g.refresh_log_norm();
      }

      // Mixture weights with flooring and renormalization.
      std::vector<double> w(st.comp.size());
      double wsum = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] = std::max(sa.occ_k[k] / occ, kWeightFloor);
        wsum += w[k];
      }
      for (std::size_t k = 0; k < w.size(); ++k) st.log_weight[k] = std::log(w[k] / wsum);

      const double trans = sa.occ_self + sa.occ_next;
      if (trans > kOccEps) {
        double a_self = sa.occ_self / trans;
        a_self = std::min(std::max(a_self, kTransFloor), 1.0 - kTransFloor);
        st.log_self = std::log(a_self);
        st.log_next = std::log(1.0 - a_self);
      }
    }
  }
  return out;
}

struct EmIterResult {
  GmmHmmSet models;
  std::vector<double> ll_per_iter;
  std::size_t total_frames = 0;
};

EmIterResult em_iterate(const GmmHmmSet& start, const std::vector<ChainLine>& lines, int iters) {
  EmIterResult res;
  res.models = start;
  if (iters <= 0 || lines.empty()) return res;

  for (int it = 0; it < iters; ++it) {
    // E-step: per-line accumulators, merged in line order for determinism.
    std::vector<SetAcc> partial(lines.size());
    const long n = static_cast<long>(lines.size());
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
    for (long i = 0; i < n; ++i) {
      partial[i].init(res.models, res.models.dim);
      accumulate_line(res.models, lines[i], partial[i]);
    }
    SetAcc total;
    total.init(res.models, res.models.dim);
    for (const auto& p : partial) total.merge(p);

    res.ll_per_iter.push_back(total.total_ll);
    res.total_frames = total.total_frames;
    res.models = reestimate(res.models, total);

    if (it > 0) {
      const double gain = (res.ll_per_iter[it] - res.ll_per_iter[it - 1]) /
                          static_cast<double>(total.total_frames);
      if (gain < kEarlyStopPerFrame) break;
    }
  }
  return res;
}

std::vector<ChainLine> to_chain_lines(const std::vector<CorpusLine>& corpus) {
  std::vector<ChainLine> lines;
  lines.reserve(corpus.size());
  for (const auto& cl : corpus) {
    ChainLine l;
    l.feats = &cl.feats;
    l.utt = cl.utt;
    l.line_id = cl.line_id;
    for (const auto& tok : cl.tokens) l.cls_seq.push_back(static_cast<int>(tok.manner));
    lines.push_back(std::move(l));
  }
  return lines;
}

}  // namespace

// ---------------------------------------------------------------------------

GmmHmmSet flat_start(const std::vector<CorpusLine>& corpus, int mixtures) {
  if (corpus.empty()) throw DataError("flat_start: empty training corpus");
  const std::size_t d = corpus.front().feats.dim;

  // Global moments set the variance floor.
  MomentAcc global;
  global.init(d);
  for (const auto& line : corpus)
    for (std::size_t t = 0; t < line.feats.frames; ++t) global.add(line.feats.row(t), d);
  if (global.count == 0.0) throw DataError("flat_start: no frames in training corpus");

  std::vector<double> floor_var(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double mean = global.sum[i] / global.count;
    const double var = global.sq[i] / global.count - mean * mean;
    floor_var[i] = std::max(kVarFloorFactor * var, kAbsVarFloor);
  }

  // Uniformly segment every line across tokens, then states within tokens.
  std::vector<std::vector<MomentAcc>> acc(kNumManners,
                                          std::vector<MomentAcc>(kStatesPerManner));
  for (auto& per_class : acc)
    for (auto& a : per_class) a.init(d);

  for (const auto& line : corpus) {
    const std::size_t n = line.feats.frames;
    const std::size_t L = line.tokens.size();
    if (n == 0 || L == 0) continue;
    for (std::size_t i = 0; i < L; ++i) {
      const std::size_t t0 = i * n / L;
      const std::size_t t1 = (i + 1) * n / L;
      const int cls = static_cast<int>(line.tokens[i].manner);
      const std::size_t len = t1 - t0;
      for (int s = 0; s < kStatesPerManner; ++s) {
        const std::size_t s0 = t0 + s * len / kStatesPerManner;
        const std::size_t s1 = t0 + (s + 1) * len / kStatesPerManner;
        for (std::size_t t = s0; t < s1; ++t) acc[cls][s].add(line.feats.row(t), d);
      }
    }
  }

  // Class-level fallback for states that got no frames in tiny segments.
  GmmHmmSet set;
  set.dim = d;
  set.var_floor = floor_var;
  set.feature_fingerprint = corpus.front().feats.config.fingerprint();
  for (int cls = 0; cls < kNumManners; ++cls) {
    MomentAcc class_acc;
    class_acc.init(d);
    for (const auto& a : acc[cls]) {
      class_acc.count += a.count;
      for (std::size_t i = 0; i < d; ++i) {
        class_acc.sum[i] += a.sum[i];
        class_acc.sq[i] += a.sq[i];
      }
    }
    if (class_acc.count == 0.0)
      throw DataError(std::string("flat_start: manner class ") +
                      to_string(static_cast<Manner>(cls)) + " absent from training data");
    GmmHmm& m = set.models[cls];
    m.cls = cls;
    m.states.resize(kStatesPerManner);
    for (int s = 0; s < kStatesPerManner; ++s) {
      const MomentAcc& a = acc[cls][s].count > 0.0 ? acc[cls][s] : class_acc;
      m.states[s] = state_from_moments(a, floor_var, d, mixtures);
    }
  }
  return set;
}

EmResult train_em(const GmmHmmSet& models, const std::vector<CorpusLine>& corpus, int iters) {
  EmIterResult r = em_iterate(models, to_chain_lines(corpus), iters);
  return {std::move(r.models), std::move(r.ll_per_iter), r.total_frames};
}

GmmHmm train_sil(const std::vector<FrameFeatures>& regions, const GmmHmmSet& base, int iters) {
  if (regions.empty()) throw DataError("train_sil: no silence regions");
  const std::size_t d = base.dim;

  std::vector<MomentAcc> acc(kSilStates);
  for (auto& a : acc) a.init(d);
  for (const auto& r : regions) {
    const std::size_t n = r.frames;
    for (int s = 0; s < kSilStates; ++s) {
      const std::size_t s0 = s * n / kSilStates;
      const std::size_t s1 = (s + 1) * n / kSilStates;
      for (std::size_t t = s0; t < s1; ++t) acc[s].add(r.row(t), d);
    }
  }
  MomentAcc all;
  all.init(d);
  for (const auto& a : acc) {
    all.count += a.count;
    for (std::size_t i = 0; i < d; ++i) {
      all.sum[i] += a.sum[i];
      all.sq[i] += a.sq[i];
    }
  }
  if (all.count == 0.0) throw DataError("train_sil: silence regions contain no frames");

  GmmHmmSet work = base;
  work.sil = GmmHmm{};
  work.sil->cls = kSilClass;
  work.sil->states.resize(kSilStates);
  const int mixtures = base.models[0].states.empty()
                           ? kDefaultMixtures
                           : static_cast<int>(base.models[0].states[0].comp.size());
  for (int s = 0; s < kSilStates; ++s) {
    const MomentAcc& a = acc[s].count > 0.0 ? acc[s] : all;
    work.sil->states[s] = state_from_moments(a, base.var_floor, d, mixtures);
  }

  std::vector<ChainLine> lines;
  std::vector<FrameFeatures> usable;
  for (const auto& r : regions)
    if (r.frames >= static_cast<std::size_t>(kSilStates)) usable.push_back(r);
  lines.reserve(usable.size());
  for (std::size_t i = 0; i < usable.size(); ++i) {
    ChainLine l;
    l.feats = &usable[i];
    l.utt = "sil";
    l.line_id = static_cast<int>(i);
    l.cls_seq = {kSilClass};
    lines.push_back(std::move(l));
  }
  if (!lines.empty()) work = em_iterate(work, lines, iters).models;
  return *work.sil;
}

// ---------------------------------------------------------------------------
// Viterbi forced alignment over a token chain with optional silence branches.

namespace {

struct VitNode {
  const GmmState* st = nullptr;
  int token = -1;  // >= 0 token index, -1 silence
  double entry_lp = kNegInf;
  double exit_lp = kNegInf;
  std::vector<std::pair<int, double>> in_adv;  // (source node, transition lp)
};

struct VitGraph {
  std::vector<VitNode> nodes;

  int add_chain(const GmmHmm& m, int token) {
    const int first = static_cast<int>(nodes.size());
    for (std::size_t s = 0; s < m.states.size(); ++s) {
      VitNode n;
      n.st = &m.states[s];
      n.token = token;
      if (s > 0) n.in_adv.push_back({first + static_cast<int>(s) - 1, m.states[s - 1].log_next});
      nodes.push_back(std::move(n));
    }
    return first;
  }
};

VitGraph build_graph(const std::vector<MannerToken>& tokens, const GmmHmmSet& models,
                     bool allow_sil) {
  const bool sil = allow_sil && models.sil.has_value();
  const double branch = sil ? std::log(0.5) : 0.0;
  VitGraph g;

  int lead_last = -1;
  if (sil) {
    const int first = g.add_chain(*models.sil, -1);
    g.nodes[first].entry_lp = branch;
    lead_last = first + kSilStates - 1;
  }

  int prev_last = -1;       // last node of previous token
  int prev_sil_last = -1;   // last node of the silence chain after the previous token
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const GmmHmm& m = models.model_for(tokens[i].manner);
    const int first = g.add_chain(m, static_cast<int>(i));
    if (i == 0) {
      g.nodes[first].entry_lp = branch;
      if (lead_last >= 0)
        g.nodes[first].in_adv.push_back({lead_last, g.nodes[lead_last].st->log_next});
    } else {
      g.nodes[first].in_adv.push_back(
          {prev_last, g.nodes[prev_last].st->log_next + branch});
      if (prev_sil_last >= 0)
        g.nodes[first].in_adv.push_back({prev_sil_last, g.nodes[prev_sil_last].st->log_next});
    }
    prev_last = first + kStatesPerManner - 1;

    prev_sil_last = -1;
    if (sil && i + 1 < tokens.size()) {
      const int sfirst = g.add_chain(*models.sil, -1);
      g.nodes[sfirst].in_adv.push_back({prev_last, g.nodes[prev_last].st->log_next + branch});
      prev_sil_last = sfirst + kSilStates - 1;
    }
  }

  g.nodes[prev_last].exit_lp = g.nodes[prev_last].st->log_next + branch;
  if (sil) {
    const int tfirst = g.add_chain(*models.sil, -1);
    g.nodes[tfirst].in_adv.push_back({prev_last, g.nodes[prev_last].st->log_next + branch});
    g.nodes[tfirst + kSilStates - 1].exit_lp = g.nodes[tfirst + kSilStates - 1].st->log_next;
  }
  return g;
}

}  // namespace

AlignResult forced_align(const FrameFeatures& feats, const std::vector<MannerToken>& tokens,
                         const GmmHmmSet& models, bool allow_sil) {
  if (tokens.empty()) throw DataError("forced_align: empty token sequence");
  const std::size_t n = feats.frames;
  const std::size_t min_frames = tokens.size() * kStatesPerManner;
  if (n < min_frames)
    throw DataError("forced_align: " + std::to_string(n) + " frames cannot fit " +
                    std::to_string(tokens.size()) + " tokens (need >= " +
                    std::to_string(min_frames) + ")");

  const VitGraph g = build_graph(tokens, models, allow_sil);
  const std::size_t m = g.nodes.size();

  std::vector<const GmmState*> states(m);
  for (std::size_t j = 0; j < m; ++j) states[j] = g.nodes[j].st;
  const MatD logb = gmm_log_obs(states, feats);

  MatD delta(n, m, kNegInf);
  Matrix<int> from(n, m);  // -2 self, -1 entry, >= 0 advance source
  for (auto& v : from.v) v = -1;

  for (std::size_t j = 0; j < m; ++j)
    if (g.nodes[j].entry_lp != kNegInf) delta(0, j) = g.nodes[j].entry_lp + logb(0, j);

  for (std::size_t t = 1; t < n; ++t)
    for (std::size_t j = 0; j < m; ++j) {
      // Ties prefer the self loop, which keeps state entries as early as
      // possible (smallest boundary vector).
      double best = delta(t - 1, j) == kNegInf ? kNegInf : delta(t - 1, j) + g.nodes[j].st->log_self;
      int src = -2;
      for (const auto& [u, lp] : g.nodes[j].in_adv) {
        if (delta(t - 1, u) == kNegInf) continue;
        const double cand = delta(t - 1, u) + lp;
        if (cand > best) {
          best = cand;
          src = static_cast<int>(u);
        }
      }
      if (best != kNegInf) {
        delta(t, j) = best + logb(t, j);
        from(t, j) = src;
      }
    }

  double best_score = kNegInf;
  int best_end = -1;
  for (std::size_t j = 0; j < m; ++j) {
    if (g.nodes[j].exit_lp == kNegInf || delta(n - 1, j) == kNegInf) continue;
    const double s = delta(n - 1, j) + g.nodes[j].exit_lp;
    if (s > best_score) {
      best_score = s;
      best_end = static_cast<int>(j);
    }
  }
  if (best_end < 0) throw DataError("forced_align: no feasible path");

  std::vector<int> node_at(n);
  int j = best_end;
  for (std::size_t t = n; t-- > 0;) {
    node_at[t] = j;
    if (t > 0) {
      const int f = from(t, j);
      if (f >= 0) j = f;
      // f == -2: stay on the same node
    }
  }

  AlignResult res;
  res.score = best_score;
  res.tokens.resize(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    TokenAlignment& ta = res.tokens[i];
    ta.token_index = static_cast<int>(i) + 1;
    ta.manner = tokens[i].manner;
    ta.phoneme = tokens[i].phoneme;
    ta.start_frame = 0;
    ta.end_frame = 0;
  }
  for (std::size_t t = 0; t < n; ++t) {
    const int tok = g.nodes[node_at[t]].token;
    if (tok < 0) continue;
    TokenAlignment& ta = res.tokens[tok];
    if (ta.start_frame == 0) ta.start_frame = static_cast<long>(t) + 1;
    ta.end_frame = static_cast<long>(t) + 1;
  }
  return res;
}

std::vector<AlignedLine> align_corpus(const std::vector<CorpusLine>& corpus,
                                      const GmmHmmSet& models, bool allow_sil) {
  std::vector<AlignedLine> out(corpus.size());
  const long n = static_cast<long>(corpus.size());
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
  for (long i = 0; i < n; ++i) {
    const CorpusLine& cl = corpus[i];
    out[i].utt = cl.utt;
    out[i].line_id = cl.line_id;
    out[i].line_start_s = cl.line_start_s;
    out[i].result = forced_align(cl.feats, cl.tokens, models, allow_sil);
    for (auto& tok : out[i].result.tokens) tok.line_id = cl.line_id;
  }
  return out;
}

double corpus_align_score_per_frame(const std::vector<CorpusLine>& corpus,
                                    const GmmHmmSet& models, bool allow_sil) {
  const auto aligned = align_corpus(corpus, models, allow_sil);
  double score = 0.0;
  std::size_t frames = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    score += aligned[i].result.score;
    frames += corpus[i].feats.frames;
  }
  return frames ? score / static_cast<double>(frames) : 0.0;
}

// ---------------------------------------------------------------------------

namespace {

FrameFeatures slice_features(const FrameFeatures& src, long start_frame, long end_frame) {
  FrameFeatures out;
  out.config = src.config;
  out.dim = src.dim;
  out.frames = static_cast<std::size_t>(end_frame - start_frame + 1);
  out.v.assign(src.v.begin() + (start_frame - 1) * static_cast<long>(src.dim),
               src.v.begin() + end_frame * static_cast<long>(src.dim));
  return out;
}

}  // namespace

TwoStageResult two_stage_fa(const GmmHmmSet& model1, const std::vector<CorpusLine>& mixtures,
                            int refine_iters, int em_iters, bool allow_sil) {
  if (refine_iters < 1) throw ConfigError("two_stage_fa: refine_iters must be >= 1");
  GmmHmmSet models = model1;

  for (int r = 0; r < refine_iters; ++r) {
    const auto aligned = align_corpus(mixtures, models, allow_sil);

    // Each aligned token becomes a single-token pseudo line; silence gaps
    // between tokens become pseudo lines for the silence model.
    std::vector<FrameFeatures> segments;
    std::vector<int> seg_cls;
    for (std::size_t i = 0; i < mixtures.size(); ++i) {
      const FrameFeatures& feats = mixtures[i].feats;
      long prev_end = 0;
      for (const auto& tok : aligned[i].result.tokens) {
        if (models.sil && tok.start_frame > prev_end + 1) {
          segments.push_back(slice_features(feats, prev_end + 1, tok.start_frame - 1));
          seg_cls.push_back(kSilClass);
        }
        segments.push_back(slice_features(feats, tok.start_frame, tok.end_frame));
        seg_cls.push_back(static_cast<int>(tok.manner));
        prev_end = tok.end_frame;
      }
      if (models.sil && prev_end < static_cast<long>(feats.frames)) {
        segments.push_back(slice_features(feats, prev_end + 1, static_cast<long>(feats.frames)));
        seg_cls.push_back(kSilClass);
      }
    }

    std::vector<ChainLine> pseudo;
    pseudo.reserve(segments.size());
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (segments[i].frames < static_cast<std::size_t>(states_for_class(seg_cls[i]))) continue;
      ChainLine l;
      l.feats = &segments[i];
      l.utt = "pseudo";
      l.line_id = static_cast<int>(i);
      l.cls_seq = {seg_cls[i]};
      pseudo.push_back(std::move(l));
    }
    models = em_iterate(models, pseudo, em_iters).models;
  }

  TwoStageResult res;
  res.alignments = align_corpus(mixtures, models, allow_sil);
  res.models = std::move(models);
  return res;
}

std::vector<GlobalToken> line_to_global(const std::vector<TokenAlignment>& tokens,
                                        double line_start_s, const std::string& utt,
                                        double frame_period_s) {
  if (line_start_s < 0.0) throw DataError("line_to_global: negative line start time");
  std::vector<GlobalToken> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    GlobalToken g;
    g.utt = utt;
    g.line_id = t.line_id;
    g.token_index = t.token_index;
    g.manner = t.manner;
    g.phoneme = t.phoneme;
    g.start_s = line_start_s + static_cast<double>(t.start_frame - 1) * frame_period_s;
    g.end_s = line_start_s + static_cast<double>(t.end_frame) * frame_period_s;
    g.line_start_s = line_start_s;
    out.push_back(std::move(g));
  }
  return out;
}

void save_alignments_jsonl(const std::string& path, const std::vector<GlobalToken>& tokens) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot create alignment file: " + path);
  for (const auto& t : tokens) {
    nlohmann::json j{{"utt", t.utt},         {"line", t.line_id},
                     {"i", t.token_index},   {"manner", to_string(t.manner)},
                     {"phoneme", t.phoneme}, {"start_s", t.start_s},
                     {"end_s", t.end_s}};
    f << j.dump() << "\n";
  }
}

std::vector<GlobalToken> load_alignments_jsonl(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open alignment file: " + path);
  std::vector<GlobalToken> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw DataError(path + ":" + std::to_string(lineno) + ": invalid JSON record");
    GlobalToken t;
    t.utt = j.at("utt").get<std::string>();
    t.line_id = j.at("line").get<int>();
    t.token_index = j.at("i").get<int>();
    auto m = manner_from_string(j.at("manner").get<std::string>());
    if (!m) throw DataError(path + ":" + std::to_string(lineno) + ": unknown manner class");
    t.manner = *m;
    t.phoneme = j.at("phoneme").get<std::string>();
    t.start_s = j.at("start_s").get<double>();
    t.end_s = j.at("end_s").get<double>();
    out.push_back(std::move(t));
  }
  // Recover line start times (first token start per line) for overlap rules.
  std::map<std::pair<std::string, int>, double> line_start;
  for (const auto& t : out) {
    auto key = std::make_pair(t.utt, t.line_id);
    auto it = line_start.find(key);
    if (it == line_start.end() || t.start_s < it->second) line_start[key] = t.start_s;
  }
  for (auto& t : out) t.line_start_s = line_start[{t.utt, t.line_id}];
  return out;
}

}  // namespace artsep
