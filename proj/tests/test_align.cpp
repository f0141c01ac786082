#include <cmath>
#include <functional>
#include <vector>

#include <doctest.h>

#include "artsep/align.hpp"
#include "artsep/par.hpp"
#include "artsep/rng.hpp"
#include "testutil.hpp"

using namespace artsep;

namespace {

// Exhaustive-path oracle for forced alignment without silence: every way of
// distributing N frames over the 5L chain states, scored with the same float
// association the dynamic program uses.
struct BrutePath {
  double score = -std::numeric_limits<double>::infinity();
  std::vector<int> counts;
  bool tie = false;
};

BrutePath brute_force_align(const FrameFeatures& feats, const std::vector<MannerToken>& tokens,
                            const GmmHmmSet& models) {
  std::vector<const GmmState*> states;
  for (const auto& t : tokens)
    for (const auto& s : models.model_for(t.manner).states) states.push_back(&s);
  const std::size_t J = states.size();
  const std::size_t N = feats.frames;
  const MatD logb = gmm_log_obs(states, feats);

  BrutePath best;
  std::vector<int> counts(J, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t j, std::size_t left) {
    if (j + 1 == J) {
      if (left == 0) return;
      counts[j] = static_cast<int>(left);
      // Forward evaluation in the dynamic program's association order.
      double score = logb(0, 0);
      std::size_t state = 0, used = 1;
      for (std::size_t t = 1; t < N; ++t) {
        if (used < static_cast<std::size_t>(counts[state])) {
          score = (score + states[state]->log_self) + logb(t, state);
          ++used;
        } else {
          ++state;
          score = (score + states[state - 1]->log_next) + logb(t, state);
          used = 1;
        }
      }
      score = score + states[J - 1]->log_next;
      if (score > best.score) {
        best.score = score;
        best.counts = counts;
        best.tie = false;
      } else if (score == best.score && counts != best.counts) {
        best.tie = true;
      }
      return;
    }
    for (std::size_t c = 1; left >= c + (J - 1 - j); ++c) {
      counts[j] = static_cast<int>(c);
      rec(j + 1, left - c);
    }
  };
  rec(0, N);
  return best;
}

std::vector<std::pair<long, long>> boundaries_from_counts(const std::vector<int>& counts,
                                                          std::size_t n_tokens) {
  std::vector<std::pair<long, long>> out;
  long at = 0;
  for (std::size_t i = 0; i < n_tokens; ++i) {
    long start = at + 1;
    for (int s = 0; s < kStatesPerManner; ++s) at += counts[i * kStatesPerManner + s];
    out.push_back({start, at});
  }
  return out;
}

}  // namespace

TEST_SUITE("align") {

TEST_CASE("viterbi matches exhaustive path enumeration bit-exactly") {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t dim = 2;
    const GmmHmmSet models = testutil::random_model_set(rng, dim);
    const std::size_t L = 1 + rng.below(2);
    const std::size_t N = 5 * L + rng.below(13 - 5 * L);
    std::vector<MannerToken> tokens;
    for (std::size_t i = 0; i < L; ++i)
      tokens.push_back({static_cast<Manner>(rng.below(kNumManners)), "p"});
    const FrameFeatures feats = testutil::random_features(rng, N, dim, 2.0);

    const AlignResult got = forced_align(feats, tokens, models, false);
    const BrutePath want = brute_force_align(feats, tokens, models);

    CHECK(got.score == want.score);
    if (!want.tie) {
      const auto bounds = boundaries_from_counts(want.counts, L);
      for (std::size_t i = 0; i < L; ++i) {
        CHECK(got.tokens[i].start_frame == bounds[i].first);
        CHECK(got.tokens[i].end_frame == bounds[i].second);
      }
    }
  }
}

TEST_CASE("token indices, manners and phonemes pass through") {
  Rng rng(42);
  const GmmHmmSet models = testutil::random_model_set(rng, 2);
  const std::vector<MannerToken> tokens{{Manner::NAS, "m"}, {Manner::VWL, "A:"}};
  const FrameFeatures feats = testutil::random_features(rng, 24, 2);
  const AlignResult res = forced_align(feats, tokens, models, false);
  REQUIRE(res.tokens.size() == 2);
  CHECK(res.tokens[0].token_index == 1);
  CHECK(res.tokens[1].token_index == 2);
  CHECK(res.tokens[0].manner == Manner::NAS);
  CHECK(res.tokens[1].phoneme == "A:");
  CHECK(res.tokens[0].start_frame == 1);
  CHECK(res.tokens[1].end_frame == 24);
  CHECK(res.tokens[0].end_frame + 1 == res.tokens[1].start_frame);
}

TEST_CASE("ties resolve to the earliest boundaries") {
  // All states identical and all transition probabilities equal: every path
  // ties, so each state should be entered at the first opportunity.
  GmmHmmSet models;
  models.dim = 1;
  models.var_floor = {1e-8};
  Gaussian g;
  g.mean = {0.0};
  g.var = {1.0};
  g.refresh_log_norm();
  GmmState st;
  st.comp = {g};
  st.log_weight = {0.0};
  st.log_self = std::log(0.5);
  st.log_next = std::log(0.5);
  for (int c = 0; c < kNumManners; ++c) {
    models.models[c].cls = c;
    models.models[c].states.assign(kStatesPerManner, st);
  }
  FrameFeatures feats = testutil::make_features(14, 1);  // all zeros
  const std::vector<MannerToken> tokens{{Manner::NAS, "m"}, {Manner::VWL, "@"}};
  const AlignResult res = forced_align(feats, tokens, models, false);
  CHECK(res.tokens[0].start_frame == 1);
  CHECK(res.tokens[0].end_frame == 5);
  CHECK(res.tokens[1].start_frame == 6);
  CHECK(res.tokens[1].end_frame == 14);
}

TEST_CASE("too few frames raises DataError") {
  Rng rng(43);
  const GmmHmmSet models = testutil::random_model_set(rng, 2);
  const std::vector<MannerToken> tokens{{Manner::NAS, "m"}, {Manner::VWL, "@"}};
  const FrameFeatures feats = testutil::random_features(rng, 9, 2);  // needs 10
  CHECK_THROWS_AS(forced_align(feats, tokens, models, false), DataError);
  CHECK_THROWS_AS(forced_align(feats, {}, models, false), DataError);
}

TEST_CASE("optional silence absorbs an inter-token gap") {
  // Class emissions at -4 and +4, silence at 0; the middle zero stretch must
  // go to the silence chain, not to either token.
  GmmHmmSet models;
  models.dim = 1;
  models.var_floor = {1e-8};
  auto state_at = [](double mean) {
    Gaussian g;
    g.mean = {mean};
    g.var = {0.5};
    g.refresh_log_norm();
    GmmState st;
    st.comp = {g};
    st.log_weight = {0.0};
    st.log_self = std::log(0.5);
    st.log_next = std::log(0.5);
    return st;
  };
  for (int c = 0; c < kNumManners; ++c) {
    models.models[c].cls = c;
    models.models[c].states.assign(kStatesPerManner, state_at(c == 0 ? -4.0 : 4.0));
  }
  models.sil = GmmHmm{};
  models.sil->cls = kSilClass;
  models.sil->states.assign(kSilStates, state_at(0.0));

  FrameFeatures feats = testutil::make_features(26, 1);
  for (int t = 0; t < 10; ++t) feats.row(t)[0] = -4.0;
  for (int t = 10; t < 16; ++t) feats.row(t)[0] = 0.0;
  for (int t = 16; t < 26; ++t) feats.row(t)[0] = 4.0;

  const std::vector<MannerToken> tokens{{Manner::NAS, "m"}, {Manner::VWL, "@"}};
  const AlignResult res = forced_align(feats, tokens, models, true);
  CHECK(res.tokens[0].start_frame == 1);
  CHECK(res.tokens[0].end_frame == 10);
  CHECK(res.tokens[1].start_frame == 17);
  CHECK(res.tokens[1].end_frame == 26);
}

TEST_CASE("EM training: monotone log-likelihood and early stop") {
  Rng rng(44);
  const auto corpus = testutil::synthetic_corpus(rng, 6);
  const GmmHmmSet init = flat_start(corpus);
  const EmResult res = train_em(init, corpus, 50);
  REQUIRE(res.ll_per_iter.size() >= 2);
  CHECK(res.ll_per_iter.size() < 50);  // early stop on a well-separated corpus
  const double tol = 1e-6 * static_cast<double>(res.total_frames);
  for (std::size_t i = 1; i < res.ll_per_iter.size(); ++i)
    CHECK(res.ll_per_iter[i] >= res.ll_per_iter[i - 1] - tol);
}

TEST_CASE("EM recovers well-separated class means") {
  Rng rng(45);
  std::vector<CorpusLine> corpus;
  for (int l = 0; l < 8; ++l)
    corpus.push_back(testutil::synthetic_line(
        rng, "u" + std::to_string(l), 0,
        {Manner::NAS, Manner::VWL, Manner::NAS, Manner::VWL}, {20, 20, 20, 20}, 1, 1.0));
  // One line touching every class so flat initialization is legal; its frames
  // come from the same per-class centers, so the recovery claim is unchanged.
  std::vector<Manner> all;
  std::vector<int> lens;
  for (int c = 0; c < kNumManners; ++c) {
    all.push_back(static_cast<Manner>(c));
    lens.push_back(7);
  }
  corpus.push_back(testutil::synthetic_line(rng, "uttx", 0, all, lens, 1, 1.0));
  const GmmHmmSet init = flat_start(corpus);
  const GmmHmmSet trained = train_em(init, corpus, 10).models;

  auto mixture_mean = [](const GmmState& st) {
    double m = 0.0;
    for (std::size_t k = 0; k < st.comp.size(); ++k)
      m += std::exp(st.log_weight[k]) * st.comp[k].mean[0];
    return m;
  };
  // States specialize on noise substructure inside a token, so individual
  // state means scatter around the class center; the scatter must stay well
  // inside the class separation (2.0) and average out across the model.
  for (Manner m : {Manner::NAS, Manner::VWL}) {
    const double center = testutil::class_center(static_cast<int>(m));
    double avg = 0.0;
    for (const auto& st : trained.model_for(m).states) {
      const double mm = mixture_mean(st);
      CHECK(testutil::close(mm, center, 0.8));
      avg += mm;
    }
    avg /= static_cast<double>(trained.model_for(m).states.size());
    CHECK(testutil::close(avg, center, 0.25));
  }
}

TEST_CASE("trained models recover true token boundaries") {
  Rng rng(46);
  const auto corpus = testutil::synthetic_corpus(rng, 6, 3, 0.3);
  const GmmHmmSet trained = train_em(flat_start(corpus), corpus, 8).models;

  // A fresh line with known boundaries.
  Rng rng2(47);
  const std::vector<int> lens{9, 12, 8, 11};
  const auto line = testutil::synthetic_line(
      rng2, "probe", 0, {Manner::NAS, Manner::STP, Manner::VWL, Manner::FRC}, lens, 3, 0.3);
  const AlignResult res = forced_align(line.feats, line.tokens, trained, false);
  long expect_start = 1;
  for (std::size_t i = 0; i < lens.size(); ++i) {
    CHECK(std::abs(res.tokens[i].start_frame - expect_start) <= 2);
    expect_start += lens[i];
  }
  CHECK(res.tokens.back().end_frame == static_cast<long>(line.feats.frames));
}

TEST_CASE("flat_start requires every class to appear") {
  Rng rng(48);
  std::vector<CorpusLine> corpus{
      testutil::synthetic_line(rng, "u0", 0, {Manner::NAS, Manner::NAS}, {10, 10})};
  CHECK_THROWS_AS(flat_start(corpus), DataError);
  try {
    flat_start(corpus);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("APR") != std::string::npos);
  }
}

TEST_CASE("results are identical across thread counts") {
  Rng rng(49);
  const auto corpus = testutil::synthetic_corpus(rng, 5);

  par::set_max_threads(1);
  const EmResult serial = train_em(flat_start(corpus), corpus, 4);
  const auto aligned_serial = align_corpus(corpus, serial.models, false);

  par::set_max_threads(3);
  const EmResult threaded = train_em(flat_start(corpus), corpus, 4);
  const auto aligned_threaded = align_corpus(corpus, threaded.models, false);
  par::set_max_threads(0);

  CHECK(serial.models == threaded.models);
  REQUIRE(serial.ll_per_iter.size() == threaded.ll_per_iter.size());
  for (std::size_t i = 0; i < serial.ll_per_iter.size(); ++i)
    CHECK(serial.ll_per_iter[i] == threaded.ll_per_iter[i]);
  REQUIRE(aligned_serial.size() == aligned_threaded.size());
  for (std::size_t i = 0; i < aligned_serial.size(); ++i) {
    CHECK(aligned_serial[i].result.score == aligned_threaded[i].result.score);
    CHECK(aligned_serial[i].utt == aligned_threaded[i].utt);
  }
}

TEST_CASE("align_corpus keeps corpus order and per-line results") {
  Rng rng(50);
  const auto corpus = testutil::synthetic_corpus(rng, 4);
  const GmmHmmSet trained = train_em(flat_start(corpus), corpus, 4).models;
  const auto aligned = align_corpus(corpus, trained, false);
  REQUIRE(aligned.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(aligned[i].utt == corpus[i].utt);
    CHECK(aligned[i].line_id == corpus[i].line_id);
    const AlignResult direct = forced_align(corpus[i].feats, corpus[i].tokens, trained, false);
    CHECK(aligned[i].result.score == direct.score);
  }
}

TEST_CASE("corpus score per frame matches the definition") {
  Rng rng(51);
  const auto corpus = testutil::synthetic_corpus(rng, 3);
  const GmmHmmSet trained = train_em(flat_start(corpus), corpus, 3).models;
  double total = 0.0;
  std::size_t frames = 0;
  for (const auto& line : corpus) {
    total += forced_align(line.feats, line.tokens, trained, false).score;
    frames += line.feats.frames;
  }
  CHECK(corpus_align_score_per_frame(corpus, trained, false) ==
        doctest::Approx(total / static_cast<double>(frames)).epsilon(1e-12));
}

TEST_CASE("two-stage refinement validates its iteration count") {
  Rng rng(52);
  const auto corpus = testutil::synthetic_corpus(rng, 3);
  const GmmHmmSet m1 = train_em(flat_start(corpus), corpus, 3).models;
  CHECK_THROWS_AS(two_stage_fa(m1, corpus, 0, 3, false), ConfigError);
}

TEST_CASE("two-stage refinement on clean data is a fixed point") {
  Rng rng(53);
  const auto corpus = testutil::synthetic_corpus(rng, 6, 3, 0.3);
  const GmmHmmSet m1 = train_em(flat_start(corpus), corpus, 12).models;
  const auto before = align_corpus(corpus, m1, false);
  const TwoStageResult res = two_stage_fa(m1, corpus, 2, 8, false);
  REQUIRE(res.alignments.size() == before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto& a = before[i].result.tokens;
    const auto& b = res.alignments[i].result.tokens;
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].start_frame == b[t].start_frame);
      CHECK(a[t].end_frame == b[t].end_frame);
    }
  }
}

TEST_CASE("two-stage refinement adapts to corrupted features") {
  Rng rng(54);
  const auto clean = testutil::synthetic_corpus(rng, 6, 3, 0.3);
  const GmmHmmSet m1 = train_em(flat_start(clean), clean, 8).models;

  // "Mixtures": the same lines with an additive offset and extra noise.
  auto noisy = clean;
  Rng nrng(55);
  for (auto& line : noisy)
    for (auto& v : line.feats.v) v += 1.5 + nrng.normal(0.0, 0.4);

  const TwoStageResult res = two_stage_fa(m1, noisy, 2, 6, false);
  const double s1 = corpus_align_score_per_frame(noisy, m1, false);
  const double s2 = corpus_align_score_per_frame(noisy, res.models, false);
  CHECK(s2 >= s1);
}

TEST_CASE("frame indices convert to absolute seconds") {
  std::vector<TokenAlignment> toks(2);
  toks[0] = {1, Manner::NAS, "m", 1, 5, 0};
  toks[1] = {2, Manner::VWL, "@", 6, 12, 0};
  const auto global = line_to_global(toks, 2.5, "u1");
  REQUIRE(global.size() == 2);
  CHECK(global[0].start_s == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(global[0].end_s == doctest::Approx(2.55).epsilon(1e-12));
  CHECK(global[1].start_s == doctest::Approx(2.55).epsilon(1e-12));
  CHECK(global[1].end_s == doctest::Approx(2.62).epsilon(1e-12));
  CHECK(global[0].utt == "u1");
  CHECK(global[0].line_start_s == 2.5);
  CHECK_THROWS_AS(line_to_global(toks, -1.0, "u1"), DataError);
}

TEST_CASE("alignment jsonl round trip") {
  testutil::TempDir tmp("jsonl");
  std::vector<GlobalToken> toks;
  toks.push_back({"u1", 0, 1, Manner::FRC, "D", 0.5, 0.62, 0.5});
  toks.push_back({"u1", 0, 2, Manner::VWL, "@", 0.62, 0.7, 0.5});
  toks.push_back({"u2", 1, 1, Manner::STP, "k", 3.0, 3.2, 3.0});
  save_alignments_jsonl(tmp.file("a.jsonl"), toks);
  const auto back = load_alignments_jsonl(tmp.file("a.jsonl"));
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    CHECK(back[i].utt == toks[i].utt);
    CHECK(back[i].line_id == toks[i].line_id);
    CHECK(back[i].token_index == toks[i].token_index);
    CHECK(back[i].manner == toks[i].manner);
    CHECK(back[i].phoneme == toks[i].phoneme);
    CHECK(back[i].start_s == toks[i].start_s);
    CHECK(back[i].end_s == toks[i].end_s);
    // line_start_s is recovered as the line's earliest token start.
    CHECK(back[i].line_start_s == toks[i].line_start_s);
  }
}

TEST_CASE("silence model trains from out-of-line regions") {
  Rng rng(56);
  const auto corpus = testutil::synthetic_corpus(rng, 4);
  const GmmHmmSet base = train_em(flat_start(corpus), corpus, 3).models;

  // Silence-ish regions centered at -9, distinct from every class center.
  std::vector<FrameFeatures> regions;
  for (int r = 0; r < 4; ++r) {
    FrameFeatures f = testutil::make_features(30, 3);
    for (auto& v : f.v) v = -9.0 + rng.normal(0.0, 0.3);
    regions.push_back(std::move(f));
  }
  const GmmHmm sil = train_sil(regions, base, 4);
  CHECK(sil.cls == kSilClass);
  CHECK(sil.states.size() == kSilStates);
  for (const auto& st : sil.states) {
    double m = 0.0;
    for (std::size_t k = 0; k < st.comp.size(); ++k)
      m += std::exp(st.log_weight[k]) * st.comp[k].mean[0];
    CHECK(m == doctest::Approx(-9.0).epsilon(0.05));
  }
  CHECK_THROWS_AS(train_sil({}, base, 4), DataError);
}

}  // TEST_SUITE
