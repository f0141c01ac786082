// Command-line pipeline driver: toy data generation, acoustic model training,
// forced alignment and refinement, class-matrix emission, chunk mixing,
// separator training, inference, evaluation, and plot-data export.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "artsep/align.hpp"
#include "artsep/audio.hpp"
#include "artsep/common.hpp"
#include "artsep/hmm.hpp"
#include "artsep/knowledge.hpp"
#include "artsep/lexicon.hpp"
#include "artsep/metrics.hpp"
#include "artsep/mfcc.hpp"
#include "artsep/mixer.hpp"
#include "artsep/par.hpp"
#include "artsep/rng.hpp"
#include "artsep/runconfig.hpp"
#include "artsep/separator.hpp"
#include "artsep/stft.hpp"
#include "artsep/toycorpus.hpp"

namespace fs = std::filesystem;
using namespace artsep;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing

struct GlobalArgs {
  std::string config_path;
  std::vector<std::string> sets;
  int threads = 0;
  bool json_errors = false;
};

RunConfig make_config(const GlobalArgs& g) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& kv : g.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    overrides.push_back({kv.substr(0, eq), kv.substr(eq + 1)});
  }
  return load_run_config(g.config_path, overrides);
}

ModelMeta meta_for(const RunConfig& cfg) {
  return ModelMeta{kToolVersion, config_hash(cfg), cfg.seed};
}

void write_meta_file(const fs::path& path, const ModelMeta& m) {
  const nlohmann::json j{
      {"tool_version", m.tool_version}, {"config_hash", m.config_hash}, {"seed", m.seed}};
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot create " + path.string());
  f << j.dump(2) << "\n";
}

// Sidecar stamp next to a single-file artifact.
void stamp(const fs::path& artifact, const ModelMeta& m) {
  write_meta_file(artifact.string() + ".meta.json", m);
}

// Stamp for a directory full of artifacts.
void stamp_dir(const fs::path& dir, const ModelMeta& m) {
  write_meta_file(dir / "run.meta.json", m);
}

Lexicon lexicon_for(const RunConfig& cfg) {
  if (cfg.lexicon_path.empty()) return Lexicon::builtin_demo();
  return Lexicon::load(cfg.lexicon_path, cfg.manner_path);
}

AudioClip slice_clip(const AudioClip& clip, double start_s, double end_s) {
  const auto n = static_cast<long>(clip.samples.size());
  const long s = std::clamp<long>(std::llround(start_s * clip.sample_rate), 0, n);
  const long e = std::clamp<long>(std::llround(end_s * clip.sample_rate), s, n);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.begin() + s, clip.samples.begin() + e);
  return out;
}

// One corpus line per script line; audio from the speech stem or the mixture.
std::vector<CorpusLine> build_corpus(const std::vector<Utterance>& dataset, const Lexicon& lex,
                                     bool use_mix) {
  std::vector<CorpusLine> corpus;
  for (const auto& u : dataset) {
    const AudioClip& src = use_mix ? u.mix : u.speech;
    for (const auto& line : u.script) {
      CorpusLine cl;
      cl.utt = u.id;
      cl.line_id = line.line_id;
      cl.line_start_s = line.start_s;
      cl.tokens = lex.tokens_for_text(line.text);
      if (cl.tokens.empty())
        throw DataError(u.id + ": script line " + std::to_string(line.line_id) +
                        " has no phonemes");
      cl.feats = mfcc(slice_clip(src, line.start_s, line.end_s));
      corpus.push_back(std::move(cl));
    }
  }
  return corpus;
}

// Clean-speech stretches outside any script line, for the silence model.
std::vector<FrameFeatures> silence_regions(const std::vector<Utterance>& dataset) {
  std::vector<FrameFeatures> regions;
  for (const auto& u : dataset) {
    std::vector<std::pair<double, double>> lines;
    for (const auto& l : u.script) lines.push_back({l.start_s, l.end_s});
    std::sort(lines.begin(), lines.end());
    double cursor = 0.0;
    const double dur = u.speech.duration_s();
    auto emit = [&](double a, double b) {
      if (b - a < 0.3) return;
      regions.push_back(mfcc(slice_clip(u.speech, a, b)));
    };
    for (const auto& [s, e] : lines) {
      emit(cursor, s);
      cursor = std::max(cursor, e);
    }
    emit(cursor, dur);
  }
  return regions;
}

std::map<std::string, std::vector<GlobalToken>> group_tokens(
    const std::vector<GlobalToken>& tokens) {
  std::map<std::string, std::vector<GlobalToken>> by_utt;
  for (const auto& t : tokens) by_utt[t.utt].push_back(t);
  return by_utt;
}

std::size_t stft_frames_for(std::size_t n_samples, const StftParams& p = {}) {
  return n_samples / p.hop + 1;
}

// Windowed script lines, shifted to window-local time.
std::vector<ScriptLine> window_script(const std::vector<ScriptLine>& script, double off_s,
                                      double span_s) {
  std::vector<ScriptLine> out;
  for (const auto& l : script) {
    if (l.end_s <= off_s || l.start_s >= off_s + span_s) continue;
    ScriptLine w = l;
    w.start_s = std::max(l.start_s - off_s, 0.0);
    w.end_s = std::min(l.end_s - off_s, span_s);
    out.push_back(std::move(w));
  }
  return out;
}

// Class-indicator matrix for a window of an utterance, with the optional
// speech-presence column.
MatU8 artic_for_window(const RunConfig& cfg, const std::vector<GlobalToken>& utt_tokens,
                       const std::vector<ScriptLine>& utt_script, double off_s, double span_s,
                       std::size_t frames, int sample_rate, std::size_t hop) {
  const knowledge::FrameGrid grid{frames, hop, sample_rate};
  MatU8 artic =
      knowledge::rasterize(knowledge::window_tokens(utt_tokens, off_s, span_s), grid);
  if (cfg.va_extra_dim()) {
    const MatU8 va =
        knowledge::va_from_script(window_script(utt_script, off_s, span_s), grid);
    artic = knowledge::append_va_column(artic, va);
  }
  return artic;
}

const Utterance& find_utterance(const std::vector<Utterance>& dataset, const std::string& id) {
  for (const auto& u : dataset)
    if (u.id == id) return u;
  throw DataError("utterance not found in split: " + id);
}

// ---------------------------------------------------------------------------
// Commands

void cmd_make_toy(const RunConfig& cfg, const std::string& root_arg) {
  const std::string root = root_arg.empty() ? cfg.dataset_root : root_arg;
  ToyConfig tc;
  tc.seed = cfg.seed;
  generate_toy_corpus(root, tc);
  write_meta_file(fs::path(root) / "meta.json", meta_for(cfg));
  std::cout << "toy corpus written to " << root << " (" << tc.n_train << " train, " << tc.n_val
            << " val, " << tc.n_test << " test utterances)\n";
}

void cmd_align_train(const RunConfig& cfg, const std::string& split, const std::string& audio,
                     const std::string& model_out) {
  const Lexicon lex = lexicon_for(cfg);
  const auto dataset = load_dataset(cfg.dataset_root, split);
  const auto corpus = build_corpus(dataset, lex, audio == "mix");

  GmmHmmSet models = flat_start(corpus);
  const EmResult em = train_em(models, corpus, cfg.em_iters);
  models = em.models;

  const auto sil_feats = silence_regions(dataset);
  if (!sil_feats.empty() && cfg.sil_iters > 0)
    models.sil = train_sil(sil_feats, models, cfg.sil_iters);

  fs::create_directories(fs::path(model_out).parent_path());
  save_hmm_set(model_out, models, meta_for(cfg));
  stamp(model_out, meta_for(cfg));

  std::cout << "trained on " << corpus.size() << " lines (" << em.total_frames << " frames)\n";
  for (std::size_t i = 0; i < em.ll_per_iter.size(); ++i)
    std::cout << "  iter " << i << " log-likelihood/frame "
              << em.ll_per_iter[i] / static_cast<double>(em.total_frames) << "\n";
  std::cout << "model written to " << model_out << "\n";
}

void cmd_align(const RunConfig& cfg, const std::string& model_path, const std::string& split,
               const std::string& audio, std::string out_file, bool no_sil) {
  const Lexicon lex = lexicon_for(cfg);
  const auto dataset = load_dataset(cfg.dataset_root, split);
  const auto corpus = build_corpus(dataset, lex, audio == "mix");
  const GmmHmmSet models = load_hmm_set(model_path);
  if (!corpus.empty() && models.feature_fingerprint != corpus.front().feats.config.fingerprint())
    throw DataError("model was trained on a different feature configuration");

  const auto aligned = align_corpus(corpus, models, !no_sil);
  std::vector<GlobalToken> tokens;
  for (const auto& line : aligned) {
    auto g = line_to_global(line.result.tokens, line.line_start_s, line.utt);
    tokens.insert(tokens.end(), g.begin(), g.end());
  }

  if (out_file.empty()) out_file = (fs::path(cfg.out_dir) / ("align_" + split + ".jsonl")).string();
  fs::create_directories(fs::path(out_file).parent_path());
  save_alignments_jsonl(out_file, tokens);
  stamp(out_file, meta_for(cfg));
  std::cout << "aligned " << aligned.size() << " lines -> " << out_file << "\n";
}

void cmd_align_refine(const RunConfig& cfg, const std::string& model_path,
                      const std::string& split, const std::string& model_out,
                      std::string align_out) {
  const Lexicon lex = lexicon_for(cfg);
  const auto dataset = load_dataset(cfg.dataset_root, split);
  const auto corpus = build_corpus(dataset, lex, true);  // refine on mixtures
  const GmmHmmSet model1 = load_hmm_set(model_path);

  const TwoStageResult res = two_stage_fa(model1, corpus, cfg.refine_iters, cfg.em_iters, true);

  fs::create_directories(fs::path(model_out).parent_path());
  save_hmm_set(model_out, res.models, meta_for(cfg));
  stamp(model_out, meta_for(cfg));

  std::vector<GlobalToken> tokens;
  for (const auto& line : res.alignments) {
    auto g = line_to_global(line.result.tokens, line.line_start_s, line.utt);
    tokens.insert(tokens.end(), g.begin(), g.end());
  }
  if (align_out.empty())
    align_out = (fs::path(cfg.out_dir) / ("align2_" + split + ".jsonl")).string();
  fs::create_directories(fs::path(align_out).parent_path());
  save_alignments_jsonl(align_out, tokens);
  stamp(align_out, meta_for(cfg));

  const double s1 = corpus_align_score_per_frame(corpus, model1, true);
  const double s2 = corpus_align_score_per_frame(corpus, res.models, true);
  std::cout << "refined model written to " << model_out << "\n"
            << "alignments -> " << align_out << "\n"
            << "mixture score/frame: before " << s1 << ", after " << s2 << "\n";
}

void cmd_vectors(const RunConfig& cfg, const std::string& align_file, const std::string& split,
                 std::string out_dir, bool debug_json) {
  const auto dataset = load_dataset(cfg.dataset_root, split);
  const auto by_utt = group_tokens(load_alignments_jsonl(align_file));

  if (out_dir.empty()) out_dir = (fs::path(cfg.out_dir) / "artic" / split).string();
  fs::create_directories(out_dir);

  for (const auto& u : dataset) {
    const auto it = by_utt.find(u.id);
    const std::vector<GlobalToken> empty;
    const auto& tokens = it == by_utt.end() ? empty : it->second;
    const MatU8 artic =
        artic_for_window(cfg, tokens, u.script, 0.0, u.mix.duration_s(),
                         stft_frames_for(u.mix.samples.size()), u.mix.sample_rate,
                         StftParams{}.hop);
    const fs::path base = fs::path(out_dir) / (u.id + ".artf");
    save_artf(base.string(), artic);
    if (debug_json) knowledge::save_matrix_json(base.string() + ".json", artic);
  }
  stamp_dir(out_dir, meta_for(cfg));
  std::cout << "class matrices for " << dataset.size() << " utterances -> " << out_dir << "\n";
}

void cmd_mix(const RunConfig& cfg, const std::string& split, int n_arg, std::string out_dir) {
  const auto dataset = load_dataset(cfg.dataset_root, split);
  MixSpec spec;
  spec.seed = cfg.seed;
  spec.chunk_s = cfg.chunk_seconds;
  const int n = n_arg > 0 ? n_arg : cfg.mix_chunks;

  if (out_dir.empty()) out_dir = (fs::path(cfg.out_dir) / "chunks").string();
  fs::create_directories(out_dir);
  std::ofstream prov_file(fs::path(out_dir) / "provenance.jsonl", std::ios::binary);
  if (!prov_file) throw DataError("cannot create provenance file in " + out_dir);

  for (int i = 0; i < n; ++i) {
    const MixChunk chunk = sample_chunk(dataset, spec, static_cast<std::uint64_t>(i));
    char name[32];
    std::snprintf(name, sizeof name, "chunk_%05d", i);
    AudioClip clip;
    clip.sample_rate = chunk.sample_rate;
    clip.samples = chunk.mixture;
    write_wav((fs::path(out_dir) / (std::string(name) + "_mix.wav")).string(), clip);
    clip.samples = chunk.target;
    write_wav((fs::path(out_dir) / (std::string(name) + "_target.wav")).string(), clip);
    prov_file << provenance_to_json(chunk.prov).dump() << "\n";
  }
  stamp_dir(out_dir, meta_for(cfg));
  std::cout << n << " chunks -> " << out_dir << "\n";
}

void cmd_sep_train(const RunConfig& cfg, const std::string& align_file, const std::string& split,
                   std::string ckpt_out, std::string loss_csv) {
  const auto dataset = load_dataset(cfg.dataset_root, split);
  const auto by_utt = group_tokens(load_alignments_jsonl(align_file));

  const StftParams sp;
  const std::size_t d = sp.n_fft / 2 + 1;
  Rng net_rng = Rng::stream(cfg.seed, 0x53455000000001ULL);
  Rng proj_rng = Rng::stream(cfg.seed, 0x53455000000002ULL);
  auto estimator = std::make_unique<RefNetEstimator>(
      RefNet::init(d, static_cast<std::size_t>(cfg.hidden), net_rng));
  knowledge::Projector proj = knowledge::Projector::init(cfg.proj_in_dim(), d, proj_rng);

  TrainConfig tc;
  tc.chunk_seconds = cfg.chunk_seconds;
  tc.batch_size = cfg.batch_size;
  tc.steps = cfg.train_steps;
  tc.lr = cfg.learning_rate;
  tc.seed = cfg.seed;
  SepTrainer trainer(std::move(estimator), std::move(proj), tc);

  MixSpec spec;
  spec.seed = cfg.seed;
  spec.chunk_s = cfg.chunk_seconds;

  if (ckpt_out.empty()) ckpt_out = (fs::path(cfg.out_dir) / "sep.ckpt").string();
  if (loss_csv.empty()) loss_csv = (fs::path(cfg.out_dir) / "loss.csv").string();
  fs::create_directories(fs::path(ckpt_out).parent_path());
  fs::create_directories(fs::path(loss_csv).parent_path());
  std::ofstream csv(loss_csv, std::ios::binary);
  if (!csv) throw DataError("cannot create " + loss_csv);
  csv << "step,loss\n";

  const std::vector<GlobalToken> no_tokens;
  for (int step = 0; step < tc.steps; ++step) {
    std::vector<TrainItem> batch;
    batch.reserve(tc.batch_size);
    for (int b = 0; b < tc.batch_size; ++b) {
      const auto draw = static_cast<std::uint64_t>(step) * tc.batch_size + b;
      const MixChunk chunk = sample_chunk(dataset, spec, draw);

      AudioClip clip;
      clip.sample_rate = chunk.sample_rate;
      clip.samples = chunk.mixture;
      const Spectrogram mix_spec = stft(clip, sp);
      clip.samples = chunk.target;
      const Spectrogram tgt_spec = stft(clip, sp);

      const Utterance& ua = find_utterance(dataset, chunk.prov.utt_a);
      const auto it = by_utt.find(chunk.prov.utt_a);
      const auto& tokens = it == by_utt.end() ? no_tokens : it->second;
      TrainItem item;
      item.mix_mag = magnitude(mix_spec);
      item.target_mag = magnitude(tgt_spec);
      item.artic = artic_for_window(cfg, tokens, ua.script, chunk.prov.off_a_s, spec.chunk_s,
                                    mix_spec.frames, chunk.sample_rate, sp.hop);
      batch.push_back(std::move(item));
    }
    const double loss = trainer.train_step(batch);
    char row[64];
    std::snprintf(row, sizeof row, "%d,%.12g\n", step, loss);
    csv << row;
  }
  csv.close();

  const auto& net = dynamic_cast<const RefNetEstimator&>(trainer.model()).net();
  save_checkpoint(ckpt_out, net, trainer.proj(), meta_for(cfg));
  stamp(ckpt_out, meta_for(cfg));
  stamp(loss_csv, meta_for(cfg));
  std::cout << "checkpoint -> " << ckpt_out << "\nloss log -> " << loss_csv << "\n";
}

void cmd_separate(const RunConfig& cfg, const std::string& ckpt_path,
                  const std::string& align_file, const std::string& split, std::string out_dir,
                  bool whole_utterance, bool zero_knowledge) {
  const auto dataset = load_dataset(cfg.dataset_root, split);
  const auto by_utt = group_tokens(load_alignments_jsonl(align_file));
  const SepCheckpoint ck = load_checkpoint(ckpt_path);
  const RefNetEstimator estimator(ck.net);
  const StftParams sp;

  if (out_dir.empty()) out_dir = (fs::path(cfg.out_dir) / "est" / split).string();
  fs::create_directories(out_dir);

  const std::vector<GlobalToken> no_tokens;
  for (const auto& u : dataset) {
    const auto it = by_utt.find(u.id);
    const auto& tokens = it == by_utt.end() ? no_tokens : it->second;

    auto artic_for = [&](double off, double span, std::size_t frames) {
      if (zero_knowledge) return MatU8(frames, ck.proj.w.rows, 0);
      MatU8 a = artic_for_window(cfg, tokens, u.script, off, span, frames, u.mix.sample_rate,
                                 sp.hop);
      if (a.cols != ck.proj.w.rows)
        throw ConfigError("va_mode does not match the checkpoint's conditioning width");
      return a;
    };

    AudioClip est;
    est.sample_rate = u.mix.sample_rate;
    est.samples.assign(u.mix.samples.size(), 0.0);
    if (whole_utterance) {
      const std::size_t frames = stft_frames_for(u.mix.samples.size(), sp);
      est = extract(estimator, ck.proj, u.mix, artic_for(0.0, u.mix.duration_s(), frames), sp,
                    cfg.chunk_seconds);
    } else {
      // Process only the segments that contain speech; the rest stays silent.
      for (const auto& [seg_s, seg_e] : eval_segments(u)) {
        const AudioClip piece = slice_clip(u.mix, seg_s, seg_e);
        if (piece.samples.empty()) continue;
        const std::size_t frames = stft_frames_for(piece.samples.size(), sp);
        const AudioClip out = extract(estimator, ck.proj, piece,
                                      artic_for(seg_s, seg_e - seg_s, frames), sp,
                                      cfg.chunk_seconds);
        const auto at = static_cast<std::size_t>(std::llround(seg_s * u.mix.sample_rate));
        for (std::size_t i = 0; i < out.samples.size() && at + i < est.samples.size(); ++i)
          est.samples[at + i] = out.samples[i];
      }
    }
    write_wav((fs::path(out_dir) / (u.id + ".wav")).string(), est);
  }
  stamp_dir(out_dir, meta_for(cfg));
  std::cout << "estimates for " << dataset.size() << " utterances -> " << out_dir << "\n";
}

void cmd_eval(const RunConfig& cfg, const std::string& est_dir, const std::string& align_file,
              const std::string& split, std::string csv_out, std::string json_out) {
  const auto dataset = load_dataset(cfg.dataset_root, split);
  const auto by_utt = group_tokens(load_alignments_jsonl(align_file));

  std::vector<EvalUtterance> inputs;
  for (const auto& u : dataset) {
    EvalUtterance e;
    e.utt = u.id;
    e.estimate = read_wav((fs::path(est_dir) / (u.id + ".wav")).string());
    e.reference = u.speech;
    if (const auto it = by_utt.find(u.id); it != by_utt.end()) e.tokens = it->second;
    inputs.push_back(std::move(e));
  }
  const CorpusEval result = evaluate_corpus(inputs);

  if (csv_out.empty()) csv_out = (fs::path(cfg.out_dir) / "results.csv").string();
  if (json_out.empty()) json_out = (fs::path(cfg.out_dir) / "results.json").string();
  fs::create_directories(fs::path(csv_out).parent_path());
  fs::create_directories(fs::path(json_out).parent_path());
  write_results_csv(csv_out, result);
  write_results_json(json_out, result, meta_for(cfg));
  stamp(csv_out, meta_for(cfg));
  stamp(json_out, meta_for(cfg));

  std::cout << "mean SDR " << report_db(result.mean_sdr) << " dB, mean SiSDR "
            << report_db(result.mean_sisdr) << " dB over " << inputs.size() << " utterances\n"
            << "results -> " << csv_out << ", " << json_out << "\n";
}

void cmd_plot_align(const RunConfig& cfg, const std::string& utt, const std::string& split,
                    const std::vector<std::string>& labeled_aligns, std::string out_dir,
                    int stride_frames, int stride_bins) {
  const auto dataset = load_dataset(cfg.dataset_root, split);
  const Utterance& u = find_utterance(dataset, utt);

  if (out_dir.empty()) out_dir = (fs::path(cfg.out_dir) / "plot").string();
  fs::create_directories(out_dir);

  const Spectrogram spec = stft(u.mix);
  const fs::path spec_csv = fs::path(out_dir) / (utt + "_spectrogram.csv");
  {
    std::ofstream f(spec_csv, std::ios::binary);
    if (!f) throw DataError("cannot create " + spec_csv.string());
    f << "time_s,bin,log_mag\n";
    for (std::size_t fr = 0; fr < spec.frames; fr += stride_frames)
      for (std::size_t b = 0; b < spec.bins; b += stride_bins) {
        char row[64];
        std::snprintf(row, sizeof row, "%.6f,%zu,%.5f\n", spec.frame_time(fr), b,
                      std::log10(std::abs(spec.at(fr, b)) + 1e-12));
        f << row;
      }
  }

  const fs::path bounds_csv = fs::path(out_dir) / (utt + "_boundaries.csv");
  {
    std::ofstream f(bounds_csv, std::ios::binary);
    if (!f) throw DataError("cannot create " + bounds_csv.string());
    f << "label,line,i,manner,phoneme,start_s,end_s\n";
    for (const auto& spec_arg : labeled_aligns) {
      const auto eq = spec_arg.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--alignments expects label=path, got '" + spec_arg + "'");
      const std::string label = spec_arg.substr(0, eq);
      for (const auto& t : load_alignments_jsonl(spec_arg.substr(eq + 1))) {
        if (t.utt != utt) continue;
        char row[160];
        std::snprintf(row, sizeof row, "%s,%d,%d,%s,%s,%.4f,%.4f\n", label.c_str(), t.line_id,
                      t.token_index, to_string(t.manner), t.phoneme.c_str(), t.start_s, t.end_s);
        f << row;
      }
    }
  }
  stamp(spec_csv, meta_for(cfg));
  stamp(bounds_csv, meta_for(cfg));
  std::cout << "plot data -> " << spec_csv.string() << ", " << bounds_csv.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  GlobalArgs g;
  CLI::App app{"knowledge-conditioned speech extraction pipeline"};
  app.require_subcommand(1);
  app.add_option("--config", g.config_path, "key = value config file");
  app.add_option("--set", g.sets, "config override, key=value (repeatable)")
      ->take_all()
      ->expected(-1);
  app.add_option("--threads", g.threads, "cap worker threads (0 = all)");
  app.add_flag("--json-errors", g.json_errors, "report errors as JSON on stderr");

  // make-toy
  auto* c_toy = app.add_subcommand("make-toy", "generate the deterministic toy dataset");
  std::string toy_root;
  c_toy->add_option("--root", toy_root, "dataset root (default: config dataset_root)");

  // align-train
  auto* c_atrain = app.add_subcommand("align-train", "flat start + acoustic model training");
  std::string at_split = "train", at_audio = "speech", at_model = "";
  c_atrain->add_option("--split", at_split);
  c_atrain->add_option("--audio", at_audio)->check(CLI::IsMember({"speech", "mix"}));
  c_atrain->add_option("--model-out", at_model);

  // align
  auto* c_align = app.add_subcommand("align", "forced alignment of a split");
  std::string al_model, al_split = "train", al_audio = "speech", al_out;
  bool al_nosil = false;
  c_align->add_option("--model", al_model)->required();
  c_align->add_option("--split", al_split);
  c_align->add_option("--audio", al_audio)->check(CLI::IsMember({"speech", "mix"}));
  c_align->add_option("--out-file", al_out);
  c_align->add_flag("--no-sil", al_nosil, "disallow optional silence between tokens");

  // align-refine
  auto* c_refine = app.add_subcommand("align-refine", "retrain on mixtures and re-align");
  std::string rf_model, rf_split = "test", rf_model_out, rf_align_out;
  c_refine->add_option("--model", rf_model)->required();
  c_refine->add_option("--split", rf_split);
  c_refine->add_option("--model-out", rf_model_out);
  c_refine->add_option("--align-out", rf_align_out);

  // vectors
  auto* c_vec = app.add_subcommand("vectors", "rasterize alignments to class matrices");
  std::string vec_align, vec_split = "test", vec_out;
  bool vec_json = false;
  c_vec->add_option("--alignments", vec_align)->required();
  c_vec->add_option("--split", vec_split);
  c_vec->add_option("--out-dir", vec_out);
  c_vec->add_flag("--json", vec_json, "also dump matrices as JSON");

  // mix
  auto* c_mix = app.add_subcommand("mix", "emit remixed training chunks with provenance");
  std::string mix_split = "train", mix_out;
  int mix_n = 0;
  c_mix->add_option("--split", mix_split);
  c_mix->add_option("--n", mix_n, "number of chunks (default: config mix_chunks)");
  c_mix->add_option("--out-dir", mix_out);

  // sep-train
  auto* c_strain = app.add_subcommand("sep-train", "train the mask estimator and projector");
  std::string st_align, st_split = "train", st_ckpt, st_csv;
  c_strain->add_option("--alignments", st_align)->required();
  c_strain->add_option("--split", st_split);
  c_strain->add_option("--ckpt-out", st_ckpt);
  c_strain->add_option("--loss-csv", st_csv);

  // separate
  auto* c_sep = app.add_subcommand("separate", "extract speech from mixtures");
  std::string sp_ckpt, sp_align, sp_split = "test", sp_out;
  bool sp_whole = false, sp_zero = false;
  c_sep->add_option("--ckpt", sp_ckpt)->required();
  c_sep->add_option("--alignments", sp_align)->required();
  c_sep->add_option("--split", sp_split);
  c_sep->add_option("--out-dir", sp_out);
  c_sep->add_flag("--whole-utterance", sp_whole, "process whole files, not speech segments");
  c_sep->add_flag("--zero-knowledge", sp_zero, "feed an all-zero class matrix (control)");

  // eval
  auto* c_eval = app.add_subcommand("eval", "SDR/SiSDR and per-class results");
  std::string ev_est, ev_align, ev_split = "test", ev_csv, ev_json;
  c_eval->add_option("--est-dir", ev_est)->required();
  c_eval->add_option("--alignments", ev_align)->required();
  c_eval->add_option("--split", ev_split);
  c_eval->add_option("--csv", ev_csv);
  c_eval->add_option("--json", ev_json);

  // plot-align
  auto* c_plot = app.add_subcommand("plot-align", "emit spectrogram + boundary CSVs");
  std::string pl_utt, pl_split = "test", pl_out;
  std::vector<std::string> pl_aligns;
  int pl_sf = 2, pl_sb = 8;
  c_plot->add_option("--utt", pl_utt)->required();
  c_plot->add_option("--split", pl_split);
  c_plot->add_option("--alignments", pl_aligns, "label=path (repeatable)")
      ->take_all()
      ->expected(-1);
  c_plot->add_option("--out-dir", pl_out);
  c_plot->add_option("--stride-frames", pl_sf);
  c_plot->add_option("--stride-bins", pl_sb);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (g.threads > 0) par::set_max_threads(g.threads);
    const RunConfig cfg = make_config(g);

    if (app.got_subcommand(c_toy)) cmd_make_toy(cfg, toy_root);
    if (app.got_subcommand(c_atrain)) {
      const std::string out =
          at_model.empty() ? (fs::path(cfg.out_dir) / "model1.ahmm").string() : at_model;
      cmd_align_train(cfg, at_split, at_audio, out);
    }
    if (app.got_subcommand(c_align)) cmd_align(cfg, al_model, al_split, al_audio, al_out, al_nosil);
    if (app.got_subcommand(c_refine)) {
      const std::string out =
          rf_model_out.empty() ? (fs::path(cfg.out_dir) / "model2.ahmm").string() : rf_model_out;
      cmd_align_refine(cfg, rf_model, rf_split, out, rf_align_out);
    }
    if (app.got_subcommand(c_vec)) cmd_vectors(cfg, vec_align, vec_split, vec_out, vec_json);
    if (app.got_subcommand(c_mix)) cmd_mix(cfg, mix_split, mix_n, mix_out);
    if (app.got_subcommand(c_strain)) cmd_sep_train(cfg, st_align, st_split, st_ckpt, st_csv);
    if (app.got_subcommand(c_sep))
      cmd_separate(cfg, sp_ckpt, sp_align, sp_split, sp_out, sp_whole, sp_zero);
    if (app.got_subcommand(c_eval)) cmd_eval(cfg, ev_est, ev_align, ev_split, ev_csv, ev_json);
    if (app.got_subcommand(c_plot))
      cmd_plot_align(cfg, pl_utt, pl_split, pl_aligns, pl_out, pl_sf, pl_sb);
    return 0;
  } catch (const ConfigError& e) {
    if (g.json_errors)
      std::cerr << nlohmann::json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
    else
      std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    if (g.json_errors)
      std::cerr << nlohmann::json{{"error", "data"}, {"message", e.what()}}.dump() << "\n";
    else
      std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    if (g.json_errors)
      std::cerr << nlohmann::json{{"error", "numerical"}, {"message", e.what()}}.dump() << "\n";
    else
      std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    if (g.json_errors)
      std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    else
      std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
