#include "artsep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "artsep/par.hpp"

namespace artsep {

namespace {

constexpr double kResidualFloor = 1e-30;
constexpr double kInf = std::numeric_limits<double>::infinity();

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

void check_pair(std::span<const double> estimate, std::span<const double> reference) {
  if (estimate.size() != reference.size())
    throw DataError("metric inputs differ in length: " + std::to_string(estimate.size()) +
                    " vs " + std::to_string(reference.size()));
  if (reference.empty()) throw DataError("metric inputs are empty");
}

std::string format_db(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", report_db(v));
  return buf;
}

}  // namespace

double sdr(std::span<const double> estimate, std::span<const double> reference) {
  check_pair(estimate, reference);
  const double ref_e = energy(reference);
  if (ref_e < kResidualFloor) throw DataError("sdr: reference has zero energy");
  double res_e = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - estimate[i];
    res_e += d * d;
  }
  if (res_e < kResidualFloor) return kInf;
  return 10.0 * std::log10(ref_e / res_e);
}

double si_sdr(std::span<const double> estimate, std::span<const double> reference) {
  check_pair(estimate, reference);
  const std::size_t n = reference.size();
  double me = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    me += estimate[i];
    mr += reference[i];
  }
  me /= static_cast<double>(n);
  mr /= static_cast<double>(n);

  double dot = 0.0, ref_e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = estimate[i] - me;
    const double r = reference[i] - mr;
    dot += e * r;
    ref_e += r * r;
  }
  if (ref_e < kResidualFloor) throw DataError("si_sdr: reference has zero energy");

  const double alpha = dot / ref_e;
  double target_e = 0.0, err_e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = alpha * (reference[i] - mr);
    const double d = (estimate[i] - me) - t;
    target_e += t * t;
    err_e += d * d;
  }
  if (err_e < kResidualFloor) return kInf;
  if (target_e < kResidualFloor) return -kInf;
  return 10.0 * std::log10(target_e / err_e);
}

std::optional<double> per_category_sdr(std::span<const double> estimate,
                                       std::span<const double> reference,
                                       const std::vector<GlobalToken>& alignments,
                                       Manner category, int sample_rate) {
  check_pair(estimate, reference);
  const long n = static_cast<long>(reference.size());

  // Rectangular time-domain mask; intervals quantized at sample resolution.
  std::vector<bool> keep(reference.size(), false);
  bool any = false;
  for (const auto& t : alignments) {
    if (t.manner != category) continue;
    const long s = std::clamp<long>(std::llround(t.start_s * sample_rate), 0, n);
    const long e = std::clamp<long>(std::llround(t.end_s * sample_rate), 0, n);
    for (long i = s; i < e; ++i) keep[i] = true;
    if (e > s) any = true;
  }
  if (!any) return std::nullopt;

  std::vector<double> est_m(reference.size(), 0.0), ref_m(reference.size(), 0.0);
  for (long i = 0; i < n; ++i)
    if (keep[i]) {
      est_m[i] = estimate[i];
      ref_m[i] = reference[i];
    }
  return sdr(est_m, ref_m);
}

CorpusEval evaluate_corpus(const std::vector<EvalUtterance>& inputs) {
  if (inputs.empty()) throw DataError("evaluate_corpus: no utterances");
  CorpusEval out;
  out.per_utt.resize(inputs.size());

  const long n = static_cast<long>(inputs.size());
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
  for (long i = 0; i < n; ++i) {
    const EvalUtterance& u = inputs[i];
    EvalResult& r = out.per_utt[i];
    r.utt = u.utt;
    r.sdr_db = sdr(u.estimate.samples, u.reference.samples);
    r.sisdr_db = si_sdr(u.estimate.samples, u.reference.samples);
    for (int c = 0; c < kNumManners; ++c)
      r.per_cat[c] = per_category_sdr(u.estimate.samples, u.reference.samples, u.tokens,
                                      static_cast<Manner>(c), u.reference.sample_rate);
  }

  double sum_sdr = 0.0, sum_sisdr = 0.0;
  std::array<double, kNumManners> cat_sum{};
  std::array<int, kNumManners> cat_n{};
  for (const auto& r : out.per_utt) {
    sum_sdr += report_db(r.sdr_db);
    sum_sisdr += report_db(r.sisdr_db);
    for (int c = 0; c < kNumManners; ++c)
      if (r.per_cat[c]) {
        cat_sum[c] += report_db(*r.per_cat[c]);
        ++cat_n[c];
      }
  }
  out.mean_sdr = sum_sdr / static_cast<double>(inputs.size());
  out.mean_sisdr = sum_sisdr / static_cast<double>(inputs.size());
  for (int c = 0; c < kNumManners; ++c)
    if (cat_n[c]) out.mean_per_cat[c] = cat_sum[c] / cat_n[c];
  return out;
}

double report_db(double v) {
  if (v > kSdrReportCap) return kSdrReportCap;
  if (v < -kSdrReportCap) return -kSdrReportCap;
  return v;
}

void write_results_csv(const std::string& path, const CorpusEval& eval) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot create results file: " + path);
  f << "utt,sdr_db,sisdr_db";
  for (Manner m : kReportOrder) f << "," << to_string(m);
  f << "\n";

  auto write_row = [&f](const std::string& name, double s, double si,
                        const std::array<std::optional<double>, kNumManners>& cats) {
    f << name << "," << format_db(s) << "," << format_db(si);
    for (Manner m : kReportOrder) {
      f << ",";
      const auto& v = cats[static_cast<int>(m)];
      if (v) f << format_db(*v);
    }
    f << "\n";
  };

  for (const auto& r : eval.per_utt) write_row(r.utt, r.sdr_db, r.sisdr_db, r.per_cat);
  write_row("mean", eval.mean_sdr, eval.mean_sisdr, eval.mean_per_cat);
}

void write_results_json(const std::string& path, const CorpusEval& eval, const ModelMeta& meta) {
  nlohmann::json utts = nlohmann::json::array();
  auto cats_json = [](const std::array<std::optional<double>, kNumManners>& cats) {
    nlohmann::json obj = nlohmann::json::object();
    for (Manner m : kReportOrder)
      if (const auto& v = cats[static_cast<int>(m)]) obj[to_string(m)] = report_db(*v);
    return obj;
  };
  for (const auto& r : eval.per_utt)
    utts.push_back({{"utt", r.utt},
                    {"sdr_db", report_db(r.sdr_db)},
                    {"sisdr_db", report_db(r.sisdr_db)},
                    {"per_category", cats_json(r.per_cat)}});

  const nlohmann::json j{{"tool_version", meta.tool_version},
                         {"config_hash", meta.config_hash},
                         {"seed", meta.seed},
                         {"mean",
                          {{"sdr_db", report_db(eval.mean_sdr)},
                           {"sisdr_db", report_db(eval.mean_sisdr)},
                           {"per_category", cats_json(eval.mean_per_cat)}}},
                         {"utterances", utts}};
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot create results file: " + path);
  f << j.dump(2) << "\n";
}

}  // namespace artsep
