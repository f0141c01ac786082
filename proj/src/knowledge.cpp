#include "artsep/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "artsep/common.hpp"

namespace artsep::knowledge {

namespace {

// Frame index range that can possibly have its center inside [start, end);
// callers still test the exact predicate per frame.
std::pair<std::size_t, std::size_t> candidate_frames(double start_s, double end_s,
                                                     const FrameGrid& grid) {
  const double fps = static_cast<double>(grid.sample_rate) / static_cast<double>(grid.hop);
  const long lo = static_cast<long>(std::floor(start_s * fps)) - 1;
  const long hi = static_cast<long>(std::ceil(end_s * fps)) + 1;
  const std::size_t a = lo < 0 ? 0 : static_cast<std::size_t>(lo);
  const std::size_t b = hi < 0 ? 0 : std::min(static_cast<std::size_t>(hi + 1), grid.frames);
  return {a, b};
}

}  // namespace

MatU8 rasterize(const std::vector<GlobalToken>& tokens, const FrameGrid& grid) {
  for (const auto& t : tokens)
    if (t.start_s < 0.0 || t.end_s < 0.0)
      throw DataError("rasterize: negative token time in " + t.utt);

  // Overlapping lines are resolved per frame: the token whose line starts
  // latest wins, so a row is always one-hot or zero.
  std::vector<long> winner(grid.frames, -1);
  std::vector<double> winner_line_start(grid.frames, 0.0);
  for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
    const GlobalToken& t = tokens[ti];
    const auto [a, b] = candidate_frames(t.start_s, t.end_s, grid);
    for (std::size_t n = a; n < b; ++n) {
      const double tn = grid.time(n);
      if (tn < t.start_s || tn >= t.end_s) continue;
      if (winner[n] < 0 || t.line_start_s >= winner_line_start[n]) {
        winner[n] = static_cast<long>(ti);
        winner_line_start[n] = t.line_start_s;
      }
    }
  }

  MatU8 out(grid.frames, static_cast<std::size_t>(kNumManners), 0);
  for (std::size_t n = 0; n < grid.frames; ++n)
    if (winner[n] >= 0)
      out(n, static_cast<std::size_t>(tokens[winner[n]].manner)) = 1;
  return out;
}

std::vector<GlobalToken> window_tokens(const std::vector<GlobalToken>& tokens, double off_s,
                                       double span_s) {
  std::vector<GlobalToken> out;
  for (const auto& t : tokens) {
    if (t.end_s <= off_s || t.start_s >= off_s + span_s) continue;
    GlobalToken w = t;
    w.start_s = std::max(t.start_s - off_s, 0.0);
    w.end_s = std::min(t.end_s - off_s, span_s);
    w.line_start_s = t.line_start_s - off_s;
    out.push_back(std::move(w));
  }
  return out;
}

Projector Projector::init(std::size_t in_dim, std::size_t d, Rng& rng) {
  Projector p;
  p.w = MatD(in_dim, d);
  for (auto& x : p.w.v) x = rng.normal(0.0, 0.01);
  p.b.assign(d, 0.0);
  return p;
}

MatD project(const MatU8& matrix, const Projector& proj) {
  if (matrix.cols != proj.w.rows)
    throw DataError("project: matrix has " + std::to_string(matrix.cols) +
                    " classes but projector expects " + std::to_string(proj.w.rows));
  MatD out(matrix.rows, proj.w.cols);
  for (std::size_t n = 0; n < matrix.rows; ++n) {
    double* o = out.row(n);
    std::copy(proj.b.begin(), proj.b.end(), o);
    const std::uint8_t* in = matrix.row(n);
    for (std::size_t c = 0; c < matrix.cols; ++c) {
      if (!in[c]) continue;
      const double* wr = proj.w.row(c);
      for (std::size_t j = 0; j < proj.w.cols; ++j) o[j] += wr[j];
    }
  }
  return out;
}

MatD fuse(const MatD& audio_features, const MatD& projected) {
  if (!audio_features.same_shape(projected))
    throw DataError("fuse: shape mismatch " + std::to_string(audio_features.rows) + "x" +
                    std::to_string(audio_features.cols) + " vs " +
                    std::to_string(projected.rows) + "x" + std::to_string(projected.cols));
  MatD out = audio_features;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += projected.v[i];
  return out;
}

MatU8 va_from_script(const std::vector<ScriptLine>& script, const FrameGrid& grid) {
  MatU8 va(grid.frames, 1, 0);
  for (const auto& line : script) {
    const auto [a, b] = candidate_frames(line.start_s, line.end_s, grid);
    for (std::size_t n = a; n < b; ++n) {
      const double tn = grid.time(n);
      if (tn >= line.start_s && tn < line.end_s) va(n, 0) = 1;
    }
  }
  return va;
}

MatU8 append_va_column(const MatU8& matrix, const MatU8& va) {
  if (va.rows != matrix.rows || va.cols != 1)
    throw DataError("append_va_column: VA shape does not match matrix rows");
  MatU8 out(matrix.rows, matrix.cols + 1, 0);
  for (std::size_t n = 0; n < matrix.rows; ++n) {
    std::copy(matrix.row(n), matrix.row(n) + matrix.cols, out.row(n));
    out(n, matrix.cols) = va(n, 0);
  }
  return out;
}

void save_matrix_json(const std::string& path, const MatU8& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(static_cast<int>(m(r, c)));
    rows.push_back(std::move(row));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot create file: " + path);
  f << rows.dump() << "\n";
}

}  // namespace artsep::knowledge
