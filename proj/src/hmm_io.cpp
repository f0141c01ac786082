#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "artsep/common.hpp"
#include "artsep/hmm.hpp"

// Binary model container. Layout (all little-endian):
//   magic "AHMM", format version u32,
//   tool_version (u32 length + bytes), config_hash u64, seed u64,
//   feature_fingerprint u64, dim u64, var_floor dim x f64,
//   has_sil u8, then one record per model (7 manner models, then silence):
//     cls i32, n_states u32, per state: n_comp u32, log_self f64, log_next f64,
//     log_weight n_comp x f64, per component: mean dim x f64, var dim x f64.

namespace artsep {

namespace {

constexpr char kMagic[4] = {'A', 'H', 'M', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ostream& f, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& f, const std::string& s) {
  put<std::uint32_t>(f, static_cast<std::uint32_t>(s.size()));
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_doubles(std::ostream& f, const std::vector<double>& v) {
  f.write(reinterpret_cast<const char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
}

template <class T>
T get(std::istream& f, const std::string& path) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!f) throw DataError("truncated model file: " + path);
  return v;
}

std::string get_string(std::istream& f, const std::string& path) {
  const auto n = get<std::uint32_t>(f, path);
  if (n > 4096) throw DataError("corrupt model file: " + path);
  std::string s(n, '\0');
  f.read(s.data(), n);
  if (!f) throw DataError("truncated model file: " + path);
  return s;
}

std::vector<double> get_doubles(std::istream& f, std::size_t n, const std::string& path) {
  std::vector<double> v(n);
  f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!f) throw DataError("truncated model file: " + path);
  return v;
}

void put_model(std::ostream& f, const GmmHmm& m, std::size_t dim) {
  put<std::int32_t>(f, m.cls);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(m.states.size()));
  for (const GmmState& st : m.states) {
    put<std::uint32_t>(f, static_cast<std::uint32_t>(st.comp.size()));
    put<double>(f, st.log_self);
    put<double>(f, st.log_next);
    put_doubles(f, st.log_weight);
    for (const Gaussian& g : st.comp) {
      if (g.mean.size() != dim || g.var.size() != dim)
        throw DataError("model has inconsistent feature dimension; refusing to save");
      put_doubles(f, g.mean);
      put_doubles(f, g.var);
    }
  }
}

GmmHmm get_model(std::istream& f, std::size_t dim, const std::string& path) {
  GmmHmm m;
  m.cls = get<std::int32_t>(f, path);
  const auto n_states = get<std::uint32_t>(f, path);
  if (n_states == 0 || n_states > 64) throw DataError("corrupt model file: " + path);
  m.states.resize(n_states);
  for (GmmState& st : m.states) {
    const auto n_comp = get<std::uint32_t>(f, path);
    if (n_comp == 0 || n_comp > 1024) throw DataError("corrupt model file: " + path);
    st.log_self = get<double>(f, path);
    st.log_next = get<double>(f, path);
    st.log_weight = get_doubles(f, n_comp, path);
    st.comp.resize(n_comp);
    for (Gaussian& g : st.comp) {
      g.mean = get_doubles(f, dim, path);
      g.var = get_doubles(f, dim, path);
      g.refresh_log_norm();
    }
  }
  return m;
}

}  // namespace

void save_hmm_set(const std::string& path, const GmmHmmSet& set, const ModelMeta& meta) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot create model file: " + path);
  f.write(kMagic, 4);
  put<std::uint32_t>(f, kFormatVersion);
  put_string(f, meta.tool_version);
  put<std::uint64_t>(f, meta.config_hash);
  put<std::uint64_t>(f, meta.seed);
  put<std::uint64_t>(f, set.feature_fingerprint);
  put<std::uint64_t>(f, static_cast<std::uint64_t>(set.dim));
  if (set.var_floor.size() != set.dim)
    throw DataError("model variance floor does not match feature dimension");
  put_doubles(f, set.var_floor);
  put<std::uint8_t>(f, set.sil ? 1 : 0);
  for (const GmmHmm& m : set.models) put_model(f, m, set.dim);
  if (set.sil) put_model(f, *set.sil, set.dim);
  if (!f) throw DataError("write failed: " + path);
}

GmmHmmSet load_hmm_set(const std::string& path, ModelMeta* meta) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open model file: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a model file (bad magic): " + path);
  const auto version = get<std::uint32_t>(f, path);
  if (version != kFormatVersion)
    throw DataError("unsupported model format version " + std::to_string(version) + ": " + path);

  ModelMeta m;
  m.tool_version = get_string(f, path);
  m.config_hash = get<std::uint64_t>(f, path);
  m.seed = get<std::uint64_t>(f, path);

  GmmHmmSet set;
  set.feature_fingerprint = get<std::uint64_t>(f, path);
  set.dim = static_cast<std::size_t>(get<std::uint64_t>(f, path));
  if (set.dim == 0 || set.dim > 4096) throw DataError("corrupt model file: " + path);
  set.var_floor = get_doubles(f, set.dim, path);
  const bool has_sil = get<std::uint8_t>(f, path) != 0;
  for (GmmHmm& mdl : set.models) mdl = get_model(f, set.dim, path);
  if (has_sil) set.sil = get_model(f, set.dim, path);
  if (meta) *meta = m;
  return set;
}

}  // namespace artsep
