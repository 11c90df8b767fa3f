#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "lodwave/error.hpp"
#include "lodwave/lod.hpp"

namespace lodwave {

namespace {

constexpr char kMagic[8] = {'L', 'O', 'D', 'W', 'A', 'V', 'E', '1'};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

template <class T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_vec(std::string& out, std::span<const T> v) {
  put<std::uint64_t>(out, v.size());
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
}

void put_matrix(std::string& out, const SparseMatrix& m) {
  put<std::int32_t>(out, m.rows());
  put<std::int32_t>(out, m.cols());
  put<std::int32_t>(out, m.symmetric() ? 1 : 0);
  put_vec(out, m.row_ptr());
  put_vec(out, m.col_idx());
  put_vec(out, m.values());
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  template <class T>
  T get() {
    T v{};
    need(sizeof(T));
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  template <class T>
  std::vector<T> get_vec() {
    const auto n = get<std::uint64_t>();
    if (n > (s_.size() - pos_) / sizeof(T)) throw ParseError("truncated basis cache", 0);
    std::vector<T> v(n);
    std::memcpy(v.data(), s_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return v;
  }
  SparseMatrix get_matrix() {
    const auto rows = get<std::int32_t>();
    const auto cols = get<std::int32_t>();
    const bool sym = get<std::int32_t>() != 0;
    auto rp = get_vec<std::int64_t>();
    auto ci = get_vec<int>();
    auto va = get_vec<double>();
    return SparseMatrix::from_csr(rows, cols, std::move(rp), std::move(ci), std::move(va), sym);
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (s_.size() - pos_ < n) throw ParseError("truncated basis cache", 0);
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

void put_key(std::string& out, const BasisKey& key) {
  put<std::int32_t>(out, key.coarse_exponent);
  put<std::int32_t>(out, key.fine_exponent);
  put<std::int32_t>(out, key.ell);
  put<std::int32_t>(out, key.mode == InterpMode::Weighted ? 0 : 1);
  put<std::uint64_t>(out, key.alpha_digest);
  put<std::uint64_t>(out, key.beta_digest);
}

}  // namespace

BasisKey basis_key(const FineProblem& problem, const MultiscaleBasis& basis) {
  return {basis.coarse_exponent, basis.fine_exponent, basis.ell, basis.mode, field_digest(problem.alpha),
          field_digest(problem.beta)};
}

std::filesystem::path basis_cache_path(const std::filesystem::path& dir, const BasisKey& key) {
  std::ostringstream name;
  name << "basis_H" << key.coarse_exponent << "_h" << key.fine_exponent << "_l" << ell_label(key.ell) << '_'
       << to_string(key.mode) << '_' << std::hex << (key.alpha_digest ^ (key.beta_digest * 31)) << ".bin";
  return dir / name.str();
}

void save_basis(const MultiscaleBasis& basis, const BasisKey& key, const std::filesystem::path& path) {
  std::string payload;
  put_key(payload, key);
  put<std::int32_t>(payload, basis.kind == BasisKind::Lod ? 0 : 1);
  put<double>(payload, basis.offline_seconds);
  put<double>(payload, basis.max_saddle_residual);
  put<std::int32_t>(payload, basis.distinct_factorizations);
  put_matrix(payload, basis.b);
  put_matrix(payload, basis.k);
  put_matrix(payload, basis.m_ms);
  put_vec<double>(payload, basis.lumped);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write basis cache " + path.string());
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t digest = fnv1a(payload);
  out.write(reinterpret_cast<const char*>(&digest), sizeof digest);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw Error("failed writing basis cache " + path.string());
}

bool load_basis(const std::filesystem::path& path, const BasisKey& key, MultiscaleBasis& basis) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof kMagic + 8 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) return false;
  std::uint64_t digest = 0;
  std::memcpy(&digest, bytes.data() + sizeof kMagic, sizeof digest);
  const std::string payload = bytes.substr(sizeof kMagic + sizeof digest);
  if (fnv1a(payload) != digest) return false;

  std::string expected;
  put_key(expected, key);
  if (payload.compare(0, expected.size(), expected) != 0) return false;
  try {
    Reader r(payload);
    for (std::size_t i = 0; i < expected.size(); ++i) r.get<char>();
    MultiscaleBasis b;
    b.kind = r.get<std::int32_t>() == 0 ? BasisKind::Lod : BasisKind::Fem;
    b.offline_seconds = r.get<double>();
    b.max_saddle_residual = r.get<double>();
    b.distinct_factorizations = r.get<std::int32_t>();
    b.b = r.get_matrix();
    b.k = r.get_matrix();
    b.m_ms = r.get_matrix();
    b.lumped = r.get_vec<double>();
    if (!r.done()) return false;
    b.coarse_exponent = key.coarse_exponent;
    b.fine_exponent = key.fine_exponent;
    b.ell = key.ell;
    b.mode = key.mode;
    basis = std::move(b);
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace lodwave
