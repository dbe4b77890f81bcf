#include "mfm/io.hpp"

#include "mfm/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

namespace mfm::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "MFM1 files are written with native little-endian layout");

constexpr char kMagic[4] = {'M', 'F', 'M', '1'};
constexpr std::uint32_t kKindDataset = 1;
constexpr std::uint32_t kKindModel = 2;
constexpr std::uint32_t kFlagTruth = 1;
constexpr std::uint32_t kFlagFlipped = 2;
// Guards allocation against corrupt headers.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

struct Header {
  std::uint32_t kind = 0;
  std::uint64_t d = 0;
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  std::uint32_t variant = 0;
  std::uint32_t flags = 0;
};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
  }
  template <class T>
  void scalar(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void doubles(const double* p, std::size_t count) {
    out_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
  }
  void matrix(const Mat& m) { doubles(m.data(), static_cast<std::size_t>(m.size())); }
  void header(const Header& h) {
    out_.write(kMagic, 4);
    scalar(h.kind);
    scalar(h.d);
    scalar(h.n);
    scalar(h.k);
    scalar(h.variant);
    scalar(h.flags);
  }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failed for '" + path_.string() + "'");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open '" + path.string() + "' for reading");
  }
  template <class T>
  T scalar() {
    T v{};
    raw(reinterpret_cast<char*>(&v), sizeof v);
    return v;
  }
  Mat matrix(std::uint64_t rows, std::uint64_t cols) {
    if (rows != 0 && cols > kMaxElements / rows) fail("matrix too large");
    Mat m(static_cast<Index>(rows), static_cast<Index>(cols));
    raw(reinterpret_cast<char*>(m.data()), static_cast<std::size_t>(rows * cols) * sizeof(double));
    return m;
  }
  Vec vector(std::uint64_t size) {
    if (size > kMaxElements) fail("vector too large");
    Vec v(static_cast<Index>(size));
    raw(reinterpret_cast<char*>(v.data()), static_cast<std::size_t>(size) * sizeof(double));
    return v;
  }
  Header header(std::uint32_t expected_kind) {
    char magic[4];
    raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) fail("bad magic, not an MFM1 file");
    Header h;
    h.kind = scalar<std::uint32_t>();
    h.d = scalar<std::uint64_t>();
    h.n = scalar<std::uint64_t>();
    h.k = scalar<std::uint64_t>();
    h.variant = scalar<std::uint32_t>();
    h.flags = scalar<std::uint32_t>();
    if (h.kind != expected_kind) {
      fail(expected_kind == kKindDataset ? "file holds a model, expected a dataset"
                                         : "file holds a dataset, expected a model");
    }
    if (h.d == 0 || h.d > kMaxElements) fail("invalid dimension");
    return h;
  }
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) fail("trailing bytes");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw IoError("'" + path_.string() + "': " + what);
  }

 private:
  void raw(char* p, std::size_t bytes) {
    in_.read(p, static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in_.gcount()) != bytes) fail("truncated file");
  }

  std::filesystem::path path_;
  std::ifstream in_;
};

std::uint32_t variant_code(Variant v) {
  switch (v) {
    case Variant::GFM: return 0;
    case Variant::IFM: return 1;
    case Variant::FMBaseline: return 2;
  }
  return 1;
}

Variant variant_from_code(std::uint32_t code, const Reader& reader) {
  switch (code) {
    case 0: return Variant::GFM;
    case 1: return Variant::IFM;
    case 2: return Variant::FMBaseline;
    default: reader.fail("unknown variant code " + std::to_string(code));
  }
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void save_dataset(const std::filesystem::path& path, const Batch& batch, const GroundTruth* truth,
                  bool labels_flipped) {
  if (batch.y.size() != batch.size()) throw DimensionMismatch("save_dataset: |y| != n");
  if (truth != nullptr && truth->dim() != batch.dim()) {
    throw DimensionMismatch("save_dataset: truth dimension differs from data");
  }
  Header h;
  h.kind = kKindDataset;
  h.d = static_cast<std::uint64_t>(batch.dim());
  h.n = static_cast<std::uint64_t>(batch.size());
  h.k = truth ? static_cast<std::uint64_t>(truth->singular_values.size()) : 0;
  h.variant = truth && !truth->zero_diagonal ? variant_code(Variant::GFM) : variant_code(Variant::IFM);
  h.flags = (truth ? kFlagTruth : 0) | (labels_flipped ? kFlagFlipped : 0);

  Writer w(path);
  w.header(h);
  w.matrix(batch.x);
  w.matrix(batch.y);
  if (truth) {
    w.matrix(truth->w_star);
    w.matrix(truth->m_star);
    w.matrix(truth->singular_values);
    w.scalar(static_cast<std::uint64_t>(truth->factor_basis.cols()));
    w.matrix(truth->factor_basis);
    w.scalar(static_cast<std::uint64_t>(truth->left.cols()));
    w.matrix(truth->left);
    w.matrix(truth->right);
    w.scalar(static_cast<std::uint32_t>(truth->zero_diagonal ? 1 : 0));
  }
  w.finish();
}

Dataset load_dataset(const std::filesystem::path& path) {
  Reader r(path);
  const Header h = r.header(kKindDataset);
  Dataset out;
  out.batch.x = r.matrix(h.d, h.n);
  out.batch.y = r.vector(h.n);
  out.labels_flipped = (h.flags & kFlagFlipped) != 0;
  if (h.flags & kFlagTruth) {
    GroundTruth t;
    t.w_star = r.vector(h.d);
    t.m_star = r.matrix(h.d, h.d);
    t.singular_values = r.vector(h.k);
    const auto basis_cols = r.scalar<std::uint64_t>();
    t.factor_basis = r.matrix(h.d, basis_cols);
    const auto factor_cols = r.scalar<std::uint64_t>();
    t.left = r.matrix(h.d, factor_cols);
    t.right = r.matrix(h.d, factor_cols);
    t.zero_diagonal = r.scalar<std::uint32_t>() != 0;
    out.truth = std::move(t);
  }
  r.expect_end();
  return out;
}

void save_model(const std::filesystem::path& path, const ModelState& state) {
  if (state.u_bar.rows() != state.dim() || (state.v.size() > 0 && state.v.rows() != state.dim())) {
    throw DimensionMismatch("save_model: inconsistent parameter shapes");
  }
  Header h;
  h.kind = kKindModel;
  h.d = static_cast<std::uint64_t>(state.dim());
  h.k = static_cast<std::uint64_t>(state.rank());
  h.variant = variant_code(state.variant);

  Writer w(path);
  w.header(h);
  w.matrix(state.w);
  w.matrix(state.u_bar);
  w.scalar(static_cast<std::uint64_t>(state.v.cols()));
  w.matrix(state.v);
  w.scalar(static_cast<std::uint32_t>(state.iteration));
  w.finish();
}

ModelState load_model(const std::filesystem::path& path) {
  Reader r(path);
  const Header h = r.header(kKindModel);
  ModelState s;
  s.variant = variant_from_code(h.variant, r);
  s.w = r.vector(h.d);
  s.u_bar = r.matrix(h.d, h.k);
  const auto v_cols = r.scalar<std::uint64_t>();
  s.v = r.matrix(h.d, v_cols);
  s.iteration = static_cast<int>(r.scalar<std::uint32_t>());
  r.expect_end();
  return s;
}

void export_csv(const std::filesystem::path& path, const Batch& batch) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (Index j = 0; j < batch.dim(); ++j) out << 'x' << j << ',';
  out << "y\n";
  for (Index i = 0; i < batch.size(); ++i) {
    for (Index j = 0; j < batch.dim(); ++j) out << number(batch.x(j, i)) << ',';
    out << number(batch.y(i)) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRecord> trace,
                     bool zero_wall_time) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  auto opt = [](const std::optional<double>& v) { return v ? number(*v) : std::string(); };
  out << "iteration,test_rmse,recovery_error,sin_theta,wall_ms\n";
  for (const TraceRecord& rec : trace) {
    out << rec.iteration << ',' << opt(rec.test_rmse) << ',' << opt(rec.recovery_error) << ','
        << opt(rec.sin_theta) << ',' << number(zero_wall_time ? 0.0 : rec.wall_ms) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace mfm::io
