#include "lesionmetrics/volume_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include <zlib.h>

#include "lesionmetrics/error.hpp"

namespace lesionmetrics {

static_assert(std::endian::native == std::endian::little, "NIfTI I/O assumes a little-endian host");

namespace {

constexpr int kHeaderSize = 348;
constexpr int kDataOffset = 352;
constexpr double kAxisAlignedTol = 1e-2;

// NIfTI-1 datatype codes.
constexpr short kUint8 = 2;
constexpr short kInt16 = 4;
constexpr short kInt32 = 8;
constexpr short kFloat32 = 16;
constexpr short kFloat64 = 64;
constexpr short kUint16 = 512;

const char* axis_name(int axis) { return axis == 0 ? "x" : axis == 1 ? "y" : "z"; }

template <typename T>
T read_field(const std::vector<unsigned char>& buf, std::size_t offset) {
  T value;
  std::memcpy(&value, buf.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void write_field(std::vector<unsigned char>& buf, std::size_t offset, T value) {
  std::memcpy(buf.data() + offset, &value, sizeof(T));
}

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  // gzread passes uncompressed files through unchanged.
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw Error("cannot open " + path.string());
  std::vector<unsigned char> data;
  std::vector<unsigned char> chunk(1 << 20);
  for (;;) {
    const int n = gzread(file, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      int code = 0;
      const std::string msg = gzerror(file, &code);
      gzclose(file);
      throw Error("cannot read " + path.string() + ": " + msg);
    }
    if (n == 0) break;
    data.insert(data.end(), chunk.begin(), chunk.begin() + n);
  }
  gzclose(file);
  return data;
}

using Mat3 = std::array<Vec3, 3>;  // columns

Mat3 quaternion_columns(float b, float c, float d, double qfac, const Vec3& spacing) {
  double a2 = 1.0 - (double(b) * b + double(c) * c + double(d) * d);
  double a = a2 > 0 ? std::sqrt(a2) : 0.0;
  if (a2 < 0) {
    const double norm = std::sqrt(double(b) * b + double(c) * c + double(d) * d);
    b = static_cast<float>(b / norm);
    c = static_cast<float>(c / norm);
    d = static_cast<float>(d / norm);
  }
  const double r[3][3] = {{a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)},
                          {2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)},
                          {2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b}};
  Mat3 cols{};
  const Vec3 scale{spacing[0], spacing[1], spacing[2] * qfac};
  for (int col = 0; col < 3; ++col)
    for (int row = 0; row < 3; ++row) cols[col][row] = r[row][col] * scale[col];
  return cols;
}

// Each column must point along a single world axis (sign and order free).
void check_axis_aligned(const Mat3& cols) {
  for (int col = 0; col < 3; ++col) {
    const Vec3& v = cols[col];
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (!(norm > 0)) throw Error("degenerate affine");
    int dominant = 0;
    for (int row = 1; row < 3; ++row)
      if (std::abs(v[row]) > std::abs(v[dominant])) dominant = row;
    for (int row = 0; row < 3; ++row)
      if (row != dominant && std::abs(v[row]) / norm > kAxisAlignedTol)
        throw Error(std::string("affine is not axis-aligned (axis ") + axis_name(col) + ")");
  }
}

template <typename T>
void convert_voxels(const unsigned char* src, std::span<Label> dst, double slope, double inter) {
  const bool scaled = slope != 0.0 && (slope != 1.0 || inter != 0.0);
  for (std::size_t n = 0; n < dst.size(); ++n) {
    T raw;
    std::memcpy(&raw, src + n * sizeof(T), sizeof(T));
    double value = static_cast<double>(raw);
    if (scaled) value = value * slope + inter;
    if (std::isnan(value)) throw Error("NaN voxel at index " + std::to_string(n));
    value = std::round(value);
    if (value < 0) throw Error("negative label at index " + std::to_string(n));
    if (value > std::numeric_limits<Label>::max())
      throw Error("label exceeds 16 bits at index " + std::to_string(n));
    dst[n] = static_cast<Label>(value);
  }
}

bool ends_with_gz(const std::filesystem::path& path) { return path.extension() == ".gz"; }

bool within_rel(double a, double b, double rel_tol, double floor) {
  return std::abs(a - b) <= rel_tol * std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace

void GridGeometry::validate() const {
  for (int axis = 0; axis < 3; ++axis) {
    if (dims[axis] < 1) throw Error(std::string("non-positive dimension on axis ") + axis_name(axis));
    if (!(spacing[axis] > 0) || !std::isfinite(spacing[axis]))
      throw Error(std::string("non-positive spacing on axis ") + axis_name(axis));
  }
}

LabelVolume::LabelVolume(GridGeometry geometry)
    : geometry_(geometry), voxels_(geometry.voxel_count(), 0) {
  geometry_.validate();
}

LabelVolume::LabelVolume(GridGeometry geometry, std::vector<Label> voxels)
    : geometry_(geometry), voxels_(std::move(voxels)) {
  geometry_.validate();
  if (voxels_.size() != geometry_.voxel_count())
    throw Error("voxel array length " + std::to_string(voxels_.size()) + " does not match grid size " +
                std::to_string(geometry_.voxel_count()));
}

std::size_t LabelVolume::foreground_count() const {
  return static_cast<std::size_t>(
      std::count_if(voxels_.begin(), voxels_.end(), [](Label v) { return v != 0; }));
}

LabelVolume load_label_volume(const std::filesystem::path& path) {
  const std::vector<unsigned char> buf = read_all(path);
  const std::string where = path.string() + ": ";
  if (buf.size() < static_cast<std::size_t>(kHeaderSize)) throw Error(where + "file too short for a NIfTI-1 header");

  const auto sizeof_hdr = read_field<std::int32_t>(buf, 0);
  if (sizeof_hdr != kHeaderSize) {
    if (static_cast<std::int32_t>(__builtin_bswap32(static_cast<std::uint32_t>(sizeof_hdr))) == kHeaderSize) throw Error(where + "big-endian NIfTI is not supported");
    throw Error(where + "not a NIfTI-1 file");
  }
  if (std::memcmp(buf.data() + 344, "n+1", 4) != 0)
    throw Error(where + "not a single-file NIfTI-1 image (magic must be n+1)");

  std::array<std::int16_t, 8> dim{};
  for (int d = 0; d < 8; ++d) dim[d] = read_field<std::int16_t>(buf, 40 + 2 * d);
  if (dim[0] < 3 || dim[0] > 7) throw Error(where + "non-3D image (dim[0] = " + std::to_string(dim[0]) + ")");
  for (int d = 4; d <= dim[0]; ++d)
    if (dim[d] > 1) throw Error(where + "non-3D image (dim[" + std::to_string(d) + "] = " + std::to_string(dim[d]) + ")");

  std::array<float, 8> pixdim{};
  for (int d = 0; d < 8; ++d) pixdim[d] = read_field<float>(buf, 76 + 4 * d);

  GridGeometry geometry;
  for (int axis = 0; axis < 3; ++axis) {
    if (dim[axis + 1] < 1) throw Error(where + "non-positive dimension on axis " + axis_name(axis));
    geometry.dims[axis] = dim[axis + 1];
    if (!(pixdim[axis + 1] > 0) || !std::isfinite(pixdim[axis + 1]))
      throw Error(where + "non-positive spacing on axis " + axis_name(axis));
    geometry.spacing[axis] = pixdim[axis + 1];
  }

  const auto qform_code = read_field<std::int16_t>(buf, 252);
  const auto sform_code = read_field<std::int16_t>(buf, 254);
  if (sform_code > 0) {
    Mat3 cols{};
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) cols[col][row] = read_field<float>(buf, 280 + 16 * row + 4 * col);
      geometry.origin[row] = read_field<float>(buf, 280 + 16 * row + 12);
    }
    check_axis_aligned(cols);
  } else if (qform_code > 0) {
    const double qfac = pixdim[0] < 0 ? -1.0 : 1.0;
    check_axis_aligned(quaternion_columns(read_field<float>(buf, 256), read_field<float>(buf, 260),
                                          read_field<float>(buf, 264), qfac, geometry.spacing));
    for (int axis = 0; axis < 3; ++axis) geometry.origin[axis] = read_field<float>(buf, 268 + 4 * axis);
  }

  const auto datatype = read_field<std::int16_t>(buf, 70);
  std::size_t bytes_per_voxel = 0;
  switch (datatype) {
    case kUint8: bytes_per_voxel = 1; break;
    case kInt16:
    case kUint16: bytes_per_voxel = 2; break;
    case kInt32:
    case kFloat32: bytes_per_voxel = 4; break;
    case kFloat64: bytes_per_voxel = 8; break;
    default: throw Error(where + "unsupported NIfTI datatype " + std::to_string(datatype));
  }

  const double vox_offset = read_field<float>(buf, 108);
  if (vox_offset < kHeaderSize) throw Error(where + "invalid vox_offset");
  const auto offset = static_cast<std::size_t>(vox_offset);
  const std::size_t count = geometry.voxel_count();
  if (buf.size() < offset + count * bytes_per_voxel) throw Error(where + "truncated voxel data");

  const double slope = read_field<float>(buf, 112);
  const double inter = read_field<float>(buf, 116);
  std::vector<Label> voxels(count);
  const unsigned char* src = buf.data() + offset;
  try {
    switch (datatype) {
      case kUint8: convert_voxels<std::uint8_t>(src, voxels, slope, inter); break;
      case kInt16: convert_voxels<std::int16_t>(src, voxels, slope, inter); break;
      case kUint16: convert_voxels<std::uint16_t>(src, voxels, slope, inter); break;
      case kInt32: convert_voxels<std::int32_t>(src, voxels, slope, inter); break;
      case kFloat32: convert_voxels<float>(src, voxels, slope, inter); break;
      case kFloat64: convert_voxels<double>(src, voxels, slope, inter); break;
    }
  } catch (const Error& e) {
    throw Error(where + e.what());
  }
  return LabelVolume(geometry, std::move(voxels));
}

void save_label_volume(const LabelVolume& volume, const std::filesystem::path& path) {
  const GridGeometry& g = volume.geometry();
  for (int axis = 0; axis < 3; ++axis)
    if (g.dims[axis] > std::numeric_limits<std::int16_t>::max())
      throw Error("dimension too large for NIfTI-1 on axis " + std::string(axis_name(axis)));

  const auto voxels = volume.voxels();
  const bool fits_u8 = std::all_of(voxels.begin(), voxels.end(), [](Label v) { return v <= 0xFF; });
  const std::size_t bytes_per_voxel = fits_u8 ? 1 : 2;

  std::vector<unsigned char> buf(kDataOffset + voxels.size() * bytes_per_voxel, 0);
  write_field<std::int32_t>(buf, 0, kHeaderSize);
  buf[38] = 'r';
  const std::array<std::int16_t, 8> dim{3, static_cast<std::int16_t>(g.dims[0]), static_cast<std::int16_t>(g.dims[1]),
                                        static_cast<std::int16_t>(g.dims[2]), 1, 1, 1, 1};
  for (int d = 0; d < 8; ++d) write_field<std::int16_t>(buf, 40 + 2 * d, dim[d]);
  write_field<std::int16_t>(buf, 70, fits_u8 ? kUint8 : kUint16);
  write_field<std::int16_t>(buf, 72, static_cast<std::int16_t>(8 * bytes_per_voxel));
  write_field<float>(buf, 76, 1.0f);
  for (int axis = 0; axis < 3; ++axis) write_field<float>(buf, 80 + 4 * axis, static_cast<float>(g.spacing[axis]));
  write_field<float>(buf, 108, static_cast<float>(kDataOffset));
  write_field<float>(buf, 112, 1.0f);
  buf[123] = 2;  // xyzt_units: mm
  write_field<std::int16_t>(buf, 252, 1);
  write_field<std::int16_t>(buf, 254, 1);
  for (int axis = 0; axis < 3; ++axis) {
    write_field<float>(buf, 268 + 4 * axis, static_cast<float>(g.origin[axis]));
    write_field<float>(buf, 280 + 16 * axis + 4 * axis, static_cast<float>(g.spacing[axis]));
    write_field<float>(buf, 280 + 16 * axis + 12, static_cast<float>(g.origin[axis]));
  }
  std::memcpy(buf.data() + 344, "n+1", 4);

  unsigned char* dst = buf.data() + kDataOffset;
  if (fits_u8) {
    for (std::size_t n = 0; n < voxels.size(); ++n) dst[n] = static_cast<unsigned char>(voxels[n]);
  } else {
    std::memcpy(dst, voxels.data(), voxels.size() * sizeof(Label));
  }

  if (ends_with_gz(path)) {
    gzFile file = gzopen(path.c_str(), "wb6");
    if (file == nullptr) throw Error("cannot write " + path.string());
    std::size_t written = 0;
    while (written < buf.size()) {
      const auto chunk = static_cast<unsigned>(std::min<std::size_t>(buf.size() - written, 1u << 30));
      if (gzwrite(file, buf.data() + written, chunk) != static_cast<int>(chunk)) {
        gzclose(file);
        throw Error("cannot write " + path.string());
      }
      written += chunk;
    }
    if (gzclose(file) != Z_OK) throw Error("cannot write " + path.string());
  } else {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("cannot write " + path.string());
  }
}

void assert_same_grid(const GridGeometry& a, const GridGeometry& b, double rel_tol) {
  for (int axis = 0; axis < 3; ++axis)
    if (a.dims[axis] != b.dims[axis])
      throw Error(std::string("dimension mismatch on axis ") + axis_name(axis) + ": " +
                  std::to_string(a.dims[axis]) + " vs " + std::to_string(b.dims[axis]));
  for (int axis = 0; axis < 3; ++axis)
    if (!within_rel(a.spacing[axis], b.spacing[axis], rel_tol, 0.0))
      throw Error(std::string("spacing mismatch on axis ") + axis_name(axis) + ": " +
                  std::to_string(a.spacing[axis]) + " vs " + std::to_string(b.spacing[axis]));
  for (int axis = 0; axis < 3; ++axis)
    if (!within_rel(a.origin[axis], b.origin[axis], rel_tol, std::max(a.spacing[axis], b.spacing[axis])))
      throw Error(std::string("origin mismatch on axis ") + axis_name(axis) + ": " +
                  std::to_string(a.origin[axis]) + " vs " + std::to_string(b.origin[axis]));
}

void assert_same_grid(const LabelVolume& a, const LabelVolume& b, double rel_tol) {
  assert_same_grid(a.geometry(), b.geometry(), rel_tol);
}

double voxel_volume_cc(const GridGeometry& geometry) {
  return geometry.spacing[0] * geometry.spacing[1] * geometry.spacing[2] / 1000.0;
}

}  // namespace lesionmetrics
