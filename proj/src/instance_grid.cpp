#include "mono3d/instance_grid.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mono3d {

static_assert(std::endian::native == std::endian::little,
              "grid records are little-endian; add byte swapping for this platform");

namespace {

constexpr char kMagic[4] = {'I', 'G', 'R', 'D'};
constexpr uint32_t kVersion = 1;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  const size_t n = out.size();
  out.resize(n + 4);
  std::memcpy(out.data() + n, &v, 4);
}

void put_f32(std::vector<uint8_t>& out, float v) {
  const size_t n = out.size();
  out.resize(n + 4);
  std::memcpy(out.data() + n, &v, 4);
}

uint32_t get_u32(const std::vector<uint8_t>& in, size_t& pos) {
  uint32_t v;
  std::memcpy(&v, in.data() + pos, 4);
  pos += 4;
  return v;
}

float get_f32(const std::vector<uint8_t>& in, size_t& pos) {
  float v;
  std::memcpy(&v, in.data() + pos, 4);
  pos += 4;
  return v;
}

}  // namespace

size_t InstanceGrid::valid_count() const {
  return static_cast<size_t>(std::count(mask.begin(), mask.end(), uint8_t{1}));
}

std::vector<double> InstanceGrid::depth_channel() const {
  std::vector<double> z(cell_count());
  for (size_t k = 0; k < cell_count(); ++k) z[k] = points[k].z();
  return z;
}

std::vector<uint8_t> serialize_grid(const InstanceGrid& grid) {
  std::vector<uint8_t> out;
  const size_t n = grid.cell_count();
  out.reserve(20 + (n + 7) / 8 + n * 20);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(grid.rows));
  put_u32(out, static_cast<uint32_t>(grid.cols));
  put_u32(out, static_cast<uint32_t>(grid.frame));
  std::vector<uint8_t> bits((n + 7) / 8, 0);
  for (size_t k = 0; k < n; ++k) {
    if (grid.mask[k]) bits[k / 8] |= static_cast<uint8_t>(1u << (k % 8));
  }
  out.insert(out.end(), bits.begin(), bits.end());
  for (size_t k = 0; k < n; ++k) {
    put_f32(out, static_cast<float>(grid.points[k].x()));
    put_f32(out, static_cast<float>(grid.points[k].y()));
    put_f32(out, static_cast<float>(grid.points[k].z()));
  }
  for (size_t k = 0; k < n; ++k) {
    put_f32(out, static_cast<float>(grid.expected_px[k].x()));
    put_f32(out, static_cast<float>(grid.expected_px[k].y()));
  }
  return out;
}

InstanceGrid deserialize_grid(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::unsupported_format, "not an instance grid record");
  }
  size_t pos = 4;
  const uint32_t version = get_u32(bytes, pos);
  if (version != kVersion) {
    throw Error(ErrorCode::unsupported_format,
                "unsupported grid record version " + std::to_string(version));
  }
  const uint32_t rows = get_u32(bytes, pos);
  const uint32_t cols = get_u32(bytes, pos);
  const uint32_t frame = get_u32(bytes, pos);
  if (frame > 1 || rows == 0 || cols == 0) {
    throw Error(ErrorCode::unsupported_format, "malformed grid header");
  }
  const size_t n = static_cast<size_t>(rows) * cols;
  const size_t need = pos + (n + 7) / 8 + n * 20;
  if (bytes.size() != need) {
    throw Error(ErrorCode::unsupported_format, "grid record truncated");
  }
  InstanceGrid grid(static_cast<int>(rows), static_cast<int>(cols),
                    static_cast<GridFrame>(frame));
  for (size_t k = 0; k < n; ++k) {
    grid.mask[k] = (bytes[pos + k / 8] >> (k % 8)) & 1u;
  }
  pos += (n + 7) / 8;
  for (size_t k = 0; k < n; ++k) {
    const double x = get_f32(bytes, pos);
    const double y = get_f32(bytes, pos);
    const double z = get_f32(bytes, pos);
    grid.points[k] = Vec3(x, y, z);
  }
  for (size_t k = 0; k < n; ++k) {
    const double u = get_f32(bytes, pos);
    const double v = get_f32(bytes, pos);
    grid.expected_px[k] = Vec2(u, v);
  }
  return grid;
}

void save_grid(const InstanceGrid& grid, const std::string& path) {
  const std::vector<uint8_t> bytes = serialize_grid(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "short write to " + path);
}

InstanceGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return deserialize_grid(bytes);
}

std::string grid_to_text(const InstanceGrid& grid) {
  std::ostringstream out;
  out << "grid " << grid.rows << "x" << grid.cols << " frame="
      << (grid.frame == GridFrame::local ? "local" : "camera")
      << " valid=" << grid.valid_count() << "\n";
  char line[160];
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      const size_t k = grid.index(i, j);
      if (!grid.mask[k]) continue;
      std::snprintf(line, sizeof(line),
                    "%d %d  %.9g %.9g %.9g  %.9g %.9g\n", i, j,
                    grid.points[k].x(), grid.points[k].y(), grid.points[k].z(),
                    grid.expected_px[k].x(), grid.expected_px[k].y());
      out << line;
    }
  }
  return out.str();
}

}  // namespace mono3d
