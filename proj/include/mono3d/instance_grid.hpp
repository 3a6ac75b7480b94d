#pragma once

#include "mono3d/types.hpp"

#include <optional>

namespace mono3d {

enum class GridFrame : uint32_t { local = 0, camera = 1 };

// L x W x 3 point grid with validity mask and expected pixel coordinates G.
// Cells are stored row-major; row i follows image v, column j follows image
// u. Masked-off cells carry zeroed points and must be excluded from every
// loss. The frame tag makes local/camera confusion a checked error instead
// of silent corruption.
struct InstanceGrid {
  int rows = 0;  // L
  int cols = 0;  // W
  GridFrame frame = GridFrame::camera;
  std::vector<Vec3> points;      // rows*cols
  std::vector<uint8_t> mask;     // rows*cols, 0/1
  std::vector<Vec2> expected_px; // G: rows*cols source-pixel centers
  std::optional<Box2D> source_box;

  InstanceGrid() = default;
  InstanceGrid(int L, int W, GridFrame f)
      : rows(L),
        cols(W),
        frame(f),
        points(static_cast<size_t>(L) * W, Vec3::Zero()),
        mask(static_cast<size_t>(L) * W, 0),
        expected_px(static_cast<size_t>(L) * W, Vec2::Zero()) {}

  size_t index(int i, int j) const { return static_cast<size_t>(i) * cols + j; }
  size_t cell_count() const { return points.size(); }
  size_t valid_count() const;

  // Depth channel (z) as a flat rows*cols vector; meaningful for camera-frame
  // grids where it matches the scene depth at each source pixel.
  std::vector<double> depth_channel() const;
};

// Flat binary record:
//   magic "IGRD" (4 bytes), u32 version = 1, u32 rows, u32 cols,
//   u32 frame tag (0 = local, 1 = camera),
//   ceil(rows*cols/8) mask bytes (row-major, LSB-first within each byte),
//   rows*cols*3 little-endian float32 point coordinates (x, y, z per cell),
//   rows*cols*2 little-endian float32 expected pixel coordinates (u, v).
std::vector<uint8_t> serialize_grid(const InstanceGrid& grid);
InstanceGrid deserialize_grid(const std::vector<uint8_t>& bytes);

void save_grid(const InstanceGrid& grid, const std::string& path);
InstanceGrid load_grid(const std::string& path);

// Human-readable dump for tests and debugging: one line per valid cell.
std::string grid_to_text(const InstanceGrid& grid);

}  // namespace mono3d
