#ifndef LADDER_VIDEO_HPP
#define LADDER_VIDEO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ladder/error.hpp"

namespace ladder {

// One 8-bit 4:2:0 picture. Chroma planes are optional (features only touch
// luma); when present they are (height/2) x (width/2).
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> luma;
  std::vector<std::uint8_t> cb;
  std::vector<std::uint8_t> cr;

  std::uint8_t y(int row, int col) const {
    return luma[static_cast<std::size_t>(row) * width + col];
  }
  bool has_chroma() const { return !cb.empty(); }
};

struct VideoChunk {
  int width = 0;
  int height = 0;
  double fps = 0.0;
  std::vector<Frame> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
};

// Y4M reader for the 8-bit 4:2:0 subset of the format.
VideoChunk read_y4m(std::istream& stream);
VideoChunk read_y4m_file(const std::string& path);
void write_y4m(std::ostream& stream, const VideoChunk& chunk);
void write_y4m_file(const std::string& path, const VideoChunk& chunk);

// Headerless planar 4:2:0 at caller-supplied geometry.
VideoChunk read_raw_yuv(std::istream& stream, int width, int height, double fps);
VideoChunk read_raw_yuv_file(const std::string& path, int width, int height,
                             double fps);
void write_raw_yuv(std::ostream& stream, const VideoChunk& chunk);

}  // namespace ladder

#endif  // LADDER_VIDEO_HPP
