#include "ladder/video.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace ladder {

namespace {

constexpr const char* kMagic = "YUV4MPEG2";

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path);
  return in;
}

void read_plane(std::istream& stream, std::vector<std::uint8_t>& plane,
                std::size_t bytes, int frame_index) {
  plane.resize(bytes);
  stream.read(reinterpret_cast<char*>(plane.data()),
              static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(stream.gcount()) != bytes) {
    throw Error(Errc::truncated_frame,
                "frame " + std::to_string(frame_index) + " is incomplete");
  }
}

}  // namespace

VideoChunk read_y4m(std::istream& stream) {
  std::string header;
  if (!std::getline(stream, header) || header.rfind(kMagic, 0) != 0) {
    throw Error(Errc::bad_magic, "missing YUV4MPEG2 signature");
  }

  VideoChunk chunk;
  int fps_num = 0, fps_den = 1;
  bool chroma_420 = true;  // C absent defaults to 4:2:0
  std::istringstream tags(header.substr(std::string(kMagic).size()));
  std::string tag;
  while (tags >> tag) {
    switch (tag[0]) {
      case 'W': chunk.width = std::stoi(tag.substr(1)); break;
      case 'H': chunk.height = std::stoi(tag.substr(1)); break;
      case 'F': {
        if (std::sscanf(tag.c_str() + 1, "%d:%d", &fps_num, &fps_den) != 2 ||
            fps_den <= 0) {
          throw Error(Errc::unsupported_format, "bad frame-rate tag " + tag);
        }
        break;
      }
      case 'C': {
        const std::string c = tag.substr(1);
        chroma_420 = c == "420" || c == "420jpeg" || c == "420mpeg2" ||
                     c == "420paldv";
        break;
      }
      default: break;  // interlacing/aspect tags are irrelevant here
    }
  }
  if (!chroma_420) {
    throw Error(Errc::unsupported_format, "only 8-bit 4:2:0 input is supported");
  }
  if (chunk.width <= 0 || chunk.height <= 0 || chunk.width % 2 != 0 ||
      chunk.height % 2 != 0) {
    throw Error(Errc::unsupported_format, "bad or missing frame geometry");
  }
  chunk.fps = fps_num > 0 ? static_cast<double>(fps_num) / fps_den : 0.0;

  const std::size_t luma_bytes =
      static_cast<std::size_t>(chunk.width) * chunk.height;
  const std::size_t chroma_bytes = luma_bytes / 4;
  std::string frame_line;
  while (std::getline(stream, frame_line)) {
    if (frame_line.rfind("FRAME", 0) != 0) {
      throw Error(Errc::unsupported_format, "expected FRAME marker");
    }
    Frame frame;
    frame.width = chunk.width;
    frame.height = chunk.height;
    const int idx = chunk.frame_count();
    read_plane(stream, frame.luma, luma_bytes, idx);
    read_plane(stream, frame.cb, chroma_bytes, idx);
    read_plane(stream, frame.cr, chroma_bytes, idx);
    chunk.frames.push_back(std::move(frame));
  }
  return chunk;
}

VideoChunk read_y4m_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_y4m(in);
}

void write_y4m(std::ostream& stream, const VideoChunk& chunk) {
  int fps_num = 30, fps_den = 1;
  if (chunk.fps > 0.0) {
    fps_num = static_cast<int>(std::lround(chunk.fps * 1000.0));
    fps_den = 1000;
    if (fps_num % 1000 == 0) {
      fps_num /= 1000;
      fps_den = 1;
    }
  }
  stream << kMagic << " W" << chunk.width << " H" << chunk.height << " F"
         << fps_num << ":" << fps_den << " Ip A1:1 C420\n";
  const std::size_t chroma_bytes =
      static_cast<std::size_t>(chunk.width) * chunk.height / 4;
  std::vector<std::uint8_t> neutral(chroma_bytes, 128);
  for (const Frame& frame : chunk.frames) {
    stream << "FRAME\n";
    stream.write(reinterpret_cast<const char*>(frame.luma.data()),
                 static_cast<std::streamsize>(frame.luma.size()));
    const auto& cb = frame.has_chroma() ? frame.cb : neutral;
    const auto& cr = frame.has_chroma() ? frame.cr : neutral;
    stream.write(reinterpret_cast<const char*>(cb.data()),
                 static_cast<std::streamsize>(chroma_bytes));
    stream.write(reinterpret_cast<const char*>(cr.data()),
                 static_cast<std::streamsize>(chroma_bytes));
  }
  if (!stream) throw Error(Errc::io_failure, "y4m write failed");
}

void write_y4m_file(const std::string& path, const VideoChunk& chunk) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path);
  write_y4m(out, chunk);
}

VideoChunk read_raw_yuv(std::istream& stream, int width, int height, double fps) {
  if (width <= 0 || height <= 0 || width % 2 != 0 || height % 2 != 0) {
    throw Error(Errc::bad_params, "raw yuv geometry must be positive and even");
  }
  VideoChunk chunk;
  chunk.width = width;
  chunk.height = height;
  chunk.fps = fps;
  const std::size_t luma_bytes = static_cast<std::size_t>(width) * height;
  const std::size_t chroma_bytes = luma_bytes / 4;
  const std::size_t frame_bytes = luma_bytes + 2 * chroma_bytes;

  std::vector<char> buffer(frame_bytes);
  while (true) {
    stream.read(buffer.data(), static_cast<std::streamsize>(frame_bytes));
    const std::size_t got = static_cast<std::size_t>(stream.gcount());
    if (got == 0) break;
    if (got != frame_bytes) {
      throw Error(Errc::size_mismatch,
                  "stream length is not a multiple of the 4:2:0 frame size");
    }
    Frame frame;
    frame.width = width;
    frame.height = height;
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(buffer.data());
    frame.luma.assign(bytes, bytes + luma_bytes);
    frame.cb.assign(bytes + luma_bytes, bytes + luma_bytes + chroma_bytes);
    frame.cr.assign(bytes + luma_bytes + chroma_bytes, bytes + frame_bytes);
    chunk.frames.push_back(std::move(frame));
  }
  return chunk;
}

VideoChunk read_raw_yuv_file(const std::string& path, int width, int height,
                             double fps) {
  std::ifstream in = open_input(path);
  return read_raw_yuv(in, width, height, fps);
}

void write_raw_yuv(std::ostream& stream, const VideoChunk& chunk) {
  const std::size_t chroma_bytes =
      static_cast<std::size_t>(chunk.width) * chunk.height / 4;
  std::vector<std::uint8_t> neutral(chroma_bytes, 128);
  for (const Frame& frame : chunk.frames) {
    stream.write(reinterpret_cast<const char*>(frame.luma.data()),
                 static_cast<std::streamsize>(frame.luma.size()));
    const auto& cb = frame.has_chroma() ? frame.cb : neutral;
    const auto& cr = frame.has_chroma() ? frame.cr : neutral;
    stream.write(reinterpret_cast<const char*>(cb.data()),
                 static_cast<std::streamsize>(chroma_bytes));
    stream.write(reinterpret_cast<const char*>(cr.data()),
                 static_cast<std::streamsize>(chroma_bytes));
  }
  if (!stream) throw Error(Errc::io_failure, "raw yuv write failed");
}

}  // namespace ladder
