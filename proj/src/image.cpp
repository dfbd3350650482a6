#include "shuttle3d/image.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "shuttle3d/errors.hpp"

namespace shuttle3d::court {

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
  if (w <= 0 || h <= 0) throw InvalidInput("image dimensions must be positive");
}

RgbImage::RgbImage(int w, int h, Rgb fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw InvalidInput("image dimensions must be positive");
  data.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    data[i] = fill.r;
    data[i + 1] = fill.g;
    data[i + 2] = fill.b;
  }
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string token(std::istream& in) {
  std::string out;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    out.push_back(static_cast<char>(c));
    c = in.get();
  }
  // The single whitespace after maxval has been consumed.
  return out;
}

int positive_int(std::istream& in, const std::filesystem::path& path) {
  const std::string t = token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used != t.size() || v <= 0) throw std::invalid_argument("bad");
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("malformed PNM header in " + path.string());
  }
}

std::vector<std::uint8_t> read_pnm(const std::filesystem::path& path, const char* magic,
                                   int channels, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open image " + path.string());
  if (token(in) != magic) {
    throw InvalidInput(path.string() + " is not a binary " + magic + " file");
  }
  width = positive_int(in, path);
  height = positive_int(in, path);
  if (positive_int(in, path) != 255) throw InvalidInput("only maxval 255 is supported");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size())) {
    throw InvalidInput("truncated image data in " + path.string());
  }
  return data;
}

void write_pnm(const std::filesystem::path& path, const char* magic, int width, int height,
               const std::vector<std::uint8_t>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write image " + path.string());
  out << magic << '\n' << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  GrayImage img;
  img.pixels = read_pnm(path, "P5", 1, img.width, img.height);
  return img;
}

RgbImage read_ppm(const std::filesystem::path& path) {
  RgbImage img;
  img.data = read_pnm(path, "P6", 3, img.width, img.height);
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  write_pnm(path, "P5", img.width, img.height, img.pixels);
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  write_pnm(path, "P6", img.width, img.height, img.data);
}

}  // namespace shuttle3d::court
