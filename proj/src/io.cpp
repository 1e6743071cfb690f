/*
 * Copyright (C) 2026 The Lumenpoint Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lumenpoint/io.hpp"

#include "lumenpoint/error.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace lumenpoint::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

class ByteWriter {
public:
    template <typename T>
    void put(T value) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    void put_raw(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        bytes.insert(bytes.end(), p, p + n);
    }
    std::vector<std::uint8_t> bytes;
};

class ByteReader {
public:
    ByteReader(const std::vector<std::uint8_t>& b, const char* what) : bytes_(b), what_(what) {}

    template <typename T>
    T get() {
        T value;
        need(sizeof(T));
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n)
            fail(ErrorCode::FormatError, std::string("truncated ") + what_ + " data");
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    const std::vector<std::uint8_t>& bytes_;
    const char* what_;
    std::size_t pos_ = 0;
};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) fail(ErrorCode::IoError, "cannot open " + path.string());
    return f;
}

float srgb_to_linear(float c) {
    return c <= 0.04045f ? c / 12.92f : std::pow((c + 0.055f) / 1.055f, 2.4f);
}

struct PngRead {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;
    std::vector<std::uint8_t> data;  // row-major, native-endian 16-bit samples
};

PngRead read_png(const fs::path& path) {
    FilePtr f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(ErrorCode::IoError, "libpng initialization failed");
    }
    PngRead out;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::FormatError, "malformed PNG: " + path.string());
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    const int color_type = png_get_color_type(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && out.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (out.bit_depth == 16) png_set_swap(png);
    png_read_update_info(png, info);
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.data.resize(stride * static_cast<std::size_t>(out.height));
    rows.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + stride * static_cast<std::size_t>(y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_png(const fs::path& path, int width, int height, int color_type, int bit_depth,
               const std::uint8_t* data, std::size_t stride) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(ErrorCode::IoError, "libpng initialization failed");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::IoError, "failed writing PNG: " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);
    for (int y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(data + stride * static_cast<std::size_t>(y));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

template <typename Pixel>
void write_pfm_rows(const fs::path& path, int width, int height, Pixel pixel) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path.string());
    out << "PF\n" << width << ' ' << height << "\n-1.0\n";
    std::vector<float> row(static_cast<std::size_t>(width) * 3);
    for (int v = height - 1; v >= 0; --v) {
        for (int u = 0; u < width; ++u) {
            const auto c = pixel(u, v);
            for (int ch = 0; ch < 3; ++ch) row[static_cast<std::size_t>(u) * 3 + ch] = static_cast<float>(c[ch]);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorCode::IoError, "SHA-256 computation failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return hex.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_bytes(path)); }

std::vector<std::uint8_t> encode_lpc(const PointCloud& pc) {
    ByteWriter w;
    w.put_raw("LPC1", 4);
    w.put<std::uint64_t>(pc.size());
    for (const Point& p : pc) {
        for (int i = 0; i < 3; ++i) w.put<float>(static_cast<float>(p.position[i]));
        for (int i = 0; i < 3; ++i) w.put<float>(p.color[i]);
    }
    return std::move(w.bytes);
}

PointCloud decode_lpc(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "LPC1", 4) != 0)
        fail(ErrorCode::FormatError, "not an LPC1 point cloud");
    ByteReader r(bytes, "point cloud");
    r.get<std::uint32_t>();
    const auto count = r.get<std::uint64_t>();
    r.need(count * 6 * sizeof(float));
    std::vector<Point> pts(count);
    for (Point& p : pts) {
        for (int i = 0; i < 3; ++i) p.position[i] = r.get<float>();
        for (int i = 0; i < 3; ++i) p.color[i] = r.get<float>();
    }
    if (!r.at_end()) fail(ErrorCode::FormatError, "trailing bytes after point cloud");
    return PointCloud(std::move(pts));
}

void write_lpc(const fs::path& path, const PointCloud& pc) { write_bytes(path, encode_lpc(pc)); }
PointCloud read_lpc(const fs::path& path) { return decode_lpc(read_bytes(path)); }

std::vector<std::uint8_t> encode_rgbd(const RgbdImage& img) {
    ByteWriter w;
    w.put<std::uint32_t>(static_cast<std::uint32_t>(img.width()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(img.height()));
    for (const Rgb& c : img.color())
        for (float x : c) w.put<float>(x);
    for (float z : img.depth()) w.put<float>(z);
    return std::move(w.bytes);
}

RgbdImage decode_rgbd(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes, "rgbd");
    const auto w = r.get<std::uint32_t>();
    const auto h = r.get<std::uint32_t>();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    r.need(n * 4 * sizeof(float));
    std::vector<Rgb> color(n);
    std::vector<float> depth(n);
    for (Rgb& c : color)
        for (float& x : c) x = r.get<float>();
    for (float& z : depth) z = r.get<float>();
    if (!r.at_end()) fail(ErrorCode::FormatError, "trailing bytes after rgbd image");
    return RgbdImage(static_cast<int>(w), static_cast<int>(h), std::move(color), std::move(depth));
}

void write_rgbd(const fs::path& path, const RgbdImage& img) { write_bytes(path, encode_rgbd(img)); }
RgbdImage read_rgbd(const fs::path& path) { return decode_rgbd(read_bytes(path)); }

std::vector<Rgb> read_color_png(const fs::path& path, int& width, int& height, bool to_linear) {
    const PngRead png = read_png(path);
    if (png.bit_depth != 8 || png.channels < 3)
        fail(ErrorCode::FormatError, "color PNG must be 8-bit RGB or RGBA: " + path.string());
    width = png.width;
    height = png.height;
    std::vector<Rgb> out(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (int ch = 0; ch < 3; ++ch) {
            float c = png.data[i * png.channels + ch] / 255.0f;
            out[i][ch] = to_linear ? srgb_to_linear(c) : c;
        }
    }
    return out;
}

std::vector<float> read_depth_png(const fs::path& path, int& width, int& height) {
    const PngRead png = read_png(path);
    if (png.bit_depth != 16 || png.channels != 1)
        fail(ErrorCode::FormatError, "depth PNG must be 16-bit grayscale: " + path.string());
    width = png.width;
    height = png.height;
    std::vector<float> out(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint16_t mm;
        std::memcpy(&mm, png.data.data() + 2 * i, 2);
        out[i] = static_cast<float>(mm) / 1000.0f;
    }
    return out;
}

RgbdImage read_rgbd_png(const fs::path& color, const fs::path& depth, bool to_linear) {
    int cw = 0, ch = 0, dw = 0, dh = 0;
    auto c = read_color_png(color, cw, ch, to_linear);
    auto d = read_depth_png(depth, dw, dh);
    if (cw != dw || ch != dh)
        fail(ErrorCode::InvalidArgument, "color and depth PNG dimensions differ");
    return RgbdImage(cw, ch, std::move(c), std::move(d));
}

void write_color_png(const fs::path& path, int width, int height, const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        fail(ErrorCode::InvalidArgument, "RGB buffer size does not match dimensions");
    write_png(path, width, height, PNG_COLOR_TYPE_RGB, 8, rgb.data(), static_cast<std::size_t>(width) * 3);
}

void write_depth_png(const fs::path& path, int width, int height, const std::vector<std::uint16_t>& mm) {
    if (mm.size() != static_cast<std::size_t>(width) * height)
        fail(ErrorCode::InvalidArgument, "depth buffer size does not match dimensions");
    write_png(path, width, height, PNG_COLOR_TYPE_GRAY, 16,
              reinterpret_cast<const std::uint8_t*>(mm.data()), static_cast<std::size_t>(width) * 2);
}

void write_pfm(const fs::path& path, const EnvironmentMap& env) {
    write_pfm_rows(path, env.width(), env.height(), [&](int u, int v) { return env.at(u, v); });
}

void write_pfm(const fs::path& path, const IrradianceMap& irr) {
    write_pfm_rows(path, irr.width, irr.height, [&](int u, int v) { return irr.at(u, v); });
}

EnvironmentMap read_pfm(const fs::path& path) {
    const std::vector<std::uint8_t> bytes = read_bytes(path);
    std::string header;
    std::size_t pos = 0;
    // Three whitespace-terminated header tokens: "PF", "w h", scale.
    auto token = [&]() {
        while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
        return t;
    };
    if (token() != "PF") fail(ErrorCode::FormatError, "not a color PFM: " + path.string());
    int w = 0, h = 0;
    double scale = 0.0;
    try {
        w = std::stoi(token());
        h = std::stoi(token());
        scale = std::stod(token());
    } catch (const std::exception&) {
        fail(ErrorCode::FormatError, "malformed PFM header: " + path.string());
    }
    ++pos;  // single whitespace byte before the raster
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (w <= 0 || h <= 0 || bytes.size() < pos || bytes.size() - pos != n * 3 * sizeof(float))
        fail(ErrorCode::FormatError, "PFM raster size mismatch: " + path.string());
    const bool swap = scale > 0.0;
    EnvironmentMap env(w, h);
    const std::uint8_t* raster = bytes.data() + pos;
    for (int v = h - 1, row = 0; v >= 0; --v, ++row) {
        for (int u = 0; u < w; ++u) {
            for (int ch = 0; ch < 3; ++ch) {
                std::uint32_t bits;
                std::memcpy(&bits, raster + ((static_cast<std::size_t>(row) * w + u) * 3 + ch) * 4, 4);
                if (swap) bits = __builtin_bswap32(bits);
                env.at(u, v)[ch] = std::bit_cast<float>(bits);
            }
        }
    }
    return env;
}

nlohmann::json sh_to_json(const ShCoefficients& sh) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& ch : sh.coeffs) {
        nlohmann::json row = nlohmann::json::array();
        for (double x : ch) row.push_back(static_cast<float>(x));
        coeffs.push_back(row);
    }
    return {{"order", 2}, {"layout", "lm-row-major"}, {"channels", {"r", "g", "b"}}, {"coeffs", coeffs}};
}

ShCoefficients sh_from_json(const nlohmann::json& j) {
    try {
        if (j.at("order").get<int>() != 2) fail(ErrorCode::FormatError, "only order-2 SH is supported");
        if (j.at("layout").get<std::string>() != "lm-row-major")
            fail(ErrorCode::FormatError, "unsupported SH layout");
        const auto& coeffs = j.at("coeffs");
        if (coeffs.size() != kShChannels) fail(ErrorCode::FormatError, "SH JSON needs 3 channels");
        ShCoefficients sh;
        for (int c = 0; c < kShChannels; ++c) {
            if (coeffs[c].size() != kShBasisCount) fail(ErrorCode::FormatError, "SH JSON needs 9 values per channel");
            for (int i = 0; i < kShBasisCount; ++i) sh.coeffs[c][i] = coeffs[c][i].get<double>();
        }
        sh.validate();
        return sh;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::FormatError, std::string("malformed SH JSON: ") + e.what());
    }
}

void write_sh_json(const fs::path& path, const ShCoefficients& sh, const nlohmann::json& extra) {
    nlohmann::json j = sh_to_json(sh);
    for (const auto& [k, v] : extra.items()) j[k] = v;
    write_json(path, j);
}

ShCoefficients read_sh_json(const fs::path& path) { return sh_from_json(read_json(path)); }

nlohmann::json read_json(const fs::path& path) {
    const auto bytes = read_bytes(path);
    try {
        return nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::FormatError, path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    const std::string text = j.dump(2) + "\n";
    write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

nlohmann::json mat3_to_json(const Mat3& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
    return rows;
}

Mat3 mat3_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) fail(ErrorCode::FormatError, "expected a 3x3 matrix");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        if (!j[r].is_array() || j[r].size() != 3) fail(ErrorCode::FormatError, "expected a 3x3 matrix");
        for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Mat3 read_rotation_json(const fs::path& path) {
    const nlohmann::json j = read_json(path);
    return mat3_from_json(j.is_object() ? j.at("rotation") : j);
}

}  // namespace lumenpoint::io
