#include "zinpaint/io_image.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

#ifdef ZINPAINT_HAS_PNG
#include <png.h>
#endif

namespace zinpaint {

namespace {

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

int read_pnm_token(std::istream& in) {
    // Skips whitespace and '#' comments between header tokens.
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) throw std::runtime_error("pnm: malformed header");
    return value;
}

raster_image load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image: " + path);
    char p = 0, kind = 0;
    in.get(p).get(kind);
    if (p != 'P' || (kind != '5' && kind != '6'))
        throw std::runtime_error("pnm: only binary P5/P6 supported: " + path);
    const int w = read_pnm_token(in);
    const int h = read_pnm_token(in);
    const int maxval = read_pnm_token(in);
    if (maxval != 255) throw std::runtime_error("pnm: only maxval 255 supported");
    in.get();  // single whitespace before raster data

    raster_image img(w, h, kind == '6' ? 3 : 1);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw std::runtime_error("pnm: truncated raster data: " + path);
    return img;
}

void save_pnm(const raster_image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write image: " + path);
    out << (img.channels == 3 ? "P6" : "P5") << "\n"
        << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) throw std::runtime_error("cannot write image: " + path);
}

#ifdef ZINPAINT_HAS_PNG

struct file_closer {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

raster_image load_png(const std::string& path) {
    std::unique_ptr<std::FILE, file_closer> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: failed to decode " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_packing(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
        png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int ch = static_cast<int>(png_get_channels(png, info));
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: unsupported channel count");
    }

    raster_image img(w, h, ch);
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = img.pixel(0, y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void save_png(const raster_image& img, const std::string& path) {
    std::unique_ptr<std::FILE, file_closer> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot write image: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: failed to encode " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8,
                 img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.pixel(0, y)));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

#endif  // ZINPAINT_HAS_PNG

}  // namespace

bool png_supported() {
#ifdef ZINPAINT_HAS_PNG
    return true;
#else
    return false;
#endif
}

raster_image load_image(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png") {
#ifdef ZINPAINT_HAS_PNG
        return load_png(path);
#else
        throw std::runtime_error("built without PNG support; use .ppm/.pgm: " + path);
#endif
    }
    if (ext == "ppm" || ext == "pgm" || ext == "pnm") return load_pnm(path);
    throw std::runtime_error("unsupported image format: " + path);
}

void save_image(const raster_image& image, const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png") {
#ifdef ZINPAINT_HAS_PNG
        save_png(image, path);
        return;
#else
        throw std::runtime_error("built without PNG support; use .ppm/.pgm: " + path);
#endif
    }
    if (ext == "ppm" || ext == "pgm" || ext == "pnm") {
        save_pnm(image, path);
        return;
    }
    throw std::runtime_error("unsupported image format: " + path);
}

mask_image load_mask(const std::string& path) {
    const raster_image raw = load_image(path);
    mask_image mask(raw.width, raw.height);
    for (int y = 0; y < raw.height; ++y) {
        for (int x = 0; x < raw.width; ++x) {
            int sum = 0;
            const std::uint8_t* px = raw.pixel(x, y);
            for (int c = 0; c < raw.channels; ++c) sum += px[c];
            mask.set_known(x, y, sum / raw.channels >= 128);
        }
    }
    return mask;
}

}  // namespace zinpaint
