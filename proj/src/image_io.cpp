#include "splat2d/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace splat2d {

namespace {

// next whitespace-delimited token, skipping '#' comments
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) continue;
        tok.push_back(static_cast<char>(c));
        while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
            tok.push_back(static_cast<char>(in.get()));
        }
        return tok;
    }
    throw std::runtime_error("load_image: unexpected end of header");
}

int parse_int(const std::string& tok, const char* what) {
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("load_image: bad ") + what + " '" + tok + "'");
    }
}

} // namespace

FeatureGrid load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("load_image: cannot open " + path);
    }
    const std::string magic = next_token(in);
    int channels = 0;
    if (magic == "P6") {
        channels = 3;
    } else if (magic == "P5") {
        channels = 1;
    } else {
        throw std::runtime_error("load_image: unsupported format '" + magic + "' in " + path);
    }
    const int w = parse_int(next_token(in), "width");
    const int h = parse_int(next_token(in), "height");
    const int maxval = parse_int(next_token(in), "maxval");
    if (w < 1 || h < 1) {
        throw std::runtime_error("load_image: bad dimensions in " + path);
    }
    if (maxval != 255) {
        throw std::runtime_error("load_image: only maxval 255 is supported (" + path + ")");
    }
    in.get(); // single whitespace byte after maxval

    const std::size_t count = static_cast<std::size_t>(w) * h * channels;
    std::vector<unsigned char> bytes(count);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
        throw std::runtime_error("load_image: truncated pixel data in " + path);
    }

    FeatureGrid grid(channels, h, w);
    std::size_t i = 0; // file order is interleaved, row-major
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < channels; ++c) {
                grid.at(c, y, x) = bytes[i++] / 255.0;
            }
        }
    }
    return grid;
}

void save_image(const FeatureGrid& grid, const std::string& path) {
    if (grid.channels != 1 && grid.channels != 3) {
        throw std::runtime_error("save_image: only 1- or 3-channel grids");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("save_image: cannot open " + path);
    }
    out << (grid.channels == 3 ? "P6" : "P5") << '\n'
        << grid.width << ' ' << grid.height << '\n' << "255\n";
    std::vector<unsigned char> bytes;
    bytes.reserve(static_cast<std::size_t>(grid.width) * grid.height * grid.channels);
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            for (int c = 0; c < grid.channels; ++c) {
                const double v = std::clamp(grid.at(c, y, x), 0.0, 1.0);
                bytes.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
            }
        }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("save_image: write failed for " + path);
    }
}

} // namespace splat2d
