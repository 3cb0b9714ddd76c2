#include <cstdint>
#include <fstream>
#include <iterator>
#include <vector>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"
#include "socfedcs/fl_training.hpp"

namespace socfedcs {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> read_all(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IdxFormatError(fmt::format("{}: cannot open", path.string()));
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset)
{
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16)
        | (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void require_header(const std::vector<std::uint8_t>& bytes, std::size_t header, const std::filesystem::path& path)
{
    if (bytes.size() < header) {
        throw IdxFormatError(
            fmt::format("{}: truncated header ({} bytes, need {})", path.string(), bytes.size(), header));
    }
}

void require_magic(std::uint32_t got, std::uint32_t expected, const std::filesystem::path& path)
{
    if (got != expected) {
        throw IdxFormatError(
            fmt::format("{}: bad magic 0x{:08x} (expected 0x{:08x})", path.string(), got, expected));
    }
}

} // namespace

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path)
{
    const auto images = read_all(images_path);
    require_header(images, 16, images_path);
    require_magic(read_be32(images, 0), kImageMagic, images_path);
    const std::size_t count = read_be32(images, 4);
    const std::size_t rows = read_be32(images, 8);
    const std::size_t cols = read_be32(images, 12);
    const std::size_t pixels = rows * cols;
    if (images.size() < 16 + count * pixels) {
        throw IdxFormatError(fmt::format("{}: truncated payload ({} bytes, header promises {} images of {}x{})",
                                         images_path.string(), images.size(), count, rows, cols));
    }

    const auto labels = read_all(labels_path);
    require_header(labels, 8, labels_path);
    require_magic(read_be32(labels, 0), kLabelMagic, labels_path);
    const std::size_t label_count = read_be32(labels, 4);
    if (labels.size() < 8 + label_count) {
        throw IdxFormatError(fmt::format("{}: truncated payload ({} bytes, header promises {} labels)",
                                         labels_path.string(), labels.size(), label_count));
    }
    if (label_count != count) {
        throw IdxFormatError(fmt::format("image/label count mismatch: {} has {} images, {} has {} labels",
                                         images_path.string(), count, labels_path.string(), label_count));
    }

    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
    ds.labels.resize(count);
    int max_label = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* px = images.data() + 16 + i * pixels;
        for (std::size_t j = 0; j < pixels; ++j) {
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = px[j] / 255.0;
        }
        ds.labels[i] = labels[8 + i];
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.classes = std::max(2, max_label + 1);
    return ds;
}

} // namespace socfedcs
