#include "pano/io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <filesystem>

namespace pano {

ColorImage load_image(const std::string &path) {
    if (!std::filesystem::exists(path)) throw ImageIoError("image not found: '" + path + "'");
    const cv::Mat raw = cv::imread(path, cv::IMREAD_COLOR | cv::IMREAD_ANYDEPTH);
    if (raw.empty()) throw ImageIoError("cannot decode image '" + path + "'");
    const double scale = raw.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0;
    cv::Mat img;
    raw.convertTo(img, CV_32FC3, scale);
    ColorImage out(img.cols, img.rows);
    for (int y = 0; y < img.rows; ++y) {
        const auto *row = img.ptr<cv::Vec3f>(y);
        for (int x = 0; x < img.cols; ++x) out(x, y) = Rgb(row[x][2], row[x][1], row[x][0]);
    }
    return out;
}

Mask load_mask(const std::string &path) {
    if (!std::filesystem::exists(path)) throw ImageIoError("mask not found: '" + path + "'");
    const cv::Mat img = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (img.empty()) throw ImageIoError("cannot decode mask '" + path + "'");
    Mask out(img.cols, img.rows, 0);
    for (int y = 0; y < img.rows; ++y) {
        const auto *row = img.ptr<std::uint8_t>(y);
        for (int x = 0; x < img.cols; ++x) out(x, y) = row[x] ? 1 : 0;
    }
    return out;
}

namespace {

void write(const std::string &path, const cv::Mat &mat) {
    bool ok = false;
    try {
        ok = cv::imwrite(path, mat);
    } catch (const cv::Exception &e) {
        throw ImageIoError("cannot write '" + path + "': " + e.what());
    }
    if (!ok) throw ImageIoError("cannot write '" + path + "'");
}

}  // namespace

void save_image(const std::string &path, const ColorImage &image) {
    cv::Mat mat(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        auto *row = mat.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width(); ++x) {
            const Rgb &c = image(x, y);
            row[x] = cv::Vec3b(to_byte(c[2]), to_byte(c[1]), to_byte(c[0]));
        }
    }
    write(path, mat);
}

void save_mask(const std::string &path, const Mask &mask) {
    cv::Mat mat(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        auto *row = mat.ptr<std::uint8_t>(y);
        for (int x = 0; x < mask.width(); ++x) row[x] = mask(x, y) ? 255 : 0;
    }
    write(path, mat);
}

void save_scalar_map(const std::string &path, const ScalarMap &map) {
    double hi = 0.0;
    for (double v : map.data()) {
        if (std::isfinite(v)) hi = std::max(hi, v);
    }
    cv::Mat mat(map.height(), map.width(), CV_8UC1);
    for (int y = 0; y < map.height(); ++y) {
        auto *row = mat.ptr<std::uint8_t>(y);
        for (int x = 0; x < map.width(); ++x) {
            const double v = hi > 0.0 && std::isfinite(map(x, y)) ? map(x, y) / hi : 0.0;
            row[x] = to_byte(static_cast<float>(v));
        }
    }
    write(path, mat);
}

ColorImage quantize(const ColorImage &image) {
    ColorImage out(image.width(), image.height());
    for (std::size_t k = 0; k < image.size(); ++k) {
        const Rgb &c = image[k];
        // Same arithmetic as the 8-bit branch of load_image.
        const auto level = [](float v) { return static_cast<float>(to_byte(v)) * static_cast<float>(1.0 / 255.0); };
        out[k] = Rgb(level(c[0]), level(c[1]), level(c[2]));
    }
    return out;
}

}  // namespace pano
