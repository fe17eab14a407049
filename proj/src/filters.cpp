#include "faz3d/filters.hpp"

#include <cmath>
#include <stdexcept>

namespace faz3d {

std::vector<float> gaussian_kernel(double sigma, double truncate) {
    if (!(sigma > 0)) throw std::invalid_argument("gaussian sigma must be > 0");
    const int r = static_cast<int>(std::ceil(truncate * sigma));
    std::vector<double> w(static_cast<std::size_t>(2 * r + 1));
    double sum = 0;
    for (int i = -r; i <= r; ++i) {
        w[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += w[static_cast<std::size_t>(i + r)];
    }
    std::vector<float> k(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) k[i] = static_cast<float>(w[i] / sum);
    return k;
}

namespace {

void check_kernel(std::span<const float> kernel) {
    if (kernel.empty() || kernel.size() % 2 == 0) throw std::invalid_argument("kernel length must be odd");
}

}  // namespace

ScalarImage convolve_x(const ScalarImage& img, std::span<const float> kernel, KernelForm form) {
    check_kernel(kernel);
    const int nx = img.nx(), ny = img.ny();
    const int r = static_cast<int>(kernel.size() / 2);
    ScalarImage out(nx, ny);
    std::vector<float> row(static_cast<std::size_t>(nx + 2 * r));
    for (int y = 0; y < ny; ++y) {
        for (int i = 0; i < nx + 2 * r; ++i) row[static_cast<std::size_t>(i)] = img(std::clamp(i - r, 0, nx - 1), y);
        for (int x = 0; x < nx; ++x) {
            float acc = 0;
            const float* p = row.data() + x;
            if (form == KernelForm::direct) {
                for (std::size_t j = 0; j < kernel.size(); ++j) acc += kernel[j] * p[j];
            } else {
                const float c = p[r];
                for (std::size_t j = 0; j < kernel.size(); ++j) acc += kernel[j] * (p[j] - c);
            }
            out(x, y) = acc;
        }
    }
    return out;
}

ScalarImage convolve_y(const ScalarImage& img, std::span<const float> kernel, KernelForm form) {
    check_kernel(kernel);
    const int nx = img.nx(), ny = img.ny();
    const int r = static_cast<int>(kernel.size() / 2);
    ScalarImage out(nx, ny);
    for (int y = 0; y < ny; ++y) {
        float* o = &out(0, y);
        const float* c = &img(0, y);
        for (std::size_t j = 0; j < kernel.size(); ++j) {
            const int yy = std::clamp(y + static_cast<int>(j) - r, 0, ny - 1);
            const float* s = &img(0, yy);
            const float w = kernel[j];
            if (form == KernelForm::direct) {
                for (int x = 0; x < nx; ++x) o[x] += w * s[x];
            } else {
                for (int x = 0; x < nx; ++x) o[x] += w * (s[x] - c[x]);
            }
        }
    }
    return out;
}

ScalarImage gaussian_blur(const ScalarImage& img, double sigma) {
    const auto k = gaussian_kernel(sigma);
    return convolve_y(convolve_x(img, k), k);
}

}  // namespace faz3d
