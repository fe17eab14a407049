#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace faz3d {

/// Dense 2D grid, x fastest. Index (x, y) -> x + nx * y.
template <class T>
class Grid2 {
public:
    Grid2() = default;
    Grid2(int nx, int ny, T fill = T{})
        : nx_(nx), ny_(ny), data_(checked_size(nx, ny), fill) {}

    [[nodiscard]] int nx() const noexcept { return nx_; }
    [[nodiscard]] int ny() const noexcept { return ny_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(x) + static_cast<std::size_t>(nx_) * static_cast<std::size_t>(y);
    }
    [[nodiscard]] bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < nx_ && y < ny_;
    }

    T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

    [[nodiscard]] std::span<T> values() noexcept { return data_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return data_; }
    [[nodiscard]] std::vector<T>& storage() noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& storage() const noexcept { return data_; }

    [[nodiscard]] bool same_shape(const Grid2& o) const noexcept { return nx_ == o.nx_ && ny_ == o.ny_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const Grid2&, const Grid2&) = default;

private:
    static std::size_t checked_size(int nx, int ny) {
        if (nx <= 0 || ny <= 0) {
            throw std::invalid_argument("grid dimensions must be positive");
        }
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }

    int nx_ = 0;
    int ny_ = 0;
    std::vector<T> data_;
};

/// Dense 3D grid, x fastest then y then z. Index (x, y, z) -> x + nx * (y + ny * z).
template <class T>
class Grid3 {
public:
    Grid3() = default;
    Grid3(int nx, int ny, int nz, T fill = T{})
        : nx_(nx), ny_(ny), nz_(nz), data_(checked_size(nx, ny, nz), fill) {}

    [[nodiscard]] int nx() const noexcept { return nx_; }
    [[nodiscard]] int ny() const noexcept { return ny_; }
    [[nodiscard]] int nz() const noexcept { return nz_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] std::size_t plane_size() const noexcept {
        return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
    }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::size_t index(int x, int y, int z) const noexcept {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(nx_) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(ny_) * static_cast<std::size_t>(z));
    }
    [[nodiscard]] bool contains(int x, int y, int z) const noexcept {
        return x >= 0 && y >= 0 && z >= 0 && x < nx_ && y < ny_ && z < nz_;
    }

    T& operator()(int x, int y, int z) noexcept { return data_[index(x, y, z)]; }
    const T& operator()(int x, int y, int z) const noexcept { return data_[index(x, y, z)]; }

    [[nodiscard]] T* plane(int z) noexcept { return data_.data() + plane_size() * static_cast<std::size_t>(z); }
    [[nodiscard]] const T* plane(int z) const noexcept {
        return data_.data() + plane_size() * static_cast<std::size_t>(z);
    }

    [[nodiscard]] std::span<T> values() noexcept { return data_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return data_; }
    [[nodiscard]] std::vector<T>& storage() noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& storage() const noexcept { return data_; }

    template <class U>
    [[nodiscard]] bool same_shape(const Grid3<U>& o) const noexcept {
        return nx_ == o.nx() && ny_ == o.ny() && nz_ == o.nz();
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const Grid3&, const Grid3&) = default;

private:
    static std::size_t checked_size(int nx, int ny, int nz) {
        if (nx <= 0 || ny <= 0 || nz <= 0) {
            throw std::invalid_argument("grid dimensions must be positive");
        }
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }

    int nx_ = 0;
    int ny_ = 0;
    int nz_ = 0;
    std::vector<T> data_;
};

using ScalarImage = Grid2<float>;
using BinaryImage = Grid2<std::uint8_t>;
using ScalarVolume = Grid3<float>;
using BinaryVolume = Grid3<std::uint8_t>;
using SurfaceMap = Grid2<float>;

template <class T>
[[nodiscard]] std::size_t count_true(const T& grid) {
    return static_cast<std::size_t>(
        std::count_if(grid.values().begin(), grid.values().end(), [](auto v) { return v != 0; }));
}

}  // namespace faz3d
