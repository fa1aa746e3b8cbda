#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include "kpnp/dense_oracle.hpp"
#include "kpnp/image.hpp"
#include "kpnp/rng.hpp"

namespace kpnp::test {

inline Image random_image(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return Image(rows, cols, uniform_vector(rng, rows * cols));
}

inline Image ramp(std::size_t rows, std::size_t cols) {
  Image img(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) img(r, c) = (r + c) / double(rows + cols - 2);
  return img;
}

template <class Map>
Eigen::MatrixXd dense(const Map& map, std::size_t n_in, std::size_t n_out) {
  return materialize([&](std::span<const double> x, std::span<double> y) { map(x, y); }, n_in, n_out);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kpnp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace kpnp::test
