#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmfg/io.hpp"
#include "lmfg/spectral.hpp"

#include <filesystem>
#include <sstream>

using namespace lmfg;

TEST_CASE("grid layout and validation") {
  const Grid g({2.0, 3.0}, {8, 4});
  CHECK(g.size() == 32);
  CHECK(g.stride(0) == 4);
  CHECK(g.coordinate(0, 0) == doctest::Approx(-2.0));
  CHECK(g.coordinate(1, 2) == doctest::Approx(0.0));
  CHECK(g.wavenumber(0, 5) == -3);
  CHECK(g.flatten(g.unflatten(13)) == 13);
  CHECK_THROWS_AS(Grid({1.0}, {6}), ContractViolation);
  CHECK_THROWS_AS(Grid({-1.0}, {8}), ContractViolation);
}

TEST_CASE("transform round trip and band-limited derivative") {
  const Grid g = Grid::cube(2, M_PI, 16);
  const Field f = Field::sample(g, [](const std::vector<double>& x) { return std::sin(3 * x[0]) * std::cos(2 * x[1]) + 0.5; });
  const RealArray back = inverse_transform_real(g, forward_transform(f));
  CHECK((back - f.values).abs().maxCoeff() < 1e-13);
  const Field dx = spectral_gradient(f, 0);
  const Field want = Field::sample(g, [](const std::vector<double>& x) { return 3 * std::cos(3 * x[0]) * std::cos(2 * x[1]); });
  CHECK((dx.values - want.values).abs().maxCoeff() < 1e-12);
}

TEST_CASE("periodic convolution of Gaussians") {
  // N(0, a^2) * N(0, b^2) = N(0, a^2 + b^2)
  const Grid g = Grid::cube(1, 10.0, 256);
  auto gauss = [](double s) {
    return [s](const std::vector<double>& x) { return std::exp(-0.5 * x[0] * x[0] / (s * s)) / (s * std::sqrt(2 * M_PI)); };
  };
  const Field a = Field::sample(g, gauss(0.5)), b = Field::sample(g, gauss(0.7));
  const Field want = Field::sample(g, gauss(std::sqrt(0.74)));
  const RealArray got = periodic_convolve(g, a.values, b.values);
  CHECK((got - want.values).abs().maxCoeff() < 1e-12);
}

TEST_CASE("probability field validation") {
  const Grid g = Grid::cube(1, 1.0, 8);
  CHECK_NOTHROW(ProbabilityField(Field::constant(g, 0.5)));
  CHECK_THROWS_AS(ProbabilityField(Field::constant(g, 0.6)), ContractViolation);
  RealArray v = RealArray::Constant(8, 0.5);
  v[0] = -0.1;
  CHECK_THROWS_AS(ProbabilityField(Field(g, v)), ContractViolation);
}

TEST_CASE("binary grid file round trip") {
  const Grid g({1.0, 2.0}, {4, 8});
  const Field f = Field::sample(g, [](const std::vector<double>& x) { return x[0] + 10 * x[1]; }, 0.25);
  const auto path = std::filesystem::temp_directory_path() / "lmfg_io_test.bin";
  io::write_field(path, f);
  const auto file = io::read_grid_file(path);
  CHECK(file.header.grid == g);
  CHECK(file.header.time_tag == 0.25);
  CHECK(!file.is_complex());
  CHECK((file.as_field().values - f.values).abs().maxCoeff() == 0.0);

  ComplexArray c = forward_transform(f);
  io::write_complex(path, g, c);
  const auto cf = io::read_grid_file(path);
  CHECK(cf.is_complex());
  CHECK(std::isnan(cf.header.time_tag));
  CHECK((cf.as_complex() - c).abs().maxCoeff() == 0.0);
  std::filesystem::remove(path);

  std::ostringstream os;
  io::write_csv(os, Field::constant(Grid::cube(1, 1.0, 2), 3.0));
  CHECK(os.str() == "-1,3\n0,3\n");
}
