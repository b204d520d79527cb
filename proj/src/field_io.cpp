#include "plab/field_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace plab {

namespace {

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

void write_sidecar(const Grid2D& g, int components, const std::filesystem::path& stem,
                   std::optional<std::uint64_t> seed) {
  nlohmann::ordered_json j;
  j["nx"] = g.nx();
  j["ny"] = g.ny();
  j["x0"] = g.x0();
  j["y0"] = g.y0();
  j["h"] = g.h();
  j["components"] = components;
  if (seed) j["seed"] = *seed;
  std::ofstream out(with_ext(stem, ".json"));
  if (!out) throw std::runtime_error("cannot write " + with_ext(stem, ".json").string());
  out << j.dump(2) << '\n';
}

struct Sidecar {
  Grid2D grid;
  int components;
};

Sidecar read_sidecar(const std::filesystem::path& stem) {
  std::ifstream in(with_ext(stem, ".json"));
  if (!in) throw std::runtime_error("cannot read " + with_ext(stem, ".json").string());
  const auto j = nlohmann::json::parse(in);
  return {Grid2D(j.at("x0").get<double>(), j.at("y0").get<double>(), j.at("h").get<double>(),
                 j.at("nx").get<int>(), j.at("ny").get<int>()),
          j.at("components").get<int>()};
}

std::vector<double> read_values(const std::filesystem::path& stem, const Sidecar& sc) {
  std::ifstream in(with_ext(stem, ".csv"));
  if (!in) throw std::runtime_error("cannot read " + with_ext(stem, ".csv").string());
  const std::size_t per_row = std::size_t(sc.grid.nx()) * std::size_t(sc.components);
  std::vector<double> values;
  values.reserve(per_row * std::size_t(sc.grid.ny()));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      values.push_back(parse_double(std::string_view(line).substr(start, comma - start)));
      ++count;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (count != per_row) throw std::runtime_error("field csv row has wrong number of entries");
    ++rows;
  }
  if (rows != sc.grid.ny()) throw std::runtime_error("field csv has wrong number of rows");
  return values;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\r')) token.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  }
  return v;
}

void write_field(const ScalarField& f, const std::filesystem::path& stem, std::optional<std::uint64_t> seed) {
  const Grid2D& g = f.grid();
  write_sidecar(g, 1, stem, seed);
  std::ofstream out(with_ext(stem, ".csv"));
  if (!out) throw std::runtime_error("cannot write " + with_ext(stem, ".csv").string());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i) out << ',';
      out << format_double(f(i, j));
    }
    out << '\n';
  }
}

void write_field(const VectorField& f, const std::filesystem::path& stem, std::optional<std::uint64_t> seed) {
  const Grid2D& g = f.grid();
  write_sidecar(g, 2, stem, seed);
  std::ofstream out(with_ext(stem, ".csv"));
  if (!out) throw std::runtime_error("cannot write " + with_ext(stem, ".csv").string());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i) out << ',';
      out << format_double(f(i, j).x) << ',' << format_double(f(i, j).y);
    }
    out << '\n';
  }
}

ScalarField read_scalar_field(const std::filesystem::path& stem) {
  const Sidecar sc = read_sidecar(stem);
  if (sc.components != 1) throw std::runtime_error("expected a scalar field dump");
  return ScalarField(sc.grid, read_values(stem, sc));
}

VectorField read_vector_field(const std::filesystem::path& stem) {
  const Sidecar sc = read_sidecar(stem);
  if (sc.components != 2) throw std::runtime_error("expected a vector field dump");
  const auto raw = read_values(stem, sc);
  std::vector<Vec2> v(raw.size() / 2);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = {raw[2 * k], raw[2 * k + 1]};
  return VectorField(sc.grid, std::move(v));
}

}  // namespace plab
