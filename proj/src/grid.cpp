#include "gqmech/grid.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gqmech/errors.hpp"

namespace gqm {

ComplexGrid::ComplexGrid(std::vector<Axis> axes, Boundary boundary)
    : axes_(std::move(axes)), boundary_(boundary) {
  if (axes_.empty()) throw DimensionMismatch("ComplexGrid: needs at least one axis");
  std::size_t total = 1;
  for (const Axis& a : axes_) {
    if (a.n < 1) throw DimensionMismatch("ComplexGrid: axis needs n >= 1");
    if (!(a.hi > a.lo)) throw Error("ComplexGrid: axis box must have hi > lo");
    total *= a.n;
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t i = axes_.size(); i-- > 1;)
    strides_[i - 1] = strides_[i] * axes_[i].n;
  values_.assign(total, Complex(0.0, 0.0));
}

double ComplexGrid::spacing(std::size_t ax) const {
  const Axis& a = axes_[ax];
  return boundary_ == Boundary::Periodic ? (a.hi - a.lo) / static_cast<double>(a.n)
                                         : (a.hi - a.lo) / static_cast<double>(a.n + 1);
}

double ComplexGrid::coord(std::size_t ax, std::size_t i) const {
  const Axis& a = axes_[ax];
  return boundary_ == Boundary::Periodic
             ? a.lo + static_cast<double>(i) * spacing(ax)
             : a.lo + static_cast<double>(i + 1) * spacing(ax);
}

double ComplexGrid::cell_volume() const {
  double v = 1.0;
  for (std::size_t ax = 0; ax < dim(); ++ax) v *= spacing(ax);
  return v;
}

std::size_t ComplexGrid::flatten(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t ax = 0; ax < dim(); ++ax) flat += idx[ax] * strides_[ax];
  return flat;
}

void ComplexGrid::unflatten(std::size_t flat, std::span<std::size_t> idx) const {
  for (std::size_t ax = 0; ax < dim(); ++ax) {
    idx[ax] = flat / strides_[ax];
    flat %= strides_[ax];
  }
}

void ComplexGrid::coords_of(std::span<const std::size_t> idx, std::span<double> x) const {
  for (std::size_t ax = 0; ax < dim(); ++ax) x[ax] = coord(ax, idx[ax]);
}

ComplexGrid::Complex ComplexGrid::shifted(std::span<const std::size_t> idx,
                                          std::size_t flat, std::size_t ax,
                                          int offset) const {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(axes_[ax].n);
  std::ptrdiff_t j = static_cast<std::ptrdiff_t>(idx[ax]) + offset;
  if (j >= 0 && j < n)
    return values_[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(flat) +
                                            static_cast<std::ptrdiff_t>(strides_[ax]) *
                                                offset)];
  if (boundary_ == Boundary::DirichletZero) return Complex(0.0, 0.0);
  j = ((j % n) + n) % n;
  std::size_t base = flat - idx[ax] * strides_[ax];
  return values_[base + static_cast<std::size_t>(j) * strides_[ax]];
}

bool ComplexGrid::same_layout(const ComplexGrid& other) const {
  if (dim() != other.dim() || boundary_ != other.boundary_) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (axes_[i].n != other.axes_[i].n || axes_[i].lo != other.axes_[i].lo ||
        axes_[i].hi != other.axes_[i].hi)
      return false;
  }
  return true;
}

ComplexGrid ComplexGrid::like() const { return ComplexGrid(axes_, boundary_); }

bool ComplexGrid::interior(std::span<const std::size_t> idx, std::size_t margin) const {
  if (boundary_ == Boundary::Periodic) return true;
  for (std::size_t ax = 0; ax < dim(); ++ax) {
    if (idx[ax] < margin || idx[ax] + margin >= axes_[ax].n) return false;
  }
  return true;
}

ComplexGrid make_grid(
    std::vector<Axis> axes, Boundary boundary,
    const std::function<ComplexGrid::Complex(std::span<const double>)>& fn) {
  ComplexGrid g(std::move(axes), boundary);
  std::vector<std::size_t> idx(g.dim(), 0);
  Vec x(g.dim(), 0.0);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, idx);
    g.coords_of(idx, x);
    g[flat] = fn(x);
  }
  return g;
}

ComplexGrid central_difference(const ComplexGrid& g, std::size_t ax) {
  if (ax >= g.dim()) throw DimensionMismatch("central_difference: axis index");
  ComplexGrid out = g.like();
  const double inv2h = 1.0 / (2.0 * g.spacing(ax));
  std::vector<std::size_t> idx(g.dim(), 0);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, idx);
    out[flat] = (g.shifted(idx, flat, ax, +1) - g.shifted(idx, flat, ax, -1)) * inv2h;
  }
  return out;
}

ComplexGrid second_difference(const ComplexGrid& g, std::size_t ax) {
  if (ax >= g.dim()) throw DimensionMismatch("second_difference: axis index");
  ComplexGrid out = g.like();
  const double invh2 = 1.0 / (g.spacing(ax) * g.spacing(ax));
  std::vector<std::size_t> idx(g.dim(), 0);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, idx);
    out[flat] = (g.shifted(idx, flat, ax, +1) - 2.0 * g[flat] +
                 g.shifted(idx, flat, ax, -1)) *
                invh2;
  }
  return out;
}

ComplexGrid laplacian(const ComplexGrid& g) {
  ComplexGrid out = g.like();
  for (std::size_t ax = 0; ax < g.dim(); ++ax) {
    ComplexGrid d = second_difference(g, ax);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[i];
  }
  return out;
}

// ---- serialization -------------------------------------------------------

namespace {

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("grid load: truncated file");
  return v;
}

}  // namespace

void save_grid_binary(const ComplexGrid& g, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("grid save: cannot open " + path);
  os.write("GQG1", 4);
  write_pod<std::uint32_t>(os, 1);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  write_pod<std::uint32_t>(os, g.boundary() == Boundary::Periodic ? 0u : 1u);
  for (const Axis& a : g.axes()) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(a.n));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(a.label.size()));
    os.write(a.label.data(), static_cast<std::streamsize>(a.label.size()));
    write_pod<double>(os, a.lo);
    write_pod<double>(os, a.hi);
  }
  for (const auto& v : g.values()) {
    write_pod<double>(os, v.real());
    write_pod<double>(os, v.imag());
  }
  if (!os) throw IoError("grid save: write failed for " + path);
}

ComplexGrid load_grid_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("grid load: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "GQG1", 4) != 0)
    throw IoError("grid load: bad magic in " + path);
  const auto version = read_pod<std::uint32_t>(is);
  if (version != 1) throw IoError("grid load: unsupported version");
  const auto dim = read_pod<std::uint32_t>(is);
  const auto btag = read_pod<std::uint32_t>(is);
  if (btag > 1) throw IoError("grid load: bad boundary tag");
  std::vector<Axis> axes(dim);
  for (Axis& a : axes) {
    a.n = read_pod<std::uint32_t>(is);
    const auto len = read_pod<std::uint32_t>(is);
    a.label.resize(len);
    is.read(a.label.data(), len);
    a.lo = read_pod<double>(is);
    a.hi = read_pod<double>(is);
    if (!is) throw IoError("grid load: truncated axis header");
  }
  ComplexGrid g(std::move(axes), btag == 0 ? Boundary::Periodic : Boundary::DirichletZero);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double re = read_pod<double>(is);
    double im = read_pod<double>(is);
    g[i] = {re, im};
  }
  return g;
}

std::string grid_to_json_string(const ComplexGrid& g, int indent) {
  nlohmann::ordered_json j;
  j["boundary"] = g.boundary() == Boundary::Periodic ? "periodic" : "dirichlet0";
  nlohmann::ordered_json axes = nlohmann::ordered_json::array();
  for (const Axis& a : g.axes()) {
    nlohmann::ordered_json aj;
    aj["label"] = a.label;
    aj["lo"] = a.lo;
    aj["hi"] = a.hi;
    aj["n"] = a.n;
    axes.push_back(std::move(aj));
  }
  j["axes"] = std::move(axes);
  nlohmann::ordered_json vals = nlohmann::ordered_json::array();
  for (const auto& v : g.values()) vals.push_back({v.real(), v.imag()});
  j["values"] = std::move(vals);
  return indent >= 0 ? j.dump(indent) : j.dump();
}

ComplexGrid grid_from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<Axis> axes;
  for (const auto& aj : j.at("axes")) {
    Axis a;
    a.label = aj.at("label").get<std::string>();
    a.lo = aj.at("lo").get<double>();
    a.hi = aj.at("hi").get<double>();
    a.n = aj.at("n").get<std::size_t>();
    axes.push_back(std::move(a));
  }
  std::string btag = j.at("boundary").get<std::string>();
  ComplexGrid g(std::move(axes),
                btag == "periodic" ? Boundary::Periodic : Boundary::DirichletZero);
  const auto& vals = j.at("values");
  if (vals.size() != g.size()) throw IoError("grid json: value count mismatch");
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = {vals[i][0].get<double>(), vals[i][1].get<double>()};
  return g;
}

}  // namespace gqm
