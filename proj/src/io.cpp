#include "mgfem/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mgfem {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("format_double: conversion failed");
  return std::string(buf, end);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) os_ << ',';
    os_ << csv_field(fields[k]);
  }
  os_ << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

namespace {

constexpr std::array<int, 4> kQuadOrder{0, 1, 3, 2};
constexpr std::array<int, 8> kHexOrder{0, 1, 3, 2, 4, 5, 7, 6};

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c <= ' ' || c > '~') return false;
  return true;
}

}  // namespace

void write_vtk(const FeSpace& space, const std::vector<NamedField>& fields, std::ostream& os) {
  const Index n = space.n_nodes();
  const int dim = space.dim();
  for (const auto& f : fields) {
    if (!valid_name(f.name)) throw Error("write_vtk: invalid field name '" + f.name + "'");
    if (f.values.n_nodes() != n) throw DimensionError("write_vtk: field '" + f.name + "' does not match the space");
    if (f.values.n_comp() < 1 || f.values.n_comp() > 3)
      throw UnsupportedError("write_vtk: field '" + f.name + "' has " + std::to_string(f.values.n_comp()) +
                             " components");
  }
  os << "# vtk DataFile Version 3.0\nmgfem\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << n << " double\n";
  for (Index i = 0; i < n; ++i) {
    const auto& x = space.node_coord(i);
    os << format_double(x[0]) << ' ' << format_double(x[1]) << ' ' << format_double(dim == 3 ? x[2] : 0.0) << '\n';
  }
  const Index n_cells = static_cast<Index>(space.elements().size());
  const int nc = 1 << dim;
  os << "CELLS " << n_cells << ' ' << n_cells * (nc + 1) << '\n';
  for (Index k = 0; k < n_cells; ++k) {
    const auto en = space.element_nodes(k);
    os << nc;
    for (int c = 0; c < nc; ++c) os << ' ' << en[dim == 3 ? kHexOrder[c] : kQuadOrder[c]];
    os << '\n';
  }
  os << "CELL_TYPES " << n_cells << '\n';
  for (Index k = 0; k < n_cells; ++k) os << (dim == 3 ? 12 : 9) << '\n';
  if (fields.empty()) return;
  os << "POINT_DATA " << n << '\n';
  for (const auto& f : fields) {
    const Index c = f.values.n_comp();
    if (c == 1) {
      os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (Index i = 0; i < n; ++i) os << format_double(f.values(i, 0)) << '\n';
    } else {
      os << "VECTORS " << f.name << " double\n";
      for (Index i = 0; i < n; ++i)
        os << format_double(f.values(i, 0)) << ' ' << format_double(f.values(i, 1)) << ' '
           << format_double(c == 3 ? f.values(i, 2) : 0.0) << '\n';
    }
  }
}

void write_vtk(const FeSpace& space, const std::vector<NamedField>& fields, const std::filesystem::path& path) {
  auto os = open_output(path);
  write_vtk(space, fields, os);
  if (!os) throw Error("write to '" + path.string() + "' failed");
}

VtkData read_vtk(std::istream& is) {
  VtkData d;
  std::string line;
  auto fail = [](const std::string& what) { throw Error("read_vtk: " + what); };
  if (!std::getline(is, line) || line.rfind("# vtk DataFile Version", 0) != 0) fail("missing header");
  if (!std::getline(is, d.title)) fail("missing title");
  if (!std::getline(is, line) || line != "ASCII") fail("only ASCII files are supported");
  if (!std::getline(is, line) || line != "DATASET UNSTRUCTURED_GRID") fail("expected DATASET UNSTRUCTURED_GRID");
  std::string kw, type;
  Index n = 0;
  if (!(is >> kw >> n >> type) || kw != "POINTS" || n < 0) fail("bad POINTS section");
  d.points.resize(n);
  for (auto& p : d.points)
    if (!(is >> p[0] >> p[1] >> p[2])) fail("truncated POINTS");
  Index n_cells = 0, total = 0;
  if (!(is >> kw >> n_cells >> total) || kw != "CELLS") fail("bad CELLS section");
  Index seen = 0;
  for (Index k = 0; k < n_cells; ++k) {
    Index m = 0;
    if (!(is >> m) || m < 1) fail("bad cell size");
    std::vector<Index> c(m);
    for (auto& v : c)
      if (!(is >> v) || v < 0 || v >= n) fail("cell refers to a missing point");
    seen += m + 1;
    d.cells.push_back(std::move(c));
  }
  if (seen != total) fail("CELLS size field does not match");
  Index n_types = 0;
  if (!(is >> kw >> n_types) || kw != "CELL_TYPES" || n_types != n_cells) fail("bad CELL_TYPES section");
  d.cell_types.resize(n_types);
  for (Index k = 0; k < n_types; ++k) {
    if (!(is >> d.cell_types[k])) fail("truncated CELL_TYPES");
    const std::size_t want = d.cell_types[k] == 9 ? 4 : d.cell_types[k] == 12 ? 8 : 0;
    if (want == 0 || d.cells[k].size() != want) fail("cell type does not match its size");
  }
  if (!(is >> kw)) return d;
  Index n_data = 0;
  if (kw != "POINT_DATA" || !(is >> n_data) || n_data != n) fail("bad POINT_DATA section");
  while (is >> kw) {
    VtkData::Field f;
    f.kind = kw;
    if (kw == "SCALARS") {
      if (!(is >> f.name >> type >> f.n_comp)) fail("bad SCALARS header");
      std::string lt, table;
      if (!(is >> lt >> table) || lt != "LOOKUP_TABLE") fail("missing LOOKUP_TABLE");
    } else if (kw == "VECTORS") {
      if (!(is >> f.name >> type)) fail("bad VECTORS header");
      f.n_comp = 3;
    } else {
      fail("unknown section '" + kw + "'");
    }
    f.values.resize(static_cast<std::size_t>(n * f.n_comp));
    for (auto& v : f.values)
      if (!(is >> v)) fail("truncated field '" + f.name + "'");
    d.fields.push_back(std::move(f));
  }
  return d;
}

void write_timing_report(const TimingReport& report, const std::filesystem::path& path) {
  auto os = open_output(path);
  write_timing_csv(report, os);
  if (!os) throw Error("write to '" + path.string() + "' failed");
}

void write_step_table(const std::vector<StepRecord>& steps, const std::string& value_name, std::ostream& os) {
  CsvWriter w(os);
  w.row({"step", "time", "iterations", "residual", value_name});
  for (const auto& s : steps)
    w.row({std::to_string(s.step), format_double(s.time), std::to_string(s.iterations), format_double(s.residual),
           format_double(s.error)});
}

void write_ns_diagnostics(const std::vector<NsDiagnostics>& diag, std::ostream& os) {
  CsvWriter w(os);
  w.row({"step", "time", "kinetic_energy", "divergence", "corrected_divergence", "gmres_iterations",
         "pressure_mean", "nodal_identity_error"});
  for (const auto& d : diag)
    w.row({std::to_string(d.step), format_double(d.time), format_double(d.kinetic_energy),
           format_double(d.divergence), format_double(d.corrected_divergence), std::to_string(d.gmres_iterations),
           format_double(d.pressure_mean), format_double(d.nodal_identity_error)});
}

}  // namespace mgfem
