#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mgfem/apps.hpp"
#include "mgfem/fem.hpp"
#include "mgfem/timing.hpp"

namespace mgfem {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// RFC-4180 field quoting: fields with a comma, quote, CR or LF are quoted
/// and embedded quotes doubled.
std::string csv_field(std::string_view s);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

/// Legacy ASCII unstructured grid. Scalar fields become SCALARS blocks, 2- and
/// 3-component fields VECTORS blocks (padded with zeros in 2D).
void write_vtk(const FeSpace& space, const std::vector<NamedField>& fields, std::ostream& os);
void write_vtk(const FeSpace& space, const std::vector<NamedField>& fields, const std::filesystem::path& path);

/// Structure of a legacy VTK file, recovered by write_vtk's inverse.
struct VtkData {
  std::string title;
  std::vector<std::array<double, 3>> points;
  std::vector<std::vector<Index>> cells;
  std::vector<int> cell_types;
  struct Field {
    std::string kind;  ///< SCALARS or VECTORS
    std::string name;
    int n_comp = 1;
    std::vector<double> values;
  };
  std::vector<Field> fields;
};
/// Throws Error on any structural inconsistency.
VtkData read_vtk(std::istream& is);

void write_timing_report(const TimingReport& report, const std::filesystem::path& path);
/// step,time,iterations,residual,<value_name>
void write_step_table(const std::vector<StepRecord>& steps, const std::string& value_name, std::ostream& os);
void write_ns_diagnostics(const std::vector<NsDiagnostics>& diag, std::ostream& os);

/// Opens a file for writing; throws Error naming the path on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace mgfem
