#pragma once

// Internal PLY parsing shared by cloud_io.cpp and mesh.cpp. ASCII and
// binary_little_endian, scalar and list properties; unknown properties and
// elements are walked over without being interpreted.

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "scomp/error.hpp"

namespace scomp::detail {

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::size_t ply_type_size(PlyType t);
PlyType ply_type_from(const std::string& token, const std::string& context);

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;

  int property_index(const std::string& name) const;  // -1 when absent
};

/// One parsed data row: scalars holds non-list property values in property
/// order (list slots are left as 0); lists holds values per list property,
/// indexed by position among list properties.
struct PlyRow {
  std::vector<double> scalars;
  std::vector<std::vector<double>> lists;
};

class PlyReader {
 public:
  explicit PlyReader(const std::string& path);

  const std::vector<PlyElement>& elements() const { return elements_; }
  bool binary() const { return binary_; }

  /// Reads all rows of the next pending element, which must be elements()[k]
  /// in file order. The callback receives the row plus a human-readable
  /// location ("line 12" or "record 3") for error messages.
  void read_element(std::size_t element_index,
                    const std::function<void(const PlyRow&, const std::string& location)>& on_row);

  /// Skips the next pending element entirely.
  void skip_element(std::size_t element_index);

  std::string location_tag(std::size_t record) const;
  const std::string& path() const { return path_; }

 private:
  void parse_header();
  std::string next_line(const char* what);
  double read_binary_scalar(PlyType t);
  void read_row(const PlyElement& elem, PlyRow& row, std::size_t record);

  std::string path_;
  std::ifstream in_;
  bool binary_ = false;
  std::vector<PlyElement> elements_;
  std::size_t next_element_ = 0;
  std::size_t line_ = 0;  // 1-based line of the last line read (ASCII)
};

}  // namespace scomp::detail
