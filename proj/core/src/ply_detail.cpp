#include "ply_detail.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <sstream>

namespace scomp::detail {

std::size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8:
      return 1;
    case PlyType::i16:
    case PlyType::u16:
      return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32:
      return 4;
    case PlyType::f64:
      return 8;
  }
  return 0;
}

PlyType ply_type_from(const std::string& token, const std::string& context) {
  if (token == "char" || token == "int8") return PlyType::i8;
  if (token == "uchar" || token == "uint8") return PlyType::u8;
  if (token == "short" || token == "int16") return PlyType::i16;
  if (token == "ushort" || token == "uint16") return PlyType::u16;
  if (token == "int" || token == "int32") return PlyType::i32;
  if (token == "uint" || token == "uint32") return PlyType::u32;
  if (token == "float" || token == "float32") return PlyType::f32;
  if (token == "double" || token == "float64") return PlyType::f64;
  throw ParseError(context + ": unknown PLY type '" + token + "'");
}

int PlyElement::property_index(const std::string& pname) const {
  for (std::size_t i = 0; i < properties.size(); ++i)
    if (properties[i].name == pname) return static_cast<int>(i);
  return -1;
}

PlyReader::PlyReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open '" + path + "'");
  parse_header();
}

std::string PlyReader::next_line(const char* what) {
  std::string line;
  if (!std::getline(in_, line))
    throw ParseError(path_ + ": unexpected end of file while reading " + what);
  ++line_;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void PlyReader::parse_header() {
  if (next_line("magic") != "ply") throw ParseError(path_ + ":1: not a PLY file");
  bool have_format = false;
  while (true) {
    std::istringstream ls(next_line("header"));
    std::string keyword;
    ls >> keyword;
    if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
    if (keyword == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii")
        binary_ = false;
      else if (fmt == "binary_little_endian")
        binary_ = true;
      else
        throw ParseError(path_ + ":" + std::to_string(line_) + ": unsupported format '" + fmt +
                         "'");
      have_format = true;
    } else if (keyword == "element") {
      PlyElement elem;
      ls >> elem.name >> elem.count;
      if (ls.fail())
        throw ParseError(path_ + ":" + std::to_string(line_) + ": malformed element line");
      elements_.push_back(std::move(elem));
    } else if (keyword == "property") {
      if (elements_.empty())
        throw ParseError(path_ + ":" + std::to_string(line_) + ": property before element");
      const std::string where = path_ + ":" + std::to_string(line_);
      std::string t1;
      ls >> t1;
      PlyProperty prop;
      if (t1 == "list") {
        std::string ct, vt;
        ls >> ct >> vt >> prop.name;
        prop.is_list = true;
        prop.count_type = ply_type_from(ct, where);
        prop.type = ply_type_from(vt, where);
      } else {
        prop.type = ply_type_from(t1, where);
        ls >> prop.name;
      }
      if (prop.name.empty())
        throw ParseError(where + ": property without a name");
      elements_.back().properties.push_back(std::move(prop));
    } else if (keyword == "end_header") {
      break;
    } else {
      throw ParseError(path_ + ":" + std::to_string(line_) + ": unknown header keyword '" +
                       keyword + "'");
    }
  }
  if (!have_format) throw ParseError(path_ + ": missing format line");
}

double PlyReader::read_binary_scalar(PlyType t) {
  unsigned char buf[8];
  in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(ply_type_size(t)));
  if (!in_) throw ParseError(path_ + ": truncated binary payload");
  switch (t) {
    case PlyType::i8:
      return static_cast<double>(static_cast<std::int8_t>(buf[0]));
    case PlyType::u8:
      return static_cast<double>(buf[0]);
    case PlyType::i16: {
      std::int16_t v;
      std::memcpy(&v, buf, 2);
      return v;
    }
    case PlyType::u16: {
      std::uint16_t v;
      std::memcpy(&v, buf, 2);
      return v;
    }
    case PlyType::i32: {
      std::int32_t v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case PlyType::u32: {
      std::uint32_t v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case PlyType::f32: {
      float v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case PlyType::f64: {
      double v;
      std::memcpy(&v, buf, 8);
      return v;
    }
  }
  return 0.0;
}

std::string PlyReader::location_tag(std::size_t record) const {
  if (binary_) return "record " + std::to_string(record);
  return "line " + std::to_string(line_);
}

void PlyReader::read_row(const PlyElement& elem, PlyRow& row, std::size_t record) {
  row.scalars.assign(elem.properties.size(), 0.0);
  row.lists.clear();
  if (binary_) {
    for (std::size_t p = 0; p < elem.properties.size(); ++p) {
      const PlyProperty& prop = elem.properties[p];
      if (prop.is_list) {
        const std::size_t n = static_cast<std::size_t>(read_binary_scalar(prop.count_type));
        std::vector<double> values(n);
        for (std::size_t k = 0; k < n; ++k) values[k] = read_binary_scalar(prop.type);
        row.lists.push_back(std::move(values));
      } else {
        row.scalars[p] = read_binary_scalar(prop.type);
      }
    }
    return;
  }

  std::istringstream ls(next_line(elem.name.c_str()));
  std::string token;
  const auto next_value = [&](const std::string& what) -> double {
    if (!(ls >> token))
      throw ParseError(path_ + ": line " + std::to_string(line_) + ": missing value for " + what +
                       " in record " + std::to_string(record));
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size())
      throw ParseError(path_ + ": line " + std::to_string(line_) + ": bad numeric token '" +
                       token + "' for " + what);
    return v;
  };
  for (std::size_t p = 0; p < elem.properties.size(); ++p) {
    const PlyProperty& prop = elem.properties[p];
    if (prop.is_list) {
      const double count = next_value("list count of '" + prop.name + "'");
      if (!(count >= 0.0) || count != std::floor(count))
        throw ParseError(path_ + ": line " + std::to_string(line_) + ": bad list count for '" +
                         prop.name + "'");
      std::vector<double> values(static_cast<std::size_t>(count));
      for (double& v : values) v = next_value("'" + prop.name + "'");
      row.lists.push_back(std::move(values));
    } else {
      row.scalars[p] = next_value("property '" + prop.name + "'");
    }
  }
}

void PlyReader::read_element(
    std::size_t element_index,
    const std::function<void(const PlyRow&, const std::string&)>& on_row) {
  if (element_index != next_element_)
    throw Error("PlyReader: elements must be consumed in file order");
  const PlyElement& elem = elements_[element_index];
  PlyRow row;
  for (std::size_t r = 0; r < elem.count; ++r) {
    read_row(elem, row, r);
    on_row(row, location_tag(r));
  }
  ++next_element_;
}

void PlyReader::skip_element(std::size_t element_index) {
  read_element(element_index, [](const PlyRow&, const std::string&) {});
}

}  // namespace scomp::detail
