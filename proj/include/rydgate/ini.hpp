#pragma once

// Thin wrapper over boost::property_tree's INI reader. Keys are kept verbatim
// (level labels such as "5P1/2" contain characters that would otherwise be
// read as path separators), and values stay as text until a caller converts
// them with the locale-independent parsers in numfmt.hpp.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rydgate/error.hpp"
#include "rydgate/numfmt.hpp"

namespace rydgate {

struct IniSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;  // file order

  std::optional<std::string> find(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return v;
    return std::nullopt;
  }

  const std::string& at(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return v;
    throw LookupError("missing key '" + key + "' in section [" + name + "]");
  }
};

struct IniDocument {
  std::vector<IniSection> sections;

  const IniSection* find(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }
};

inline IniDocument parse_ini(std::istream& in, const std::string& origin = "<stream>") {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  IniDocument doc;
  for (const auto& [section_name, section] : tree) {
    if (section.empty() && !section.data().empty())
      throw ConfigError(origin + ": key '" + section_name + "' outside of any section");
    IniSection out{section_name, {}};
    for (const auto& [key, value] : section) out.entries.emplace_back(key, std::string(trim(value.data())));
    doc.sections.push_back(std::move(out));
  }
  return doc;
}

inline IniDocument parse_ini_text(const std::string& text) {
  std::istringstream in(text);
  return parse_ini(in);
}

inline IniDocument load_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return parse_ini(in, path);
}

}  // namespace rydgate
