#pragma once

// Reading instance and suite documents from disk. TOML input is converted to
// the same JSON tree the parsers consume.

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include "stratakit/errors.hpp"

namespace stratakit {

/// Reads a JSON or TOML document; TOML is chosen by the .toml extension.
inline nlohmann::json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const bool is_toml = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
  if (is_toml) {
    try {
      auto table = toml::parse(text, path);
      std::stringstream out;
      out << toml::json_formatter{table};
      return nlohmann::json::parse(out.str());
    } catch (const toml::parse_error& e) {
      throw InputError(std::string("TOML parse error: ") + std::string(e.description()), path);
    }
  }
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("JSON parse error: ") + e.what(), path);
  }
}

}  // namespace stratakit
