#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace invhull::cli {

using Json = nlohmann::ordered_json;

// A machine-readable record of a run: tool version, config echo and every
// number the run produced. Key order is insertion order, so the schema and
// the bytes are stable across runs.
struct Report {
  Json data = Json::object();
  // Set by run_verify when some property fails.
  bool failed = false;

  // Pretty-printed JSON; floats carry 17 significant digits, non-finite
  // values become null.
  std::string to_json() const;
  // Throws IoError.
  void write(const std::string& path) const;
};

std::string format_json(const Json& value);

Json to_json(const std::vector<double>& values);

}  // namespace invhull::cli
