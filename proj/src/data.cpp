#include "qml/data.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qml {

std::string data_path(const std::string& relative) {
  const char* env = std::getenv("QML_DATA_DIR");
  return std::string(env && *env ? env : QML_DATA_DIR) + "/" + relative;
}

std::optional<std::string> read_data(const std::string& relative) {
  std::ifstream in(data_path(relative));
  if (!in) return std::nullopt;
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace qml
