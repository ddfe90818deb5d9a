#pragma once

#include <optional>
#include <string>

namespace qml {

// Files shipped under data/. The QML_DATA_DIR environment variable
// overrides the build-time location.
std::string data_path(const std::string& relative);
std::optional<std::string> read_data(const std::string& relative);

}  // namespace qml
