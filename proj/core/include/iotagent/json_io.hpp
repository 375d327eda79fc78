#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace iotagent {

/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string canonical_text(const nlohmann::json& j);

/// Throws IoError when the file cannot be read, CorruptFileError when it is
/// not valid JSON.
nlohmann::json read_json_file(const std::string& path);

/// Writes canonical text through a temporary file and rename.
void write_json_file(const std::string& path, const nlohmann::json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Checks `{"format": format, "version": v}` with v <= supported.
/// Returns the document version.
int check_document_header(const nlohmann::json& j, const std::string& format, int supported);

}  // namespace iotagent
