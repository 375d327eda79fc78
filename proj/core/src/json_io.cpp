#include "iotagent/json_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "iotagent/errors.hpp"

namespace iotagent {

std::string canonical_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path + "'");
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << text;
        out.flush();
        if (!out) throw IoError("error writing '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

nlohmann::json read_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw CorruptFileError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j) { write_text_file(path, canonical_text(j)); }

int check_document_header(const nlohmann::json& j, const std::string& format, int supported) {
    if (!j.is_object()) throw CorruptFileError("expected a JSON object for " + format);
    auto f = j.find("format");
    auto v = j.find("version");
    if (f == j.end() || !f->is_string() || f->get<std::string>() != format)
        throw CorruptFileError("document is not a " + format + " file");
    if (v == j.end() || !v->is_number_integer()) throw CorruptFileError(format + " file has no integer version");
    const int version = v->get<int>();
    if (version < 1 || version > supported)
        throw VersionError(format + " version " + std::to_string(version) + " is not supported (max " +
                           std::to_string(supported) + ")");
    return version;
}

}  // namespace iotagent
