#include "nnfl/io/files.hpp"

#include <fstream>
#include <iterator>

namespace nnfl::io {

std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failed: " + path.string());
    return out;
}

void write_file(const std::filesystem::path &path, const std::vector<std::uint8_t> &bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path &path) {
    const auto b = read_file(path);
    return {b.begin(), b.end()};
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

} // namespace nnfl::io
