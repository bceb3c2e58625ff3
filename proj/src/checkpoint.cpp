#include "gridtwin/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace gridtwin {

namespace {

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in bounded chunks
    while (n > 0) {
        const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
        crc = crc32(crc, data, chunk);
        data += chunk;
        n -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

} // namespace

std::vector<std::uint8_t> seal_checkpoint(const std::vector<std::uint8_t>& payload) {
    BinaryWriter w;
    w.put(checkpoint_magic);
    w.put(checkpoint_version);
    w.put<std::uint64_t>(payload.size());
    auto& out = w.bytes();
    out.insert(out.end(), payload.begin(), payload.end());
    w.put(crc_of(payload.data(), payload.size()));
    return std::move(out);
}

std::vector<std::uint8_t> open_checkpoint(const std::vector<std::uint8_t>& file) {
    BinaryReader r(file.data(), file.size());
    if (r.get<std::uint32_t>() != checkpoint_magic) throw CheckpointError("not a checkpoint file");
    const auto version = r.get<std::uint32_t>();
    if (version != checkpoint_version)
        throw CheckpointError("checkpoint version " + std::to_string(version) + " not supported");
    const auto size = r.get<std::uint64_t>();
    const std::size_t header = 16;
    if (file.size() != header + size + 4) throw CheckpointError("checkpoint truncated or padded");
    std::vector<std::uint8_t> payload(file.begin() + header, file.begin() + static_cast<std::ptrdiff_t>(header + size));
    std::uint32_t stored;
    std::memcpy(&stored, file.data() + header + size, 4);
    if (stored != crc_of(payload.data(), payload.size())) throw CheckpointError("checkpoint checksum mismatch");
    return payload;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("cannot write " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace gridtwin
