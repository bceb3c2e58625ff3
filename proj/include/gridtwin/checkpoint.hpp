#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <type_traits>
#include <vector>

#include "gridtwin/errors.hpp"

namespace gridtwin {

inline constexpr std::uint32_t checkpoint_magic = 0x4e575447; // "GTWN"
inline constexpr std::uint32_t checkpoint_version = 1;

class BinaryWriter {
public:
    template <class T>
    void put(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }
    void put_vector(const std::vector<double>& v) {
        put<std::uint64_t>(v.size());
        for (double x : v) put(x);
    }
    void put_string(const std::string& s) {
        put<std::uint64_t>(s.size());
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class BinaryReader {
public:
    BinaryReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    template <class T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        if (pos_ + sizeof(T) > size_) throw CheckpointError("checkpoint truncated");
        T v;
        std::memcpy(&v, data_ + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::vector<double> get_vector() {
        const auto n = get<std::uint64_t>();
        if (n > (size_ - pos_) / sizeof(double)) throw CheckpointError("checkpoint truncated");
        std::vector<double> v(n);
        for (auto& x : v) x = get<double>();
        return v;
    }
    std::string get_string() {
        const auto n = get<std::uint64_t>();
        if (n > size_ - pos_) throw CheckpointError("checkpoint truncated");
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == size_; }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

// Header (magic, version, payload size) + payload + crc32 of the payload.
std::vector<std::uint8_t> seal_checkpoint(const std::vector<std::uint8_t>& payload);
// Validates header and checksum; returns the payload.
std::vector<std::uint8_t> open_checkpoint(const std::vector<std::uint8_t>& file);

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::string& path);

} // namespace gridtwin
