#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cfrec/errors.hpp"
#include "cfrec/tensor.hpp"

namespace cfrec {

/// Little-endian binary writer. All container formats in this project are
/// written through it so identical in-memory state yields identical bytes.
class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path);
    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(std::int64_t v);
    void f64(double v);
    void str(std::string_view s);
    void f64_array(const Vec& v);
    void u32_array(const std::vector<std::uint32_t>& v);
    void close();

private:
    std::ofstream out_;
    std::string path_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::string& path);
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64();
    double f64();
    std::string str();
    Vec f64_array(std::int64_t n);
    std::vector<std::uint32_t> u32_array(std::size_t n);

private:
    void read_raw(void* dst, std::size_t n);
    std::ifstream in_;
    std::string path_;
};

/// Named shaped arrays plus the RNG seed and config hash; the parameter
/// checkpoint container. Round-trips bit-exactly (raw IEEE-754 payload).
struct Checkpoint {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string meta_json;  // free-form echo of the producing config
    std::vector<std::pair<std::string, Tensor>> arrays;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::uint64_t fnv1a64(std::string_view s);

/// "size:fnv64hex" of the file contents, or "absent" when unreadable.
std::string file_fingerprint(const std::string& path);

/// Shortest deterministic decimal form that round-trips the double exactly.
std::string format_double(double v);

}  // namespace cfrec
