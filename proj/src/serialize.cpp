#include "cfrec/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <limits>

namespace cfrec {

namespace {

// All formats assume a little-endian host; every supported target is one.
template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

BinaryWriter::BinaryWriter(const std::string& path)
    : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("cannot open for writing: " + path);
}

void BinaryWriter::u8(std::uint8_t v) { put(out_, v); }
void BinaryWriter::u32(std::uint32_t v) { put(out_, v); }
void BinaryWriter::u64(std::uint64_t v) { put(out_, v); }
void BinaryWriter::i64(std::int64_t v) { put(out_, v); }
void BinaryWriter::f64(double v) { put(out_, v); }

void BinaryWriter::str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::f64_array(const Vec& v) {
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(sizeof(double)) * v.size());
}

void BinaryWriter::u32_array(const std::vector<std::uint32_t>& v) {
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(sizeof(std::uint32_t) * v.size()));
}

void BinaryWriter::close() {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_);
    out_.close();
}

BinaryReader::BinaryReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("cannot open for reading: " + path);
}

void BinaryReader::read_raw(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
        throw IoError("truncated or corrupt file: " + path_);
}

std::uint8_t BinaryReader::u8() {
    std::uint8_t v;
    read_raw(&v, sizeof v);
    return v;
}

std::uint32_t BinaryReader::u32() {
    std::uint32_t v;
    read_raw(&v, sizeof v);
    return v;
}

std::uint64_t BinaryReader::u64() {
    std::uint64_t v;
    read_raw(&v, sizeof v);
    return v;
}

std::int64_t BinaryReader::i64() {
    std::int64_t v;
    read_raw(&v, sizeof v);
    return v;
}

double BinaryReader::f64() {
    double v;
    read_raw(&v, sizeof v);
    return v;
}

std::string BinaryReader::str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    if (n > 0) read_raw(s.data(), n);
    return s;
}

Vec BinaryReader::f64_array(std::int64_t n) {
    Vec v(n);
    if (n > 0) read_raw(v.data(), sizeof(double) * static_cast<std::size_t>(n));
    return v;
}

std::vector<std::uint32_t> BinaryReader::u32_array(std::size_t n) {
    std::vector<std::uint32_t> v(n);
    if (n > 0) read_raw(v.data(), sizeof(std::uint32_t) * n);
    return v;
}

namespace {
constexpr char kCheckpointMagic[8] = {'C', 'F', 'R', 'C', 'K', 'P', 'T', '1'};
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    BinaryWriter w(path);
    w.str(std::string_view(kCheckpointMagic, sizeof kCheckpointMagic));
    w.u64(ckpt.config_hash);
    w.u64(ckpt.seed);
    w.str(ckpt.meta_json);
    w.u32(static_cast<std::uint32_t>(ckpt.arrays.size()));
    for (const auto& [name, t] : ckpt.arrays) {
        w.str(name);
        w.u32(static_cast<std::uint32_t>(t.rank()));
        for (std::int64_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
        w.f64_array(t.values());
    }
    w.close();
}

Checkpoint load_checkpoint(const std::string& path) {
    BinaryReader r(path);
    const std::string magic = r.str();
    if (magic != std::string_view(kCheckpointMagic, sizeof kCheckpointMagic))
        throw IoError("not a checkpoint file: " + path);
    Checkpoint ckpt;
    ckpt.config_hash = r.u64();
    ckpt.seed = r.u64();
    ckpt.meta_json = r.str();
    const std::uint32_t n_arrays = r.u32();
    ckpt.arrays.reserve(n_arrays);
    for (std::uint32_t a = 0; a < n_arrays; ++a) {
        std::string name = r.str();
        const std::uint32_t rank = r.u32();
        std::vector<int> shape(rank);
        std::int64_t count = 1;
        for (auto& d : shape) {
            d = static_cast<int>(r.u32());
            count *= d;
        }
        Tensor t = Tensor::leaf(std::move(shape), r.f64_array(count));
        ckpt.arrays.emplace_back(std::move(name), std::move(t));
    }
    return ckpt;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "absent";
    std::uint64_t h = 0xCBF29CE484222325ULL;
    std::uint64_t size = 0;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        const auto got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ULL;
        }
        size += static_cast<std::uint64_t>(got);
    }
    char out[64];
    std::snprintf(out, sizeof out, "%llu:%016llx",
                  static_cast<unsigned long long>(size),
                  static_cast<unsigned long long>(h));
    return out;
}

std::string format_double(double v) {
    // Shortest %.{p}g form that parses back to the same bits, so text
    // artifacts stay byte-stable across runs yet remain human-readable.
    char buf[40];
    if (v != v) return "nan";
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

}  // namespace cfrec
