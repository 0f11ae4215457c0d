#include "cfrec/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "cfrec/errors.hpp"

namespace cfrec {

nlohmann::json RunManifest::to_json() const {
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(config_hash));
    return nlohmann::json{{"command", command},
                          {"tool_version", tool_version},
                          {"config_hash", hash_hex},
                          {"dataset_fingerprint", dataset_fingerprint},
                          {"seeds", seeds},
                          {"artifacts", artifacts}};
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << to_json().dump(2) << '\n';
    if (!out.flush()) throw IoError("write failed: " + path);
}

}  // namespace cfrec
