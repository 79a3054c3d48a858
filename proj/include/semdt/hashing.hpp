#ifndef SEMDT_HASHING_HPP
#define SEMDT_HASHING_HPP

#include <string>

namespace semdt {

// Hex-encoded SHA-256 of a byte string (backed by OpenSSL).
std::string sha256_hex(const std::string& bytes);

// SHA-256 of a file's contents; throws std::runtime_error if unreadable.
std::string sha256_file(const std::string& path);

}  // namespace semdt

#endif
