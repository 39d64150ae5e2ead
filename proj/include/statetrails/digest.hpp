#ifndef STATETRAILS_DIGEST_HPP
#define STATETRAILS_DIGEST_HPP

#include <string>
#include <string_view>

namespace statetrails {

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);

}  // namespace statetrails

#endif
