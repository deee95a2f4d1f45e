#include "valleyfinder/ingest.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace valleyfinder {

std::string fingerprint(std::string_view ip, std::string_view user_agent,
                        std::string_view accept_language) {
  constexpr char separator = '\x1f';
  std::string message;
  message.reserve(ip.size() + user_agent.size() + accept_language.size() + 2);
  message.append(ip);
  message.push_back(separator);
  message.append(user_agent);
  message.push_back(separator);
  message.append(accept_language);

  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(message.data(), message.size(), digest.data(), &length,
                 EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");

  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (std::size_t i = 0; i < 16; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0x0f]);
  }
  return out;
}

} // namespace valleyfinder
