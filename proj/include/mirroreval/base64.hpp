#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mirroreval {

std::string base64_encode(const std::uint8_t* data, std::size_t len);

inline std::string base64_encode(const std::vector<std::uint8_t>& data) {
    return base64_encode(data.data(), data.size());
}

}  // namespace mirroreval
