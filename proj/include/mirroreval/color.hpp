#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mirroreval {

// Fixed 10-color palette. Aggregate chance arithmetic (1/10, 1/11) depends on
// the size, so it is a hard constant, not a config knob.
enum class ColorLabel : std::uint8_t {
    red,
    green,
    blue,
    yellow,
    orange,
    purple,
    cyan,
    magenta,
    brown,
    pink,
};

inline constexpr int kPaletteSize = 10;

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

const std::array<ColorLabel, kPaletteSize>& palette();

Rgb color_rgb(ColorLabel c);
std::string_view color_name(ColorLabel c);
std::optional<ColorLabel> color_from_name(std::string_view name);

// Scene greys. Kept far from every palette entry so flat-shaded identity
// judgments stay unambiguous.
inline constexpr Rgb kWallGrey{120, 120, 120};
inline constexpr Rgb kFloorGrey{70, 70, 70};
inline constexpr Rgb kOccluderGrey{60, 60, 60};

double rgb_distance(Rgb a, Rgb b);

}  // namespace mirroreval
