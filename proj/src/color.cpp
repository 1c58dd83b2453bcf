#include "mirroreval/color.hpp"

#include <cmath>

namespace mirroreval {

namespace {

struct Entry {
    ColorLabel label;
    const char* name;
    Rgb rgb;
};

constexpr std::array<Entry, kPaletteSize> kEntries{{
    {ColorLabel::red, "red", {255, 0, 0}},
    {ColorLabel::green, "green", {0, 200, 0}},
    {ColorLabel::blue, "blue", {0, 0, 255}},
    {ColorLabel::yellow, "yellow", {255, 255, 0}},
    {ColorLabel::orange, "orange", {255, 150, 0}},
    {ColorLabel::purple, "purple", {140, 0, 255}},
    {ColorLabel::cyan, "cyan", {0, 255, 255}},
    {ColorLabel::magenta, "magenta", {255, 0, 255}},
    {ColorLabel::brown, "brown", {150, 75, 0}},
    {ColorLabel::pink, "pink", {255, 170, 190}},
}};

}  // namespace

const std::array<ColorLabel, kPaletteSize>& palette() {
    static const std::array<ColorLabel, kPaletteSize> p = [] {
        std::array<ColorLabel, kPaletteSize> out{};
        for (int i = 0; i < kPaletteSize; ++i) out[i] = kEntries[i].label;
        return out;
    }();
    return p;
}

Rgb color_rgb(ColorLabel c) { return kEntries[static_cast<int>(c)].rgb; }

std::string_view color_name(ColorLabel c) { return kEntries[static_cast<int>(c)].name; }

std::optional<ColorLabel> color_from_name(std::string_view name) {
    for (const Entry& e : kEntries) {
        if (name == e.name) return e.label;
    }
    return std::nullopt;
}

double rgb_distance(Rgb a, Rgb b) {
    const double dr = static_cast<double>(a.r) - b.r;
    const double dg = static_cast<double>(a.g) - b.g;
    const double db = static_cast<double>(a.b) - b.b;
    return std::sqrt(dr * dr + dg * dg + db * db);
}

}  // namespace mirroreval
