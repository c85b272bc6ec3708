#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrfs {

/// Track identity: the scan at which the object was born and an index that
/// separates objects born at the same scan. Ordered lexicographically.
struct Label {
    int birth_time = 0;
    int index = 0;

    friend constexpr auto operator<=>(const Label&, const Label&) = default;
};

inline std::string to_string(const Label& label)
{
    return "(" + std::to_string(label.birth_time) + "," + std::to_string(label.index) + ")";
}

struct LabelHash {
    std::size_t operator()(const Label& label) const noexcept
    {
        const auto packed = (static_cast<unsigned long long>(static_cast<unsigned>(label.birth_time)) << 32U)
                            | static_cast<unsigned>(label.index);
        return std::hash<unsigned long long>{}(packed);
    }
};

/// Sorted, duplicate-free list of labels.
using LabelSet = std::vector<Label>;

inline bool is_strictly_increasing(const LabelSet& labels)
{
    for (std::size_t i = 1; i < labels.size(); ++i) {
        if (!(labels[i - 1] < labels[i])) {
            return false;
        }
    }
    return true;
}

inline void require_valid_label(const Label& label)
{
    if (label.birth_time < 0 || label.index < 0) {
        throw std::invalid_argument("label fields must be non-negative: " + to_string(label));
    }
}

}  // namespace lrfs
