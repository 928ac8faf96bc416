#pragma once

#include <cstdint>
#include <vector>

namespace ergtrack {

using Symbol = std::uint8_t;
/// A finite word over a small alphabet.
using Word = std::vector<Symbol>;
/// Observations; symbolic sources emit 0.0/1.0/... values.
using Series = std::vector<double>;

}  // namespace ergtrack
