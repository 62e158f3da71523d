#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qmimo {

// Rate-1/2 convolutional mother code, constraint length 7, generators
// (133, 171) octal, zero-terminated, punctured to rate 3/4 with the pattern
//   c1: 1 1 0
//   c2: 1 0 1
// Decoding is soft-input Viterbi with full traceback; punctured positions
// enter with zero LLR.
namespace convcode {

constexpr int kConstraintLength = 7;
constexpr unsigned kGen1Octal = 0133;
constexpr unsigned kGen2Octal = 0171;
constexpr int kPuncturePeriod = 3;
inline constexpr int kPuncturePattern[2][3] = {{1, 1, 0}, {1, 0, 1}};

// Punctured codeword length for n_info information bits. n_info + 6 must be
// a multiple of 3.
std::size_t coded_length(std::size_t n_info);
// Largest admissible n_info with coded_length(n_info) <= capacity.
std::size_t info_length_for(std::size_t capacity);

std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& info);
std::vector<std::uint8_t> viterbi_decode(const std::vector<double>& llrs, std::size_t n_info);

}  // namespace convcode

// Row-column block interleaver: write row-major into rows x cols, read
// column-major. deinterleave is the inverse permutation.
std::vector<std::uint8_t> interleave(const std::vector<std::uint8_t>& bits, int rows, int cols);
std::vector<double> deinterleave(const std::vector<double>& vals, int rows, int cols);
std::size_t deinterleave_index(std::size_t interleaved_pos, int rows, int cols);

}  // namespace qmimo
