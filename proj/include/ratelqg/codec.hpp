#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ratelqg/matrix_kernel.hpp"

namespace rlqg {

// Probability mass over lattice cells, sorted by nonincreasing probability.
// tail_mass is whatever the enumeration left uncovered; support probabilities
// plus tail_mass sum to one.
struct PmfEntry {
  std::int64_t cell = 0;
  double p = 0.0;
};

struct CellPmf {
  std::vector<PmfEntry> support;
  double tail_mass = 0.0;
};

// Law of the quantizer index for theta ~ N(0, sigma2) conditioned on the
// realized dither xi: cells enumerated outward from the mode until the
// uncovered mass drops below eps.
CellPmf conditional_pmf(double sigma2, double xi, double delta,
                        double eps = 1e-9);

struct Codeword {
  std::uint64_t value = 0;  // bits MSB-first in the low `length` positions
  int length = 0;
};

// Prefix-free code over the pmf support plus, when tail_mass > 0, one escape
// symbol covering everything outside the support. Lengths follow
// ceil(log2 1/p) over the normalized coding pmf, codewords are assigned
// canonically in nondecreasing length order.
class Codebook {
 public:
  explicit Codebook(const CellPmf& pmf);

  int symbol_count() const { return static_cast<int>(lengths_.size()); }
  bool has_escape() const { return escape_index_ >= 0; }
  int escape_index() const { return escape_index_; }

  double coding_prob(int symbol) const;
  std::int64_t cell_of(int symbol) const;
  Codeword codeword(int symbol) const;
  int find_cell(std::int64_t cell) const;  // -1 when not in support

  double kraft_sum() const;
  double expected_length() const;  // sum p_i l_i over the coding pmf
  double entropy_bits() const;     // H of the coding pmf

 private:
  friend class BitReader;
  friend int decode_symbol(class BitReader&, const Codebook&);
  std::vector<std::int64_t> cells_;  // escape slot holds no cell
  std::vector<double> probs_;
  std::vector<std::uint64_t> words_;
  std::vector<int> lengths_;
  std::unordered_map<std::int64_t, int> by_cell_;
  // decode table: length -> (word value -> symbol)
  std::unordered_map<int, std::unordered_map<std::uint64_t, int>> by_word_;
  int escape_index_ = -1;
};

class BitWriter {
 public:
  void push(int bit) { bits_.push_back(static_cast<std::uint8_t>(bit & 1)); }
  void push_word(std::uint64_t value, int length);
  void clear() { bits_.clear(); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::size_t size() const { return bits_.size(); }

 private:
  std::vector<std::uint8_t> bits_;
};

class BitReader {
 public:
  explicit BitReader(const std::vector<std::uint8_t>& bits)
      : bits_(&bits) {}
  int next();  // throws DecodeFailure past the end
  bool exhausted() const { return pos_ >= bits_->size(); }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<std::uint8_t>* bits_;
  std::size_t pos_ = 0;
};

// One coded symbol. In-support cells emit their codeword; others emit the
// escape codeword followed by the cell index in zigzag Elias-gamma form.
void encode_cell(const Codebook& book, std::int64_t cell, BitWriter& out);
std::int64_t decode_cell(BitReader& in, const Codebook& book);

// Escape payload primitives, exposed for tests.
std::uint64_t zigzag(std::int64_t k);
std::int64_t unzigzag(std::uint64_t u);
void elias_gamma_write(std::uint64_t u, BitWriter& out);
std::uint64_t elias_gamma_read(BitReader& in);

std::string bits_to_hex(const std::vector<std::uint8_t>& bits);

// Coding state shared by encoder and decoder: one codebook per component per
// quantized dither value, built on demand. The cache key rounds xi to
// delta * 2^-20, so both sides derive identical books from the shared
// dither stream alone.
class CodecSession {
 public:
  CodecSession(Vec sigma2, Vec delta, double eps = 1e-9);

  int components() const { return static_cast<int>(sigma2_.size()); }
  const Codebook& book_for(int component, double xi);

  // Encodes one step's cell vector given that step's dither; returns the
  // number of bits appended.
  int encode_step(const std::vector<std::int64_t>& cells, const Vec& xi,
                  BitWriter& out);
  std::vector<std::int64_t> decode_step(BitReader& in, const Vec& xi);

  std::size_t cached_books() const;

 private:
  std::int64_t cache_key(int component, double xi) const;

  Vec sigma2_;
  Vec delta_;
  double eps_;
  std::vector<std::unordered_map<std::int64_t, std::unique_ptr<Codebook>>>
      cache_;
};

// Per-step audit row for a coded run.
struct TraceRow {
  std::uint64_t step = 0;
  int bit_count = 0;
  std::string bits_hex;
};

}  // namespace rlqg
