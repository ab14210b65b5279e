#include "ratelqg/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "ratelqg/errors.hpp"
#include "ratelqg/validation.hpp"

namespace rlqg {

namespace {

// Codeword lengths are capped so words fit in 64 bits; probabilities below
// this floor are routed through the escape symbol instead.
constexpr double kProbFloor = 0x1p-60;
constexpr int kMaxCodeLength = 62;

bool sorted_desc(const std::vector<PmfEntry>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i].p > v[i - 1].p) return false;
  return true;
}

}  // namespace

CellPmf conditional_pmf(double sigma2, double xi, double delta, double eps) {
  if (!(sigma2 > 0.0))
    throw DegenerateCovariance("conditional_pmf: variance must be positive");
  if (!(delta > 0.0))
    throw Error("conditional_pmf: step size must be positive");
  if (!(eps > 0.0) || eps > 1e-6)
    throw Error("conditional_pmf: eps must lie in (0, 1e-6]");

  const double sigma = std::sqrt(sigma2);
  const auto cell_prob = [&](std::int64_t k) {
    const double c = static_cast<double>(k) * delta;
    return normal_cdf((c + 0.5 * delta - xi) / sigma) -
           normal_cdf((c - 0.5 * delta - xi) / sigma);
  };

  const auto mode =
      static_cast<std::int64_t>(std::floor(xi / delta + 0.5));
  CellPmf pmf;
  double cum = 0.0;
  const auto try_cell = [&](std::int64_t k) {
    const double p = cell_prob(k);
    if (p >= kProbFloor) {
      pmf.support.push_back({k, p});
      cum += p;
    }
  };
  constexpr std::int64_t kMaxOffset = 100000;
  try_cell(mode);
  for (std::int64_t off = 1; off <= kMaxOffset && cum < 1.0 - eps; ++off) {
    try_cell(mode + off);
    try_cell(mode - off);
  }
  pmf.tail_mass = std::max(0.0, 1.0 - cum);
  std::sort(pmf.support.begin(), pmf.support.end(),
            [](const PmfEntry& a, const PmfEntry& b) {
              if (a.p != b.p) return a.p > b.p;
              return a.cell < b.cell;
            });
  return pmf;
}

Codebook::Codebook(const CellPmf& pmf) {
  if (!sorted_desc(pmf.support))
    throw Error("Codebook: support must be sorted by nonincreasing "
                "probability");
  for (const PmfEntry& e : pmf.support)
    if (!(e.p > 0.0))
      throw Error("Codebook: support probabilities must be positive");
  if (pmf.support.empty() && !(pmf.tail_mass > 0.0))
    throw Error("Codebook: empty pmf");

  struct Row {
    std::int64_t cell;
    double q;
    bool escape;
  };
  std::vector<Row> rows;
  rows.reserve(pmf.support.size() + 1);
  double total = 0.0;
  for (const PmfEntry& e : pmf.support) {
    rows.push_back({e.cell, e.p, false});
    total += e.p;
  }
  if (pmf.tail_mass > 0.0) {
    const double p_esc = std::max(pmf.tail_mass, kProbFloor);
    rows.push_back({0, p_esc, true});
    total += p_esc;
  }
  for (Row& r : rows) r.q /= total;
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.q != b.q) return a.q > b.q;
    if (a.escape != b.escape) return !a.escape;
    return a.cell < b.cell;
  });

  std::vector<int> lengths;
  lengths.reserve(rows.size());
  for (const Row& r : rows) {
    int l = 1;
    while (std::ldexp(1.0, -l) > r.q) {
      ++l;
      if (l > kMaxCodeLength)
        throw Error("Codebook: codeword length cap exceeded");
    }
    lengths.push_back(l);
  }

  // The normalized probabilities carry rounding error, so their exact sum can
  // sit a few ulps above one and the ceil(log2 1/q) lengths can overshoot the
  // Kraft budget. Measure the budget in exact units of 2^-kMaxCodeLength and
  // lengthen the rarest words until it holds.
  const std::uint64_t kraft_one = std::uint64_t{1} << kMaxCodeLength;
  std::uint64_t kraft = 0;
  for (const int l : lengths)
    kraft += std::uint64_t{1} << (kMaxCodeLength - l);
  for (std::size_t i = rows.size(); kraft > kraft_one && i-- > 0;)
    while (kraft > kraft_one && lengths[i] < kMaxCodeLength) {
      kraft -= std::uint64_t{1} << (kMaxCodeLength - lengths[i] - 1);
      ++lengths[i];
    }
  if (kraft > kraft_one)
    throw Error("Codebook: codeword length cap exceeded");

  // Canonical assignment: walk the symbols in nondecreasing length order,
  // incrementing the previous word and shifting it up to each new length.
  // Integer arithmetic keeps the prefix property exact.
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return lengths[a] < lengths[b];
                   });
  std::vector<std::uint64_t> words(rows.size(), 0);
  std::uint64_t next = 0;
  int prev_len = 0;
  for (const std::size_t idx : order) {
    next <<= lengths[idx] - prev_len;
    prev_len = lengths[idx];
    words[idx] = next;
    ++next;
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    cells_.push_back(rows[i].escape ? 0 : rows[i].cell);
    probs_.push_back(rows[i].q);
    words_.push_back(words[i]);
    lengths_.push_back(lengths[i]);
    if (rows[i].escape) {
      escape_index_ = static_cast<int>(i);
    } else {
      by_cell_.emplace(rows[i].cell, static_cast<int>(i));
    }
    if (!by_word_[lengths[i]].emplace(words[i], static_cast<int>(i)).second)
      throw Error("Codebook: duplicate codeword");
  }

  for (std::size_t i = 0; i < words_.size(); ++i)
    for (std::size_t j = 0; j < words_.size(); ++j) {
      if (i == j || lengths_[i] > lengths_[j]) continue;
      if ((words_[j] >> (lengths_[j] - lengths_[i])) == words_[i])
        throw Error("Codebook: prefix property violated");
    }
}

double Codebook::coding_prob(int symbol) const {
  return probs_[static_cast<std::size_t>(symbol)];
}

std::int64_t Codebook::cell_of(int symbol) const {
  return cells_[static_cast<std::size_t>(symbol)];
}

Codeword Codebook::codeword(int symbol) const {
  return {words_[static_cast<std::size_t>(symbol)],
          lengths_[static_cast<std::size_t>(symbol)]};
}

int Codebook::find_cell(std::int64_t cell) const {
  const auto it = by_cell_.find(cell);
  return it == by_cell_.end() ? -1 : it->second;
}

double Codebook::kraft_sum() const {
  long double s = 0.0L;
  for (const int l : lengths_) s += std::ldexp(1.0L, -l);
  return static_cast<double>(s);
}

double Codebook::expected_length() const {
  double s = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i)
    s += probs_[i] * static_cast<double>(lengths_[i]);
  return s;
}

double Codebook::entropy_bits() const {
  double h = 0.0;
  for (const double q : probs_) h -= q * std::log2(q);
  return h;
}

void BitWriter::push_word(std::uint64_t value, int length) {
  for (int b = length - 1; b >= 0; --b)
    push(static_cast<int>((value >> b) & 1ull));
}

int BitReader::next() {
  if (pos_ >= bits_->size())
    throw DecodeFailure("BitReader: ran past the end of the stream");
  return (*bits_)[pos_++] & 1;
}

std::uint64_t zigzag(std::int64_t k) {
  if (k >= 0) return 2ull * static_cast<std::uint64_t>(k) + 1ull;
  return 2ull * (static_cast<std::uint64_t>(-(k + 1)) + 1ull);
}

std::int64_t unzigzag(std::uint64_t u) {
  if (u == 0) throw DecodeFailure("unzigzag: zero is not a valid code");
  if (u & 1ull) return static_cast<std::int64_t>((u - 1ull) / 2ull);
  return -static_cast<std::int64_t>(u / 2ull);
}

void elias_gamma_write(std::uint64_t u, BitWriter& out) {
  if (u == 0) throw Error("elias_gamma_write: value must be positive");
  const int n = std::bit_width(u) - 1;
  for (int i = 0; i < n; ++i) out.push(0);
  out.push(1);
  for (int b = n - 1; b >= 0; --b)
    out.push(static_cast<int>((u >> b) & 1ull));
}

std::uint64_t elias_gamma_read(BitReader& in) {
  int zeros = 0;
  while (in.next() == 0)
    if (++zeros > 63) throw DecodeFailure("elias_gamma_read: run too long");
  std::uint64_t u = 1;
  for (int i = 0; i < zeros; ++i)
    u = (u << 1) | static_cast<std::uint64_t>(in.next());
  return u;
}

void encode_cell(const Codebook& book, std::int64_t cell, BitWriter& out) {
  const int sym = book.find_cell(cell);
  if (sym >= 0) {
    const Codeword w = book.codeword(sym);
    out.push_word(w.value, w.length);
    return;
  }
  if (!book.has_escape())
    throw Error("encode_cell: cell outside support and codebook has no "
                "escape symbol");
  const Codeword w = book.codeword(book.escape_index());
  out.push_word(w.value, w.length);
  elias_gamma_write(zigzag(cell), out);
}

int decode_symbol(BitReader& in, const Codebook& book) {
  std::uint64_t value = 0;
  int length = 0;
  while (true) {
    value = (value << 1) | static_cast<std::uint64_t>(in.next());
    ++length;
    if (length > kMaxCodeLength)
      throw DecodeFailure("decode_symbol: no codeword matches");
    const auto lit = book.by_word_.find(length);
    if (lit == book.by_word_.end()) continue;
    const auto wit = lit->second.find(value);
    if (wit != lit->second.end()) return wit->second;
  }
}

std::int64_t decode_cell(BitReader& in, const Codebook& book) {
  const int sym = decode_symbol(in, book);
  if (sym == book.escape_index()) return unzigzag(elias_gamma_read(in));
  return book.cell_of(sym);
}

std::string bits_to_hex(const std::vector<std::uint8_t>& bits) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve((bits.size() + 3) / 4);
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    int nibble = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      nibble <<= 1;
      if (i + b < bits.size()) nibble |= bits[i + b] & 1;
    }
    out.push_back(digits[nibble]);
  }
  return out;
}

CodecSession::CodecSession(Vec sigma2, Vec delta, double eps)
    : sigma2_(std::move(sigma2)), delta_(std::move(delta)), eps_(eps) {
  if (sigma2_.size() != delta_.size() || sigma2_.size() == 0)
    throw LengthMismatch("CodecSession: sigma2 and delta lengths must match");
  for (int i = 0; i < sigma2_.size(); ++i) {
    if (!(sigma2_[i] > 0.0))
      throw DegenerateCovariance("CodecSession: nonpositive innovation "
                                 "variance");
    if (!(delta_[i] > 0.0))
      throw Error("CodecSession: nonpositive step size");
  }
  cache_.resize(static_cast<std::size_t>(sigma2_.size()));
}

std::int64_t CodecSession::cache_key(int component, double xi) const {
  return std::llround(xi / (delta_[component] * 0x1p-20));
}

const Codebook& CodecSession::book_for(int component, double xi) {
  auto& slot = cache_[static_cast<std::size_t>(component)];
  const std::int64_t key = cache_key(component, xi);
  const auto it = slot.find(key);
  if (it != slot.end()) return *it->second;
  if (slot.size() >= 16384) slot.clear();
  const double xi_rep =
      static_cast<double>(key) * delta_[component] * 0x1p-20;
  auto book = std::make_unique<Codebook>(
      conditional_pmf(sigma2_[component], xi_rep, delta_[component], eps_));
  const Codebook& ref = *book;
  slot.emplace(key, std::move(book));
  return ref;
}

int CodecSession::encode_step(const std::vector<std::int64_t>& cells,
                              const Vec& xi, BitWriter& out) {
  if (static_cast<int>(cells.size()) != components() ||
      xi.size() != components())
    throw LengthMismatch("encode_step: component count mismatch");
  const std::size_t before = out.size();
  for (int i = 0; i < components(); ++i)
    encode_cell(book_for(i, xi[i]), cells[static_cast<std::size_t>(i)], out);
  return static_cast<int>(out.size() - before);
}

std::vector<std::int64_t> CodecSession::decode_step(BitReader& in,
                                                    const Vec& xi) {
  if (xi.size() != components())
    throw LengthMismatch("decode_step: component count mismatch");
  std::vector<std::int64_t> cells(static_cast<std::size_t>(components()));
  for (int i = 0; i < components(); ++i)
    cells[static_cast<std::size_t>(i)] = decode_cell(in, book_for(i, xi[i]));
  return cells;
}

std::size_t CodecSession::cached_books() const {
  std::size_t n = 0;
  for (const auto& slot : cache_) n += slot.size();
  return n;
}

}  // namespace rlqg
