#include "cdp/pcp.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "cdp/error.hpp"

namespace cdp {

PcPresentation::PcPresentation(Alphabet a) : alphabet(std::move(a)) {
  const std::size_t n = alphabet.size();
  relative_orders.assign(n, BigInt(0));
  powers.assign(n, std::nullopt);
  conjugates.assign(n, std::vector<std::optional<ExponentVector>>(n));
  inverse_conjugates.assign(n, std::vector<std::optional<ExponentVector>>(n));
}

std::size_t PcPresentation::hirsch_length() const {
  return static_cast<std::size_t>(std::count(relative_orders.begin(), relative_orders.end(), BigInt(0)));
}

Word PcPresentation::spell(const ExponentVector& e) const {
  Word w;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    const Letter l(static_cast<int>(i), e[i] < 0);
    const BigInt count = abs(e[i]);
    if (!count.fits_slong_p() || count > 10'000'000)
      throw Error(ErrorCode::collection_overflow, "normal form too long to spell");
    for (long k = 0; k < count.get_si(); ++k) w.push_back(l);
  }
  return w;
}

std::vector<Word> PcPresentation::relators() const {
  std::vector<Word> out;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    if (powers[i]) {
      Word lhs = Word::generator(static_cast<int>(i), static_cast<int>(relative_orders[i].get_si()));
      out.push_back(lhs * spell(*powers[i]).inverse());
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) {
      const Letter gi(static_cast<int>(i), false);
      const Letter gj(static_cast<int>(j), false);
      if (conjugates[j][i]) {
        Word lhs{gi.inverse(), gj, gi};
        out.push_back(lhs * spell(*conjugates[j][i]).inverse());
      }
      if (inverse_conjugates[j][i]) {
        Word lhs{gi, gj, gi.inverse()};
        out.push_back(lhs * spell(*inverse_conjugates[j][i]).inverse());
      }
    }
  return out;
}

namespace {

// Normal-form shape: supported on generators > `above`, finite slots in range.
bool well_shaped(const PcPresentation& p, const ExponentVector& e, std::size_t above) {
  if (e.size() != p.size()) return false;
  for (std::size_t t = 0; t < e.size(); ++t) {
    if (e[t] == 0) continue;
    if (t <= above) return false;
    if (!p.infinite(t) && (e[t] < 0 || e[t] >= p.relative_orders[t])) return false;
  }
  return true;
}

}  // namespace

void PcPresentation::validate() const {
  const std::size_t n = size();
  if (relative_orders.size() != n || powers.size() != n)
    throw Error(ErrorCode::invalid_presentation, "relation tables do not match generator count");
  for (std::size_t i = 0; i < n; ++i) {
    if (relative_orders[i] < 0) throw Error(ErrorCode::invalid_presentation, "negative relative order");
    if (relative_orders[i] == 1) throw Error(ErrorCode::invalid_presentation, "relative order 1 is not allowed");
    if (!infinite(i) && !powers[i])
      throw Error(ErrorCode::invalid_presentation, "missing power relation for " + alphabet.name(static_cast<int>(i)));
    if (infinite(i) && powers[i])
      throw Error(ErrorCode::invalid_presentation, "power relation on infinite generator " + alphabet.name(static_cast<int>(i)));
    if (powers[i] && !well_shaped(*this, *powers[i], i))
      throw Error(ErrorCode::invalid_presentation, "power relation of " + alphabet.name(static_cast<int>(i)) + " is not in normal form over later generators");
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) {
      const std::string pair = alphabet.name(static_cast<int>(j)) + "^" + alphabet.name(static_cast<int>(i));
      if (!conjugates[j][i]) throw Error(ErrorCode::invalid_presentation, "missing conjugate relation " + pair);
      if (!well_shaped(*this, *conjugates[j][i], i))
        throw Error(ErrorCode::invalid_presentation, "conjugate relation " + pair + " is not in normal form over later generators");
      if (infinite(i) && !inverse_conjugates[j][i])
        throw Error(ErrorCode::invalid_presentation, "missing inverse conjugate relation " + pair + "^-1");
      if (inverse_conjugates[j][i] && !well_shaped(*this, *inverse_conjugates[j][i], i))
        throw Error(ErrorCode::invalid_presentation, "inverse conjugate relation " + pair + "^-1 is not in normal form over later generators");
    }
}

namespace {

std::string trim_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::string_view strip(std::string_view s, std::size_t& offset) {
  offset = 0;
  while (offset < s.size() && std::isspace(static_cast<unsigned char>(s[offset]))) ++offset;
  std::size_t end = s.size();
  while (end > offset && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(offset, end - offset);
}

struct RawLine {
  std::size_t number;
  std::string text;
};

}  // namespace

PcPresentation parse_pcp(std::string_view text) {
  enum class Section { none, generators, orders, relations };
  Section section = Section::none;
  std::vector<RawLine> gen_lines, order_lines, relation_lines;
  bool seen[4] = {false, false, false, false};

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim_comment(line);
    if (blank(body)) continue;
    std::size_t off = 0;
    const std::string_view word = strip(body, off);
    Section next = Section::none;
    if (word == "generators") next = Section::generators;
    if (word == "orders") next = Section::orders;
    if (word == "relations") next = Section::relations;
    if (next != Section::none) {
      if (seen[static_cast<int>(next)]) throw ParseError(number, off + 1, "duplicate section '" + std::string(word) + "'");
      seen[static_cast<int>(next)] = true;
      section = next;
      continue;
    }
    switch (section) {
      case Section::none: throw ParseError(number, off + 1, "content outside of a section");
      case Section::generators: gen_lines.push_back({number, body}); break;
      case Section::orders: order_lines.push_back({number, body}); break;
      case Section::relations: relation_lines.push_back({number, body}); break;
    }
  }
  if (!seen[1]) throw ParseError(number + 1, 1, "missing 'generators' section");
  if (!seen[2]) throw ParseError(number + 1, 1, "missing 'orders' section");
  if (!seen[3]) throw ParseError(number + 1, 1, "missing 'relations' section");

  auto tokens = [](const RawLine& l) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::size_t i = 0;
    while (i < l.text.size()) {
      if (std::isspace(static_cast<unsigned char>(l.text[i]))) {
        ++i;
        continue;
      }
      const std::size_t start = i;
      while (i < l.text.size() && !std::isspace(static_cast<unsigned char>(l.text[i]))) ++i;
      out.emplace_back(start, l.text.substr(start, i - start));
    }
    return out;
  };

  std::vector<std::string> names;
  for (const auto& l : gen_lines)
    for (auto& [col, tok] : tokens(l)) {
      if (!std::isalpha(static_cast<unsigned char>(tok[0])))
        throw ParseError(l.number, col + 1, "generator names must start with a letter");
      for (char c : tok)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
          throw ParseError(l.number, col + 1, "bad character in generator name '" + tok + "'");
      if (std::find(names.begin(), names.end(), tok) != names.end())
        throw ParseError(l.number, col + 1, "duplicate generator '" + tok + "'");
      names.push_back(tok);
    }
  if (names.empty()) throw ParseError(gen_lines.empty() ? number : gen_lines.front().number, 1, "no generators");

  PcPresentation p{Alphabet(names)};
  std::size_t order_count = 0;
  std::size_t last_order_line = number;
  for (const auto& l : order_lines) {
    last_order_line = l.number;
    for (auto& [col, tok] : tokens(l)) {
      if (order_count >= names.size()) throw ParseError(l.number, col + 1, "more orders than generators");
      if (tok == "inf" || tok == "0") {
        p.relative_orders[order_count++] = 0;
        continue;
      }
      BigInt v;
      if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
          v.set_str(tok, 10) != 0 || v < 2)
        throw ParseError(l.number, col + 1, "relative order must be 'inf', 0 or an integer >= 2");
      p.relative_orders[order_count++] = v;
    }
  }
  if (order_count != names.size())
    throw ParseError(last_order_line, 1, "expected " + std::to_string(names.size()) + " orders, found " + std::to_string(order_count));

  for (const auto& l : relation_lines) {
    const auto eq = l.text.find('=');
    std::size_t lead = 0;
    strip(l.text, lead);
    if (eq == std::string::npos) throw ParseError(l.number, lead + 1, "relation needs '='");
    if (l.text.find('=', eq + 1) != std::string::npos)
      throw ParseError(l.number, l.text.find('=', eq + 1) + 1, "relation has more than one '='");
    const std::string lhs_text = l.text.substr(0, eq);
    const std::string rhs_text = l.text.substr(eq + 1);
    // Keep the lhs unreduced: the shape g_i^-1 g_j g_i must survive.
    const Word lhs = p.alphabet.parse(lhs_text, l.number, 0);
    const Word rhs = p.alphabet.parse(rhs_text, l.number, eq + 1);
    if (lhs.empty()) throw ParseError(l.number, lead + 1, "empty left-hand side");

    ExponentVector rhs_vec(names.size());
    {
      int last = -1;
      for (std::size_t t = 0; t < rhs.size(); ++t) {
        const int g = rhs[t].generator();
        if (g < last || (g == last && rhs[t] != rhs[t - 1]))
          throw ParseError(l.number, eq + 2, "right-hand side must be a normal-form word (generators in increasing order)");
        last = g;
        rhs_vec[g] += rhs[t].sign();
      }
    }

    const bool single_gen = std::all_of(lhs.begin(), lhs.end(), [&](Letter x) { return x == lhs[0]; });
    if (single_gen) {
      const auto i = static_cast<std::size_t>(lhs[0].generator());
      if (lhs[0].inverted() || p.infinite(i) || BigInt(static_cast<long>(lhs.size())) != p.relative_orders[i])
        throw ParseError(l.number, lead + 1, "power relation must be g^m with m the relative order of g");
      if (p.powers[i]) throw ParseError(l.number, lead + 1, "duplicate power relation");
      p.powers[i] = rhs_vec;
      continue;
    }
    if (lhs.size() == 3 && lhs[0] == lhs[2].inverse() && lhs[1].generator() > lhs[0].generator() &&
        !lhs[1].inverted()) {
      const auto i = static_cast<std::size_t>(lhs[0].generator());
      const auto j = static_cast<std::size_t>(lhs[1].generator());
      auto& slot = lhs[0].inverted() ? p.conjugates[j][i] : p.inverse_conjugates[j][i];
      if (slot) throw ParseError(l.number, lead + 1, "duplicate conjugate relation");
      slot = rhs_vec;
      continue;
    }
    throw ParseError(l.number, lead + 1,
                     "unsupported relation shape; expected 'gi^m', 'gi^-1 gj gi' or 'gi gj gi^-1' with i < j");
  }
  p.validate();
  return p;
}

PcPresentation load_pcp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pcp(buf.str());
}

void Collector::tick() const {
  if (++steps_ > max_steps_)
    throw Error(ErrorCode::collection_overflow, "collection exceeded " + std::to_string(max_steps_) + " steps");
}

bool Collector::tail_zero(const ExponentVector& e, std::size_t k) const {
  for (std::size_t t = k + 1; t < e.size(); ++t)
    if (e[t] != 0) return false;
  return true;
}

// Brings a finite slot into [0, m) assuming everything after it is trivial.
void Collector::normalize_slot(ExponentVector& e, std::size_t k) const {
  if (p_.infinite(k)) return;
  const BigInt& m = p_.relative_orders[k];
  if (e[k] >= 0 && e[k] < m) return;
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), e[k].get_mpz_t(), m.get_mpz_t());
  e[k] -= q * m;
  if (!p_.powers[k]) throw Error(ErrorCode::invalid_presentation, "missing power relation");
  mul_vector(e, *p_.powers[k], q);
}

void Collector::mul_vector(ExponentVector& e, const ExponentVector& rhs, const BigInt& times) const {
  if (times == 0) return;
  std::size_t support = rhs.size();
  std::size_t nonzero = 0;
  for (std::size_t t = 0; t < rhs.size(); ++t)
    if (rhs[t] != 0) {
      support = t;
      ++nonzero;
    }
  if (nonzero == 0) return;
  if (nonzero == 1) {
    mul_power(e, support, rhs[support] * times);
    return;
  }
  const BigInt reps = abs(times);
  for (BigInt r = 0; r < reps; ++r) {
    tick();
    if (times > 0) {
      for (std::size_t t = 0; t < rhs.size(); ++t)
        if (rhs[t] != 0) mul_power(e, t, rhs[t]);
    } else {
      for (std::size_t t = rhs.size(); t-- > 0;)
        if (rhs[t] != 0) mul_power(e, t, -rhs[t]);
    }
  }
}

void Collector::mul_power(ExponentVector& e, std::size_t j, const BigInt& power) const {
  if (power == 0) return;
  if (tail_zero(e, j)) {
    tick();
    e[j] += power;
    normalize_slot(e, j);
    return;
  }
  const int sign = power > 0 ? 1 : -1;
  const BigInt reps = abs(power);
  for (BigInt r = 0; r < reps; ++r) mul_letter(e, j, sign);
}

void Collector::mul_letter(ExponentVector& e, std::size_t k, int sign) const {
  tick();
  if (tail_zero(e, k)) {
    e[k] += sign;
    normalize_slot(e, k);
    return;
  }
  if (sign < 0 && !p_.infinite(k)) {
    // g_k^-1 = g_k^(m-1) * (g_k^m)^-1
    const long m = p_.relative_orders[k].get_si();
    for (long r = 0; r + 1 < m; ++r) mul_letter(e, k, 1);
    mul_vector(e, *p_.powers[k], BigInt(-1));
    return;
  }
  ExponentVector tail(e.begin() + static_cast<std::ptrdiff_t>(k) + 1, e.end());
  std::fill(e.begin() + static_cast<std::ptrdiff_t>(k) + 1, e.end(), BigInt(0));
  e[k] += sign;
  normalize_slot(e, k);
  // g_k^e * tail * g_k^s = g_k^(e+s) * tail^(g_k^s)
  for (std::size_t t = 0; t < tail.size(); ++t) {
    if (tail[t] == 0) continue;
    const std::size_t j = k + 1 + t;
    const auto& rel = sign > 0 ? p_.conjugates[j][k] : p_.inverse_conjugates[j][k];
    if (!rel) throw Error(ErrorCode::invalid_presentation, "missing conjugate relation needed for collection");
    mul_vector(e, *rel, tail[t]);
  }
}

void Collector::multiply(ExponentVector& state, Letter letter) const {
  const auto k = static_cast<std::size_t>(letter.generator());
  if (k >= p_.size()) throw Error(ErrorCode::invalid_argument, "letter outside pc-presentation alphabet");
  mul_letter(state, k, letter.sign());
}

void Collector::multiply_power(ExponentVector& state, std::size_t k, const BigInt& power) const {
  if (k >= p_.size()) throw Error(ErrorCode::invalid_argument, "generator outside pc-presentation alphabet");
  mul_power(state, k, power);
}

ExponentVector Collector::collect(const Word& w) const {
  steps_ = 0;
  ExponentVector e(p_.size());
  for (Letter l : w) multiply(e, l);
  return e;
}

ExponentVector collect_pcp(const PcPresentation& p, const Word& w, std::uint64_t max_steps) {
  return Collector(p, max_steps).collect(w);
}

}  // namespace cdp
