#include "fixcalc/session.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace fixcalc::cli {

using prodgrp::AmbientSpec;
using prodgrp::BaseEndo;
using prodgrp::Endomorphism;

const Endomorphism& Session::first() const {
  if (endos.empty()) fail(ErrorKind::parse, "file contains no endomorphism");
  return endos.front();
}

namespace {

struct Cursor {
  const std::string& s;
  std::size_t i = 0;

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
      ++i;
  }
  bool done() {
    skip_ws();
    return i >= s.size();
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char c, const char* what) {
    if (!eat(c))
      fail(ErrorKind::parse, std::string("expected '") + c + "' in " + what);
  }
  long integer(const char* what) {
    skip_ws();
    std::size_t start = i;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    std::size_t digits = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == digits)
      fail(ErrorKind::parse, std::string("expected integer in ") + what);
    return std::stol(s.substr(start, i - start));
  }
  Int big_integer(const char* what) {
    skip_ws();
    std::size_t start = i;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    std::size_t digits = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == digits)
      fail(ErrorKind::parse, std::string("expected integer in ") + what);
    return Int(s.substr(start, i - start));
  }
};

}  // namespace

Word parse_word(const std::string& text) {
  Cursor c{text};
  std::vector<freegrp::Letter> letters;
  bool saw_token = false;
  while (!c.done()) {
    char ch = c.peek();
    if (ch == '1') {
      ++c.i;
      saw_token = true;
      continue;  // the empty word; juxtaposition with 1 is harmless
    }
    if (ch == 'x' || ch == 'X') {
      bool upper = ch == 'X';
      ++c.i;
      if (c.i >= text.size() ||
          !std::isdigit(static_cast<unsigned char>(text[c.i])))
        fail(ErrorKind::parse, "generator index expected after x");
      std::size_t start = c.i;
      while (c.i < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[c.i])))
        ++c.i;
      long g = std::stol(text.substr(start, c.i - start));
      if (g < 1) fail(ErrorKind::parse, "generator index must be >= 1");
      bool inverse = upper;
      if (!upper && c.i < text.size() && text[c.i] == '^') {
        if (text.compare(c.i, 3, "^-1") != 0)
          fail(ErrorKind::parse, "only ^-1 is a valid exponent");
        c.i += 3;
        inverse = true;
      }
      letters.push_back(inverse ? -static_cast<int>(g) : static_cast<int>(g));
      saw_token = true;
      continue;
    }
    fail(ErrorKind::parse, std::string("unexpected character '") + ch +
                               "' in word");
  }
  if (!saw_token) fail(ErrorKind::parse, "empty word literal; write 1");
  return Word::from_letters(letters);
}

std::string format_word(const Word& w) { return w.str(); }

IntVec parse_vector(const std::string& text) {
  Cursor c{text};
  c.expect('[', "vector");
  IntVec out;
  if (!c.eat(']')) {
    for (;;) {
      out.push_back(c.big_integer("vector"));
      if (c.eat(']')) break;
      c.expect(',', "vector");
    }
  }
  if (!c.done()) fail(ErrorKind::parse, "trailing text after vector");
  return out;
}

namespace {

std::vector<IntVec> parse_rows_cursor(Cursor& c) {
  c.expect('[', "matrix");
  std::vector<IntVec> rows;
  if (c.eat(']')) return rows;
  for (;;) {
    c.expect('[', "matrix row");
    IntVec row;
    if (!c.eat(']')) {
      for (;;) {
        row.push_back(c.big_integer("matrix entry"));
        if (c.eat(']')) break;
        c.expect(',', "matrix row");
      }
    }
    rows.push_back(std::move(row));
    if (c.eat(']')) break;
    c.expect(',', "matrix");
  }
  return rows;
}

}  // namespace

std::vector<IntVec> parse_matrix_rows(const std::string& text) {
  Cursor c{text};
  std::vector<IntVec> rows = parse_rows_cursor(c);
  if (!c.done()) fail(ErrorKind::parse, "trailing text after matrix");
  return rows;
}

IntMatrix parse_matrix(const std::string& text, std::size_t rows,
                       std::size_t cols) {
  std::vector<IntVec> parsed = parse_matrix_rows(text);
  // [] abbreviates any matrix with zero rows or zero columns
  if (parsed.empty()) {
    if (rows != 0 && cols != 0)
      fail(ErrorKind::dimension, "matrix must have " + std::to_string(rows) +
                                     " rows");
    return IntMatrix::zero(rows, cols);
  }
  if (parsed.size() != rows)
    fail(ErrorKind::dimension,
         "matrix must have " + std::to_string(rows) + " rows");
  IntMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (parsed[i].size() != cols)
      fail(ErrorKind::dimension,
           "matrix row must have " + std::to_string(cols) + " entries");
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = parsed[i][j];
  }
  return m;
}

std::string format_vector(const IntVec& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  os << ']';
  return os.str();
}

std::string format_matrix(const IntMatrix& m) { return m.to_string(); }

AmbientSpec parse_group_literal(const std::string& text) {
  std::istringstream is(text);
  std::string kind;
  is >> kind;
  auto key_value = [&](const char* key) {
    std::string tok;
    if (!(is >> tok) || tok.rfind(std::string(key) + "=", 0) != 0)
      fail(ErrorKind::parse,
           std::string("expected ") + key + "=<int> in group literal");
    try {
      return std::stoi(tok.substr(std::string(key).size() + 1));
    } catch (const std::exception&) {
      fail(ErrorKind::parse, std::string("bad integer for ") + key);
    }
  };
  if (kind == "free") {
    int n = key_value("n");
    int m = key_value("m");
    std::string rest;
    if (is >> rest) fail(ErrorKind::parse, "trailing text in group literal");
    return AmbientSpec::free_ambient(n, m);
  }
  if (kind == "surface") {
    int g = key_value("g");
    int m = key_value("m");
    std::string rest;
    if (is >> rest) fail(ErrorKind::parse, "trailing text in group literal");
    return AmbientSpec::surface_ambient(g, m);
  }
  fail(ErrorKind::parse, "group literal must start with free or surface");
}

prodgrp::ProdElement parse_element_literal(const AmbientSpec& amb,
                                           const std::string& text) {
  Cursor c{text};
  c.expect('(', "element literal");
  std::size_t word_start = c.i;
  std::size_t depth = 0;
  std::size_t comma = std::string::npos;
  for (std::size_t i = c.i; i < text.size(); ++i) {
    if (text[i] == '[')
      ++depth;
    else if (text[i] == ']')
      --depth;
    else if (text[i] == ',' && depth == 0) {
      comma = i;
      break;
    }
  }
  if (comma == std::string::npos)
    fail(ErrorKind::parse, "element literal needs (word, [vector])");
  Word u = parse_word(text.substr(word_start, comma - word_start));
  std::size_t close = text.rfind(')');
  if (close == std::string::npos || close < comma)
    fail(ErrorKind::parse, "unterminated element literal");
  IntVec a = parse_vector(text.substr(comma + 1, close - comma - 1));
  if (a.size() != static_cast<std::size_t>(amb.m))
    fail(ErrorKind::dimension, "exponent vector length mismatch");
  if (static_cast<std::size_t>(u.max_generator()) > amb.base_rank())
    fail(ErrorKind::range, "generator index out of range");
  return {std::move(u), std::move(a)};
}

std::string format_element(const prodgrp::ProdElement& e) {
  return e.u.str() + " ; " + format_vector(e.a);
}

namespace {

std::string strip(const std::string& line) {
  std::string s = line;
  auto hash = s.find('#');
  if (hash != std::string::npos) s.erase(hash);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.pop_back();
  std::size_t start = 0;
  while (start < s.size() &&
         std::isspace(static_cast<unsigned char>(s[start])))
    ++start;
  return s.substr(start);
}

// "key = value" split on the first '='
bool split_assignment(const std::string& line, std::string& key,
                      std::string& value) {
  auto eq = line.find('=');
  if (eq == std::string::npos) return false;
  key = strip(line.substr(0, eq));
  value = strip(line.substr(eq + 1));
  return true;
}

BaseEndo classify_images(std::vector<Word> images) {
  bool identity = true, is_signed = true;
  std::set<int> fixed;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& l = images[i].letters();
    int want = static_cast<int>(i + 1);
    if (l.size() == 1 && l[0] == want) {
      fixed.insert(want);
    } else if (l.size() == 1 && l[0] == -want) {
      identity = false;
    } else {
      identity = false;
      is_signed = false;
    }
  }
  if (identity) return BaseEndo::identity_endo(images.size());
  if (is_signed) {
    freegrp::SignedClassEndo se;
    se.rank = images.size();
    se.fixed = std::move(fixed);
    return BaseEndo::signed_class(se);
  }
  return BaseEndo::general(std::move(images));
}

}  // namespace

Session parse_session_text(const std::string& text) {
  std::istringstream is(text);
  std::string raw;
  std::vector<std::string> lines;
  while (std::getline(is, raw)) {
    std::string s = strip(raw);
    if (!s.empty()) lines.push_back(std::move(s));
  }
  if (lines.empty()) fail(ErrorKind::parse, "empty endomorphism file");
  if (lines[0].rfind("group", 0) != 0)
    fail(ErrorKind::parse, "file must start with a group header");

  Session session;
  session.ambient = parse_group_literal(strip(lines[0].substr(5)));
  const AmbientSpec& amb = session.ambient;
  const std::size_t rank = amb.base_rank();
  const std::size_t m = static_cast<std::size_t>(amb.m);

  std::size_t i = 1;
  while (i < lines.size()) {
    if (lines[i] == "endo type1") {
      ++i;
      std::vector<std::optional<Word>> images(rank);
      std::optional<IntMatrix> q, p;
      while (i < lines.size() && lines[i].rfind("endo", 0) != 0) {
        std::string key, value;
        if (!split_assignment(lines[i], key, value))
          fail(ErrorKind::parse, "expected key = value: " + lines[i]);
        if (key.rfind("phi", 0) == 0) {
          std::string gen = strip(key.substr(3));
          if (gen.size() < 2 || gen[0] != 'x')
            fail(ErrorKind::parse, "phi lines look like: phi x1 = <word>");
          long idx = std::stol(gen.substr(1));
          if (idx < 1 || static_cast<std::size_t>(idx) > rank)
            fail(ErrorKind::parse, "phi generator index out of range");
          images[idx - 1] = parse_word(value);
        } else if (key == "Q") {
          q = parse_matrix(value, m, m);
        } else if (key == "P") {
          p = parse_matrix(value, rank, m);
        } else {
          fail(ErrorKind::parse, "unknown key in type1 block: " + key);
        }
        ++i;
      }
      std::vector<Word> imgs;
      for (std::size_t j = 0; j < rank; ++j) {
        if (!images[j])
          fail(ErrorKind::parse,
               "missing phi x" + std::to_string(j + 1) + " image");
        imgs.push_back(*images[j]);
      }
      if (!q) fail(ErrorKind::parse, "missing Q in type1 block");
      if (!p) fail(ErrorKind::parse, "missing P in type1 block");
      session.endos.push_back(
          prodgrp::make_type1(amb, classify_images(std::move(imgs)),
                              std::move(*q), std::move(*p)));
    } else if (lines[i] == "endo type2") {
      ++i;
      std::optional<Word> z;
      std::optional<IntVec> l, h;
      std::optional<IntMatrix> q, p;
      while (i < lines.size() && lines[i].rfind("endo", 0) != 0) {
        std::string key, value;
        if (!split_assignment(lines[i], key, value))
          fail(ErrorKind::parse, "expected key = value: " + lines[i]);
        if (key == "z")
          z = parse_word(value);
        else if (key == "l")
          l = parse_vector(value);
        else if (key == "h")
          h = parse_vector(value);
        else if (key == "Q")
          q = parse_matrix(value, m, m);
        else if (key == "P")
          p = parse_matrix(value, rank, m);
        else
          fail(ErrorKind::parse, "unknown key in type2 block: " + key);
        ++i;
      }
      if (!z || !l || !h || !q || !p)
        fail(ErrorKind::parse, "type2 block needs z, l, h, Q, P");
      session.endos.push_back(prodgrp::make_type2(
          amb, std::move(*z), std::move(*l), std::move(*h), std::move(*q),
          std::move(*p)));
    } else {
      fail(ErrorKind::parse, "expected an endo block, got: " + lines[i]);
    }
  }
  if (session.endos.empty())
    fail(ErrorKind::parse, "file contains no endomorphism");
  return session;
}

Session parse_session_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_session_text(buf.str());
}

std::vector<Word> parse_basis_text(const std::string& text) {
  std::istringstream is(text);
  std::string raw;
  std::vector<Word> words;
  while (std::getline(is, raw)) {
    std::string s = strip(raw);
    if (s.empty()) continue;
    words.push_back(parse_word(s));
  }
  return words;
}

std::vector<Word> parse_basis_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_basis_text(buf.str());
}

std::string format_endo_file(const AmbientSpec& amb, const Endomorphism& e) {
  std::ostringstream os;
  os << "group " << amb.str() << "\n";
  if (e.is_type1()) {
    const prodgrp::EndoType1& t = e.type1();
    os << "endo type1\n";
    for (std::size_t i = 0; i < t.phi.images.size(); ++i)
      os << "phi x" << (i + 1) << " = " << t.phi.images[i].str() << "\n";
    os << "Q = " << format_matrix(t.Q) << "\n";
    os << "P = " << format_matrix(t.P) << "\n";
    return os.str();
  }
  if (e.is_type2()) {
    const prodgrp::EndoType2& t = e.type2();
    os << "endo type2\n";
    os << "z = " << t.z.str() << "\n";
    os << "l = " << format_vector(t.l) << "\n";
    os << "h = " << format_vector(t.h) << "\n";
    os << "Q = " << format_matrix(t.Q) << "\n";
    os << "P = " << format_matrix(t.P) << "\n";
    return os.str();
  }
  fail(ErrorKind::missing_data,
       "an opaque composite has no canonical file form");
}

}  // namespace fixcalc::cli
