#pragma once

#include <string>
#include <vector>

#include "fixcalc/prodgrp.hpp"

namespace fixcalc::cli {

using freegrp::Word;
using intlin::Int;
using intlin::IntMatrix;
using intlin::IntVec;

/// Parsed contents of an endomorphism file: the ambient group header plus
/// the endomorphism blocks, dimension-checked against the ambient.
struct Session {
  prodgrp::AmbientSpec ambient = prodgrp::AmbientSpec::free_ambient(0, 0);
  std::vector<prodgrp::Endomorphism> endos;

  const prodgrp::Endomorphism& first() const;
};

/// Word grammar: generators x1..xn, inverses x1^-1 or X1, juxtaposition is
/// the product, 1 is the empty word. Whitespace-insensitive.
Word parse_word(const std::string& text);
std::string format_word(const Word& w);

/// Vector literal [a1,a2,...]; matrix literal [[..],[..]]; [] is empty.
IntVec parse_vector(const std::string& text);
std::vector<IntVec> parse_matrix_rows(const std::string& text);
IntMatrix parse_matrix(const std::string& text, std::size_t rows,
                       std::size_t cols);
std::string format_vector(const IntVec& v);
std::string format_matrix(const IntMatrix& m);

/// Group literal: "free n=<n> m=<m>" or "surface g=<g> m=<m>".
prodgrp::AmbientSpec parse_group_literal(const std::string& text);

/// Element literal: "(<word>, [a1,...,am])".
prodgrp::ProdElement parse_element_literal(const prodgrp::AmbientSpec& amb,
                                           const std::string& text);
std::string format_element(const prodgrp::ProdElement& e);

/// Endomorphism file: group header line, then one or more endo blocks.
/// '#' starts a comment. See README for the grammar.
Session parse_session_text(const std::string& text);
Session parse_session_file(const std::string& path);

/// One word per line; '#' comments and blank lines ignored.
std::vector<Word> parse_basis_text(const std::string& text);
std::vector<Word> parse_basis_file(const std::string& path);

std::string format_endo_file(const prodgrp::AmbientSpec& amb,
                             const prodgrp::Endomorphism& e);

}  // namespace fixcalc::cli
