#pragma once

// Deterministic emitters: JSON (sorted keys, canonical form) and LaTeX.

#include "paqft/expr.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace paqft {

using json = nlohmann::json;

json to_json(CoeffElem const& c);
json to_json(Factor const& f);
json to_json(SymExpr const& e);  // canonicalizes first

std::string to_latex(CoeffElem const& c);
std::string to_latex(SymExpr const& e);  // canonicalizes first
// Wraps a display in a minimal compilable document.
std::string latex_document(std::string const& body);

}  // namespace paqft
