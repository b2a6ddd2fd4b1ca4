#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "treespn/graph.hpp"

namespace treespn {

inline constexpr int kModelFormatVersion = 1;

class ModelFormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Text model format, one record per line:
//
//   treespn-model <version>
//   variables <n>
//   cardinalities <k_0> ... <k_{n-1}>      (0 marks a continuous variable)
//   nodes <count>
//   root <id>
//   <id> sum <c> <child ids...> <weights...>
//   <id> product <c> <child ids...>
//   <id> leaf <family> <d> <scope...> <family parameters...>
//   end
//
// Node records appear in topological order (children first). Reals are
// written with 17 significant digits so weights and leaf parameters read back
// bit for bit.
void write_model(std::ostream& out, const SpnGraph& graph);
std::string model_to_string(const SpnGraph& graph);

// Parses without validating; use freeze() or validate() on the result.
GraphBuilder read_model_unvalidated(std::istream& in);
// Parses and validates; throws ModelFormatError or InvalidGraphError.
SpnGraph read_model(std::istream& in);
SpnGraph model_from_string(const std::string& text);

void save_model(const std::string& path, const SpnGraph& graph);
SpnGraph load_model(const std::string& path);

}  // namespace treespn
