#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hconv/common.hpp"
#include "hconv/cone.hpp"
#include "hconv/localized_opt.hpp"
#include "hconv/norm_space.hpp"
#include "hconv/poly_map.hpp"

namespace hconv {

/// Contents of a .pkp problem file. A file describes a map f (for the
/// convexity tools), a constrained problem (objective, constraint, cone), or
/// both, plus optional defaults for x0 and eps.
///
///   # comment
///   [problem]
///   name = disk-inactive
///   [space]
///   dim = 2
///   p = 2            # or inf
///   [map 1]          # components of f, numbered from 1
///   1 : 1 0          # coeff : exponents of x1 ... xn
///   [objective]
///   [constraint 1]
///   [cone]
///   nonpositive = 1  # blocks in order; also zero = k
///   [defaults]
///   x0 = 0.5 0.5
///   eps = 0.1
struct ProblemFile {
  std::string name;
  int dim = 0;
  double p = 2.0;
  std::vector<Polynomial> map;
  std::optional<Polynomial> objective;
  std::vector<Polynomial> constraint;
  std::optional<ConeSpec> cone;
  std::optional<VectorXd> x0;
  std::optional<double> eps;

  NormSpace space() const { return NormSpace(dim, p); }
  bool has_map() const { return !map.empty(); }
  bool has_problem() const { return objective.has_value(); }
  /// Throws NotFound when the file has no such part.
  PolyMap Map() const;
  ConstrainedProblem Problem() const;
  VectorXd X0OrZero() const { return x0 ? *x0 : VectorXd::Zero(dim); }

  bool operator==(const ProblemFile& o) const;
};

/// Throws ParseError (with line and column, both 1-based) for syntax errors
/// and SemanticError for well-formed files that describe nothing valid.
ProblemFile ParseProblem(const std::string& text);
/// Canonical text; numbers in shortest round-trip form.
std::string SerializeProblem(const ProblemFile& file);
/// Reads and parses a file; NotFound when it cannot be opened.
ProblemFile LoadProblemFile(const std::string& path);

/// Built-in instances, by name.
const std::vector<std::string>& RegistryNames();
/// Embedded .pkp text of an instance; NotFound for unknown names.
const std::string& RegistryText(const std::string& name);
ProblemFile LoadRegistry(const std::string& name);

/// Shortest decimal text that reads back as the same double ("inf" and
/// "-inf" for infinities).
std::string FormatDouble(double v);
/// Parses a whole string as a double; nullopt on any trailing text.
std::optional<double> ParseDouble(const std::string& s);

/// CSV with a mandatory header row. Fields holding a comma, quote, CR or LF
/// are quoted, with quotes doubled.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void Row(const std::vector<std::string>& fields);
  static std::string Quote(const std::string& field);

 private:
  std::ostream& out_;
  size_t width_;
};

/// Reads CSV written by CsvWriter (or any RFC-4180 text); first row is the
/// header.
std::vector<std::vector<std::string>> ReadCsv(const std::string& text);

}  // namespace hconv
