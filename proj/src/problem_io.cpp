#include "hconv/problem_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hconv {

namespace {

struct Token {
  std::string text;
  int col;  // 1-based column in the line
};

std::vector<Token> Tokenize(const std::string& s, int first_col) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    const size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    out.push_back({s.substr(start, i - start), first_col + static_cast<int>(start)});
  }
  return out;
}

std::optional<int> ParseInt(const std::string& s) {
  int v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

enum class Section { kNone, kProblem, kSpace, kMap, kObjective, kConstraint, kCone, kDefaults };

struct RawTerm {
  Monomial term;
  int line;
};

// Term lists in the order their sections appeared.
struct RawPolynomial {
  std::vector<RawTerm> terms;
  int header_line = 0;
};

Polynomial Build(const RawPolynomial& raw, int dim) {
  std::vector<Monomial> terms;
  for (const RawTerm& t : raw.terms) {
    if (static_cast<int>(t.term.exponents.size()) != dim) {
      throw SemanticError("line " + std::to_string(t.line) + ": term has " +
                          std::to_string(t.term.exponents.size()) +
                          " exponents, space has dim " + std::to_string(dim));
    }
    terms.push_back(t.term);
  }
  return Polynomial(dim, std::move(terms));
}

void WriteTerms(std::ostringstream& out, const Polynomial& p) {
  for (const Monomial& t : p.terms()) {
    out << FormatDouble(t.coeff) << " :";
    for (int e : t.exponents) out << ' ' << e;
    out << '\n';
  }
}

bool SameVector(const std::optional<VectorXd>& a, const std::optional<VectorXd>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->size() == b->size() && *a == *b;
}

const std::map<std::string, std::string>& Registry() {
  static const std::map<std::string, std::string> registry = {
      {"remark-rank-deficient",
       "[problem]\n"
       "name = remark-rank-deficient\n"
       "\n"
       "[space]\n"
       "dim = 2\n"
       "p = 2\n"
       "\n"
       "[map 1]\n"
       "1 : 1 0\n"
       "1 : 0 1\n"
       "\n"
       "[map 2]\n"
       "1 : 2 0\n"
       "2 : 1 1\n"
       "1 : 0 2\n"
       "\n"
       "[defaults]\n"
       "x0 = 0 0\n"},
      {"remark-linf",
       "[problem]\n"
       "name = remark-linf\n"
       "\n"
       "[space]\n"
       "dim = 2\n"
       "p = inf\n"
       "\n"
       "[map 1]\n"
       "1 : 1 0\n"
       "\n"
       "[map 2]\n"
       "1 : 2 0\n"
       "1 : 0 1\n"
       "\n"
       "[defaults]\n"
       "x0 = 0 0\n"},
      {"positive-quadratic",
       "[problem]\n"
       "name = positive-quadratic\n"
       "\n"
       "[space]\n"
       "dim = 2\n"
       "p = 2\n"
       "\n"
       "[map 1]\n"
       "1 : 1 0\n"
       "0.1 : 0 2\n"
       "\n"
       "[map 2]\n"
       "1 : 0 1\n"
       "0.1 : 2 0\n"
       "\n"
       "[defaults]\n"
       "x0 = 0 0\n"},
      {"disk-inactive",
       "[problem]\n"
       "name = disk-inactive\n"
       "\n"
       "[space]\n"
       "dim = 2\n"
       "p = 2\n"
       "\n"
       "[objective]\n"
       "1 : 1 0\n"
       "\n"
       "[constraint 1]\n"
       "1 : 2 0\n"
       "1 : 0 2\n"
       "-1 : 0 0\n"
       "\n"
       "[cone]\n"
       "nonpositive = 1\n"
       "\n"
       "[defaults]\n"
       "x0 = 0.5 0.5\n"
       "eps = 0.1\n"},
      {"disk-active",
       "[problem]\n"
       "name = disk-active\n"
       "\n"
       "[space]\n"
       "dim = 2\n"
       "p = 2\n"
       "\n"
       "[objective]\n"
       "1 : 0 1\n"
       "\n"
       "[constraint 1]\n"
       "1 : 2 0\n"
       "1 : 0 2\n"
       "-1 : 0 0\n"
       "\n"
       "[cone]\n"
       "nonpositive = 1\n"
       "\n"
       "[defaults]\n"
       "x0 = 0.7 -0.7\n"
       "eps = 0.1\n"},
  };
  return registry;
}

}  // namespace

std::string FormatDouble(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::optional<double> ParseDouble(const std::string& s) {
  if (s.empty()) return std::nullopt;
  // from_chars rejects a leading '+'.
  const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
  const char* end = s.data() + s.size();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || std::isnan(v)) return std::nullopt;
  return v;
}

PolyMap ProblemFile::Map() const {
  if (map.empty()) throw NotFound("problem file has no [map] sections");
  return PolyMap(dim, map);
}

ConstrainedProblem ProblemFile::Problem() const {
  if (!objective) throw NotFound("problem file has no [objective] section");
  return ConstrainedProblem(PolyMap(dim, {*objective}), PolyMap(dim, constraint),
                            *cone, space());
}

bool ProblemFile::operator==(const ProblemFile& o) const {
  return name == o.name && dim == o.dim && p == o.p && map == o.map &&
         objective == o.objective && constraint == o.constraint &&
         cone == o.cone && SameVector(x0, o.x0) && eps == o.eps;
}

ProblemFile ParseProblem(const std::string& text) {
  ProblemFile out;
  Section section = Section::kNone;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  std::optional<int> dim;
  std::optional<double> p;
  std::vector<RawPolynomial> map;
  std::optional<RawPolynomial> objective;
  std::vector<RawPolynomial> constraint;
  std::vector<ConeSpec::Block> blocks;
  bool has_cone = false;
  RawPolynomial* current = nullptr;
  int x0_line = 0;

  std::istringstream in(text);
  std::string raw;
  int ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string content = raw.substr(0, raw.find('#'));
    const size_t fs = content.find_first_not_of(" \t");
    if (fs == std::string::npos) continue;
    const int col = static_cast<int>(fs) + 1;

    if (content[fs] == '[') {
      const size_t close = content.find(']', fs);
      if (close == std::string::npos) throw ParseError("missing ']'", ln, col);
      if (content.find_first_not_of(" \t", close + 1) != std::string::npos) {
        throw ParseError("text after section header", ln,
                         static_cast<int>(content.find_first_not_of(" \t", close + 1)) + 1);
      }
      const auto toks = Tokenize(content.substr(fs + 1, close - fs - 1), col + 1);
      if (toks.empty()) throw ParseError("empty section header", ln, col);
      const std::string& name = toks[0].text;
      const bool indexed = name == "map" || name == "constraint";
      if (indexed ? toks.size() != 2 : toks.size() != 1) {
        throw ParseError(indexed ? "expected [" + name + " k]"
                                 : "unexpected text in section header",
                         ln, toks.back().col);
      }
      const std::string key = indexed ? name + " " + toks[1].text : name;
      if (seen_sections.count(key)) {
        throw ParseError("duplicate section [" + key + "]", ln, col);
      }
      seen_sections.insert(key);
      seen_keys.clear();
      current = nullptr;
      if (indexed) {
        auto& list = name == "map" ? map : constraint;
        const auto k = ParseInt(toks[1].text);
        if (!k || *k != static_cast<int>(list.size()) + 1) {
          throw ParseError("expected [" + name + " " + std::to_string(list.size() + 1) + "]",
                           ln, toks[1].col);
        }
        list.emplace_back();
        current = &list.back();
        section = name == "map" ? Section::kMap : Section::kConstraint;
      } else if (name == "problem") {
        section = Section::kProblem;
      } else if (name == "space") {
        section = Section::kSpace;
      } else if (name == "objective") {
        objective.emplace();
        current = &*objective;
        section = Section::kObjective;
      } else if (name == "cone") {
        has_cone = true;
        section = Section::kCone;
      } else if (name == "defaults") {
        section = Section::kDefaults;
      } else {
        throw ParseError("unknown section [" + name + "]", ln, toks[0].col);
      }
      if (current) current->header_line = ln;
      continue;
    }

    if (section == Section::kNone) {
      throw ParseError("content before the first section", ln, col);
    }

    if (current) {
      const size_t colon = content.find(':');
      if (colon == std::string::npos) {
        throw ParseError("expected 'coeff : exponents'", ln, col);
      }
      const auto left = Tokenize(content.substr(0, colon), 1);
      if (left.size() != 1) {
        throw ParseError("expected one coefficient before ':'", ln,
                         left.empty() ? static_cast<int>(colon) + 1 : left[1].col);
      }
      const auto coeff = ParseDouble(left[0].text);
      if (!coeff || !std::isfinite(*coeff)) {
        throw ParseError("bad coefficient '" + left[0].text + "'", ln, left[0].col);
      }
      Monomial term{*coeff, {}};
      for (const Token& t : Tokenize(content.substr(colon + 1), static_cast<int>(colon) + 2)) {
        const auto e = ParseInt(t.text);
        if (!e) throw ParseError("bad exponent '" + t.text + "'", ln, t.col);
        if (*e < 0) {
          throw SemanticError("line " + std::to_string(ln) + ": negative exponent " + t.text);
        }
        term.exponents.push_back(*e);
      }
      if (term.exponents.empty()) throw ParseError("term has no exponents", ln, col);
      current->terms.push_back({std::move(term), ln});
      continue;
    }

    const size_t eq = content.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", ln, col);
    const auto keys = Tokenize(content.substr(0, eq), 1);
    if (keys.size() != 1) throw ParseError("expected one key before '='", ln, col);
    const std::string& key = keys[0].text;
    const int vcol = static_cast<int>(eq) + 2;
    const auto values = Tokenize(content.substr(eq + 1), vcol);
    if (values.empty()) throw ParseError("missing value for '" + key + "'", ln, vcol);
    if (section != Section::kCone) {
      if (seen_keys.count(key)) throw ParseError("duplicate key '" + key + "'", ln, keys[0].col);
      seen_keys.insert(key);
    }
    auto single = [&]() -> const Token& {
      if (values.size() != 1) throw ParseError("expected a single value", ln, values[1].col);
      return values[0];
    };
    auto unknown = [&]() { throw ParseError("unknown key '" + key + "'", ln, keys[0].col); };

    switch (section) {
      case Section::kProblem:
        if (key != "name") unknown();
        out.name = single().text;
        break;
      case Section::kSpace:
        if (key == "dim") {
          const auto d = ParseInt(single().text);
          if (!d) throw ParseError("bad dimension '" + values[0].text + "'", ln, values[0].col);
          dim = *d;
        } else if (key == "p") {
          const auto v = ParseDouble(single().text);
          if (!v) throw ParseError("bad exponent p '" + values[0].text + "'", ln, values[0].col);
          p = *v;
        } else {
          unknown();
        }
        break;
      case Section::kCone: {
        ConeSpec::Kind kind;
        if (key == "nonpositive") {
          kind = ConeSpec::Kind::kNonpositive;
        } else if (key == "zero") {
          kind = ConeSpec::Kind::kZero;
        } else {
          unknown();
        }
        const auto k = ParseInt(single().text);
        if (!k) throw ParseError("bad block size '" + values[0].text + "'", ln, values[0].col);
        if (*k < 1) throw SemanticError("line " + std::to_string(ln) + ": cone block size must be positive");
        blocks.push_back({kind, *k});
        break;
      }
      case Section::kDefaults:
        if (key == "x0") {
          VectorXd x(values.size());
          for (size_t i = 0; i < values.size(); ++i) {
            const auto v = ParseDouble(values[i].text);
            if (!v || !std::isfinite(*v)) {
              throw ParseError("bad number '" + values[i].text + "'", ln, values[i].col);
            }
            x[i] = *v;
          }
          out.x0 = x;
          x0_line = ln;
        } else if (key == "eps") {
          const auto v = ParseDouble(single().text);
          if (!v) throw ParseError("bad number '" + values[0].text + "'", ln, values[0].col);
          if (!(*v > 0.0) || !std::isfinite(*v)) {
            throw SemanticError("line " + std::to_string(ln) + ": eps must be positive");
          }
          out.eps = *v;
        } else {
          unknown();
        }
        break;
      default:
        break;
    }
  }

  auto require_terms = [](const RawPolynomial& r, const std::string& what) {
    if (r.terms.empty()) throw ParseError("section [" + what + "] has no terms", r.header_line, 1);
  };
  for (size_t i = 0; i < map.size(); ++i) require_terms(map[i], "map " + std::to_string(i + 1));
  if (objective) require_terms(*objective, "objective");
  for (size_t i = 0; i < constraint.size(); ++i) {
    require_terms(constraint[i], "constraint " + std::to_string(i + 1));
  }

  if (!dim) throw SemanticError("missing [space] dim");
  if (*dim < 1) throw SemanticError("dim must be at least 1");
  out.dim = *dim;
  out.p = p.value_or(2.0);
  if (!(out.p >= 1.0)) throw SemanticError("p must be at least 1 or inf");
  for (const RawPolynomial& r : map) out.map.push_back(Build(r, out.dim));
  if (objective) out.objective = Build(*objective, out.dim);
  for (const RawPolynomial& r : constraint) out.constraint.push_back(Build(r, out.dim));
  if (has_cone) {
    if (blocks.empty()) throw SemanticError("[cone] has no blocks");
    out.cone = ConeSpec(blocks);
  }
  if (map.empty() && !objective) {
    throw SemanticError("file defines neither [map k] nor [objective]");
  }
  if (objective || !constraint.empty() || has_cone) {
    if (!objective) throw SemanticError("[constraint]/[cone] given without [objective]");
    if (constraint.empty()) throw SemanticError("[objective] given without [constraint 1]");
    if (!has_cone) throw SemanticError("[objective] given without [cone]");
    if (out.cone->dim() != static_cast<int>(constraint.size())) {
      throw SemanticError("cone dimension " + std::to_string(out.cone->dim()) +
                          " differs from constraint count " +
                          std::to_string(constraint.size()));
    }
  }
  if (out.x0 && out.x0->size() != out.dim) {
    throw SemanticError("line " + std::to_string(x0_line) + ": x0 has " +
                        std::to_string(out.x0->size()) + " entries, dim is " +
                        std::to_string(out.dim));
  }
  return out;
}

std::string SerializeProblem(const ProblemFile& f) {
  std::ostringstream out;
  if (!f.name.empty()) out << "[problem]\nname = " << f.name << "\n\n";
  out << "[space]\ndim = " << f.dim << "\np = " << FormatDouble(f.p) << '\n';
  for (size_t i = 0; i < f.map.size(); ++i) {
    out << "\n[map " << i + 1 << "]\n";
    WriteTerms(out, f.map[i]);
  }
  if (f.objective) {
    out << "\n[objective]\n";
    WriteTerms(out, *f.objective);
  }
  for (size_t i = 0; i < f.constraint.size(); ++i) {
    out << "\n[constraint " << i + 1 << "]\n";
    WriteTerms(out, f.constraint[i]);
  }
  if (f.cone) {
    out << "\n[cone]\n";
    for (const auto& b : f.cone->blocks()) {
      out << (b.kind == ConeSpec::Kind::kNonpositive ? "nonpositive" : "zero")
          << " = " << b.size << '\n';
    }
  }
  if (f.x0 || f.eps) {
    out << "\n[defaults]\n";
    if (f.x0) {
      out << "x0 =";
      for (int i = 0; i < f.x0->size(); ++i) out << ' ' << FormatDouble((*f.x0)[i]);
      out << '\n';
    }
    if (f.eps) out << "eps = " << FormatDouble(*f.eps) << '\n';
  }
  return out.str();
}

ProblemFile LoadProblemFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseProblem(buf.str());
}

const std::vector<std::string>& RegistryNames() {
  static const std::vector<std::string> names = {
      "remark-rank-deficient", "remark-linf", "positive-quadratic",
      "disk-inactive", "disk-active"};
  return names;
}

const std::string& RegistryText(const std::string& name) {
  const auto it = Registry().find(name);
  if (it == Registry().end()) throw NotFound("no registry instance '" + name + "'");
  return it->second;
}

ProblemFile LoadRegistry(const std::string& name) {
  return ParseProblem(RegistryText(name));
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), width_(header.size()) {
  if (header.empty()) throw PreconditionViolated("CSV header is mandatory");
  Row(header);
}

std::string CsvWriter::Quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string q = "\"";
  for (char c : field) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

void CsvWriter::Row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) {
    throw DimensionMismatch("CSV row has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(width_));
  }
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << Quote(fields[i]);
  }
  out_ << '\n';
}

std::vector<std::vector<std::string>> ReadCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field", static_cast<int>(rows.size()) + 1, 1);
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hconv
