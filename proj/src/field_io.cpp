#include "rflab/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace rflab {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v;
    if (!(is >> v)) throw DomainError("field file: bad list entry '" + item + "'");
    out.push_back(v);
  }
  return out;
}

FieldFile load(const std::string& path, FieldKindTag expected) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open field file " + path);
  FieldFile f = read_field(in);
  if (f.kind != expected)
    throw ShapeMismatch("field file " + path + " has kind " + to_string(f.kind) + ", expected " +
                        to_string(expected));
  return f;
}

template <class F>
void save(const std::string& path, const F& f, FieldKindTag kind, int fiber_rank) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write field file " + path);
  write_field(out, f, kind, fiber_rank);
}

void copy_into(ComponentArray& dst, const ComponentArray& src) {
  dst.require_same_shape(src, "load field");
  dst.raw() = src.raw();
}

}  // namespace

const char* to_string(FieldKindTag k) {
  switch (k) {
    case FieldKindTag::scalar: return "scalar";
    case FieldKindTag::sym2: return "sym2";
    case FieldKindTag::fiber_metric: return "fiber_metric";
    case FieldKindTag::oneform: return "oneform";
    case FieldKindTag::threeform: return "threeform";
    case FieldKindTag::vector: return "vector";
  }
  return "?";
}

FieldKindTag field_kind_from_string(const std::string& s) {
  static const std::map<std::string, FieldKindTag> kinds = {
      {"scalar", FieldKindTag::scalar},         {"sym2", FieldKindTag::sym2},
      {"fiber_metric", FieldKindTag::fiber_metric}, {"oneform", FieldKindTag::oneform},
      {"threeform", FieldKindTag::threeform},   {"vector", FieldKindTag::vector}};
  auto it = kinds.find(s);
  if (it == kinds.end()) throw DomainError("unknown field kind '" + s + "'");
  return it->second;
}

void write_field(std::ostream& os, const ComponentArray& f, FieldKindTag kind, int fiber_rank) {
  const Grid& g = f.grid();
  os << "RFLAB-FIELD v1 kind=" << to_string(kind) << " dim=" << g.dim() << " points=";
  for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << g.points(a);
  os << " periods=";
  for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << format_double(g.period(a));
  os << " ncomp=" << f.components();
  if (fiber_rank > 0) os << " fiber_rank=" << fiber_rank;
  os << '\n';
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (int c = 0; c < f.components(); ++c) os << (c ? " " : "") << format_double(f.at(c, p));
    os << '\n';
  }
}

FieldFile read_field(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw DomainError("field file: missing header");
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "RFLAB-FIELD" || version != "v1") throw DomainError("field file: bad magic");
  std::map<std::string, std::string> kv;
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw DomainError("field file: bad header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"kind", "dim", "points", "periods", "ncomp"})
    if (!kv.count(key)) throw DomainError(std::string("field file: header lacks ") + key);
  FieldFile out;
  out.kind = field_kind_from_string(kv["kind"]);
  const int dim = std::stoi(kv["dim"]);
  auto pts = parse_list<int>(kv["points"]);
  auto per = parse_list<double>(kv["periods"]);
  if (static_cast<int>(pts.size()) != dim || static_cast<int>(per.size()) != dim)
    throw DomainError("field file: points/periods do not match dim");
  const int ncomp = std::stoi(kv["ncomp"]);
  if (kv.count("fiber_rank")) out.fiber_rank = std::stoi(kv["fiber_rank"]);
  Grid grid(pts, per);
  out.data = ComponentArray(grid, ncomp);
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (int c = 0; c < ncomp; ++c)
      if (!(is >> out.data.at(c, p))) throw DomainError("field file: truncated data");
  return out;
}

void save_field(const std::string& path, const ScalarField& f) {
  save(path, f, FieldKindTag::scalar, 0);
}
void save_field(const std::string& path, const SymTensor2Field& f) {
  save(path, f, FieldKindTag::sym2, 0);
}
void save_field(const std::string& path, const FiberMetricField& f) {
  save(path, f, FieldKindTag::fiber_metric, f.rank());
}
void save_field(const std::string& path, const VecOneFormField& f) {
  save(path, f, FieldKindTag::oneform, f.fiber_rank());
}
void save_field(const std::string& path, const ThreeFormField& f) {
  save(path, f, FieldKindTag::threeform, 0);
}

ScalarField load_scalar_field(const std::string& path) {
  FieldFile f = load(path, FieldKindTag::scalar);
  ScalarField out(f.data.grid());
  copy_into(out, f.data);
  return out;
}

SymTensor2Field load_sym2_field(const std::string& path) {
  FieldFile f = load(path, FieldKindTag::sym2);
  SymTensor2Field out(f.data.grid());
  copy_into(out, f.data);
  return out;
}

FiberMetricField load_fiber_metric_field(const std::string& path) {
  FieldFile f = load(path, FieldKindTag::fiber_metric);
  FiberMetricField out(f.data.grid(), f.fiber_rank);
  copy_into(out, f.data);
  return out;
}

VecOneFormField load_oneform_field(const std::string& path) {
  FieldFile f = load(path, FieldKindTag::oneform);
  VecOneFormField out(f.data.grid(), f.fiber_rank);
  copy_into(out, f.data);
  return out;
}

ThreeFormField load_threeform_field(const std::string& path) {
  FieldFile f = load(path, FieldKindTag::threeform);
  ThreeFormField out(f.data.grid());
  copy_into(out, f.data);
  return out;
}

}  // namespace rflab
