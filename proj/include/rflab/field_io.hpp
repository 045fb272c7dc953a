#pragma once

#include <iosfwd>
#include <string>

#include "rflab/grid.hpp"

namespace rflab {

/// Field kinds as spelled in the file header.
enum class FieldKindTag { scalar, sym2, fiber_metric, oneform, threeform, vector };

const char* to_string(FieldKindTag k);
FieldKindTag field_kind_from_string(const std::string& s);

/// Decoded field file: kind, fiber rank (0 when not applicable) and raw data.
struct FieldFile {
  FieldKindTag kind = FieldKindTag::scalar;
  int fiber_rank = 0;
  ComponentArray data;
};

/// Text format, see docs/field_format.md.
void write_field(std::ostream& os, const ComponentArray& f, FieldKindTag kind, int fiber_rank = 0);
FieldFile read_field(std::istream& is);

void save_field(const std::string& path, const ScalarField& f);
void save_field(const std::string& path, const SymTensor2Field& f);
void save_field(const std::string& path, const FiberMetricField& f);
void save_field(const std::string& path, const VecOneFormField& f);
void save_field(const std::string& path, const ThreeFormField& f);

ScalarField load_scalar_field(const std::string& path);
SymTensor2Field load_sym2_field(const std::string& path);
FiberMetricField load_fiber_metric_field(const std::string& path);
VecOneFormField load_oneform_field(const std::string& path);
ThreeFormField load_threeform_field(const std::string& path);

}  // namespace rflab
