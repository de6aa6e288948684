#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rdaocp/study.hpp"

namespace rdaocp {

/// "%.5e" formatting (six significant digits); NaN prints as "nan".
std::string format_number(double v);

/// Metadata lines are written first as "# key=value".
using Metadata = std::vector<std::pair<std::string, std::string>>;

Metadata study_metadata(const StudyConfig& cfg);

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows, const Metadata& meta = {});
void write_estimator_csv(std::ostream& os, const std::vector<EstimatorRow>& rows,
                         const Metadata& meta = {});

/// Named per-cell data written alongside the sampled fields.
using CellFields = std::map<std::string, Vector>;

/// Legacy VTK unstructured grid of the state mesh: every element is split into s x s
/// sub-triangles (s = max(1, m)); y_h and p_h are sampled at the sub-triangle vertices and
/// each entry of `cells` (one value per state element) is repeated on its sub-triangles.
void write_state_vtk(const std::string& path, const OcpSolution& sol, const CellFields& cells = {});

/// Legacy VTK of the control mesh with per-control-element data.
void write_control_vtk(const std::string& path, const ControlMesh& mesh, const CellFields& cells);

/// Writes `text` to `path`, throwing IoError on failure.
void write_file(const std::string& path, const std::string& text);

/// File system or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rdaocp
