#include "rdaocp/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace rdaocp {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

Metadata study_metadata(const StudyConfig& cfg) {
  return {{"example", to_string(cfg.example)},
          {"m", std::to_string(cfg.m)},
          {"hu_rule", to_string(cfg.hu)},
          {"h", "1/n (grid spacing)"},
          {"mu", format_number(cfg.mu > 0.0 ? cfg.mu : 3.0 * cfg.m * cfg.m)},
          {"rho", format_number(cfg.effective_rho())},
          {"tol_u", format_number(cfg.tol_u)},
          {"max_iter", std::to_string(cfg.max_iter)}};
}

namespace {

void write_meta(std::ostream& os, const Metadata& meta) {
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
}

}  // namespace

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows, const Metadata& meta) {
  write_meta(os, meta);
  os << "n,n_u,h,h_u,err_u,err_y,err_p,dg_y,dg_p,err_rec,eoc_u,eoc_y,eoc_p,eoc_dg_y,eoc_dg_p,"
        "eoc_rec,iterations,rho\n";
  for (const StudyRow& r : rows) {
    os << r.n << ',' << r.n_u;
    for (const double v : {r.h, r.h_u, r.err_u, r.err_y, r.err_p, r.dg_y, r.dg_p, r.err_rec,
                           r.eoc_u, r.eoc_y, r.eoc_p, r.eoc_dg_y, r.eoc_dg_p, r.eoc_rec})
      os << ',' << format_number(v);
    os << ',' << r.iterations << ',' << format_number(r.rho) << '\n';
  }
  if (!os) throw IoError("failed to write study CSV");
}

void write_estimator_csv(std::ostream& os, const std::vector<EstimatorRow>& rows,
                         const Metadata& meta) {
  write_meta(os, meta);
  os << "n,h,max_e_y,min_e_y,max_e_p,min_e_p,max_e_u,min_e_u,eta0,eta1_y,eta2_y,eta3_y,eta1_p,"
        "eta2_p,eta3_p,total,iterations\n";
  for (const EstimatorRow& r : rows) {
    os << r.n;
    for (const double v : {r.h, r.max_e_y, r.min_e_y, r.max_e_p, r.min_e_p, r.max_e_u, r.min_e_u,
                           r.eta0, r.eta1_y, r.eta2_y, r.eta3_y, r.eta1_p, r.eta2_p, r.eta3_p,
                           r.total})
      os << ',' << format_number(v);
    os << ',' << r.iterations << '\n';
  }
  if (!os) throw IoError("failed to write estimator CSV");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  f.close();
  if (!f) throw IoError("failed to write '" + path + "'");
}

namespace {

void write_cells(std::ostream& os, const CellFields& cells, std::size_t repeat, std::size_t count) {
  if (cells.empty()) return;
  os << "CELL_DATA " << count * repeat << '\n';
  for (const auto& [name, values] : cells) {
    if (static_cast<std::size_t>(values.size()) != count)
      throw InvalidArgument("vtk: cell field '" + name + "' has the wrong length");
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t c = 0; c < count; ++c)
      for (std::size_t r = 0; r < repeat; ++r)
        os << format_number(values(static_cast<Eigen::Index>(c))) << '\n';
  }
}

}  // namespace

void write_state_vtk(const std::string& path, const OcpSolution& sol, const CellFields& cells) {
  const TriMesh& mesh = sol.y.mesh();
  const std::size_t ne = mesh.num_elements();
  const std::size_t s = static_cast<std::size_t>(std::max(1, sol.y.degree()));
  const std::size_t per_el_pts = (s + 1) * (s + 2) / 2;
  const std::size_t per_el_tris = s * s;
  // lattice index of (i, j) with i + j <= s
  const auto lat = [s](std::size_t i, std::size_t j) { return j * (s + 1) - j * (j - 1) / 2 + i; };

  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\nrdaocp state fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << ne * per_el_pts << " double\n";
  std::vector<double> yv, pv;
  yv.reserve(ne * per_el_pts);
  pv.reserve(ne * per_el_pts);
  for (std::size_t k = 0; k < ne; ++k) {
    const auto v = mesh.element_vertices(k);
    for (std::size_t j = 0; j <= s; ++j)
      for (std::size_t i = 0; i + j <= s; ++i) {
        const double a = static_cast<double>(i) / static_cast<double>(s);
        const double b = static_cast<double>(j) / static_cast<double>(s);
        const Point x = v[0] + a * (v[1] - v[0]) + b * (v[2] - v[0]);
        os << format_number(x.x()) << ' ' << format_number(x.y()) << " 0\n";
        yv.push_back(sol.y.value(k, x));
        pv.push_back(sol.p.value(k, x));
      }
  }
  os << "CELLS " << ne * per_el_tris << ' ' << ne * per_el_tris * 4 << '\n';
  for (std::size_t k = 0; k < ne; ++k) {
    const std::size_t base = k * per_el_pts;
    for (std::size_t j = 0; j < s; ++j)
      for (std::size_t i = 0; i + j < s; ++i) {
        os << "3 " << base + lat(i, j) << ' ' << base + lat(i + 1, j) << ' '
           << base + lat(i, j + 1) << '\n';
        if (i + j + 1 < s)
          os << "3 " << base + lat(i + 1, j) << ' ' << base + lat(i + 1, j + 1) << ' '
             << base + lat(i, j + 1) << '\n';
      }
  }
  os << "CELL_TYPES " << ne * per_el_tris << '\n';
  for (std::size_t c = 0; c < ne * per_el_tris; ++c) os << "5\n";
  os << "POINT_DATA " << ne * per_el_pts << '\n';
  os << "SCALARS y_h double 1\nLOOKUP_TABLE default\n";
  for (const double v : yv) os << format_number(v) << '\n';
  os << "SCALARS p_h double 1\nLOOKUP_TABLE default\n";
  for (const double v : pv) os << format_number(v) << '\n';
  write_cells(os, cells, per_el_tris, ne);
  write_file(path, os.str());
}

void write_control_vtk(const std::string& path, const ControlMesh& mesh, const CellFields& cells) {
  const std::size_t nn = mesh.num_nodes();
  const std::size_t nc = mesh.num_elements();
  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\nrdaocp control fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nn << " double\n";
  for (std::size_t i = 0; i < nn; ++i) {
    const Point x = mesh.node(i);
    os << format_number(x.x()) << ' ' << format_number(x.y()) << " 0\n";
  }
  os << "CELLS " << nc << ' ' << nc * 4 << '\n';
  for (std::size_t c = 0; c < nc; ++c) {
    const auto v = mesh.element_nodes(c);
    os << "3 " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  }
  os << "CELL_TYPES " << nc << '\n';
  for (std::size_t c = 0; c < nc; ++c) os << "5\n";
  write_cells(os, cells, 1, nc);
  write_file(path, os.str());
}

}  // namespace rdaocp
