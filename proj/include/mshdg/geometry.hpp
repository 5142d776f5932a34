#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mshdg/common.hpp"

namespace mshdg {

struct FacetSide {
  int cell = -1;
  int local_facet = -1;
  Vec normal;  // outward unit normal of the incident cell
};

struct Facet {
  std::vector<int> vertices;  // sorted ascending
  double measure = 0.0;
  FacetSide plus;                   // incident cell with the smaller id
  std::optional<FacetSide> minus;   // absent on boundary facets
  bool boundary() const { return !minus.has_value(); }
};

/// Simplicial mesh in dimension 1 or 2. Immutable after construction;
/// facets, normals, and measures are derived from the cell list.
class Mesh {
 public:
  Mesh(int dim, Mat vertices, Eigen::MatrixXi cells)
      : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells)) {
    MSHDG_REQUIRE(dim_ == 1 || dim_ == 2, "mesh dimension must be 1 or 2");
    MSHDG_REQUIRE(vertices_.cols() == dim_, "vertex coordinate count does not match dim");
    MSHDG_REQUIRE(cells_.cols() == dim_ + 1, "cell vertex count does not match dim");
    validate_cells();
    build_facets();
  }

  int dim() const { return dim_; }
  int n_vertices() const { return static_cast<int>(vertices_.rows()); }
  int n_cells() const { return static_cast<int>(cells_.rows()); }
  int n_facets() const { return static_cast<int>(facets_.size()); }

  Vec vertex(int v) const { return vertices_.row(v).transpose(); }
  const Mat& vertices() const { return vertices_; }
  const Eigen::MatrixXi& cells() const { return cells_; }
  const Facet& facet(int f) const { return facets_[f]; }
  const std::vector<Facet>& facets() const { return facets_; }
  int cell_facet(int c, int lf) const { return cell_facets_(c, lf); }
  const std::vector<int>& boundary_facet_ids() const { return boundary_facet_ids_; }

  /// Local facet lf of a cell is spanned by the cell vertices other than lf.
  std::vector<int> local_facet_vertices(int c, int lf) const {
    std::vector<int> vs;
    for (int k = 0; k <= dim_; ++k)
      if (k != lf) vs.push_back(cells_(c, k));
    return vs;
  }

  double cell_volume(int c) const {
    if (dim_ == 1) return vertices_(cells_(c, 1), 0) - vertices_(cells_(c, 0), 0);
    Vec a = vertex(cells_(c, 0)), b = vertex(cells_(c, 1)), d = vertex(cells_(c, 2));
    return 0.5 * ((b(0) - a(0)) * (d(1) - a(1)) - (b(1) - a(1)) * (d(0) - a(0)));
  }

  struct AffineMap {
    Vec x0;
    Mat jac, inv_jac;
    double det = 0.0;
  };

  /// Affine map x = x0 + J xi from the reference simplex to cell c.
  AffineMap cell_map(int c) const {
    AffineMap m;
    m.x0 = vertex(cells_(c, 0));
    m.jac.resize(dim_, dim_);
    for (int k = 0; k < dim_; ++k) m.jac.col(k) = vertex(cells_(c, k + 1)) - m.x0;
    m.det = m.jac.determinant();
    m.inv_jac = m.jac.inverse();
    return m;
  }

  /// Cells sharing an internal facet with c, ascending.
  std::vector<int> neighbors(int c) const {
    std::vector<int> out;
    for (int lf = 0; lf <= dim_; ++lf) {
      const Facet& f = facets_[cell_facets_(c, lf)];
      if (f.boundary()) continue;
      out.push_back(f.plus.cell == c ? f.minus->cell : f.plus.cell);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void validate_cells() {
    for (int c = 0; c < n_cells(); ++c) {
      for (int k = 0; k <= dim_; ++k) {
        const int v = cells_(c, k);
        if (v < 0 || v >= n_vertices()) {
          std::ostringstream os;
          os << "vertex index out of range: cell " << c << " references vertex " << v
             << " of " << n_vertices();
          throw std::runtime_error(os.str());
        }
      }
      if (!(cell_volume(c) > 0.0)) {
        std::ostringstream os;
        os << "cell " << c << " has non-positive volume " << cell_volume(c);
        throw std::runtime_error(os.str());
      }
    }
  }

  void build_facets() {
    std::map<std::vector<int>, int> index;
    cell_facets_.resize(n_cells(), dim_ + 1);
    for (int c = 0; c < n_cells(); ++c) {
      for (int lf = 0; lf <= dim_; ++lf) {
        std::vector<int> key = local_facet_vertices(c, lf);
        std::sort(key.begin(), key.end());
        FacetSide side{c, lf, outward_normal(c, lf)};
        auto it = index.find(key);
        if (it == index.end()) {
          Facet f;
          f.vertices = key;
          f.measure = dim_ == 1 ? 1.0 : (vertex(key[1]) - vertex(key[0])).norm();
          f.plus = side;
          index.emplace(key, static_cast<int>(facets_.size()));
          cell_facets_(c, lf) = static_cast<int>(facets_.size());
          facets_.push_back(std::move(f));
        } else {
          Facet& f = facets_[it->second];
          MSHDG_REQUIRE(!f.minus.has_value(), "facet shared by more than two cells");
          f.minus = side;
          cell_facets_(c, lf) = it->second;
        }
      }
    }
    for (int f = 0; f < n_facets(); ++f)
      if (facets_[f].boundary()) boundary_facet_ids_.push_back(f);
  }

  Vec outward_normal(int c, int lf) const {
    if (dim_ == 1) {
      Vec n(1);
      const double xf = vertices_(cells_(c, lf == 0 ? 1 : 0), 0);
      const double xo = vertices_(cells_(c, lf), 0);
      n(0) = xf > xo ? 1.0 : -1.0;
      return n;
    }
    auto vs = local_facet_vertices(c, lf);
    Vec a = vertex(vs[0]), b = vertex(vs[1]), opp = vertex(cells_(c, lf));
    Vec t = b - a;
    Vec n(2);
    n << t(1), -t(0);
    n.normalize();
    if (n.dot(opp - a) > 0.0) n = -n;
    return n;
  }

  int dim_;
  Mat vertices_;
  Eigen::MatrixXi cells_;
  Eigen::MatrixXi cell_facets_;
  std::vector<Facet> facets_;
  std::vector<int> boundary_facet_ids_;
};

inline Mesh build_interval_mesh(double a, double b, int n_cells) {
  MSHDG_REQUIRE(std::isfinite(a) && std::isfinite(b), "interval bounds must be finite");
  MSHDG_REQUIRE(a < b, "interval requires a < b");
  MSHDG_REQUIRE(n_cells >= 1, "at least one cell required");
  Mat verts(n_cells + 1, 1);
  for (int i = 0; i <= n_cells; ++i) verts(i, 0) = a + (b - a) * i / n_cells;
  Eigen::MatrixXi cells(n_cells, 2);
  for (int c = 0; c < n_cells; ++c) cells.row(c) << c, c + 1;
  return Mesh(1, verts, cells);
}

/// Triangulated rectangle, 2 nx ny cells. Interior vertices are displaced by
/// an LCG-driven offset bounded by perturb * min(hx, hy); boundary vertices
/// stay on the rectangle so the polygonal domain is preserved.
inline Mesh build_rect_tri_mesh(std::pair<double, double> x_extent, std::pair<double, double> y_extent,
                                int nx, int ny, double perturb, std::uint64_t seed) {
  MSHDG_REQUIRE(x_extent.second > x_extent.first && y_extent.second > y_extent.first,
                "extents must be positive");
  MSHDG_REQUIRE(nx >= 1 && ny >= 1, "grid sizes must be >= 1");
  MSHDG_REQUIRE(perturb >= 0.0 && perturb < 0.3, "perturbation must lie in [0, 0.3)");
  const double hx = (x_extent.second - x_extent.first) / nx;
  const double hy = (y_extent.second - y_extent.first) / ny;
  const double h = std::min(hx, hy);
  Lcg rng(seed);
  Mat verts((nx + 1) * (ny + 1), 2);
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix) {
      const int v = iy * (nx + 1) + ix;
      verts(v, 0) = x_extent.first + ix * hx;
      verts(v, 1) = y_extent.first + iy * hy;
      if (perturb > 0.0 && ix > 0 && ix < nx && iy > 0 && iy < ny) {
        verts(v, 0) += perturb * h * rng.next_symmetric() * M_SQRT1_2;
        verts(v, 1) += perturb * h * rng.next_symmetric() * M_SQRT1_2;
      }
    }
  Eigen::MatrixXi cells(2 * nx * ny, 3);
  int c = 0;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const int a = iy * (nx + 1) + ix;
      const int b = a + 1;
      const int d = a + (nx + 1);
      const int e = d + 1;
      cells.row(c++) << a, b, e;
      cells.row(c++) << a, e, d;
    }
  try {
    return Mesh(2, verts, cells);
  } catch (const std::runtime_error& err) {
    throw std::runtime_error(std::string("perturbed mesh rejected: ") + err.what());
  }
}

/// Two equilateral triangles with edge length sqrt(2) sharing one edge.
/// Vertex order: left, bottom, top, right; the internal facet is {1, 2}.
inline Mesh build_two_equilateral_mesh() {
  Mat verts(4, 2);
  const double w = std::sqrt(1.5), hh = std::sqrt(2.0) / 2.0;
  verts << -w, 0.0,
           0.0, -hh,
           0.0, hh,
           w, 0.0;
  Eigen::MatrixXi cells(2, 3);
  cells << 0, 1, 2,
           1, 3, 2;
  return Mesh(2, verts, cells);
}

/// Single equilateral triangle with edge length sqrt(2), vertex order 0,1,2.
inline Mesh build_equilateral_triangle_mesh() {
  Mat verts(3, 2);
  const double w = std::sqrt(1.5), hh = std::sqrt(2.0) / 2.0;
  verts << -w, 0.0,
           0.0, -hh,
           0.0, hh;
  Eigen::MatrixXi cells(1, 3);
  cells << 0, 1, 2;
  return Mesh(2, verts, cells);
}

/// Mesh document: {"dim": m, "vertices": [[...]], "cells": [[...]]},
/// floats at 17 significant digits. Facets are derived, never stored.
inline std::string save_mesh(const Mesh& mesh) {
  std::ostringstream os;
  os << "{\"dim\": " << mesh.dim() << ",\n\"vertices\": [";
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    os << (v ? ",\n  " : "\n  ") << "[";
    for (int c = 0; c < mesh.dim(); ++c) os << (c ? ", " : "") << format_double(mesh.vertices()(v, c));
    os << "]";
  }
  os << "\n],\n\"cells\": [";
  for (int c = 0; c < mesh.n_cells(); ++c) {
    os << (c ? ",\n  " : "\n  ") << "[";
    for (int k = 0; k <= mesh.dim(); ++k) os << (k ? ", " : "") << mesh.cells()(c, k);
    os << "]";
  }
  os << "\n]}\n";
  return os.str();
}

inline Mesh load_mesh(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed mesh document: ") + e.what());
  }
  MSHDG_REQUIRE(doc.contains("dim") && doc.contains("vertices") && doc.contains("cells"),
                "malformed mesh document: missing field");
  const int dim = doc["dim"].get<int>();
  MSHDG_REQUIRE(dim == 1 || dim == 2, "mesh dimension must be 1 or 2");
  const auto& jv = doc["vertices"];
  const auto& jc = doc["cells"];
  Mat verts(jv.size(), dim);
  for (std::size_t i = 0; i < jv.size(); ++i) {
    MSHDG_REQUIRE(jv[i].size() == static_cast<std::size_t>(dim), "vertex coordinate count mismatch");
    for (int c = 0; c < dim; ++c) verts(i, c) = jv[i][c].get<double>();
  }
  Eigen::MatrixXi cells(jc.size(), dim + 1);
  for (std::size_t i = 0; i < jc.size(); ++i) {
    MSHDG_REQUIRE(jc[i].size() == static_cast<std::size_t>(dim + 1), "cell vertex count mismatch");
    for (int k = 0; k <= dim; ++k) cells(i, k) = jc[i][k].get<int>();
  }
  return Mesh(dim, verts, cells);
}

inline Mesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  MSHDG_REQUIRE(in.good(), "cannot open mesh file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return load_mesh(os.str());
}

inline void save_mesh_file(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  MSHDG_REQUIRE(out.good(), "cannot open output file: " + path);
  out << save_mesh(mesh);
}

}  // namespace mshdg
