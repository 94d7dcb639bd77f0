#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "uwvf/types.hpp"

namespace uwvf
{

using Tet = std::array<int, 4>;
using Triangle = std::array<int, 3>;

/// One side of a face: the element, the local face index (opposite vertex) and
/// +1 if the canonical face normal points out of that element, -1 otherwise.
struct FaceIncidence
{
  int element = -1;
  int local_face = -1;
  int orientation = 0;
};

struct Face
{
  Triangle vertices{}; // ascending
  std::array<FaceIncidence, 2> incidence{};
  int incident_count = 0;
  int boundary_tag = 0;

  bool is_boundary() const { return incident_count == 1; }
};

struct TaggedFace
{
  Triangle vertices{};
  int tag = 0;
};

struct ElementGeometry
{
  double volume = 0.0;
  double diameter = 0.0; // longest edge
  Vec3 centroid = Vec3::Zero();
  std::array<double, 4> face_area{};
  std::array<double, 4> face_diameter{};
  std::array<Vec3, 4> normal{}; // outward, unit
};

/// Immutable tetrahedral mesh with derived face adjacency.
///
/// Local face i of an element is the triangle opposite its local vertex i.
/// Faces are keyed by their sorted vertex triple so adjacency does not depend
/// on element order. Construction validates the topology and throws
/// TopologyError on non-manifold or degenerate input.
class Mesh
{
public:
  Mesh() = default;
  Mesh(std::vector<Vec3> vertices, std::vector<Tet> tets, std::vector<int> regions,
       const std::vector<TaggedFace> &tagged_boundary);

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_elements() const { return static_cast<int>(tets_.size()); }
  int n_faces() const { return static_cast<int>(faces_.size()); }
  int n_boundary_faces() const { return n_boundary_faces_; }
  int n_interior_faces() const { return n_faces() - n_boundary_faces_; }

  const std::vector<Vec3> &vertices() const { return vertices_; }
  const std::vector<Tet> &tets() const { return tets_; }
  const std::vector<int> &regions() const { return regions_; }
  const std::vector<Face> &faces() const { return faces_; }

  const Vec3 &vertex(int i) const { return vertices_[i]; }
  const Tet &tet(int k) const { return tets_[k]; }
  int region(int k) const { return regions_[k]; }
  const Face &face(int f) const { return faces_[f]; }

  /// Global face index of local face i of element k.
  int element_face(int k, int i) const { return element_faces_[k][i]; }

  /// The element across local face i of element k, or -1 on the boundary.
  int neighbor(int k, int i) const;

  std::vector<int> boundary_tags() const;
  std::vector<int> region_ids() const;

  /// Corner coordinates of face f in canonical (ascending index) order.
  std::array<Vec3, 3> face_corners(int f) const;

  const ElementGeometry &geometry(int k) const { return geometry_[k]; }

private:
  std::vector<Vec3> vertices_;
  std::vector<Tet> tets_;
  std::vector<int> regions_;
  std::vector<Face> faces_;
  std::vector<std::array<int, 4>> element_faces_;
  std::vector<ElementGeometry> geometry_;
  int n_boundary_faces_ = 0;
};

/// Relative permittivity per region.
class MaterialTable
{
public:
  MaterialTable() = default;
  explicit MaterialTable(Complex uniform) : default_(uniform) { check(uniform); }

  void set(int region, Complex eps_r);
  Complex eps(int region) const;
  bool has_complex() const;
  /// True when every listed region has the same permittivity.
  bool uniform_on(const std::vector<int> &regions) const;
  const std::map<int, Complex> &entries() const { return table_; }

private:
  static void check(Complex eps_r);

  std::map<int, Complex> table_;
  Complex default_{1.0, 0.0};
};

ElementGeometry element_geometry(const Mesh &mesh, int k);

Mesh load_mesh(const std::string &text);
Mesh load_mesh_file(const std::string &path);
std::string write_mesh(const Mesh &mesh);

/// Unit cube with n^3 subcubes, each split into 6 tetrahedra along its main
/// diagonal. Boundary tags: 1/2 for x=0/1, 3/4 for y=0/1, 5/6 for z=0/1.
/// All elements are in region 0.
Mesh generate_cube_mesh(int n);

/// Smallest inradius-to-diameter ratio; reported only, never enforced.
double min_shape_quality(const Mesh &mesh);

} // namespace uwvf
