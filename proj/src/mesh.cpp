#include "uwvf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace uwvf
{

namespace
{

Triangle sorted(Triangle t)
{
  std::sort(t.begin(), t.end());
  return t;
}

Triangle local_face_vertices(const Tet &tet, int i)
{
  Triangle t{};
  int n = 0;
  for (int j = 0; j < 4; ++j)
    if (j != i)
      t[n++] = tet[j];
  return t;
}

double signed_volume(const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d)
{
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

std::string face_name(const Triangle &t) { return fmt::format("({}, {}, {})", t[0], t[1], t[2]); }

} // namespace

ElementGeometry element_geometry(const Mesh &mesh, int k)
{
  const Tet &tet = mesh.tet(k);
  std::array<Vec3, 4> x;
  for (int j = 0; j < 4; ++j)
    x[j] = mesh.vertex(tet[j]);

  ElementGeometry g;
  g.volume = signed_volume(x[0], x[1], x[2], x[3]);
  g.centroid = (x[0] + x[1] + x[2] + x[3]) / 4.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      g.diameter = std::max(g.diameter, (x[a] - x[b]).norm());

  for (int i = 0; i < 4; ++i)
  {
    std::array<Vec3, 3> c;
    int n = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i)
        c[n++] = x[j];
    Vec3 normal = (c[1] - c[0]).cross(c[2] - c[0]);
    g.face_area[i] = 0.5 * normal.norm();
    if (normal.dot(x[i] - c[0]) > 0.0)
      normal = -normal;
    g.normal[i] = normal.normalized();
    g.face_diameter[i] = std::max({(c[0] - c[1]).norm(), (c[1] - c[2]).norm(), (c[0] - c[2]).norm()});
  }
  return g;
}

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Tet> tets, std::vector<int> regions,
           const std::vector<TaggedFace> &tagged_boundary)
  : vertices_(std::move(vertices)), tets_(std::move(tets)), regions_(std::move(regions))
{
  if (regions_.size() != tets_.size())
    throw TopologyError("region list length does not match element count");
  if (tets_.empty())
    throw TopologyError("mesh has no elements");

  const int nv = n_vertices();
  for (std::size_t k = 0; k < tets_.size(); ++k)
    for (int v : tets_[k])
      if (v < 0 || v >= nv)
        throw TopologyError(fmt::format("element {} references vertex {} out of range", k, v));

  // Coincident vertices would make two geometrically shared faces look like
  // distinct boundary faces.
  {
    Vec3 lo = vertices_.front(), hi = vertices_.front();
    for (const Vec3 &v : vertices_)
    {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    const double tol = 1e-12 * std::max(1.0, (hi - lo).norm());
    std::vector<int> order(nv);
    for (int i = 0; i < nv; ++i)
      order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const Vec3 &u = vertices_[a], &w = vertices_[b];
      return std::lexicographical_compare(u.data(), u.data() + 3, w.data(), w.data() + 3);
    });
    for (int i = 1; i < nv; ++i)
      if ((vertices_[order[i]] - vertices_[order[i - 1]]).norm() <= tol)
        throw TopologyError(fmt::format("vertices {} and {} coincide; faces through them are inconsistent",
                                        std::min(order[i], order[i - 1]), std::max(order[i], order[i - 1])));
  }

  for (std::size_t k = 0; k < tets_.size(); ++k)
  {
    Tet &t = tets_[k];
    double vol = signed_volume(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]], vertices_[t[3]]);
    if (vol < 0.0)
    {
      std::swap(t[2], t[3]);
      vol = -vol;
    }
    double h = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        h = std::max(h, (vertices_[t[a]] - vertices_[t[b]]).norm());
    if (!(vol > 1e-12 * h * h * h))
      throw TopologyError(fmt::format("element {} is degenerate (volume {:.3e})", k, vol));
  }

  geometry_.resize(tets_.size());
  for (int k = 0; k < n_elements(); ++k)
    geometry_[k] = element_geometry(*this, k);

  std::map<Triangle, int> index;
  element_faces_.resize(tets_.size());
  for (int k = 0; k < n_elements(); ++k)
  {
    for (int i = 0; i < 4; ++i)
    {
      const Triangle key = sorted(local_face_vertices(tets_[k], i));
      auto [it, inserted] = index.try_emplace(key, n_faces());
      if (inserted)
      {
        Face f;
        f.vertices = key;
        faces_.push_back(f);
      }
      Face &f = faces_[it->second];
      if (f.incident_count == 2)
        throw TopologyError(fmt::format("face {} has more than two incident elements", face_name(key)));

      const Vec3 &a = vertices_[key[0]], &b = vertices_[key[1]], &c = vertices_[key[2]];
      const Vec3 canonical = (b - a).cross(c - a);
      const int orientation = canonical.dot(geometry_[k].normal[i]) > 0.0 ? 1 : -1;
      f.incidence[f.incident_count++] = FaceIncidence{k, i, orientation};
      element_faces_[k][i] = it->second;
    }
  }

  for (const Face &f : faces_)
  {
    if (f.incident_count == 1)
      ++n_boundary_faces_;
    else if (f.incidence[0].orientation == f.incidence[1].orientation)
      throw TopologyError(fmt::format("elements {} and {} overlap across face {}", f.incidence[0].element,
                                      f.incidence[1].element, face_name(f.vertices)));
  }

  std::vector<bool> tagged(faces_.size(), false);
  for (const TaggedFace &tf : tagged_boundary)
  {
    const Triangle key = sorted(tf.vertices);
    auto it = index.find(key);
    if (it == index.end())
      throw TopologyError(fmt::format("tagged face {} is not a face of the mesh", face_name(key)));
    Face &f = faces_[it->second];
    if (!f.is_boundary())
      throw TopologyError(fmt::format("tagged face {} is an interior face", face_name(key)));
    if (tagged[it->second])
      throw TopologyError(fmt::format("face {} is tagged twice", face_name(key)));
    tagged[it->second] = true;
    f.boundary_tag = tf.tag;
  }

  std::map<std::pair<int, int>, int> edge_count;
  for (const Face &f : faces_)
  {
    if (!f.is_boundary())
      continue;
    const Triangle &v = f.vertices;
    ++edge_count[{v[0], v[1]}];
    ++edge_count[{v[1], v[2]}];
    ++edge_count[{v[0], v[2]}];
  }
  for (const auto &[edge, count] : edge_count)
    if (count != 2)
      throw TopologyError(fmt::format("boundary edge ({}, {}) is shared by {} boundary faces", edge.first,
                                      edge.second, count));
}

int Mesh::neighbor(int k, int i) const
{
  const Face &f = faces_[element_faces_[k][i]];
  if (f.is_boundary())
    return -1;
  return f.incidence[0].element == k ? f.incidence[1].element : f.incidence[0].element;
}

std::vector<int> Mesh::boundary_tags() const
{
  std::vector<int> tags;
  for (const Face &f : faces_)
    if (f.is_boundary())
      tags.push_back(f.boundary_tag);
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  return tags;
}

std::vector<int> Mesh::region_ids() const
{
  std::vector<int> ids = regions_;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::array<Vec3, 3> Mesh::face_corners(int f) const
{
  const Triangle &v = faces_[f].vertices;
  return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]};
}

double min_shape_quality(const Mesh &mesh)
{
  double q = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh.n_elements(); ++k)
  {
    const ElementGeometry &g = mesh.geometry(k);
    const double area = g.face_area[0] + g.face_area[1] + g.face_area[2] + g.face_area[3];
    q = std::min(q, 3.0 * g.volume / area / g.diameter);
  }
  return q;
}

void MaterialTable::check(Complex eps_r)
{
  if (eps_r == Complex(0.0, 0.0))
    throw ConfigError("relative permittivity must be nonzero");
  if (eps_r.imag() < 0.0)
    throw ConfigError("relative permittivity must have nonnegative imaginary part");
}

void MaterialTable::set(int region, Complex eps_r)
{
  check(eps_r);
  table_[region] = eps_r;
}

Complex MaterialTable::eps(int region) const
{
  auto it = table_.find(region);
  return it == table_.end() ? default_ : it->second;
}

bool MaterialTable::has_complex() const
{
  if (default_.imag() != 0.0)
    return true;
  return std::any_of(table_.begin(), table_.end(), [](const auto &e) { return e.second.imag() != 0.0; });
}

bool MaterialTable::uniform_on(const std::vector<int> &regions) const
{
  if (regions.empty())
    return true;
  const Complex first = eps(regions.front());
  return std::all_of(regions.begin(), regions.end(), [&](int r) { return eps(r) == first; });
}

} // namespace uwvf
