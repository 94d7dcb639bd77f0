#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "uwvf/mesh.hpp"

namespace uwvf
{

namespace
{

struct Line
{
  int number;
  std::vector<std::string> tokens;
};

std::vector<Line> tokenize(const std::string &text)
{
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw))
  {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    std::istringstream words(raw);
    Line line{number, {}};
    for (std::string w; words >> w;)
      line.tokens.push_back(w);
    if (!line.tokens.empty())
      lines.push_back(std::move(line));
  }
  return lines;
}

template <typename T>
T parse_number(const Line &line, std::size_t i)
{
  const std::string &s = line.tokens[i];
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line.number, fmt::format("cannot parse '{}' as a number", s));
  return value;
}

void expect_tokens(const Line &line, std::size_t n, const char *what)
{
  if (line.tokens.size() != n)
    throw ParseError(line.number, fmt::format("expected {} fields for {}, found {}", n, what, line.tokens.size()));
}

} // namespace

Mesh load_mesh(const std::string &text)
{
  const std::vector<Line> lines = tokenize(text);
  if (lines.empty())
    throw ParseError(1, "empty mesh file");

  const Line &header = lines[0];
  if (header.tokens.size() != 2 || header.tokens[0] != "tetmesh")
    throw ParseError(header.number, "expected header 'tetmesh 1'");
  if (parse_number<int>(header, 1) != 1)
    throw ParseError(header.number, "unsupported mesh format version");

  if (lines.size() < 2)
    throw ParseError(header.number, "missing counts line");
  const Line &counts = lines[1];
  expect_tokens(counts, 3, "counts");
  const long nv = parse_number<long>(counts, 0);
  const long nt = parse_number<long>(counts, 1);
  const long nb = parse_number<long>(counts, 2);
  if (nv < 0 || nt < 0 || nb < 0)
    throw ParseError(counts.number, "negative count");

  const std::size_t expected = 2 + static_cast<std::size_t>(nv + nt + nb);
  if (lines.size() != expected)
  {
    const int at = lines.size() < expected ? lines.back().number : lines[expected].number;
    throw ParseError(at, fmt::format("expected {} data lines, found {}", nv + nt + nb, lines.size() - 2));
  }

  std::size_t cursor = 2;
  std::vector<Vec3> vertices(nv);
  for (long i = 0; i < nv; ++i)
  {
    const Line &l = lines[cursor++];
    expect_tokens(l, 3, "vertex");
    vertices[i] = Vec3(parse_number<double>(l, 0), parse_number<double>(l, 1), parse_number<double>(l, 2));
  }

  std::vector<Tet> tets(nt);
  std::vector<int> regions(nt);
  for (long k = 0; k < nt; ++k)
  {
    const Line &l = lines[cursor++];
    expect_tokens(l, 5, "tetrahedron");
    for (int j = 0; j < 4; ++j)
    {
      tets[k][j] = parse_number<int>(l, j);
      if (tets[k][j] < 0 || tets[k][j] >= nv)
        throw ParseError(l.number, fmt::format("vertex index {} out of range", tets[k][j]));
    }
    regions[k] = parse_number<int>(l, 4);
  }

  std::vector<TaggedFace> boundary(nb);
  for (long b = 0; b < nb; ++b)
  {
    const Line &l = lines[cursor++];
    expect_tokens(l, 4, "boundary face");
    for (int j = 0; j < 3; ++j)
    {
      boundary[b].vertices[j] = parse_number<int>(l, j);
      if (boundary[b].vertices[j] < 0 || boundary[b].vertices[j] >= nv)
        throw ParseError(l.number, fmt::format("vertex index {} out of range", boundary[b].vertices[j]));
    }
    boundary[b].tag = parse_number<int>(l, 3);
  }

  return Mesh(std::move(vertices), std::move(tets), std::move(regions), boundary);
}

Mesh load_mesh_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw MeshError("cannot open mesh file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_mesh(ss.str());
}

std::string write_mesh(const Mesh &mesh)
{
  std::string out = "tetmesh 1\n";
  out += fmt::format("{} {} {}\n", mesh.n_vertices(), mesh.n_elements(), mesh.n_boundary_faces());
  for (const Vec3 &v : mesh.vertices())
    out += fmt::format("{:.17g} {:.17g} {:.17g}\n", v.x(), v.y(), v.z());
  for (int k = 0; k < mesh.n_elements(); ++k)
  {
    const Tet &t = mesh.tet(k);
    out += fmt::format("{} {} {} {} {}\n", t[0], t[1], t[2], t[3], mesh.region(k));
  }
  for (const Face &f : mesh.faces())
    if (f.is_boundary())
      out += fmt::format("{} {} {} {}\n", f.vertices[0], f.vertices[1], f.vertices[2], f.boundary_tag);
  return out;
}

Mesh generate_cube_mesh(int n)
{
  if (n < 1)
    throw MeshError("cube subdivision count must be at least 1");

  const int m = n + 1;
  auto id = [m](int i, int j, int k) { return i + m * (j + m * k); };

  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(m) * m * m);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        vertices.emplace_back(double(i) / n, double(j) / n, double(k) / n);

  static constexpr std::array<std::array<int, 3>, 6> paths = {
    {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  std::vector<Tet> tets;
  tets.reserve(6 * static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto &path : paths)
        {
          std::array<int, 3> c{i, j, k};
          Tet t{};
          t[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s)
          {
            ++c[path[s]];
            t[s + 1] = id(c[0], c[1], c[2]);
          }
          tets.push_back(t);
        }

  // Faces touching a single element lie on the cube surface.
  std::map<Triangle, int> count;
  for (const Tet &t : tets)
    for (int i = 0; i < 4; ++i)
    {
      Triangle f{};
      int c = 0;
      for (int j = 0; j < 4; ++j)
        if (j != i)
          f[c++] = t[j];
      std::sort(f.begin(), f.end());
      ++count[f];
    }

  std::vector<TaggedFace> boundary;
  for (const auto &[f, c] : count)
  {
    if (c != 1)
      continue;
    int tag = 0;
    for (int axis = 0; axis < 3 && tag == 0; ++axis)
      for (int side = 0; side < 2; ++side)
      {
        const double plane = side;
        if (std::all_of(f.begin(), f.end(), [&](int v) { return vertices[v][axis] == plane; }))
        {
          tag = 2 * axis + side + 1;
          break;
        }
      }
    boundary.push_back(TaggedFace{f, tag});
  }

  std::vector<int> regions(tets.size(), 0);
  return Mesh(std::move(vertices), std::move(tets), std::move(regions), boundary);
}

} // namespace uwvf
