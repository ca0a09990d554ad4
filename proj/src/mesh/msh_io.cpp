#include "mesh/mesh.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace morphopt::mesh {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line (trailing CR stripped); false at end of stream.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }
  std::string expect(const char* what) {
    std::string line;
    if (!next(line)) throw ParseError(std::string("unexpected end of file, expected ") + what, number_);
    return line;
  }
  int number() const { return number_; }

 private:
  std::istream& in_;
  int number_ = 0;
};

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

void expect_header(LineReader& r, const std::string& header) {
  const std::string line = trimmed(r.expect(header.c_str()));
  if (line != header) throw ParseError("malformed section header: expected " + header + ", got " + line, r.number());
}

long read_count(LineReader& r, const char* what) {
  std::istringstream ss(r.expect(what));
  long n = -1;
  if (!(ss >> n) || n < 0) throw ParseError(std::string("malformed ") + what, r.number());
  return n;
}

}  // namespace

TriMesh parse_msh(std::istream& in, const TagDictionary& tags) {
  LineReader r(in);
  std::unordered_map<long, int> node_index;
  std::vector<Point2> nodes;
  std::vector<std::array<int, 3>> cells;
  std::vector<BoundaryEdge> boundary;
  std::map<int, std::string> physical_names;
  bool have_format = false, have_nodes = false, have_elements = false;

  // Lines/elements are resolved after all sections are read so $PhysicalNames
  // may appear anywhere.
  struct RawLine {
    long a, b;
    int physical;
    int line;
  };
  std::vector<RawLine> raw_lines;
  struct RawTri {
    long v[3];
    int line;
  };
  std::vector<RawTri> raw_tris;

  std::string line;
  while (r.next(line)) {
    const std::string header = trimmed(line);
    if (header == "$MeshFormat") {
      std::istringstream ss(r.expect("format line"));
      double version = 0.0;
      int file_type = -1;
      if (!(ss >> version >> file_type)) throw ParseError("malformed $MeshFormat", r.number());
      if (version < 2.0 || version >= 3.0) throw ParseError("unsupported MSH version (need 2.x)", r.number());
      if (file_type != 0) throw ParseError("binary MSH files are not supported", r.number());
      expect_header(r, "$EndMeshFormat");
      have_format = true;
    } else if (header == "$PhysicalNames") {
      const long n = read_count(r, "physical name count");
      for (long i = 0; i < n; ++i) {
        std::istringstream ss(r.expect("physical name"));
        int dim = 0, id = 0;
        std::string name;
        if (!(ss >> dim >> id)) throw ParseError("malformed physical name", r.number());
        std::getline(ss, name);
        name = trimmed(name);
        if (name.size() >= 2 && name.front() == '"' && name.back() == '"') name = name.substr(1, name.size() - 2);
        physical_names[id] = name;
      }
      expect_header(r, "$EndPhysicalNames");
    } else if (header == "$Nodes") {
      const long n = read_count(r, "node count");
      nodes.reserve(n);
      for (long i = 0; i < n; ++i) {
        std::istringstream ss(r.expect("node"));
        long id = 0;
        double x = 0, y = 0, z = 0;
        if (!(ss >> id >> x >> y >> z)) throw ParseError("malformed node line", r.number());
        if (node_index.count(id)) throw ParseError("duplicate node id " + std::to_string(id), r.number());
        node_index[id] = static_cast<int>(nodes.size());
        nodes.emplace_back(x, y);
      }
      expect_header(r, "$EndNodes");
      have_nodes = true;
    } else if (header == "$Elements") {
      const long n = read_count(r, "element count");
      for (long i = 0; i < n; ++i) {
        std::istringstream ss(r.expect("element"));
        long id = 0;
        int type = 0, ntags = 0;
        if (!(ss >> id >> type >> ntags) || ntags < 0) throw ParseError("malformed element line", r.number());
        std::vector<int> etags(ntags);
        for (auto& t : etags) {
          if (!(ss >> t)) throw ParseError("malformed element tags", r.number());
        }
        if (type == 1) {
          RawLine l{};
          if (!(ss >> l.a >> l.b)) throw ParseError("malformed line element", r.number());
          l.physical = ntags > 0 ? etags[0] : 0;
          l.line = r.number();
          raw_lines.push_back(l);
        } else if (type == 2) {
          RawTri t{};
          if (!(ss >> t.v[0] >> t.v[1] >> t.v[2])) throw ParseError("malformed triangle element", r.number());
          t.line = r.number();
          raw_tris.push_back(t);
        } else {
          throw ParseError("unsupported element type " + std::to_string(type), r.number());
        }
      }
      expect_header(r, "$EndElements");
      have_elements = true;
    } else if (!header.empty() && header[0] == '$' && header.rfind("$End", 0) != 0) {
      // Unknown section: skip to its end marker.
      const std::string end = "$End" + header.substr(1);
      std::string skip;
      while (true) {
        if (!r.next(skip)) throw ParseError("unterminated section " + header, r.number());
        if (trimmed(skip) == end) break;
      }
    } else {
      throw ParseError("malformed section header: " + header, r.number());
    }
  }
  if (!have_format) throw ParseError("missing $MeshFormat section", r.number());
  if (!have_nodes) throw ParseError("missing $Nodes section", r.number());
  if (!have_elements) throw ParseError("missing $Elements section", r.number());

  auto resolve = [&](long id, int line_no) {
    auto it = node_index.find(id);
    if (it == node_index.end()) throw ParseError("dangling node reference " + std::to_string(id), line_no);
    return it->second;
  };
  for (const auto& t : raw_tris) {
    cells.push_back({resolve(t.v[0], t.line), resolve(t.v[1], t.line), resolve(t.v[2], t.line)});
  }
  for (const auto& l : raw_lines) {
    std::string tag;
    if (auto it = tags.find(l.physical); it != tags.end()) {
      tag = it->second;
    } else if (auto jt = physical_names.find(l.physical); jt != physical_names.end()) {
      tag = jt->second;
    } else {
      throw ParseError("unknown physical tag " + std::to_string(l.physical), l.line);
    }
    boundary.push_back({{resolve(l.a, l.line), resolve(l.b, l.line)}, tag});
  }
  try {
    return TriMesh(std::move(nodes), std::move(cells), std::move(boundary));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid mesh: ") + e.what(), r.number());
  }
}

TriMesh parse_msh_file(const std::string& path, const TagDictionary& tags) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open mesh file " + path);
  return parse_msh(in, tags);
}

TagDictionary write_msh(std::ostream& out, const TriMesh& mesh) {
  TagDictionary ids;
  std::map<std::string, int> by_name;
  int next = 1;
  for (const auto& t : mesh.tags()) {
    ids[next] = t;
    by_name[t] = next++;
  }
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out << "$PhysicalNames\n" << ids.size() << "\n";
  for (const auto& [id, name] : ids) out << "1 " << id << " \"" << name << "\"\n";
  out << "$EndPhysicalNames\n";
  out << "$Nodes\n" << mesh.num_nodes() << "\n";
  out << std::setprecision(17);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    out << i + 1 << ' ' << mesh.node(i).x() << ' ' << mesh.node(i).y() << " 0\n";
  }
  out << "$EndNodes\n";
  const auto& be = mesh.boundary_edges();
  out << "$Elements\n" << be.size() + mesh.num_cells() << "\n";
  long id = 1;
  for (const auto& e : be) {
    const int phys = by_name.at(e.tag);
    out << id++ << " 1 2 " << phys << ' ' << phys << ' ' << e.v[0] + 1 << ' ' << e.v[1] + 1 << "\n";
  }
  for (const auto& t : mesh.cells()) {
    out << id++ << " 2 2 0 0 " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << "\n";
  }
  out << "$EndElements\n";
  return ids;
}

void write_vtk(std::ostream& out, const TriMesh& mesh, const std::vector<Point2>& points,
               const std::vector<PointField>& fields, const std::string& title) {
  const auto& pts = points.empty() ? mesh.nodes() : points;
  if (static_cast<int>(pts.size()) != mesh.num_nodes()) throw InvalidArgument("write_vtk: point count mismatch");
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(17);
  out << "POINTS " << pts.size() << " double\n";
  for (const auto& p : pts) out << p.x() << ' ' << p.y() << " 0\n";
  out << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << "\n";
  for (const auto& t : mesh.cells()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
  out << "CELL_TYPES " << mesh.num_cells() << "\n";
  for (int c = 0; c < mesh.num_cells(); ++c) out << "5\n";
  if (fields.empty()) return;
  out << "POINT_DATA " << pts.size() << "\n";
  for (const auto& f : fields) {
    if (f.values.size() != static_cast<std::size_t>(f.components) * pts.size()) {
      throw InvalidArgument("write_vtk: field " + f.name + " has wrong length");
    }
    if (f.components == 1) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) out << v << "\n";
    } else if (f.components == 2) {
      out << "VECTORS " << f.name << " double\n";
      for (std::size_t i = 0; i < pts.size(); ++i) out << f.values[2 * i] << ' ' << f.values[2 * i + 1] << " 0\n";
    } else {
      throw InvalidArgument("write_vtk: unsupported component count");
    }
  }
}

}  // namespace morphopt::mesh
