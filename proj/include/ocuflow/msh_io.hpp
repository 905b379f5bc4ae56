#pragma once

#include <fstream>
#include <sstream>

#include "ocuflow/mesh.hpp"
#include "ocuflow/sparse.hpp"  // format_double

namespace ocuflow {

namespace detail {

class MshParser {
 public:
  MshParser(std::istream& is, const std::string& name) : is_(is), name_(name) {}

  bool next_line(std::string& line) {
    while (std::getline(is_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void error(const std::string& msg) const {
    fail(name_ + ":" + std::to_string(lineno_) + ": " + msg);
  }

  std::string expect_line() {
    std::string line;
    if (!next_line(line)) error("unexpected end of file");
    return line;
  }

  int lineno() const { return lineno_; }

 private:
  std::istream& is_;
  std::string name_;
  int lineno_ = 0;
};

}  // namespace detail

/// Reads an ASCII MSH 4.1 file. Honors $MeshFormat, $PhysicalNames,
/// $Entities, $Nodes, $Elements; any other section is skipped and its name
/// appended to `warnings`. Physical-group names become label_names; element
/// order within the file is preserved.
inline Mesh load_msh_stream(std::istream& is, const std::string& name,
                            std::vector<std::string>* warnings = nullptr) {
  detail::MshParser p(is, name);
  Mesh mesh;

  std::map<std::pair<int, int>, std::string> phys_names;       // (dim, tag) -> name
  std::map<std::pair<int, int>, std::vector<int>> entity_phys; // (dim, tag) -> phys tags
  std::map<long long, int> node_index;                          // node tag -> vertex id
  struct RawElem {
    int dim, phys, type;
    std::array<long long, 4> nodes;
  };
  std::vector<RawElem> elems;
  bool saw_format = false;

  std::string line;
  while (p.next_line(line)) {
    if (line[0] != '$') p.error("expected section start, got '" + line + "'");
    const std::string section = line.substr(1);
    if (section == "MeshFormat") {
      std::istringstream ls(p.expect_line());
      double version = 0.0;
      int file_type = -1, data_size = 0;
      if (!(ls >> version >> file_type >> data_size)) p.error("malformed $MeshFormat");
      if (std::abs(version - 4.1) > 1e-9)
        p.error("unsupported MSH version " + std::to_string(version) + " (only 4.1 ASCII)");
      if (file_type != 0) p.error("binary MSH rejected: only ASCII (file-type 0) is supported");
      if (p.expect_line() != "$EndMeshFormat") p.error("missing $EndMeshFormat");
      saw_format = true;
    } else if (section == "PhysicalNames") {
      int n = 0;
      {
        std::istringstream ls(p.expect_line());
        if (!(ls >> n)) p.error("malformed $PhysicalNames count");
      }
      for (int i = 0; i < n; ++i) {
        std::istringstream ls(p.expect_line());
        int dim, tag;
        std::string rest;
        if (!(ls >> dim >> tag)) p.error("malformed physical name entry");
        std::getline(ls, rest);
        const auto q0 = rest.find('"');
        const auto q1 = rest.rfind('"');
        if (q0 == std::string::npos || q1 <= q0) p.error("physical name must be quoted");
        phys_names[{dim, tag}] = rest.substr(q0 + 1, q1 - q0 - 1);
      }
      if (p.expect_line() != "$EndPhysicalNames") p.error("missing $EndPhysicalNames");
    } else if (section == "Entities") {
      std::size_t counts[4] = {0, 0, 0, 0};
      {
        std::istringstream ls(p.expect_line());
        if (!(ls >> counts[0] >> counts[1] >> counts[2] >> counts[3]))
          p.error("malformed $Entities header");
      }
      for (int dim = 0; dim <= 3; ++dim) {
        for (std::size_t i = 0; i < counts[dim]; ++i) {
          std::istringstream ls(p.expect_line());
          int tag;
          if (!(ls >> tag)) p.error("malformed entity record");
          double skip;
          const int ncoord = dim == 0 ? 3 : 6;
          for (int k = 0; k < ncoord; ++k)
            if (!(ls >> skip)) p.error("malformed entity bounds");
          std::size_t nphys;
          if (!(ls >> nphys)) p.error("malformed entity physical-tag count");
          auto& tags = entity_phys[{dim, tag}];
          for (std::size_t k = 0; k < nphys; ++k) {
            int pt;
            if (!(ls >> pt)) p.error("malformed entity physical tag");
            tags.push_back(pt);
          }
          // trailing bounding-entity list ignored
        }
      }
      if (p.expect_line() != "$EndEntities") p.error("missing $EndEntities");
    } else if (section == "Nodes") {
      std::size_t nblocks, nnodes;
      long long mintag, maxtag;
      {
        std::istringstream ls(p.expect_line());
        if (!(ls >> nblocks >> nnodes >> mintag >> maxtag)) p.error("malformed $Nodes header");
      }
      for (std::size_t b = 0; b < nblocks; ++b) {
        int edim, etag, parametric;
        std::size_t nb;
        {
          std::istringstream ls(p.expect_line());
          if (!(ls >> edim >> etag >> parametric >> nb)) p.error("malformed node block header");
        }
        std::vector<long long> tags(nb);
        for (std::size_t i = 0; i < nb; ++i) {
          std::istringstream ls(p.expect_line());
          if (!(ls >> tags[i])) p.error("malformed node tag");
        }
        for (std::size_t i = 0; i < nb; ++i) {
          std::istringstream ls(p.expect_line());
          Point x{0, 0, 0};
          if (!(ls >> x[0] >> x[1] >> x[2])) p.error("malformed node coordinates");
          node_index[tags[i]] = int(mesh.vertices.size());
          mesh.vertices.push_back(x);
        }
      }
      if (p.expect_line() != "$EndNodes") p.error("missing $EndNodes");
    } else if (section == "Elements") {
      std::size_t nblocks, nelems;
      long long mintag, maxtag;
      {
        std::istringstream ls(p.expect_line());
        if (!(ls >> nblocks >> nelems >> mintag >> maxtag)) p.error("malformed $Elements header");
      }
      for (std::size_t b = 0; b < nblocks; ++b) {
        int edim, etag, etype;
        std::size_t nb;
        {
          std::istringstream ls(p.expect_line());
          if (!(ls >> edim >> etag >> etype >> nb)) p.error("malformed element block header");
        }
        int nodes_per = 0;
        switch (etype) {
          case 1: nodes_per = 2; break;   // 2-node line
          case 2: nodes_per = 3; break;   // 3-node triangle
          case 4: nodes_per = 4; break;   // 4-node tetrahedron
          case 15: nodes_per = 1; break;  // point
          default:
            p.error("unsupported element type " + std::to_string(etype) +
                    " (only lines, triangles, tetrahedra)");
        }
        int phys = 0;
        const auto it = entity_phys.find({edim, etag});
        if (it != entity_phys.end() && !it->second.empty()) phys = it->second.front();
        for (std::size_t i = 0; i < nb; ++i) {
          std::istringstream ls(p.expect_line());
          long long tag;
          if (!(ls >> tag)) p.error("malformed element record");
          RawElem e;
          e.dim = edim;
          e.phys = phys;
          e.type = etype;
          e.nodes = {-1, -1, -1, -1};
          for (int k = 0; k < nodes_per; ++k)
            if (!(ls >> e.nodes[k])) p.error("malformed element connectivity");
          elems.push_back(e);
        }
      }
      if (p.expect_line() != "$EndElements") p.error("missing $EndElements");
    } else if (section.rfind("End", 0) == 0) {
      p.error("unmatched section terminator $" + section);
    } else {
      if (warnings)
        warnings->push_back("skipping unsupported MSH section $" + section);
      std::string l;
      const std::string end = "$End" + section;
      bool closed = false;
      while (p.next_line(l)) {
        if (l == end) {
          closed = true;
          break;
        }
      }
      if (!closed) p.error("section $" + section + " is not terminated");
    }
  }
  require(saw_format, name + ": missing $MeshFormat section");
  require(!mesh.vertices.empty(), name + ": no nodes");
  require(!elems.empty(), name + ": no elements");

  // Mesh dimension: 3 when tetrahedra are present.
  bool has_tet = false;
  for (const RawElem& e : elems) has_tet |= (e.type == 4);
  mesh.dim = has_tet ? 3 : 2;

  auto vertex_of = [&](long long tag) {
    const auto it = node_index.find(tag);
    require(it != node_index.end(),
            name + ": element references node tag " + std::to_string(tag) +
                " absent from $Nodes");
    return it->second;
  };

  // Physical names for both dims; unnamed physical tags get a generated name.
  auto label_for = [&](int dim, int phys) {
    const auto it = phys_names.find({dim, phys});
    const std::string nm =
        it != phys_names.end() ? it->second
                               : (phys == 0 ? "unlabeled" : "phys_" + std::to_string(phys));
    // One id namespace across dims: same name reuses the id; a tag collision
    // with a different name gets remapped to a fresh id.
    for (const auto& [id, n] : mesh.label_names)
      if (n == nm) return id;
    int id = phys;
    if (id == 0 || mesh.label_names.count(id)) {
      id = 1;
      while (mesh.label_names.count(id)) ++id;
    }
    mesh.label_names[id] = nm;
    return id;
  };

  std::vector<Facet> raw_facets;
  for (const RawElem& e : elems) {
    if (e.type == 4 || (e.type == 2 && mesh.dim == 2)) {
      std::array<int, 4> cv{-1, -1, -1, -1};
      for (int k = 0; k <= mesh.dim; ++k) cv[k] = vertex_of(e.nodes[k]);
      mesh.cells.push_back(cv);
      mesh.cell_subdomain.push_back(label_for(mesh.dim, e.phys));
    } else if ((e.type == 2 && mesh.dim == 3) || (e.type == 1 && mesh.dim == 2)) {
      Facet f;
      for (int k = 0; k < mesh.dim; ++k) f.v[k] = vertex_of(e.nodes[k]);
      f.label = label_for(mesh.dim - 1, e.phys);
      raw_facets.push_back(f);
    }
    // points and lines inside 3D meshes carry no cell/facet data here
  }
  require(!mesh.cells.empty(), name + ": no cells of the mesh dimension");

  // Classify stored facets: one adjacent cell -> boundary, two -> interface.
  std::map<std::array<int, 3>, int> adj;
  for (int c = 0; c < int(mesh.n_cells()); ++c)
    for (int lf = 0; lf <= mesh.dim; ++lf) adj[mesh.facet_key(c, lf)]++;
  for (Facet& f : raw_facets) {
    std::array<int, 3> key = f.v;
    std::sort(key.begin(), key.begin() + mesh.dim);
    const auto it = adj.find(key);
    require(it != adj.end(), name + ": facet element not matching any cell facet");
    if (it->second == 1)
      mesh.boundary_facets.push_back(f);
    else
      mesh.interior_facets.push_back(f);
  }
  mesh.finalize();
  return mesh;
}

inline Mesh load_msh(const std::string& path, std::vector<std::string>* warnings = nullptr) {
  std::ifstream is(path);
  require(bool(is), "load_msh: cannot open mesh file " + path);
  return load_msh_stream(is, path, warnings);
}

/// Writes ASCII MSH 4.1 with one entity per (dimension, label). Coordinates
/// use shortest round-trip formatting, so reload reproduces them exactly.
inline void write_msh(const Mesh& mesh, const std::string& path) {
  std::ofstream os(path);
  require(bool(os), "write_msh: cannot open " + path);
  os << "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n";

  std::set<int> cell_labels(mesh.cell_subdomain.begin(), mesh.cell_subdomain.end());
  std::set<int> facet_labels;
  for (const Facet& f : mesh.boundary_facets) facet_labels.insert(f.label);
  for (const Facet& f : mesh.interior_facets) facet_labels.insert(f.label);

  os << "$PhysicalNames\n" << (cell_labels.size() + facet_labels.size()) << "\n";
  for (int id : facet_labels)
    os << (mesh.dim - 1) << " " << id << " \"" << mesh.label_name(id) << "\"\n";
  for (int id : cell_labels)
    os << mesh.dim << " " << id << " \"" << mesh.label_name(id) << "\"\n";
  os << "$EndPhysicalNames\n";

  // Bounding box shared by all entities.
  Point lo = mesh.vertices[0], hi = mesh.vertices[0];
  for (const Point& v : mesh.vertices)
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], v[d]);
      hi[d] = std::max(hi[d], v[d]);
    }
  auto bbox = [&](std::ostream& s) {
    for (int d = 0; d < 3; ++d) s << " " << format_double(lo[d]);
    for (int d = 0; d < 3; ++d) s << " " << format_double(hi[d]);
  };
  const std::size_t ncurves = mesh.dim == 2 ? facet_labels.size() : 0;
  const std::size_t nsurf = mesh.dim == 2 ? cell_labels.size() : facet_labels.size();
  const std::size_t nvol = mesh.dim == 3 ? cell_labels.size() : 0;
  os << "$Entities\n0 " << ncurves << " " << nsurf << " " << nvol << "\n";
  auto entity_line = [&](int id) {
    os << id;
    bbox(os);
    os << " 1 " << id << " 0\n";
  };
  if (mesh.dim == 2) {
    for (int id : facet_labels) entity_line(id);
    for (int id : cell_labels) entity_line(id);
  } else {
    for (int id : facet_labels) entity_line(id);
    for (int id : cell_labels) entity_line(id);
  }
  os << "$EndEntities\n";

  const int cell_entity_dim = mesh.dim;
  const int first_cell_label = *cell_labels.begin();
  os << "$Nodes\n1 " << mesh.n_vertices() << " 1 " << mesh.n_vertices() << "\n";
  os << cell_entity_dim << " " << first_cell_label << " 0 " << mesh.n_vertices() << "\n";
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i) os << (i + 1) << "\n";
  for (const Point& v : mesh.vertices)
    os << format_double(v[0]) << " " << format_double(v[1]) << " " << format_double(v[2])
       << "\n";
  os << "$EndNodes\n";

  // One element block per (dim,label); facets first, then cells.
  struct Block {
    int dim, label, type;
    std::vector<std::vector<int>> conn;
  };
  std::vector<Block> blocks;
  auto block_for = [&](int dim, int label, int type) -> Block& {
    for (Block& b : blocks)
      if (b.dim == dim && b.label == label) return b;
    blocks.push_back({dim, label, type, {}});
    return blocks.back();
  };
  const int facet_type = mesh.dim == 2 ? 1 : 2;
  const int cell_type = mesh.dim == 2 ? 2 : 4;
  auto push_facets = [&](const std::vector<Facet>& fs) {
    for (const Facet& f : fs) {
      std::vector<int> conn;
      for (int k = 0; k < mesh.dim; ++k) conn.push_back(f.v[k] + 1);
      block_for(mesh.dim - 1, f.label, facet_type).conn.push_back(conn);
    }
  };
  push_facets(mesh.boundary_facets);
  push_facets(mesh.interior_facets);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    std::vector<int> conn;
    for (int k = 0; k <= mesh.dim; ++k) conn.push_back(mesh.cells[c][k] + 1);
    block_for(mesh.dim, mesh.cell_subdomain[c], cell_type).conn.push_back(conn);
  }
  std::size_t total = 0;
  for (const Block& b : blocks) total += b.conn.size();
  os << "$Elements\n" << blocks.size() << " " << total << " 1 " << total << "\n";
  long long tag = 1;
  for (const Block& b : blocks) {
    os << b.dim << " " << b.label << " " << b.type << " " << b.conn.size() << "\n";
    for (const auto& conn : b.conn) {
      os << tag++;
      for (int v : conn) os << " " << v;
      os << "\n";
    }
  }
  os << "$EndElements\n";
  require(bool(os), "write_msh: write failed for " + path);
}

}  // namespace ocuflow
