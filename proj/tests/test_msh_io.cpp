#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "ocuflow/msh_io.hpp"

using namespace ocuflow;

namespace {

// Minimal 4.1 file: 4 nodes, 1 tetrahedron, physical volume "body".
const char* kSingleTet = R"($MeshFormat
4.1 0 8
$EndMeshFormat
$PhysicalNames
1
3 1 "body"
$EndPhysicalNames
$Entities
0 0 0 1
1 0 0 0 1 1 1 1 1 0
$EndEntities
$Nodes
1 4 1 4
3 1 0 4
1
2
3
4
0 0 0
1 0 0
0 1 0
0 0 1
$EndNodes
$Elements
1 1 1 1
3 1 4 1
1 1 2 3 4
$EndElements
)";

}  // namespace

TEST_CASE("load_msh reads a hand-written single-tet file", "[msh]") {
  std::istringstream is(kSingleTet);
  const Mesh m = load_msh_stream(is, "single_tet.msh");
  REQUIRE(m.dim == 3);
  REQUIRE(m.n_vertices() == 4);
  REQUIRE(m.n_cells() == 1);
  REQUIRE(m.label_name(m.cell_subdomain[0]) == "body");
}

TEST_CASE("load_msh names the missing node tag", "[msh]") {
  std::string text = kSingleTet;
  // Reference node 9 instead of 4 in the tet.
  const auto pos = text.find("1 1 2 3 4");
  text.replace(pos, 9, "1 1 2 3 9");
  std::istringstream is(text);
  try {
    load_msh_stream(is, "bad.msh");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    REQUIRE(std::string(e.what()).find("9") != std::string::npos);
    REQUIRE(std::string(e.what()).find("absent from $Nodes") != std::string::npos);
  }
}

TEST_CASE("load_msh rejects other versions and binary files", "[msh]") {
  {
    std::string text = kSingleTet;
    text.replace(text.find("4.1 0 8"), 7, "2.2 0 8");
    std::istringstream is(text);
    REQUIRE_THROWS_WITH(load_msh_stream(is, "v22.msh"),
                        Catch::Matchers::ContainsSubstring("unsupported MSH version"));
  }
  {
    std::string text = kSingleTet;
    text.replace(text.find("4.1 0 8"), 7, "4.1 1 8");
    std::istringstream is(text);
    REQUIRE_THROWS_WITH(load_msh_stream(is, "bin.msh"),
                        Catch::Matchers::ContainsSubstring("binary MSH rejected"));
  }
}

TEST_CASE("load_msh reports parse errors with line numbers", "[msh]") {
  std::string text = kSingleTet;
  text.replace(text.find("0 0 0 1\n1 0"), 7, "0 0 x 1");
  std::istringstream is(text);
  try {
    load_msh_stream(is, "mangled.msh");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    const std::string what = e.what();
    REQUIRE(what.find("mangled.msh:") != std::string::npos);
    REQUIRE(what.find(":9:") != std::string::npos);  // $Entities header line
  }
}

TEST_CASE("unknown sections are skipped with a warning", "[msh]") {
  std::string text = kSingleTet;
  text += "$Periodic\n0\n$EndPeriodic\n";
  std::istringstream is(text);
  std::vector<std::string> warnings;
  const Mesh m = load_msh_stream(is, "periodic.msh", &warnings);
  REQUIRE(m.n_cells() == 1);
  REQUIRE(warnings.size() == 1);
  REQUIRE(warnings[0].find("$Periodic") != std::string::npos);
}

TEST_CASE("write + reload round-trips coordinates and labels", "[msh]") {
  const Mesh m = generate_rect(3, 2, 1.5, 1.0);
  const std::string path = "roundtrip_rect.msh";
  write_msh(m, path);
  const Mesh r = load_msh(path);
  REQUIRE(r.dim == 2);
  REQUIRE(r.n_vertices() == m.n_vertices());
  REQUIRE(r.n_cells() == m.n_cells());
  for (std::size_t v = 0; v < m.n_vertices(); ++v)
    for (int d = 0; d < 3; ++d)
      REQUIRE(std::abs(r.vertices[v][d] - m.vertices[v][d]) <= 1e-12);
  // Same labeled cell volumes per label name.
  auto volumes = [](const Mesh& mm) {
    std::map<std::string, double> v;
    for (int c = 0; c < int(mm.n_cells()); ++c)
      v[mm.label_name(mm.cell_subdomain[c])] += mm.cell_volume(c);
    return v;
  };
  REQUIRE(volumes(m) == volumes(r));
  auto facet_lengths = [](const Mesh& mm) {
    std::map<std::string, double> v;
    for (const Facet& f : mm.boundary_facets)
      v[mm.label_name(f.label)] += mm.facet_measure(f);
    return v;
  };
  const auto fm = facet_lengths(m), fr = facet_lengths(r);
  REQUIRE(fm.size() == fr.size());
  for (const auto& [k, val] : fm) REQUIRE(fr.at(k) == Catch::Approx(val).epsilon(1e-13));

  // 3D round-trip, including a labeled interior interface.
  const Mesh b = generate_box(2, 1, 1, 1.0, 1.0, 1.0);
  write_msh(b, "roundtrip_box.msh");
  const Mesh rb = load_msh("roundtrip_box.msh");
  REQUIRE(rb.dim == 3);
  REQUIRE(rb.n_cells() == b.n_cells());
  for (std::size_t v = 0; v < b.n_vertices(); ++v)
    for (int d = 0; d < 3; ++d)
      REQUIRE(std::abs(rb.vertices[v][d] - b.vertices[v][d]) <= 1e-12);
}

TEST_CASE("optional published-mesh check", "[msh]") {
  // Runs only when the paper's mesh file is provided.
  const char* path = std::getenv("OCUFLOW_EYE_MESH");
  if (!path) {
    SUCCEED("eye mesh not present; skipped");
    return;
  }
  const Mesh m = load_msh(path);
  REQUIRE(m.n_cells() == 191939);
}
