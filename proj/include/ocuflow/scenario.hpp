#pragma once

#include <memory>
#include <sstream>

#include "ocuflow/forms.hpp"
#include "ocuflow/msh_io.hpp"

namespace ocuflow {

enum class Posture { standing, supine, prone };

inline Point posture_gravity_dir(Posture p) {
  switch (p) {
    case Posture::standing: return {0.0, -1.0, 0.0};
    case Posture::supine: return {1.0, 0.0, 0.0};
    case Posture::prone: return {-1.0, 0.0, 0.0};
  }
  fail("posture_gravity_dir: invalid posture");
}

inline std::string posture_name(Posture p) {
  switch (p) {
    case Posture::standing: return "standing";
    case Posture::supine: return "supine";
    case Posture::prone: return "prone";
  }
  fail("posture_name: invalid posture");
}

inline Posture posture_from_name(const std::string& s) {
  if (s == "standing") return Posture::standing;
  if (s == "supine") return Posture::supine;
  if (s == "prone") return Posture::prone;
  fail("unknown posture '" + s + "' (standing|supine|prone)");
}

/// Complete description of a problem instance; maps 1:1 onto the config
/// file keys.
struct ScenarioSpec {
  std::string mesh_path;                 // mesh.path (file source)
  std::string generator = "cavity";      // mesh.generator: cavity|ac_gap|eye_slice|rect
  int n = 16;                            // mesh.n
  double delta_T = 2.0;                  // mesh.delta_T [K], cavity/ac_gap walls
  double size = 0.005;                   // mesh.size [m], cavity side
  double gap_inner = 0.005;              // mesh.gap_inner [m], ac_gap/eye_slice
  double gap_outer = 0.0075;             // mesh.gap_outer [m]
  double span = 1.8;                     // mesh.span [rad], sector opening
  Posture posture = Posture::standing;
  VariantFlags variant;
  PhysicalParams params;
  std::vector<std::string> fluid_labels = {"domain"};
  std::vector<std::string> gamma_amb, gamma_body;
};

/// Key-value scenario config: one `key = value` per line, '#' comments.
inline ScenarioSpec parse_config_text(const std::string& text) {
  ScenarioSpec spec;
  spec.params.k_by_label.clear();
  spec.fluid_labels.clear();
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  auto split_list = [&](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ls(s);
    std::string item;
    while (std::getline(ls, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  };
  bool saw_fluid = false;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos,
            "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    auto num = [&] {
      try {
        return std::stod(val);
      } catch (...) {
        fail("config line " + std::to_string(lineno) + ": '" + key +
             "' needs a numeric value, got '" + val + "'");
      }
    };
    if (key == "mesh.path") spec.mesh_path = val;
    else if (key == "mesh.generator") spec.generator = val;
    else if (key == "mesh.n") spec.n = int(num());
    else if (key == "mesh.delta_T") spec.delta_T = num();
    else if (key == "mesh.size") spec.size = num();
    else if (key == "mesh.gap_inner") spec.gap_inner = num();
    else if (key == "mesh.gap_outer") spec.gap_outer = num();
    else if (key == "mesh.span") spec.span = num();
    else if (key == "posture") spec.posture = posture_from_name(val);
    else if (key == "variant.flow") {
      if (val == "navier_stokes") spec.variant.flow = FlowModel::navier_stokes;
      else if (val == "stokes") spec.variant.flow = FlowModel::stokes;
      else fail("config line " + std::to_string(lineno) + ": variant.flow must be navier_stokes|stokes");
    } else if (key == "variant.radiation") {
      if (val == "nonlinear") spec.variant.radiation = RadiationModel::nonlinear;
      else if (val == "linearized") spec.variant.radiation = RadiationModel::linearized;
      else fail("config line " + std::to_string(lineno) + ": variant.radiation must be nonlinear|linearized");
    } else if (key == "variant.frozen_radiation_jacobian") {
      spec.variant.frozen_radiation_jacobian = (val == "true" || val == "1");
    } else if (key == "boundaries.gamma_amb") spec.gamma_amb = split_list(val);
    else if (key == "boundaries.gamma_body") spec.gamma_body = split_list(val);
    else if (key == "fluid.labels") {
      spec.fluid_labels = split_list(val);
      saw_fluid = true;
    } else if (key.rfind("params.k_", 0) == 0) {
      spec.params.k_by_label[key.substr(9)] = num();
    } else if (key.rfind("params.", 0) == 0) {
      const std::string p = key.substr(7);
      PhysicalParams& pp = spec.params;
      if (p == "mu") pp.mu = num();
      else if (p == "rho") pp.rho = num();
      else if (p == "Cp") pp.Cp = num();
      else if (p == "beta") pp.beta = num();
      else if (p == "g_mag") pp.g_mag = num();
      else if (p == "T_ref") pp.T_ref = num();
      else if (p == "h_bl") pp.h_bl = num();
      else if (p == "h_amb") pp.h_amb = num();
      else if (p == "T_bl") pp.T_bl = num();
      else if (p == "T_amb") pp.T_amb = num();
      else if (p == "E") pp.E = num();
      else if (p == "sigma_SB") pp.sigma_SB = num();
      else if (p == "epsilon") pp.epsilon = num();
      else fail("config line " + std::to_string(lineno) + ": unknown parameter '" + key + "'");
    } else {
      fail("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!saw_fluid) spec.fluid_labels = {"domain"};
  return spec;
}

inline ScenarioSpec parse_config_file(const std::string& path) {
  std::ifstream is(path);
  require(bool(is), "cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

inline std::string serialize_config(const ScenarioSpec& s) {
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
  auto kvd = [&](const std::string& k, double v) { kv(k, format_double(v)); };
  if (!s.mesh_path.empty()) kv("mesh.path", s.mesh_path);
  else kv("mesh.generator", s.generator);
  kv("mesh.n", std::to_string(s.n));
  kvd("mesh.delta_T", s.delta_T);
  kvd("mesh.size", s.size);
  kvd("mesh.gap_inner", s.gap_inner);
  kvd("mesh.gap_outer", s.gap_outer);
  kvd("mesh.span", s.span);
  kv("posture", posture_name(s.posture));
  kv("variant.flow", s.variant.flow == FlowModel::stokes ? "stokes" : "navier_stokes");
  kv("variant.radiation",
     s.variant.radiation == RadiationModel::linearized ? "linearized" : "nonlinear");
  if (s.variant.frozen_radiation_jacobian) kv("variant.frozen_radiation_jacobian", "true");
  const PhysicalParams& p = s.params;
  kvd("params.mu", p.mu);
  kvd("params.rho", p.rho);
  kvd("params.Cp", p.Cp);
  kvd("params.beta", p.beta);
  kvd("params.g_mag", p.g_mag);
  kvd("params.T_ref", p.T_ref);
  kvd("params.h_bl", p.h_bl);
  kvd("params.h_amb", p.h_amb);
  kvd("params.T_bl", p.T_bl);
  kvd("params.T_amb", p.T_amb);
  kvd("params.E", p.E);
  kvd("params.sigma_SB", p.sigma_SB);
  kvd("params.epsilon", p.epsilon);
  for (const auto& [name, k] : p.k_by_label) kvd("params.k_" + name, k);
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
  };
  if (!s.gamma_amb.empty()) kv("boundaries.gamma_amb", join(s.gamma_amb));
  if (!s.gamma_body.empty()) kv("boundaries.gamma_body", join(s.gamma_body));
  kv("fluid.labels", join(s.fluid_labels));
  return os.str();
}

/// Nominal Table-3 tissue conductivities, keyed by physical-group name.
inline std::map<std::string, double> nominal_conductivities() {
  return {{"lens", 0.4},          {"cornea", 0.58},       {"sclera", 1.0042},
          {"iris", 1.0042},       {"lamina", 1.0042},     {"opticNerve", 1.0042},
          {"aqueousHumor", 0.28}, {"vitreousHumor", 0.603}, {"choroid", 0.52},
          {"retina", 0.52},       {"domain", 0.28}};
}

/// A scenario instantiated into meshes, spaces and a ready-to-assemble
/// Problem. Owns the meshes the Problem points into.
struct BuiltScenario {
  std::unique_ptr<Mesh> omega;
  std::unique_ptr<SubMesh> fluid;
  Problem pb;
  ScenarioSpec spec;
  std::vector<std::string> wall_labels;    // fluid boundary, for WSS
  std::string cornea_wall, iris_wall;      // sweep surface labels (eye slice)

  // Manufactured exact fields (MMS scenarios only).
  std::function<std::array<double, 3>(const Point&)> exact_u;
  std::function<double(const Point&)> exact_p, exact_T;
};

namespace detail {

/// Three-band sector: lens | aqueousHumor | cornea, with labeled interfaces
/// "iris" (inner) and "cornea_endo" (outer). Outer arc is the ambient
/// boundary; inner arc and side edges contact the body. The sector is
/// centered on the -x axis so the posterior direction is +x, matching the
/// posture gravity map.
inline std::unique_ptr<Mesh> build_eye_slice(int n, double r_ah_in, double r_ah_out,
                                             double span) {
  auto mesh = std::make_unique<Mesh>();
  Mesh& m = *mesh;
  m.dim = 2;
  m.label_names = {{1, "lens"},        {2, "aqueousHumor"}, {3, "cornea"},
                   {4, "body"},        {5, "ambient"},      {6, "iris"},
                   {7, "cornea_endo"}};
  const double lens_thickness = 0.35 * (r_ah_out - r_ah_in);
  const double cornea_thickness = 0.3 * (r_ah_out - r_ah_in);
  const double r0 = r_ah_in - lens_thickness;
  const double r3 = r_ah_out + cornea_thickness;
  const double t0 = M_PI - 0.5 * span, t1 = M_PI + 0.5 * span;

  // Radial band edges with band resolutions (AH band finest).
  const int n_ah = std::max(3, n);
  const int n_side = std::max(2, n / 3);
  std::vector<double> radii;
  for (int i = 0; i <= n_side; ++i)
    radii.push_back(r0 + (r_ah_in - r0) * double(i) / n_side);
  for (int i = 1; i <= n_ah; ++i)
    radii.push_back(r_ah_in + (r_ah_out - r_ah_in) * double(i) / n_ah);
  for (int i = 1; i <= n_side; ++i)
    radii.push_back(r_ah_out + (r3 - r_ah_out) * double(i) / n_side);
  const int nr = int(radii.size()) - 1;
  const int nt = std::max(8, int(std::lround(n * span * r_ah_out / (r_ah_out - r_ah_in) / 2)));

  auto at = [&](double r, double t) { return Point{r * std::cos(t), r * std::sin(t), 0.0}; };
  auto grid = [&](int i, int j) { return j * (nr + 1) + i; };
  const double dt = (t1 - t0) / nt;
  for (int j = 0; j <= nt; ++j)
    for (int i = 0; i <= nr; ++i) m.vertices.push_back(at(radii[i], t0 + j * dt));
  const int c0 = int(m.vertices.size());
  auto center = [&](int i, int j) { return c0 + j * nr + i; };
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nr; ++i)
      m.vertices.push_back(at(0.5 * (radii[i] + radii[i + 1]), t0 + (j + 0.5) * dt));

  auto band_of = [&](int i) {
    if (i < n_side) return 1;          // lens
    if (i < n_side + n_ah) return 2;   // aqueousHumor
    return 3;                          // cornea
  };
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nr; ++i) {
      const int v00 = grid(i, j), v10 = grid(i + 1, j);
      const int v01 = grid(i, j + 1), v11 = grid(i + 1, j + 1);
      const int vc = center(i, j);
      const int lbl = band_of(i);
      m.cells.push_back({v00, v10, vc, -1});
      m.cells.push_back({v10, v11, vc, -1});
      m.cells.push_back({v11, v01, vc, -1});
      m.cells.push_back({v01, v00, vc, -1});
      for (int k = 0; k < 4; ++k) m.cell_subdomain.push_back(lbl);
    }
  for (int j = 0; j < nt; ++j) {
    m.boundary_facets.push_back({{grid(0, j), grid(0, j + 1), -1}, 4, -1, -1});
    m.boundary_facets.push_back({{grid(nr, j), grid(nr, j + 1), -1}, 5, -1, -1});
    // Labeled interior interfaces of the fluid band.
    m.interior_facets.push_back({{grid(n_side, j), grid(n_side, j + 1), -1}, 6, -1, -1});
    m.interior_facets.push_back(
        {{grid(n_side + n_ah, j), grid(n_side + n_ah, j + 1), -1}, 7, -1, -1});
  }
  for (int i = 0; i < nr; ++i) {
    m.boundary_facets.push_back({{grid(i, 0), grid(i + 1, 0), -1}, 4, -1, -1});
    m.boundary_facets.push_back({{grid(i, nt), grid(i + 1, nt), -1}, 4, -1, -1});
  }
  m.finalize();
  return mesh;
}

inline void setup_spaces_and_bcs(BuiltScenario& built,
                                 const std::vector<std::string>& fluid_labels) {
  Problem& pb = built.pb;
  pb.omega = built.omega.get();
  built.fluid = std::make_unique<SubMesh>(extract_subdomain(*built.omega, fluid_labels));
  pb.fluid = built.fluid.get();
  const int dim = pb.omega->dim;
  pb.Vh = build_space(pb.fluid->mesh, 2, Continuity::continuous, dim);
  pb.Qh = build_space(pb.fluid->mesh, 1, Continuity::continuous, 1);
  pb.Wh = build_space(*pb.omega, 1, Continuity::continuous, 1);

  // No-slip covers the whole fluid boundary.
  built.wall_labels.clear();
  std::set<int> wall_ids;
  for (const Facet& f : pb.fluid->mesh.boundary_facets) wall_ids.insert(f.label);
  for (int id : wall_ids) built.wall_labels.push_back(pb.fluid->mesh.label_name(id));
  pb.u_dirichlet = pb.Vh.boundary_scalar_dofs(built.wall_labels);
  pb.u_dirichlet_values.assign(pb.Vh.n_dofs(), 0.0);

  // Conductivities by subdomain id.
  std::set<int> subs(pb.omega->cell_subdomain.begin(), pb.omega->cell_subdomain.end());
  for (int id : subs) {
    const std::string& name = pb.omega->label_name(id);
    const auto it = pb.params.k_by_label.find(name);
    require(it != pb.params.k_by_label.end(),
            "scenario: no conductivity for subdomain label '" + name + "'");
    pb.k_of_label[id] = it->second;
  }
}

}  // namespace detail

/// Differentially heated square cavity: hot left / cold right Dirichlet
/// walls at T_ref +- delta_T/2, adiabatic top/bottom, no-slip everywhere,
/// Boussinesq coupling over the whole domain.
inline BuiltScenario make_cavity_scenario(const ScenarioSpec& spec) {
  require(spec.n >= 4, "cavity scenario: n must be >= 4");
  BuiltScenario built;
  built.spec = spec;
  built.omega = std::make_unique<Mesh>(generate_rect(spec.n, spec.n, spec.size, spec.size));
  built.pb.params = spec.params;
  if (!built.pb.params.k_by_label.count("domain"))
    built.pb.params.k_by_label["domain"] = nominal_conductivities().at("domain");
  built.pb.variant = spec.variant;
  built.pb.params.gravity_dir = posture_gravity_dir(spec.posture);
  detail::setup_spaces_and_bcs(built, {"domain"});
  // Temperature Dirichlet on the differentially heated vertical walls.
  Problem& pb = built.pb;
  const double Th = pb.params.T_ref + 0.5 * spec.delta_T;
  const double Tc = pb.params.T_ref - 0.5 * spec.delta_T;
  pb.T_dirichlet_values.assign(pb.n_T(), 0.0);
  for (int s : pb.Wh.boundary_scalar_dofs({"left"})) {
    pb.T_dirichlet.push_back(s);
    pb.T_dirichlet_values[s] = Th;
  }
  for (int s : pb.Wh.boundary_scalar_dofs({"right"})) {
    pb.T_dirichlet.push_back(s);
    pb.T_dirichlet_values[s] = Tc;
  }
  return built;
}

/// Anterior-chamber-like gap between two arcs, differentially heated across
/// the gap (warm posterior arc, cool corneal arc), used for the lubrication
/// cross-check.
inline BuiltScenario make_ac_gap_scenario(const ScenarioSpec& spec) {
  require(spec.n >= 4, "ac_gap scenario: n must be >= 4");
  require(spec.gap_outer > spec.gap_inner, "ac_gap scenario: gap_outer <= gap_inner");
  BuiltScenario built;
  built.spec = spec;
  AnnulusLabels labels;
  const double t0 = M_PI - 0.5 * spec.span, t1 = M_PI + 0.5 * spec.span;
  const int nt = std::max(8, int(std::lround(
                                  spec.n * spec.span * spec.gap_outer /
                                  (spec.gap_outer - spec.gap_inner) / 2)));
  built.omega = std::make_unique<Mesh>(generate_annulus_sector(
      spec.gap_inner, spec.gap_outer, t0, t1, spec.n, nt, labels));
  built.pb.params = spec.params;
  if (!built.pb.params.k_by_label.count("domain"))
    built.pb.params.k_by_label["domain"] = nominal_conductivities().at("aqueousHumor");
  built.pb.variant = spec.variant;
  built.pb.params.gravity_dir = posture_gravity_dir(spec.posture);
  detail::setup_spaces_and_bcs(built, {"domain"});
  Problem& pb = built.pb;
  const double Th = pb.params.T_ref + 0.5 * spec.delta_T;  // posterior (inner arc)
  const double Tc = pb.params.T_ref - 0.5 * spec.delta_T;  // cornea (outer arc)
  pb.T_dirichlet_values.assign(pb.n_T(), 0.0);
  for (int s : pb.Wh.boundary_scalar_dofs({"inner"})) {
    pb.T_dirichlet.push_back(s);
    pb.T_dirichlet_values[s] = Th;
  }
  for (int s : pb.Wh.boundary_scalar_dofs({"outer"})) {
    pb.T_dirichlet.push_back(s);
    pb.T_dirichlet_values[s] = Tc;
  }
  built.cornea_wall = "outer";
  built.iris_wall = "inner";
  return built;
}

/// Desk-scale eye slice: conjugate heat transfer across lens | AH | cornea
/// bands with ambient Robin + radiation + evaporation on the outer arc and
/// body contact elsewhere. Fluid flows in the AH band only.
inline BuiltScenario make_eye_slice_scenario(const ScenarioSpec& spec) {
  require(spec.n >= 4, "eye_slice scenario: n must be >= 4");
  BuiltScenario built;
  built.spec = spec;
  built.omega = detail::build_eye_slice(spec.n, spec.gap_inner, spec.gap_outer, spec.span);
  built.pb.params = spec.params;
  auto& kmap = built.pb.params.k_by_label;
  for (const auto& [name, k] : nominal_conductivities())
    if (!kmap.count(name)) kmap[name] = k;
  built.pb.variant = spec.variant;
  built.pb.params.gravity_dir = posture_gravity_dir(spec.posture);
  detail::setup_spaces_and_bcs(built, {"aqueousHumor"});
  Problem& pb = built.pb;
  pb.gamma_amb = {pb.omega->label_id("ambient")};
  pb.gamma_body = {pb.omega->label_id("body")};
  pb.T_dirichlet_values.assign(pb.n_T(), 0.0);
  built.cornea_wall = "cornea_endo";
  built.iris_wall = "iris";
  return built;
}

/// Eye scenario from a mesh file (the published eye meshes): tissue labels
/// from the file's physical groups, boundary roles from the config.
inline BuiltScenario make_eye_scenario(const ScenarioSpec& spec,
                                       std::vector<std::string>* warnings = nullptr) {
  require(!spec.mesh_path.empty(), "eye scenario: mesh.path required");
  BuiltScenario built;
  built.spec = spec;
  built.omega = std::make_unique<Mesh>(load_msh(spec.mesh_path, warnings));
  built.pb.params = spec.params;
  auto& kmap = built.pb.params.k_by_label;
  for (const auto& [name, k] : nominal_conductivities())
    if (!kmap.count(name)) kmap[name] = k;
  built.pb.variant = spec.variant;
  built.pb.params.gravity_dir = posture_gravity_dir(spec.posture);
  detail::setup_spaces_and_bcs(built, spec.fluid_labels);
  Problem& pb = built.pb;
  require(!spec.gamma_amb.empty() && !spec.gamma_body.empty(),
          "eye scenario: boundaries.gamma_amb and boundaries.gamma_body required");
  for (const auto& name : spec.gamma_amb) pb.gamma_amb.insert(pb.omega->label_id(name));
  for (const auto& name : spec.gamma_body) pb.gamma_body.insert(pb.omega->label_id(name));
  for (int id : pb.gamma_amb)
    require(!pb.gamma_body.count(id),
            "eye scenario: label '" + pb.omega->label_name(id) +
                "' assigned to both gamma_amb and gamma_body");
  pb.T_dirichlet_values.assign(pb.n_T(), 0.0);
  built.cornea_wall = "cornea_endo";
  built.iris_wall = "iris";
  return built;
}

/// Manufactured solution on the unit square (normalized coefficients):
/// divergence-free velocity from a stream function, zero-mean pressure,
/// and a trigonometric temperature; volumetric sources close the system.
inline BuiltScenario make_mms_scenario(int n) {
  require(n >= 2, "mms scenario: n must be >= 2");
  BuiltScenario built;
  built.spec.generator = "mms";
  built.spec.n = n;
  built.omega = std::make_unique<Mesh>(generate_rect(n, n, 1.0, 1.0));

  PhysicalParams P;
  P.mu = 1.0;
  P.rho = 1.0;
  P.Cp = 1.0;
  P.beta = 0.5;
  P.g_mag = 1.0;
  P.T_ref = 0.0;
  P.h_bl = 1.0;
  P.h_amb = 1.0;
  P.T_bl = 1.0;
  P.T_amb = 1.0;
  P.E = 0.0;
  P.epsilon = 0.5;
  P.k_by_label = {{"domain", 1.0}};
  built.pb.params = P;
  built.pb.variant.flow = FlowModel::navier_stokes;
  built.pb.variant.radiation = RadiationModel::nonlinear;
  detail::setup_spaces_and_bcs(built, {"domain"});
  Problem& pb = built.pb;
  // T_ref = 0 fails the positivity validation on purpose-built params; keep
  // it slightly positive instead.
  pb.params.T_ref = 1e-12;

  const double pi = M_PI;
  auto u_exact = [pi](const Point& x) -> std::array<double, 3> {
    const double sx = std::sin(pi * x[0]), sy = std::sin(pi * x[1]);
    const double Sx = std::sin(2 * pi * x[0]), Sy = std::sin(2 * pi * x[1]);
    return {pi * sx * sx * Sy, -pi * Sx * sy * sy, 0.0};
  };
  auto p_exact = [pi](const Point& x) {
    return std::cos(pi * x[0]) * std::sin(pi * x[1]);
  };
  auto T_exact = [pi](const Point& x) {
    return std::sin(pi * x[0]) * std::sin(pi * x[1]);
  };
  const Point g = {0.0, -1.0, 0.0};
  const double rho = P.rho, mu = P.mu, beta = P.beta, Tref = 0.0, k = 1.0, Cp = P.Cp;

  pb.source_u = [=](const Point& x) -> std::array<double, 3> {
    const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
    const double sy = std::sin(pi * x[1]), cy2 = std::cos(2 * pi * x[1]);
    const double Sx = std::sin(2 * pi * x[0]), Sy = std::sin(2 * pi * x[1]);
    const double Cx2 = std::cos(2 * pi * x[0]);
    const double u1 = pi * sx * sx * Sy, u2 = -pi * Sx * sy * sy;
    // grad u entries
    const double du1dx = pi * pi * Sx * Sy;
    const double du1dy = 2 * pi * pi * sx * sx * cy2;
    const double du2dx = -2 * pi * pi * Cx2 * sy * sy;
    const double du2dy = -pi * pi * Sx * Sy;
    // Laplacians
    const double lap_u1 = 2 * pi * pi * pi * (Cx2 * Sy - 2 * sx * sx * Sy);
    const double lap_u2 = 2 * pi * pi * pi * (2 * Sx * sy * sy - Sx * cy2);
    const double dpdx = -pi * sx * std::sin(pi * x[1]);
    const double dpdy = pi * cx * std::cos(pi * x[1]);
    const double T = std::sin(pi * x[0]) * std::sin(pi * x[1]);
    // Viscous operator is -mu div D(u) = -(mu/2) lap u on solenoidal fields.
    std::array<double, 3> f{};
    f[0] = rho * (u1 * du1dx + u2 * du1dy) - 0.5 * mu * lap_u1 + dpdx +
           rho * beta * (T - Tref) * g[0];
    f[1] = rho * (u1 * du2dx + u2 * du2dy) - 0.5 * mu * lap_u2 + dpdy +
           rho * beta * (T - Tref) * g[1];
    return f;
  };
  pb.source_T = [=](const Point& x) {
    const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
    const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
    const double Sx = std::sin(2 * pi * x[0]), Sy = std::sin(2 * pi * x[1]);
    const double u1 = pi * sx * sx * Sy, u2 = -pi * Sx * sy * sy;
    const double dTdx = pi * cx * sy, dTdy = pi * sx * cy;
    const double lapT = -2 * pi * pi * sx * sy;
    return rho * Cp * (u1 * dTdx + u2 * dTdy) - k * lapT;
  };
  pb.params.gravity_dir = {0.0, -1.0, 0.0};
  pb.params.g_mag = 1.0;

  // Dirichlet data from the exact fields; the dof set (whole fluid
  // boundary) is already in place.
  for (int s : pb.u_dirichlet) {
    const auto uv = u_exact(pb.Vh.scalar_dof_coords[s]);
    for (int c = 0; c < pb.Vh.components; ++c)
      pb.u_dirichlet_values[pb.Vh.global_dof(s, c)] = uv[std::size_t(c)];
  }
  pb.T_dirichlet_values.assign(pb.n_T(), 0.0);
  for (int s : pb.Wh.boundary_scalar_dofs({"left", "right", "bottom", "top"})) {
    pb.T_dirichlet.push_back(s);
    pb.T_dirichlet_values[s] = T_exact(pb.Wh.scalar_dof_coords[s]);
  }
  built.exact_u = u_exact;
  built.exact_p = p_exact;
  built.exact_T = T_exact;
  return built;
}

/// Dispatch on the spec's mesh source.
inline BuiltScenario build_scenario(const ScenarioSpec& spec,
                                    std::vector<std::string>* warnings = nullptr) {
  if (!spec.mesh_path.empty()) return make_eye_scenario(spec, warnings);
  if (spec.generator == "cavity") return make_cavity_scenario(spec);
  if (spec.generator == "ac_gap") return make_ac_gap_scenario(spec);
  if (spec.generator == "eye_slice") return make_eye_slice_scenario(spec);
  if (spec.generator == "mms") return make_mms_scenario(spec.n);
  fail("unknown mesh.generator '" + spec.generator +
       "' (cavity|ac_gap|eye_slice|mms or mesh.path)");
}

}  // namespace ocuflow
