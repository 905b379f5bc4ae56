#pragma once

#include "ocuflow/assemble.hpp"
#include "ocuflow/krylov.hpp"

namespace ocuflow {

/// Scalar model coefficients (SI units) and the per-tissue conductivity map.
struct PhysicalParams {
  double mu = 1e-3;          // dynamic viscosity [N s / m^2]
  double rho = 1000.0;       // density [kg / m^3]
  double Cp = 4178.0;        // specific heat [J / (kg K)]
  double beta = 3e-4;        // volume expansion [1/K]
  double g_mag = 9.81;       // gravity magnitude [m / s^2]
  double T_ref = 298.0;      // Boussinesq reference temperature [K]
  double h_bl = 65.0;        // body-side transfer coefficient [W / (m^2 K)]
  double h_amb = 10.0;       // ambient transfer coefficient [W / (m^2 K)]
  double T_bl = 310.0;       // blood temperature [K]
  double T_amb = 294.0;      // ambient temperature [K]
  double E = 40.0;           // tear evaporation rate [W / m^2]
  double sigma_SB = 5.67e-8; // Stefan-Boltzmann [W / (m^2 K^4)]
  double epsilon = 0.975;    // corneal emissivity [-]
  std::map<std::string, double> k_by_label;  // conductivity per subdomain name
  Point gravity_dir{0.0, -1.0, 0.0};

  Point gravity() const {
    return {g_mag * gravity_dir[0], g_mag * gravity_dir[1], g_mag * gravity_dir[2]};
  }

  void validate() const {
    auto pos = [](double v, const char* name) {
      require(v > 0.0, std::string("params: ") + name + " must be positive");
    };
    pos(mu, "mu");
    pos(rho, "rho");
    pos(Cp, "Cp");
    pos(g_mag, "g_mag");
    pos(T_ref, "T_ref");
    pos(h_bl, "h_bl");
    pos(h_amb, "h_amb");
    pos(T_bl, "T_bl");
    pos(T_amb, "T_amb");
    pos(sigma_SB, "sigma_SB");
    pos(epsilon, "epsilon");
    require(beta >= 0.0, "params: beta must be nonnegative");
    require(E >= 0.0, "params: E must be nonnegative");
    for (const auto& [name, k] : k_by_label)
      require(k > 0.0, "params: conductivity of '" + name + "' must be positive");
    const double gn = pnorm(gravity_dir);
    require(std::abs(gn - 1.0) <= 1e-12, "params: gravity_dir must be a unit vector");
  }
};

enum class FlowModel { navier_stokes, stokes };
enum class RadiationModel { nonlinear, linearized };

struct VariantFlags {
  FlowModel flow = FlowModel::navier_stokes;
  RadiationModel radiation = RadiationModel::nonlinear;
  // Algorithm-1 literal reading: radiation Jacobian frozen at the initial
  // state instead of reassembled each iteration.
  bool frozen_radiation_jacobian = false;
};

/// Fully assembled-ready problem: meshes, spaces, boundary sets, Dirichlet
/// data and optional manufactured sources. Velocity/pressure live on the
/// fluid submesh, temperature on the full domain.
struct Problem {
  const Mesh* omega = nullptr;
  const SubMesh* fluid = nullptr;
  FunctionSpace Vh, Qh, Wh;
  PhysicalParams params;
  VariantFlags variant;
  std::set<int> gamma_amb, gamma_body;       // facet labels on omega
  std::map<int, double> k_of_label;          // conductivity per subdomain id

  // Scalar Dirichlet dofs (all components constrained for velocity) and the
  // prescribed values, stored at full vector length.
  std::vector<int> u_dirichlet;
  Vec u_dirichlet_values;
  std::vector<int> T_dirichlet;
  Vec T_dirichlet_values;

  // Manufactured volumetric sources (null when unused).
  std::function<std::array<double, 3>(const Point&)> source_u;
  std::function<double(const Point&)> source_T;

  int n_u() const { return Vh.n_dofs(); }
  int n_p() const { return Qh.n_dofs(); }
  int n_T() const { return Wh.n_dofs(); }

  std::vector<char> u_mask() const {
    std::vector<char> m(n_u(), 0);
    for (int s : u_dirichlet)
      for (int c = 0; c < Vh.components; ++c) m[Vh.global_dof(s, c)] = 1;
    return m;
  }
  std::vector<char> T_mask() const {
    std::vector<char> m(n_T(), 0);
    for (int s : T_dirichlet) m[s] = 1;
    return m;
  }

  double conductivity(int label) const {
    const auto it = k_of_label.find(label);
    require(it != k_of_label.end(), "conductivity: no value for subdomain label " +
                                        std::to_string(label));
    return it->second;
  }

  /// Radiation coefficient of the linearized Robin condition.
  double h_rad_linear() const {
    return 4.0 * params.sigma_SB * params.epsilon * std::pow(params.T_amb, 3);
  }

  Assembler fluid_assembler() const {
    Assembler a(fluid->mesh);
    a.bind_parent(*omega, fluid->parent_cell);
    return a;
  }
};

struct State {
  Field u, p, T;
};

/// Sets the Dirichlet-constrained entries of a state to their prescribed
/// values (free entries untouched).
inline void apply_dirichlet(const Problem& pb, State& s) {
  for (int sd : pb.u_dirichlet)
    for (int c = 0; c < pb.Vh.components; ++c) {
      const int d = pb.Vh.global_dof(sd, c);
      s.u.coeffs[d] = pb.u_dirichlet_values[d];
    }
  for (int sd : pb.T_dirichlet) s.T.coeffs[sd] = pb.T_dirichlet_values[sd];
}

// Default quadrature orders; every kernel declares its true degree and
// exact rules are cheap at this scale.
inline QuadratureRule cell_rule(const Problem& pb, int order = 6) {
  return simplex_rule(pb.omega->dim, order);
}
inline QuadratureRule facet_rule(const Problem& pb, int order = 8) {
  return simplex_rule(pb.omega->dim - 1, order);
}

/// Blocks independent of the Newton iterate.
struct ConstantBlocks {
  SparseMatrix N;      // viscous: mu D(u) : grad v
  SparseMatrix Bt, B;  // pressure coupling b(p, v) and its transpose
  SparseMatrix D;      // buoyancy coupling (momentum row, temperature column)
  SparseMatrix F_lin;  // conduction + linear Robin boundary terms
  SparseMatrix Mp;     // pressure mass (Schur approximation)
  Vec ell1;            // momentum load (T_ref buoyancy + manufactured source)
  Vec ell2;            // heat load (ambient/body data + manufactured source)
};

inline ConstantBlocks assemble_constant_blocks(const Problem& pb) {
  pb.params.validate();
  const PhysicalParams& P = pb.params;
  const Point g = P.gravity();
  ConstantBlocks out;

  Assembler on_fluid = pb.fluid_assembler();
  const QuadratureRule qc = cell_rule(pb);

  // a2(u, v) = mu int D(u) : grad v.
  out.N = on_fluid.bilinear(
      pb.Vh, pb.Vh, qc,
      {2, [mu = P.mu](const AsmContext&, const BasisAt& u, const BasisAt& v) {
         // D(u):grad v for u = phi e_a, v = psi e_b reduces to
         // (delta_ab grad phi . grad psi + d_b phi d_a psi) / 2.
         const double same = u.comp == v.comp ? pdot(u.g, v.g) : 0.0;
         return 0.5 * mu * (same + u.g[v.comp] * v.g[u.comp]);
       }});

  // b(p, v) = -int p div v; trial pressure, test velocity.
  out.Bt = on_fluid.bilinear(
      pb.Qh, pb.Vh, qc,
      {2, [](const AsmContext&, const BasisAt& p, const BasisAt& v) {
         return -p.v * v.g[v.comp];
       }});
  out.B = out.Bt.transposed();

  // Buoyancy coupling: + rho beta int T g . v on the momentum row (the sign
  // that cancels the T_ref load at T = T_ref).
  out.D = on_fluid.bilinear(
      pb.Wh, pb.Vh, qc,
      {3, [rb = P.rho * P.beta, g](const AsmContext&, const BasisAt& T, const BasisAt& v) {
         return rb * T.v * g[v.comp] * v.v;
       }});

  // Heat: conduction with per-subdomain k plus linear Robin terms.
  Assembler on_omega(*pb.omega);
  SparseMatrix F = on_omega.bilinear(
      pb.Wh, pb.Wh, qc,
      {2, [&pb](const AsmContext& ctx, const BasisAt& T, const BasisAt& phi) {
         return pb.conductivity(ctx.subdomain) * pdot(T.g, phi.g);
       }});
  const QuadratureRule qf = facet_rule(pb);
  const double h_amb_eff =
      P.h_amb + (pb.variant.radiation == RadiationModel::linearized ? pb.h_rad_linear() : 0.0);
  if (!pb.gamma_amb.empty()) {
    const SparseMatrix Famb = on_omega.facet_bilinear(
        pb.Wh, pb.Wh, qf, pb.gamma_amb,
        {2, [h_amb_eff](const AsmContext&, const BasisAt& T, const BasisAt& phi) {
           return h_amb_eff * T.v * phi.v;
         }});
    for (std::size_t k = 0; k < F.nnz(); ++k) F.values()[k] += Famb.values()[k];
  }
  if (!pb.gamma_body.empty()) {
    const SparseMatrix Fbody = on_omega.facet_bilinear(
        pb.Wh, pb.Wh, qf, pb.gamma_body,
        {2, [hb = P.h_bl](const AsmContext&, const BasisAt& T, const BasisAt& phi) {
           return hb * T.v * phi.v;
         }});
    for (std::size_t k = 0; k < F.nnz(); ++k) F.values()[k] += Fbody.values()[k];
  }
  out.F_lin = std::move(F);

  out.Mp = on_fluid.bilinear(
      pb.Qh, pb.Qh, qc,
      {2, [](const AsmContext&, const BasisAt& p, const BasisAt& q) { return p.v * q.v; }});

  // ell1(v) = int rho beta T_ref g . v (+ manufactured source).
  out.ell1 = on_fluid.linear(
      pb.Vh, qc, {6, [&pb, g, &P](const AsmContext& ctx, const BasisAt& v) {
        double val = P.rho * P.beta * P.T_ref * g[v.comp] * v.v;
        if (pb.source_u) val += pb.source_u(ctx.x)[std::size_t(v.comp)] * v.v;
        return val;
      }});

  // ell2(phi): ambient and body boundary data (+ manufactured source).
  out.ell2.assign(pb.n_T(), 0.0);
  if (!pb.gamma_amb.empty()) {
    const double amb_data =
        pb.variant.radiation == RadiationModel::linearized
            ? h_amb_eff * P.T_amb - P.E
            : P.h_amb * P.T_amb + P.sigma_SB * P.epsilon * std::pow(P.T_amb, 4) - P.E;
    const Vec l_amb = on_omega.facet_linear(
        pb.Wh, qf, pb.gamma_amb, {1, [amb_data](const AsmContext&, const BasisAt& phi) {
          return amb_data * phi.v;
        }});
    axpy(1.0, l_amb, out.ell2);
  }
  if (!pb.gamma_body.empty()) {
    const Vec l_body = on_omega.facet_linear(
        pb.Wh, qf, pb.gamma_body, {1, [&P](const AsmContext&, const BasisAt& phi) {
          return P.h_bl * P.T_bl * phi.v;
        }});
    axpy(1.0, l_body, out.ell2);
  }
  if (pb.source_T) {
    const Vec l_src = on_omega.linear(
        pb.Wh, qc, {6, [&pb](const AsmContext& ctx, const BasisAt& phi) {
          return pb.source_T(ctx.x) * phi.v;
        }});
    axpy(1.0, l_src, out.ell2);
  }
  return out;
}

/// Blocks depending on the current iterate (u_k, T_k).
struct StateBlocks {
  SparseMatrix V;      // a1(u_k, du, v)
  SparseMatrix W;      // a1(du, u_k, v)
  SparseMatrix E1;     // e(du, T_k, phi): temperature rows, velocity columns
  SparseMatrix E2;     // e(u_k, dT, phi)
  SparseMatrix R_rad;  // radiation Jacobian 4 sigma eps T^3 on Gamma_amb
  bool has_rad = false;
};

inline StateBlocks assemble_state_blocks(const Problem& pb, const Field& u_k,
                                         const Field& T_k) {
  require(all_finite(u_k.coeffs) && all_finite(T_k.coeffs),
          "assemble_state_blocks: non-finite state");
  const PhysicalParams& P = pb.params;
  StateBlocks out;
  Assembler on_fluid = pb.fluid_assembler();
  const QuadratureRule qc = cell_rule(pb);
  const bool ns = pb.variant.flow == FlowModel::navier_stokes;

  if (ns) {
    out.V = on_fluid.bilinear(
        pb.Vh, pb.Vh, qc,
        {5, [rho = P.rho](const AsmContext& ctx, const BasisAt& du, const BasisAt& v) {
           if (du.comp != v.comp) return 0.0;
           double adv = 0.0;
           for (int d = 0; d < 3; ++d) adv += ctx.coef[0][std::size_t(d)] * du.g[d];
           return rho * adv * v.v;
         }},
        {&u_k});
    out.W = on_fluid.bilinear(
        pb.Vh, pb.Vh, qc,
        {5, [rho = P.rho](const AsmContext& ctx, const BasisAt& du, const BasisAt& v) {
           return rho * du.v * ctx.coef_grad[0][std::size_t(v.comp)][du.comp] * v.v;
         }},
        {&u_k});
  }

  out.E1 = on_fluid.bilinear(
      pb.Vh, pb.Wh, qc,
      {5, [rc = P.rho * P.Cp](const AsmContext& ctx, const BasisAt& du, const BasisAt& phi) {
         return rc * du.v * ctx.coef_grad[0][0][du.comp] * phi.v;
       }},
      {&T_k});
  out.E2 = on_fluid.bilinear(
      pb.Wh, pb.Wh, qc,
      {5, [rc = P.rho * P.Cp](const AsmContext& ctx, const BasisAt& dT, const BasisAt& phi) {
         double adv = 0.0;
         for (int d = 0; d < 3; ++d) adv += ctx.coef[0][std::size_t(d)] * dT.g[d];
         return rc * adv * phi.v;
       }},
      {&u_k});

  if (pb.variant.radiation == RadiationModel::nonlinear && !pb.gamma_amb.empty()) {
    Assembler on_omega(*pb.omega);
    out.R_rad = on_omega.facet_bilinear(
        pb.Wh, pb.Wh, facet_rule(pb), pb.gamma_amb,
        {8, [se = P.sigma_SB * P.epsilon](const AsmContext& ctx, const BasisAt& dT,
                                          const BasisAt& phi) {
           const double T = ctx.coef[0][0];
           return 4.0 * se * T * T * T * dT.v * phi.v;
         }},
        {&T_k});
    out.has_rad = true;
  }
  return out;
}

struct ResidualVectors {
  Vec r_u, r_p, r_T;
  double norm_u = 0.0, norm_p = 0.0, norm_T = 0.0;
  double total() const { return std::sqrt(norm_u * norm_u + norm_p * norm_p + norm_T * norm_T); }
};

/// Nonlinear residual of the discrete system at a state that satisfies the
/// Dirichlet data; constrained rows are zeroed.
inline ResidualVectors assemble_residual(const Problem& pb, const ConstantBlocks& cb,
                                         const State& s) {
  const PhysicalParams& P = pb.params;
  ResidualVectors out;
  Assembler on_fluid = pb.fluid_assembler();
  const QuadratureRule qc = cell_rule(pb);
  const bool ns = pb.variant.flow == FlowModel::navier_stokes;

  // r_u = ell1 - a1(u,u,.) - a2(u,.) - b(p,.) - rho beta int T g.v
  out.r_u = cb.ell1;
  cb.N.multiply_add(s.u.coeffs, out.r_u, -1.0);
  cb.Bt.multiply_add(s.p.coeffs, out.r_u, -1.0);
  cb.D.multiply_add(s.T.coeffs, out.r_u, -1.0);
  if (ns) {
    const Vec conv = on_fluid.linear(
        pb.Vh, qc,
        {5, [rho = P.rho](const AsmContext& ctx, const BasisAt& v) {
           double adv = 0.0;
           for (int d = 0; d < 3; ++d)
             adv += ctx.coef[0][std::size_t(d)] * ctx.coef_grad[0][std::size_t(v.comp)][d];
           return rho * adv * v.v;
         }},
        {&s.u});
    axpy(-1.0, conv, out.r_u);
  }

  // r_p = -b(q, u) = + int q div u = -(B u).
  out.r_p.assign(pb.n_p(), 0.0);
  cb.B.multiply_add(s.u.coeffs, out.r_p, -1.0);

  // r_T = ell2 - e(u,T,.) - f(T,.), with the T^4 facet term when nonlinear.
  out.r_T = cb.ell2;
  cb.F_lin.multiply_add(s.T.coeffs, out.r_T, -1.0);
  const Vec adv_T = on_fluid.linear(
      pb.Wh, qc,
      {5, [rc = P.rho * P.Cp](const AsmContext& ctx, const BasisAt& phi) {
         double adv = 0.0;
         for (int d = 0; d < 3; ++d)
           adv += ctx.coef[0][std::size_t(d)] * ctx.coef_grad[1][0][d];
         return rc * adv * phi.v;
       }},
      {&s.u, &s.T});
  axpy(-1.0, adv_T, out.r_T);
  if (pb.variant.radiation == RadiationModel::nonlinear && !pb.gamma_amb.empty()) {
    Assembler on_omega(*pb.omega);
    const Vec rad = on_omega.facet_linear(
        pb.Wh, facet_rule(pb), pb.gamma_amb,
        {8, [se = P.sigma_SB * P.epsilon](const AsmContext& ctx, const BasisAt& phi) {
           const double T = ctx.coef[0][0];
           return se * T * T * T * T * phi.v;
         }},
        {&s.T});
    axpy(-1.0, rad, out.r_T);
  }

  // Constrained rows are satisfied by construction.
  const auto um = pb.u_mask();
  for (int i = 0; i < pb.n_u(); ++i)
    if (um[i]) out.r_u[i] = 0.0;
  const auto tm = pb.T_mask();
  for (int i = 0; i < pb.n_T(); ++i)
    if (tm[i]) out.r_T[i] = 0.0;

  out.norm_u = norm2(out.r_u);
  out.norm_p = norm2(out.r_p);
  out.norm_T = norm2(out.r_T);
  return out;
}

/// The Newton correction system: 3x3 blocks with Dirichlet rows/columns
/// eliminated, regrouped 2x2 as fluid (velocity+pressure) against heat.
struct NewtonSystem {
  SparseMatrix A_uu;  // V + W + N
  SparseMatrix Bt, B;
  SparseMatrix D;     // momentum rows, temperature columns
  SparseMatrix E1;    // temperature rows, velocity columns
  SparseMatrix A_TT;  // E2 + F_lin (+ radiation Jacobian)
  Vec r_u, r_p, r_T;
  int nu = 0, np = 0, nT = 0;

  int n_fluid() const { return nu + np; }
  int n_total() const { return nu + np + nT; }

  /// Matvec of the full Eq.-11 operator on [du; dp; dT].
  void apply(const Vec& x, Vec& y) const {
    y.assign(n_total(), 0.0);
    const Vec xu(x.begin(), x.begin() + nu);
    const Vec xp(x.begin() + nu, x.begin() + nu + np);
    const Vec xT(x.begin() + nu + np, x.end());
    Vec yu = A_uu.multiply(xu);
    Bt.multiply_add(xp, yu);
    D.multiply_add(xT, yu);
    const Vec yp = B.multiply(xu);
    Vec yT = A_TT.multiply(xT);
    E1.multiply_add(xu, yT);
    std::copy(yu.begin(), yu.end(), y.begin());
    std::copy(yp.begin(), yp.end(), y.begin() + nu);
    std::copy(yT.begin(), yT.end(), y.begin() + nu + np);
  }

  LinOp full_op() const {
    return {n_total(), [this](const Vec& x, Vec& y) { apply(x, y); }};
  }

  /// Matvec of the fluid block K00 = [[A_uu, Bt], [B, 0]].
  void apply_fluid(const Vec& x, Vec& y) const {
    y.assign(n_fluid(), 0.0);
    const Vec xu(x.begin(), x.begin() + nu);
    const Vec xp(x.begin() + nu, x.end());
    Vec yu = A_uu.multiply(xu);
    Bt.multiply_add(xp, yu);
    const Vec yp = B.multiply(xu);
    std::copy(yu.begin(), yu.end(), y.begin());
    std::copy(yp.begin(), yp.end(), y.begin() + nu);
  }

  LinOp fluid_op() const {
    return {n_fluid(), [this](const Vec& x, Vec& y) { apply_fluid(x, y); }};
  }

  Vec rhs() const {
    Vec b(n_total());
    std::copy(r_u.begin(), r_u.end(), b.begin());
    std::copy(r_p.begin(), r_p.end(), b.begin() + nu);
    std::copy(r_T.begin(), r_T.end(), b.begin() + nu + np);
    return b;
  }

  /// Constant pressure mode embedded in the full vector.
  Vec pressure_nullspace() const {
    Vec z(n_total(), 0.0);
    std::fill(z.begin() + nu, z.begin() + nu + np, 1.0);
    return z;
  }

  Vec pressure_nullspace_fluid() const {
    Vec z(n_fluid(), 0.0);
    std::fill(z.begin() + nu, z.end(), 1.0);
    return z;
  }
};

inline NewtonSystem build_newton_system(const Problem& pb, const ConstantBlocks& cb,
                                        const StateBlocks& sb, ResidualVectors res) {
  NewtonSystem sys;
  sys.nu = pb.n_u();
  sys.np = pb.n_p();
  sys.nT = pb.n_T();

  // A_uu = N + V + W (state blocks share N's pattern superset; merge by sum).
  sys.A_uu = cb.N;
  auto add_into = [](SparseMatrix& acc, const SparseMatrix& add) {
    if (add.rows() == 0) return;
    require(acc.nnz() == add.nnz(), "build_newton_system: block pattern mismatch");
    for (std::size_t k = 0; k < acc.nnz(); ++k) acc.values()[k] += add.values()[k];
  };
  add_into(sys.A_uu, sb.V);
  add_into(sys.A_uu, sb.W);

  sys.A_TT = cb.F_lin;
  // E2 has the fluid-cell pattern, F the full-domain pattern: merge entrywise.
  if (sb.E2.rows() > 0) {
    const auto& rp = sb.E2.row_ptr();
    const auto& ci = sb.E2.col_idx();
    for (int i = 0; i < sb.E2.rows(); ++i)
      for (int k = rp[i]; k < rp[i + 1]; ++k)
        sys.A_TT.add(i, ci[k], sb.E2.values()[k]);
  }
  if (sb.has_rad) {
    const auto& rp = sb.R_rad.row_ptr();
    const auto& ci = sb.R_rad.col_idx();
    for (int i = 0; i < sb.R_rad.rows(); ++i)
      for (int k = rp[i]; k < rp[i + 1]; ++k)
        sys.A_TT.add(i, ci[k], sb.R_rad.values()[k]);
  }

  sys.Bt = cb.Bt;
  sys.B = cb.B;
  sys.D = cb.D;
  sys.E1 = sb.E1;

  // Dirichlet elimination: corrections vanish on constrained dofs.
  const std::vector<char> um = pb.u_mask();
  const std::vector<char> tm = pb.T_mask();
  Vec zero_u(sys.nu, 0.0), zero_T(sys.nT, 0.0);
  sys.A_uu.eliminate_dirichlet(um, res.r_u, zero_u);
  sys.Bt.zero_rows(um);
  sys.B.zero_cols(um);
  sys.D.zero_rows(um);
  sys.E1.zero_cols(um);
  sys.A_TT.eliminate_dirichlet(tm, res.r_T, zero_T);
  sys.E1.zero_rows(tm);
  sys.D.zero_cols(tm);

  sys.r_u = std::move(res.r_u);
  sys.r_p = std::move(res.r_p);
  sys.r_T = std::move(res.r_T);
  return sys;
}

}  // namespace ocuflow
