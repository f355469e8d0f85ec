// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "leelab/bounds.hpp"
#include "leelab/hamiltonian.hpp"
#include "leelab/leelab.h"
#include "leelab/lightfront.hpp"
#include "leelab/spectral.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace leelab;
using testing_support::kPi;

namespace {

constexpr double kRenormTol = 1e-12;
constexpr double kOracleEnergyTol = 1e-9;
constexpr double kOverlapTol = 1e-8;
constexpr double kNormTol = 1e-8;
constexpr double kCutoffFormTol = 1e-12;
constexpr double kFhTol = 1e-6;
constexpr double kFitR2 = 0.999;
constexpr double kHeatRelTol = 1e-10;
constexpr double kShortTimeLo = 0.99, kShortTimeHi = 1.01;
constexpr double kResolventTol = 1e-10;
constexpr double kDecaySlopeLo = -1.2, kDecaySlopeHi = -0.8;
constexpr double kClosedFormTol = 1e-12;
constexpr double kBetaSlopeTol = 0.1;

struct Instance {
  std::string label;
  Model model;
};

std::vector<Instance> oracle_instances() {
  struct Geometry {
    std::string label;
    ManifoldSpec spec;
    double cutoff;
    bool prune;
  };
  const std::vector<Geometry> geoms{
      {"torus", testing_support::square_torus(), 4.5, true},
      {"torus-offset", testing_support::square_torus(0.7, 1.3), 2.0, false},
      {"sphere", ManifoldSpec::sphere(1.0), 90.0, true},
  };
  std::vector<Instance> out;
  for (const auto& g : geoms)
    for (int n : {1, 2})
      for (double lambda : {0.25, 0.5, 1.0, 2.0}) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s M=%zu n=%d lambda=%g", g.label.c_str(),
                      build_catalog(g.spec, g.cutoff, 1.0, g.prune).size(), n, lambda);
        out.push_back({buf, testing_support::model(g.spec, g.cutoff,
                                                   testing_support::params(lambda, n), g.prune)});
      }
  return out;
}

int failures = 0;

void report(int id, bool pass, const std::string& what, double seconds) {
  std::printf("%s criterion %2d: %s [%.1f s]\n", pass ? "PASS" : "FAIL", id, what.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

void note(const char* fmt, double a = 0, double b = 0, double c = 0) {
  std::printf("      ");
  std::printf(fmt, a, b, c);
  std::printf("\n");
}

template <class F>
void criterion(int id, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string what;
  bool pass = false;
  try {
    pass = body(what);
  } catch (const std::exception& e) {
    what += std::string(" exception: ") + e.what();
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, pass, what, dt);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double oracle_ground(const Model& model, Eigen::VectorXd& vec) {
  const auto modes = testing_support::mode_data(model.catalog());
  auto h = oracle::hamiltonian(modes, model.coupling(),
                               oracle::bare_mass(modes, model.coupling(), model.mu_p()), model.n());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  vec = es.eigenvectors().col(0);
  return es.eigenvalues()(0);
}

bool c1(std::string& what) {
  double worst = 0;
  bool left_positive = true;
  int count = 0;
  for (auto spec : {testing_support::square_torus(), ManifoldSpec::sphere(1.0)}) {
    for (double cutoff : logspace(100.0, 1000.0, 12)) {
      auto model = testing_support::model(spec, cutoff, testing_support::params(1.0, 0));
      auto sector = enumerate_sector(model.catalog(), 0);
      worst = std::max(worst, std::abs(ground_energy(model, sector).E_gr - model.mu_p()));
      PrincipalOperator op(model, sector);
      for (double d : {1e-9, 1e-6, 1e-3, 1.0})
        left_positive = left_positive && op.matrix(model.mu_p() - d)(0, 0) > 0;
      ++count;
    }
  }
  what = fmt("single-boson root equals mu_p on %g torus/sphere cutoffs, max |E_gr - mu_p| = %.2e "
             "(tol %.0e)",
             count, worst, kRenormTol) +
         (left_positive ? ", Phi > 0 just below" : ", Phi not positive below the root");
  return worst <= kRenormTol && left_positive;
}

bool c2(const std::vector<Instance>& instances, std::string& what) {
  double worst_e = 0, worst_overlap = 0, worst_norm = 0;
  for (const auto& inst : instances) {
    const auto& model = inst.model;
    const int n = model.n();
    auto sector = enumerate_sector(model.catalog(), n);
    auto root = ground_energy(model, sector);
    auto wf = riesz_wavefunction(model, sector, root.E_gr, root.ground_vector);

    Eigen::VectorXd ref;
    const double e0 = oracle_ground(model, ref);
    const auto M = model.catalog().size();
    auto upper = enumerate_sector(model.catalog(), n + 1);
    const auto up = testing_support::sector_positions(upper, oracle::states(M, n + 1));
    const auto low = testing_support::sector_positions(sector, oracle::states(M, n));
    Eigen::VectorXd psi(ref.size());
    for (std::size_t i = 0; i < up.size(); ++i) psi(Eigen::Index(i)) = wf.upper(Eigen::Index(up[i]));
    for (std::size_t i = 0; i < low.size(); ++i)
      psi(Eigen::Index(up.size() + i)) = wf.lower(Eigen::Index(low[i]));

    const double de = std::abs(root.E_gr - e0);
    const double dov = 1.0 - std::abs(psi.dot(ref)) / psi.norm();
    const double dn = std::max(std::abs(wf.normalization - 1.0), std::abs(wf.fh_identity - 1.0));
    worst_e = std::max(worst_e, de);
    worst_overlap = std::max(worst_overlap, dov);
    worst_norm = std::max(worst_norm, dn);
    if (de > kOracleEnergyTol || dov > kOverlapTol || dn > kNormTol)
      std::printf("      %s: |dE| %.2e, 1-overlap %.2e, norm %.2e\n", inst.label.c_str(), de, dov, dn);
  }
  what = fmt("root vs explicit Hamiltonian on %g instances: max |dE| = %.2e, max 1-overlap = %.2e",
             double(instances.size()), worst_e, worst_overlap) +
         fmt(", max normalization defect = %.2e", worst_norm);
  return worst_e <= kOracleEnergyTol && worst_overlap <= kOverlapTol && worst_norm <= kNormTol;
}

bool c3(const std::vector<Instance>& instances, std::string& what) {
  double worst = 0;
  for (const auto& inst : instances) {
    const auto& model = inst.model;
    const auto modes = testing_support::mode_data(model.catalog());
    const double mu = oracle::bare_mass(modes, model.coupling(), model.mu_p());
    auto sector = enumerate_sector(model.catalog(), model.n());
    const auto states = oracle::states(modes.size(), model.n());
    const auto pos = testing_support::sector_positions(sector, states);
    const double thr = model.threshold();
    for (Complex E : {Complex(thr - 2.0, 0), Complex(thr - 0.4, 0), Complex(thr, 0),
                      Complex(thr - 1.0, 0.8), Complex(thr - 0.1, -2.0)}) {
      auto ref = oracle::phi_cutoff<Complex>(modes, model.coupling(), mu, states, E);
      auto got = assemble_phi(model, sector, E).matrix;
      const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
      for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = 0; j < states.size(); ++j)
          worst = std::max(worst, std::abs(ref(Eigen::Index(i), Eigen::Index(j)) -
                                           got(Eigen::Index(pos[i]), Eigen::Index(pos[j]))) /
                                      scale);
    }
  }
  what = fmt("renormalized Phi vs normal-ordered cutoff form on %g instances x 5 E: max entry "
             "difference = %.2e (tol %.0e)",
             double(instances.size()), worst, kCutoffFormTol);
  return worst <= kCutoffFormTol;
}

bool c4(const std::vector<Instance>& instances, std::string& what) {
  std::vector<Model> models;
  for (const auto& i : instances) models.push_back(i.model);
  {
    auto cat = build_catalog(testing_support::square_torus(0.7, 1.3), 1.0, 1.0, false);
    std::vector<Mode> kept(cat.modes().begin(), cat.modes().begin() + 4);
    models.emplace_back(ModeCatalog(cat.spec(), cat.cutoff(), cat.mass(), false, kept),
                        testing_support::params(0.5, 1));
  }
  double worst_fh = 0, worst_step = -INFINITY;
  std::size_t samples = 0;
  for (const auto& model : models) {
    auto sector = enumerate_sector(model.catalog(), model.n());
    PrincipalOperator op(model, sector);
    const double thr = model.threshold();
    auto grid = linspace(thr - 3.0, thr - 0.01, 50);
    auto flow = eigen_flow(model, sector, grid);
    samples += flow.size();
    for (std::size_t i = 0; i < flow.size(); ++i) {
      const auto& s = flow[i];
      const double h = 1e-5 * (1 + std::abs(s.E));
      const double fd =
          (lowest_eigen(op, s.E + h).value - lowest_eigen(op, s.E - h).value) / (2 * h);
      worst_fh = std::max(worst_fh, std::abs(s.fh_derivative - fd) / std::abs(fd));
      if (i > 0) worst_step = std::max(worst_step, s.eigenvalues[0] - flow[i - 1].eigenvalues[0]);
    }
  }
  what = fmt("%g flow samples on 50-point grids: max step of omega_0 = %.2e (< 0), max FH vs "
             "central-difference error = %.2e",
             double(samples), worst_step, worst_fh);
  return worst_step < 0 && worst_fh < kFhTol;
}

bool c5(const std::vector<Instance>& instances, std::string& what) {
  bool ok = true;
  double min_gap_lo = INFINITY, min_gap_hi = INFINITY;
  for (const auto& inst : instances) {
    const auto& model = inst.model;
    auto sector = enumerate_sector(model.catalog(), model.n());
    const double C = default_heat_kernel_constant(model.catalog().spec());
    auto r = bound_report(model, sector, C);
    const double e = r.e_gr.value();
    min_gap_lo = std::min(min_gap_lo, e - r.lower_bound);
    min_gap_hi = std::min(min_gap_hi, r.threshold - e);
    ok = ok && r.lower_bound <= e && e < r.threshold && r.variational.matrix_element < 0 &&
         r.variational_dominates;
  }
  // the printed closed form against the brute-force expectation
  auto model = testing_support::model(testing_support::square_torus(), 10.0,
                                      testing_support::params(1.0, 1));
  auto v = variational_upper(model, enumerate_sector(model.catalog(), 1));
  note("trial state at m=1, mu_p=0.5, n=1, lambda=1, V=4pi^2: brute force %.6f, printed form %.6f, "
       "one-term recomputation %.6f",
       v.matrix_element, v.printed_closed_form, v.recomputed_closed_form);
  note("printed/brute-force ratio %.4f; brute force agrees with the recomputation to %.1e",
       v.printed_closed_form / v.matrix_element,
       std::abs(v.matrix_element - v.recomputed_closed_form));
  what = fmt("compact_lower <= E_gr < n m + mu_p on all instances (min margins %.3e below, %.3e "
             "above); variational value %.5f < 0",
             min_gap_lo, min_gap_hi, v.matrix_element);
  return ok && v.matrix_element < 0;
}

bool c6(std::string& what) {
  std::vector<double> x, y;
  for (double cutoff : logspace(100.0, 1000.0, 12)) {
    auto model = testing_support::model(testing_support::square_torus(), cutoff,
                                        testing_support::params(1.0, 1));
    x.push_back(std::log(cutoff));
    y.push_back(bare_mass(model).bare_mass);
  }
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double b = (sy - a * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss_res += std::pow(y[i] - a * x[i] - b, 2);
    ss_tot += std::pow(y[i] - sy / n, 2);
  }
  const double r2 = 1 - ss_res / ss_tot;
  what = fmt("mu(Lambda) = a ln Lambda + b on torus, Lambda in [100, 1000]: R^2 = %.5f, a = %.4f "
             "(lambda^2/8pi = %.4f)",
             r2, a, 1.0 / (8 * kPi));
  return r2 > kFitR2 && a > 0;
}

bool c7(std::string& what) {
  const auto torus = testing_support::square_torus();
  double worst = 0;
  for (double t : logspace(1e-2, 10.0, 200)) {
    const double s = heat_kernel_diag(torus, t);
    const double i = heat_kernel_diag_images(torus, t);
    worst = std::max(worst, std::abs(s - i) / i);
  }
  const double t0 = 1e-4;
  const double st = 4 * kPi * t0 * heat_kernel_diag(torus, t0);
  const double ss = 4 * kPi * t0 * heat_kernel_diag(ManifoldSpec::sphere(1.0), t0);
  bool bound = true;
  double C_t = 0, C_s = 0;
  for (auto spec : {torus, ManifoldSpec::sphere(1.0)}) {
    const double C = heat_kernel_bound_constant(spec, logspace(1e-4, 10.0, 200));
    (spec.kind == ManifoldKind::torus ? C_t : C_s) = C;
    for (double t : logspace(1e-4, 10.0, 2000))
      bound = bound && heat_kernel_diag(spec, t) <= (1.0 / spec.volume() + C / t) * (1 + 1e-12);
  }
  what = fmt("spectral vs image sum max rel err %.2e; 4 pi t K_t at t=1e-4: torus %.5f, sphere %.5f",
             worst, st, ss) +
         fmt("; C = %.6f (torus), %.6f (sphere) holds on 10x denser grid", C_t, C_s);
  return worst < kHeatRelTol && st >= kShortTimeLo && st <= kShortTimeHi && ss >= kShortTimeLo &&
         ss <= kShortTimeHi && bound;
}

bool c8(const std::vector<Instance>& instances, std::string& what) {
  std::mt19937_64 rng(4242);
  double worst = 0, worst_sym = 0;
  for (const auto& inst : instances) {
    const auto& model = inst.model;
    auto h = assemble_h(model);
    auto sector = enumerate_sector(model.catalog(), model.n());
    const double e0 = ground_energy(model, sector).E_gr;
    const double thr = model.threshold();
    std::uniform_real_distribution<double> real_e(e0 - 5.0, e0 - 0.1);
    std::uniform_real_distribution<double> re(e0 - 3.0, thr);
    std::uniform_real_distribution<double> im(0.1, 2.0);
    for (int k = 0; k < 20; ++k) {
      worst = std::max(worst,
                       pseudo_resolvent_residual(model, h, Complex(real_e(rng)), Complex(real_e(rng))));
      const Complex E(re(rng), im(rng));
      worst = std::max(worst, pseudo_resolvent_residual(model, h, E, std::conj(E)));
      if (k < 5) {
        auto a = block_resolvent(model, h, E).full();
        auto b = block_resolvent(model, h, std::conj(E)).full();
        worst_sym = std::max(worst_sym, DenseMatrix<Complex>(b - a.adjoint()).cwiseAbs().maxCoeff());
      }
    }
  }
  what = fmt("20 real + 20 conjugate-complex pairs on %g instances: max residual %.2e, max "
             "|R(conj E) - R(E)^*| %.2e",
             double(instances.size()), worst, worst_sym);
  return worst < kResolventTol && worst_sym < kResolventTol;
}

bool c9(const std::vector<Instance>& instances, std::string& what) {
  const auto mags = logspace(1e2, 1e6, 9);
  double lo = INFINITY, hi = -INFINITY;
  std::size_t probes_total = 0;
  for (const auto& inst : instances) {
    auto h = assemble_h(inst.model);
    auto probes = decay_probes(h);
    probes_total += probes.size();
    auto rows = decay_check(inst.model, h, mags, probes);
    std::vector<std::vector<double>> per(probes.size());
    for (const auto& r : rows) per[r.probe].push_back(r.norm);
    for (const auto& y : per) {
      const double s = loglog_slope(mags, y);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  what = fmt("%g probes, |lambda_k| in [1e2, 1e6]: log-log slopes in [%.4f, %.4f]",
             double(probes_total), lo, hi);
  return lo >= kDecaySlopeLo && hi <= kDecaySlopeHi;
}

bool c10(std::string& what) {
  using namespace leelab::lightfront;
  Params p;
  p.mass = 1.0;
  p.mu_p = 0.5;
  p.coupling = 1.0;
  p.n = 2;
  const double edge = (p.n - 1) * p.mass + p.mu_p;
  bool u_ok = true;
  double worst_ratio = 0;
  for (double E : linspace(edge - 3.0, edge - 0.05, 10)) {
    auto u = u_norm_bound(p, E);
    u_ok = u_ok && u.quadrature_value <= u.closed_form;
    worst_ratio = std::max(worst_ratio, u.quadrature_value / u.closed_form);
  }
  const double closed = u_norm_bound(p, 0.0).closed_form;
  const bool closed_ok = std::abs(closed - kPi / 1.5) <= kClosedFormTol;

  bool k1_ok = true;
  double min_gap = INFINITY;
  for (double E : linspace(-2.0, p.mu_p, 10))
    for (double h0 : linspace(0.0, 3.0, 10)) {
      const double v = k1(p, E, h0).value;
      const double lb = k1_log_lower_bound(p, E, h0);
      min_gap = std::min(min_gap, v - lb);
      k1_ok = k1_ok && v >= lb && k1_chain_min_slack(p, E, h0) >= 0;
    }

  Params pb = p;
  pb.n = 1;
  const auto mags = logspace(1e2, 1e6, 9);
  std::vector<double> printed, gnorm;
  for (double m : mags) {
    auto b = beta_decay(pb, m);
    printed.push_back(b.printed);
    gnorm.push_back(b.g_norm_sq);
  }
  const double s1 = loglog_slope(mags, printed), s2 = loglog_slope(mags, gnorm);
  const bool beta_ok = std::abs(s1 + 1) <= kBetaSlopeTol && std::abs(s2 + 1) <= kBetaSlopeTol;

  what = fmt("U quadrature <= closed form on 10 E (max ratio %.4f); closed form at E=0 = %.12f; ",
             worst_ratio, closed) +
         fmt("K1 - C0 log bound >= %.3e on 10x10 grid; beta slopes %.4f (printed), %.4f (||g||^2)",
             min_gap, s1, s2);
  return u_ok && closed_ok && k1_ok && beta_ok;
}

bool c11(std::string& what) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "leelab-acceptance-determinism";
  fs::remove_all(dir);
  const std::string dir_s = dir.string();
  leelab_session* s = nullptr;
  if (leelab_session_create(nullptr, &s) != LEELAB_OK) {
    what = std::string("session: ") + leelab_last_error();
    return false;
  }
  leelab_run_options opt;
  leelab_run_options_init(&opt);
  opt.use_cache = 0;
  opt.output_directory = dir_s.c_str();
  bool same = true, passed = true;
  std::string diffs;
  for (int i = 0; i < leelab_command_count(); ++i) {
    const char* name = leelab_command_name(i);
    std::string payload[2];
    for (auto& pl : payload) {
      leelab_result* r = nullptr;
      if (leelab_run(s, name, &opt, &r) != LEELAB_OK) {
        what = std::string(name) + ": " + leelab_last_error();
        leelab_session_destroy(s);
        return false;
      }
      pl = leelab_result_payload(r);
      passed = passed && leelab_result_passed(r);
      leelab_result_destroy(r);
    }
    if (payload[0] != payload[1]) {
      same = false;
      diffs += std::string(" ") + name;
    }
  }
  leelab_session_destroy(s);
  fs::remove_all(dir);
  what = std::string("7 default commands run twice through the C interface: payloads ") +
         (same ? "byte-identical" : "differ in" + diffs) +
         (passed ? ", all assertions pass" : ", some assertions failed");
  return same && passed;
}

}  // namespace

int main() {
  const auto instances = oracle_instances();
  std::printf("oracle instances:");
  for (std::size_t i = 0; i < instances.size(); i += 8) std::printf(" [%s ...]", instances[i].label.c_str());
  std::printf("\n");

  criterion(1, [&](std::string& w) { return c1(w); });
  criterion(2, [&](std::string& w) { return c2(instances, w); });
  criterion(3, [&](std::string& w) { return c3(instances, w); });
  criterion(4, [&](std::string& w) { return c4(instances, w); });
  criterion(5, [&](std::string& w) { return c5(instances, w); });
  criterion(6, [&](std::string& w) { return c6(w); });
  criterion(7, [&](std::string& w) { return c7(w); });
  criterion(8, [&](std::string& w) { return c8(instances, w); });
  criterion(9, [&](std::string& w) { return c9(instances, w); });
  criterion(10, [&](std::string& w) { return c10(w); });
  criterion(11, [&](std::string& w) { return c11(w); });

  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
