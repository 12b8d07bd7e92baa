#include <lrb/cli.hpp>

#include <cstdlib>
#include <iostream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include <lrb/bounds.hpp>
#include <lrb/ed.hpp>
#include <lrb/hopseries.hpp>
#include <lrb/result_grid.hpp>
#include <lrb/tfim.hpp>
#include <lrb/version.hpp>
#include <lrb/xy.hpp>

namespace lrb::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double_token(const std::string& tok, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw std::invalid_argument(std::string("cannot parse ") + what + " '" + tok + "'");
  return v;
}

long parse_int_token(const std::string& tok, const char* what) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw std::invalid_argument(std::string("cannot parse ") + what + " '" + tok + "'");
  return v;
}

}  // namespace

std::vector<double> parse_time_grid(const std::string& token) {
  const auto parts = split(token, ':');
  if (parts.size() == 1) {
    const double v = parse_double_token(parts[0], "time");
    if (!(v >= 0.0)) throw std::invalid_argument("time must be >= 0, got '" + token + "'");
    return {v};
  }
  if (parts.size() != 3)
    throw std::invalid_argument("time grid must be 'start:stop:count' or a single value, got '" +
                                token + "'");
  const double start = parse_double_token(parts[0], "time grid start");
  const double stop = parse_double_token(parts[1], "time grid stop");
  const long count = parse_int_token(parts[2], "time grid count");
  if (!(start >= 0.0)) throw std::invalid_argument("time grid start must be >= 0");
  if (!(stop >= start)) throw std::invalid_argument("time grid needs stop >= start");
  if (count < 2) throw std::invalid_argument("time grid count must be >= 2");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
  out.front() = start;  // endpoints exact, not rounded
  out.back() = stop;
  return out;
}

std::pair<int, int> parse_r_range(const std::string& token) {
  const auto parts = split(token, ':');
  long lo = 0, hi = 0;
  if (parts.size() == 1) {
    lo = hi = parse_int_token(parts[0], "r");
  } else if (parts.size() == 2) {
    lo = parse_int_token(parts[0], "r range lo");
    hi = parse_int_token(parts[1], "r range hi");
  } else {
    throw std::invalid_argument("r range must be 'lo:hi' or a single integer, got '" + token +
                                "'");
  }
  if (lo < 1) throw std::invalid_argument("r must be >= 1, got '" + token + "'");
  if (hi < lo) throw std::invalid_argument("r range needs hi >= lo, got '" + token + "'");
  return {static_cast<int>(lo), static_cast<int>(hi)};
}

std::vector<Alpha> parse_alpha_list(const std::string& token) {
  std::vector<Alpha> out;
  for (const auto& part : split(token, ',')) {
    if (part.empty())
      throw std::invalid_argument("empty alpha token in '" + token + "'");
    out.push_back(Alpha::parse(part));
  }
  return out;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double alpha_as_double(const Alpha& a) { return a.is_infinite() ? kInf : a.value(); }

std::string alpha_token(const Alpha& a) {
  return a.is_infinite() ? "inf" : grid::format_double(a.value());
}

Boundary parse_boundary(const std::string& s) {
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  throw std::invalid_argument("boundary must be 'open' or 'periodic', got '" + s + "'");
}

MuPolicy parse_mu(const std::string& s) {
  if (s == "opt") return MuPolicy::optimized();
  return MuPolicy::fixed(parse_double_token(s, "mu"));
}

// optional output-directory override, the only environment variable read
std::string resolve_out_path(const std::string& out) {
  const char* dir = std::getenv("LRB_OUT_DIR");
  if (out.empty() || !dir || !*dir || out.front() == '/') return out;
  std::string d = dir;
  if (d.back() != '/') d += '/';
  return d + out;
}

struct CommonOpts {
  std::string out;
  std::string format = "csv";
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--out", c.out,
                  "output file (default: stdout); relative paths honor LRB_OUT_DIR");
  cmd->add_option("--format", c.format, "csv or json (default csv)");
  cmd->add_option("--threads", c.threads, "Eigen thread cap (default 1)");
}

void apply_common(const CommonOpts& c) {
  if (c.threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (c.format != "csv" && c.format != "json")
    throw std::invalid_argument("format must be 'csv' or 'json', got '" + c.format + "'");
  Eigen::setNbThreads(c.threads);
}

void emit(const grid::ResultGrid& g, const CommonOpts& c) {
  if (c.out.empty()) {
    if (c.format == "csv")
      grid::write_csv(g, std::cout);
    else
      grid::write_json(g, std::cout);
  } else {
    grid::write_file(g, resolve_out_path(c.out), c.format);
  }
}

void meta_head(grid::ResultGrid& g, const char* command) {
  g.add_meta("tool", kVersion);
  g.add_meta("command", command);
}

void meta_tail(grid::ResultGrid& g, const CommonOpts& c) {
  g.add_meta("format", c.format);
  g.add_meta("threads", std::to_string(c.threads));
}

// shared --check-bounds plumbing: appends mu_used,hybrid,hk,bound_ok cells
struct BoundChecker {
  BoundConstants k;
  MuPolicy policy;
  bool all_ok = true;
  std::string first_violation;

  BoundChecker(const Alpha& alpha, const MuPolicy& p)
      : k(bound_constants(CouplingModel(alpha, Geometry::infinite()))), policy(p) {}

  void append(std::vector<grid::Cell>& row, int r, double t, double q) {
    const HybridEval h = hybrid_bound(static_cast<double>(r), t, policy, k);
    const double hkv = k.has_hk() ? hk_bound(static_cast<double>(r), t, k) : kNaN;
    const bool ok = q <= h.value && (!k.has_hk() || q <= hkv);
    if (!ok && first_violation.empty())
      first_violation = "bound violated: alpha=" + alpha_token(k.alpha) +
                        " r=" + std::to_string(r) + " t=" + grid::format_double(t) +
                        " Q=" + grid::format_double(q) +
                        " hybrid=" + grid::format_double(h.value) +
                        " hk=" + grid::format_double(hkv);
    all_ok = all_ok && ok;
    row.emplace_back(h.mu);
    row.emplace_back(h.value);
    row.emplace_back(hkv);
    row.emplace_back(std::string(ok ? "true" : "false"));
  }
};

// dense-oracle Q over the same (times x rs) grid as a simulator run
Eigen::MatrixXd dense_q_table(const ed::DenseModelSpec& spec, const std::vector<int>& rs,
                              const std::vector<double>& times) {
  const int n = spec.sites();
  const ed::DenseEvolver ev(ed::build_dense_hamiltonian(spec));
  const Eigen::MatrixXcd u = ed::quench_unitary(n, 0);
  const Eigen::VectorXcd psi = ed::all_down_state(n);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()),
                      static_cast<Eigen::Index>(rs.size()));
  for (std::size_t ri = 0; ri < rs.size(); ++ri) {
    const int site = site_at_distance(0, rs[ri], spec.model.geometry);
    const Eigen::MatrixXcd a = ed::site_operator(ed::pauli_x(), site, n);
    const std::vector<double> q = ed::qrt_dense(ev, u, a, psi, times);
    for (std::size_t ti = 0; ti < times.size(); ++ti)
      out(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(ri)) = q[ti];
  }
  return out;
}

int max_distance(int n, Boundary b) { return b == Boundary::periodic ? n / 2 : n - 1; }

// effective r range for a chain, with the range echo used in the metadata
std::pair<int, int> sim_r_range(const std::string& token, int n, Boundary b,
                                std::string* echo) {
  const int rmax = max_distance(n, b);
  if (rmax < 1) throw std::invalid_argument("need N >= 2 for distance r >= 1");
  std::pair<int, int> rr;
  if (token.empty()) {
    rr = {1, rmax};
    *echo = "1:" + std::to_string(rmax);
  } else {
    rr = parse_r_range(token);
    if (rr.second > rmax)
      throw std::invalid_argument("r range exceeds the chain: max distance is " +
                                  std::to_string(rmax) + " for N=" + std::to_string(n) + " " +
                                  to_string(b));
    *echo = token;
  }
  return rr;
}

std::vector<int> range_to_vector(std::pair<int, int> rr) {
  std::vector<int> rs;
  rs.reserve(static_cast<std::size_t>(rr.second - rr.first + 1));
  for (int r = rr.first; r <= rr.second; ++r) rs.push_back(r);
  return rs;
}

struct BoundEvalArgs {
  std::string alpha, r, t;
  std::string mu = "opt";
  CommonOpts common;
};

int cmd_bound_eval(const BoundEvalArgs& a) {
  apply_common(a.common);
  const auto alphas = parse_alpha_list(a.alpha);
  const auto rr = parse_r_range(a.r);
  const auto times = parse_time_grid(a.t);
  const MuPolicy policy = parse_mu(a.mu);

  grid::ResultGrid g;
  meta_head(g, "bound eval");
  g.add_meta("alpha", a.alpha);
  g.add_meta("r", a.r);
  g.add_meta("t", a.t);
  g.add_meta("mu", a.mu);
  meta_tail(g, a.common);
  g.columns = {"alpha", "r", "t", "mu_used", "hybrid", "log10_hybrid_raw", "hk"};

  for (const Alpha& alpha : alphas) {
    const BoundConstants k = bound_constants(CouplingModel(alpha, Geometry::infinite()));
    for (int r = rr.first; r <= rr.second; ++r) {
      for (double t : times) {
        const HybridEval h = hybrid_bound(static_cast<double>(r), t, policy, k);
        const double hkv = k.has_hk() ? hk_bound(static_cast<double>(r), t, k) : kNaN;
        auto& row = g.add_row();
        row = {alpha_as_double(alpha), static_cast<long long>(r), t,
               h.mu,                   h.value,                   h.log10_raw,
               hkv};
      }
    }
  }
  emit(g, a.common);
  return 0;
}

struct BoundContourArgs {
  std::string alpha, r;
  std::string mu = "opt";
  double eps = 1e-3;
  CommonOpts common;
};

// log(long/short) at (r, t*(r)), the quantity whose sign change locates the
// onset of long-range dominance along the contour
double contour_log_ratio(double r, double eps, const MuPolicy& policy,
                         const BoundConstants& k) {
  const double tstar = contour_time(eps, r, policy, k);
  const double mu =
      policy.kind == MuPolicy::Kind::fixed ? policy.mu : optimize_mu(r, tstar, k);
  return log_long_range_term(r, tstar, mu, k) - log_short_range_term(r, tstar, mu, k);
}

int cmd_bound_contour(const BoundContourArgs& a) {
  apply_common(a.common);
  const auto alphas = parse_alpha_list(a.alpha);
  const auto rr = parse_r_range(a.r);
  const MuPolicy policy = parse_mu(a.mu);
  if (!(a.eps > 0.0 && a.eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");

  grid::ResultGrid g;
  meta_head(g, "bound contour");
  g.add_meta("alpha", a.alpha);
  g.add_meta("r", a.r);
  g.add_meta("eps", grid::format_double(a.eps));
  g.add_meta("mu", a.mu);
  meta_tail(g, a.common);
  g.columns = {"alpha", "r", "t_star_hybrid", "t_star_hk", "binding"};

  std::vector<std::pair<std::string, std::string>> rc_meta;
  for (const Alpha& alpha : alphas) {
    const BoundConstants k = bound_constants(CouplingModel(alpha, Geometry::infinite()));
    std::vector<double> gvals;
    gvals.reserve(static_cast<std::size_t>(rr.second - rr.first + 1));
    for (int r = rr.first; r <= rr.second; ++r) {
      const double tstar = contour_time(a.eps, static_cast<double>(r), policy, k);
      const double thk =
          k.has_hk() ? hk_contour_time(a.eps, static_cast<double>(r), k) : kNaN;
      const double mu = policy.kind == MuPolicy::Kind::fixed
                            ? policy.mu
                            : optimize_mu(static_cast<double>(r), tstar, k);
      const double lr = log_long_range_term(static_cast<double>(r), tstar, mu, k) -
                        log_short_range_term(static_cast<double>(r), tstar, mu, k);
      gvals.push_back(lr);
      auto& row = g.add_row();
      row = {alpha_as_double(alpha), static_cast<long long>(r), tstar, thk,
             std::string(lr > 0.0 ? "long" : "short")};
    }
    // onset of permanent long-range dominance along the contour
    std::string rc = "inf";
    if (!alpha.is_infinite()) {
      int last_short = -1;
      for (std::size_t i = 0; i < gvals.size(); ++i)
        if (gvals[i] <= 0.0) last_short = static_cast<int>(i);
      if (last_short < 0) {
        rc = grid::format_double(static_cast<double>(rr.first));
      } else if (last_short + 1 < static_cast<int>(gvals.size())) {
        double lo = rr.first + last_short, hi = lo + 1.0;
        for (int it = 0; it < 30; ++it) {
          const double mid = 0.5 * (lo + hi);
          (contour_log_ratio(mid, a.eps, policy, k) <= 0.0 ? lo : hi) = mid;
        }
        rc = grid::format_double(0.5 * (lo + hi));
      }
    }
    rc_meta.emplace_back("crossover_rc_alpha_" + alpha_token(alpha), rc);
  }
  for (auto& [key, value] : rc_meta) g.add_meta(std::move(key), std::move(value));
  emit(g, a.common);
  return 0;
}

struct SimXYArgs {
  std::string alpha, t;
  int n = 0;
  std::string boundary = "open";
  std::string r;
  std::string mu = "opt";
  bool check_bounds = false;
  bool oracle_check = false;
  CommonOpts common;
};

struct SimTFIMArgs {
  SimXYArgs base;
  double bz = 0.5;
  int krylov_m = 30;
  double krylov_dt = 0.05;
  double krylov_tol = 1e-10;
};

// one simulator run per alpha, assembled into the shared grid layout
int run_sim(const SimXYArgs& a, const SimTFIMArgs* tf) {
  apply_common(a.common);
  const auto alphas = parse_alpha_list(a.alpha);
  const auto times = parse_time_grid(a.t);
  const Boundary b = parse_boundary(a.boundary);
  const Geometry geom = Geometry::finite(a.n, b);
  std::string r_echo;
  const auto rr = sim_r_range(a.r, a.n, b, &r_echo);
  const std::vector<int> rs = range_to_vector(rr);
  const MuPolicy policy = parse_mu(a.mu);
  if (a.oracle_check) ed::check_dense_budget(a.n);

  grid::ResultGrid g;
  meta_head(g, tf ? "sim tfim" : "sim xy");
  g.add_meta("alpha", a.alpha);
  g.add_meta("N", std::to_string(a.n));
  g.add_meta("boundary", a.boundary);
  if (tf) {
    g.add_meta("Bz", grid::format_double(tf->bz));
    g.add_meta("krylov_m", std::to_string(tf->krylov_m));
    g.add_meta("krylov_dt", grid::format_double(tf->krylov_dt));
    g.add_meta("krylov_tol", grid::format_double(tf->krylov_tol));
  }
  g.add_meta("t", a.t);
  g.add_meta("r", r_echo);
  g.add_meta("mu", a.mu);
  g.add_meta("check_bounds", a.check_bounds ? "true" : "false");
  g.add_meta("oracle_check", a.oracle_check ? "true" : "false");
  meta_tail(g, a.common);

  if (tf)
    g.columns = {"alpha", "N",         "boundary", "B_z", "krylov_m",
                 "krylov_dt", "krylov_tol", "t",  "r",   "Q"};
  else
    g.columns = {"alpha", "N", "boundary", "t", "r", "Q"};
  if (a.check_bounds) {
    g.columns.push_back("mu_used");
    g.columns.push_back("hybrid");
    g.columns.push_back("hk");
    g.columns.push_back("bound_ok");
  }
  if (a.oracle_check) {
    g.columns.push_back("Q_oracle");
    g.columns.push_back("oracle_ok");
  }

  const double oracle_tol = tf ? 1e-8 : 1e-10;
  bool bounds_ok = true, oracle_ok = true;
  std::string first_bound_violation, first_oracle_mismatch;

  for (const Alpha& alpha : alphas) {
    const CouplingModel model(alpha, geom);
    Eigen::MatrixXd q;
    if (tf) {
      tfim::TFIMScenario sc{model, tf->bz, 0, times};
      tfim::KrylovConfig cfg;
      cfg.m = tf->krylov_m;
      cfg.dt = tf->krylov_dt;
      cfg.tol = tf->krylov_tol;
      const tfim::QrtTfimResult res = tfim::qrt_tfim(sc, cfg);
      q.resize(static_cast<Eigen::Index>(times.size()),
               static_cast<Eigen::Index>(rs.size()));
      for (std::size_t ri = 0; ri < rs.size(); ++ri) {
        const int site = site_at_distance(0, rs[ri], geom);
        for (std::size_t ti = 0; ti < times.size(); ++ti)
          q(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(ri)) =
              res.q(static_cast<Eigen::Index>(ti), site);
      }
    } else {
      xy::XYScenario sc{model, 0, times};
      q = xy::qrt_xy_table(sc, rs);
    }

    Eigen::MatrixXd q_oracle;
    if (a.oracle_check) {
      const ed::DenseModelSpec spec{tf ? ed::ModelKind::tfim : ed::ModelKind::xy, model,
                                    tf ? tf->bz : 0.0};
      q_oracle = dense_q_table(spec, rs, times);
    }

    BoundChecker checker(alpha, policy);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      for (std::size_t ri = 0; ri < rs.size(); ++ri) {
        const double qv =
            q(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(ri));
        auto& row = g.add_row();
        row.emplace_back(alpha_as_double(alpha));
        row.emplace_back(static_cast<long long>(a.n));
        row.emplace_back(std::string(to_string(b)));
        if (tf) {
          row.emplace_back(tf->bz);
          row.emplace_back(static_cast<long long>(tf->krylov_m));
          row.emplace_back(tf->krylov_dt);
          row.emplace_back(tf->krylov_tol);
        }
        row.emplace_back(times[ti]);
        row.emplace_back(static_cast<long long>(rs[ri]));
        row.emplace_back(qv);
        if (a.check_bounds) checker.append(row, rs[ri], times[ti], qv);
        if (a.oracle_check) {
          const double qo =
              q_oracle(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(ri));
          const bool ok = std::abs(qv - qo) <= oracle_tol;
          if (!ok && first_oracle_mismatch.empty())
            first_oracle_mismatch =
                "oracle mismatch: alpha=" + alpha_token(alpha) +
                " r=" + std::to_string(rs[ri]) + " t=" + grid::format_double(times[ti]) +
                " Q=" + grid::format_double(qv) + " oracle=" + grid::format_double(qo);
          oracle_ok = oracle_ok && ok;
          row.emplace_back(qo);
          row.emplace_back(std::string(ok ? "true" : "false"));
        }
      }
    }
    bounds_ok = bounds_ok && checker.all_ok;
    if (first_bound_violation.empty()) first_bound_violation = checker.first_violation;
  }

  emit(g, a.common);
  if (!bounds_ok) std::cerr << first_bound_violation << "\n";
  if (!oracle_ok) std::cerr << first_oracle_mismatch << "\n";
  return bounds_ok && oracle_ok ? 0 : 1;
}

struct OracleArgs {
  std::string model, alpha, t;
  int n = 0;
  std::string boundary = "open";
  std::string r;
  std::string mu = "opt";
  double bz = 0.5;
  bool bz_given = false;
  bool check_bounds = false;
  std::string dump_state;
  CommonOpts common;
};

int cmd_oracle(const OracleArgs& a) {
  apply_common(a.common);
  if (a.model != "xy" && a.model != "tfim")
    throw std::invalid_argument("model must be 'xy' or 'tfim', got '" + a.model + "'");
  const bool is_tfim = a.model == "tfim";
  if (!is_tfim && a.bz_given)
    throw std::invalid_argument("--Bz only applies to the tfim model");
  ed::check_dense_budget(a.n);
  const auto alphas = parse_alpha_list(a.alpha);
  const auto times = parse_time_grid(a.t);
  const Boundary b = parse_boundary(a.boundary);
  const Geometry geom = Geometry::finite(a.n, b);
  std::string r_echo;
  const auto rr = sim_r_range(a.r, a.n, b, &r_echo);
  const std::vector<int> rs = range_to_vector(rr);
  const MuPolicy policy = parse_mu(a.mu);
  const double bz = is_tfim ? a.bz : 0.0;
  if (!a.dump_state.empty() && alphas.size() != 1)
    throw std::invalid_argument("--dump-state needs a single alpha");

  grid::ResultGrid g;
  meta_head(g, "oracle");
  g.add_meta("model", a.model);
  g.add_meta("alpha", a.alpha);
  g.add_meta("N", std::to_string(a.n));
  g.add_meta("boundary", a.boundary);
  g.add_meta("Bz", grid::format_double(bz));
  g.add_meta("t", a.t);
  g.add_meta("r", r_echo);
  g.add_meta("mu", a.mu);
  g.add_meta("check_bounds", a.check_bounds ? "true" : "false");
  meta_tail(g, a.common);
  g.columns = {"model", "alpha", "N", "boundary", "B_z", "t", "r", "Q"};
  if (a.check_bounds) {
    g.columns.push_back("mu_used");
    g.columns.push_back("hybrid");
    g.columns.push_back("hk");
    g.columns.push_back("bound_ok");
  }

  bool bounds_ok = true;
  std::string first_bound_violation;
  for (const Alpha& alpha : alphas) {
    const CouplingModel model(alpha, geom);
    const ed::DenseModelSpec spec{is_tfim ? ed::ModelKind::tfim : ed::ModelKind::xy, model,
                                  bz};
    const ed::DenseEvolver ev(ed::build_dense_hamiltonian(spec));
    const Eigen::MatrixXcd u = ed::quench_unitary(a.n, 0);
    const Eigen::VectorXcd psi = ed::all_down_state(a.n);
    Eigen::MatrixXd q(static_cast<Eigen::Index>(times.size()),
                      static_cast<Eigen::Index>(rs.size()));
    for (std::size_t ri = 0; ri < rs.size(); ++ri) {
      const int site = site_at_distance(0, rs[ri], geom);
      const Eigen::MatrixXcd obs = ed::site_operator(ed::pauli_x(), site, a.n);
      const std::vector<double> col = ed::qrt_dense(ev, u, obs, psi, times);
      for (std::size_t ti = 0; ti < times.size(); ++ti)
        q(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(ri)) = col[ti];
    }

    BoundChecker checker(alpha, policy);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      for (std::size_t ri = 0; ri < rs.size(); ++ri) {
        const double qv =
            q(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(ri));
        auto& row = g.add_row();
        row = {std::string(a.model),
               alpha_as_double(alpha),
               static_cast<long long>(a.n),
               std::string(to_string(b)),
               bz,
               times[ti],
               static_cast<long long>(rs[ri]),
               qv};
        if (a.check_bounds) checker.append(row, rs[ri], times[ti], qv);
      }
    }
    bounds_ok = bounds_ok && checker.all_ok;
    if (first_bound_violation.empty()) first_bound_violation = checker.first_violation;

    if (!a.dump_state.empty())
      ed::dump_state(ev.evolve(u * psi, times.back()), resolve_out_path(a.dump_state));
  }

  emit(g, a.common);
  if (!bounds_ok) {
    std::cerr << first_bound_violation << "\n";
    return 1;
  }
  return 0;
}

struct VerifyArgs {
  std::string alpha;
  int n = 101;
  std::string boundary = "open";
  int max_r = 30;
  int max_n = 4;
  std::string mu_list = "0.25,0.5,0.75";
  std::string t = "0.5:2:4";
  std::string out;
  int threads = 1;
};

nlohmann::ordered_json jnum(double v) {
  if (std::isfinite(v)) return v;
  return grid::format_double(v);  // JSON has no inf/nan literals
}

int cmd_verify(const VerifyArgs& a) {
  if (a.threads < 1) throw std::invalid_argument("threads must be >= 1");
  Eigen::setNbThreads(a.threads);
  if (a.max_r < 1 || a.max_n < 1)
    throw std::invalid_argument("max-r and max-n must be >= 1");
  if (a.max_n > a.max_r)
    throw std::invalid_argument(
        "max-n must not exceed max-r: the tight n-hop bound is only defined for n <= r");
  const auto alphas = parse_alpha_list(a.alpha);
  const auto times = parse_time_grid(a.t);
  const Boundary b = parse_boundary(a.boundary);
  const Geometry geom = Geometry::finite(a.n, b);
  std::vector<double> mus;
  for (const auto& tok : split(a.mu_list, ',')) {
    const double mu = parse_double_token(tok, "mu");
    if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("mu values must lie in (0,1)");
    mus.push_back(mu);
  }
  if (a.max_r >= a.n)
    throw std::invalid_argument("max-r must be < N so every distance fits the window");

  nlohmann::ordered_json doc;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  meta["tool"] = kVersion;
  meta["command"] = "verify";
  meta["alpha"] = a.alpha;
  meta["N"] = a.n;
  meta["boundary"] = a.boundary;
  meta["max_r"] = a.max_r;
  meta["max_n"] = a.max_n;
  meta["mu"] = a.mu_list;
  meta["t"] = a.t;
  meta["threads"] = a.threads;
  doc["meta"] = std::move(meta);

  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  long long failure_count = 0;
  bool all_pass = true;
  std::string first_fail;
  constexpr std::size_t kMaxListedFailures = 200;

  auto note_check_failure = [&](const Alpha& alpha, const ReproCheck& c) {
    ++failure_count;
    if (failures.size() < kMaxListedFailures) {
      nlohmann::ordered_json f;
      f["alpha"] = alpha_token(alpha);
      f["check"] = c.check;
      f["i"] = c.i;
      f["j"] = c.j;
      f["n"] = c.n;
      f["lhs"] = jnum(c.lhs);
      f["rhs"] = jnum(c.rhs);
      f["ratio"] = jnum(c.ratio);
      failures.push_back(std::move(f));
    }
    if (first_fail.empty())
      first_fail = "counterexample: check=" + c.check + " alpha=" + alpha_token(alpha) +
                   " i=" + std::to_string(c.i) + " j=" + std::to_string(c.j) +
                   " n=" + std::to_string(c.n) + " lhs=" + grid::format_double(c.lhs) +
                   " rhs=" + grid::format_double(c.rhs);
  };

  for (const Alpha& alpha : alphas) {
    const CouplingModel model(alpha, geom);
    const ReproReport repro = verify_reproducibility(model, a.max_r);
    const ReproReport jn = verify_jn_bounds(model, a.max_r, a.max_n);
    const char* kinds[] = {"two_hop_direct", "two_hop_near", "jn_hk", "jn_new",
                           "jn_trivial"};
    for (const char* kind : kinds) {
      long long count = 0;
      double worst = 0.0;
      bool pass = true;
      for (const ReproReport* rep : {&repro, &jn}) {
        for (const ReproCheck& c : rep->checks) {
          if (c.check != kind) continue;
          ++count;
          worst = std::max(worst, c.ratio);
          pass = pass && c.pass;
          if (!c.pass) note_check_failure(alpha, c);
        }
      }
      if (count == 0) continue;  // hk checks are skipped at alpha = inf
      all_pass = all_pass && pass;
      nlohmann::ordered_json s;
      s["alpha"] = alpha_token(alpha);
      s["check"] = kind;
      s["count"] = count;
      s["worst_ratio"] = jnum(worst);
      s["pass"] = pass;
      summary.push_back(std::move(s));
    }

    // summation steps behind the hybrid bound, on the infinite-lattice constants
    const BoundConstants k = bound_constants(CouplingModel(alpha, Geometry::infinite()));
    for (const char* side : {"partial_long", "partial_short"}) {
      long long count = 0;
      double worst = -kInf;
      bool pass = true;
      for (double mu : mus) {
        for (int r = 1; r <= a.max_r; ++r) {
          for (double t : times) {
            if (!(t > 0.0)) continue;  // both sides vanish at t = 0
            const auto [longc, shortc] = partial_sum_checks(mu, r, t, k);
            const PartialSumCheck& c =
                side == std::string("partial_long") ? longc : shortc;
            ++count;
            worst = std::max(worst, c.lhs_log - c.rhs_log);
            pass = pass && c.pass;
            if (!c.pass) {
              ++failure_count;
              if (failures.size() < kMaxListedFailures) {
                nlohmann::ordered_json f;
                f["alpha"] = alpha_token(alpha);
                f["check"] = side;
                f["mu"] = mu;
                f["r"] = r;
                f["t"] = t;
                f["lhs_log"] = jnum(c.lhs_log);
                f["rhs_log"] = jnum(c.rhs_log);
                failures.push_back(std::move(f));
              }
              if (first_fail.empty())
                first_fail = std::string("counterexample: check=") + side +
                             " alpha=" + alpha_token(alpha) +
                             " mu=" + grid::format_double(mu) + " r=" + std::to_string(r) +
                             " t=" + grid::format_double(t) +
                             " lhs_log=" + grid::format_double(c.lhs_log) +
                             " rhs_log=" + grid::format_double(c.rhs_log);
            }
          }
        }
      }
      all_pass = all_pass && pass;
      nlohmann::ordered_json s;
      s["alpha"] = alpha_token(alpha);
      s["check"] = side;
      s["count"] = count;
      s["worst_log_margin"] = jnum(worst);
      s["pass"] = pass;
      summary.push_back(std::move(s));
    }
  }

  doc["summary"] = std::move(summary);
  doc["failure_count"] = failure_count;
  doc["failures"] = std::move(failures);
  doc["all_pass"] = all_pass;

  const std::string text = doc.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    const std::string path = resolve_out_path(a.out);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << text;
    if (!os) throw std::runtime_error("write failed: " + path);
  }
  if (!all_pass) {
    std::cerr << first_fail << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"information-propagation bounds and exact quench dynamics for long-range chains"};
  app.name("lrb");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  static const std::string kAlphaHelp =
      "comma-separated alpha list, each > 1 or 'inf' for nearest-neighbor";
  static const std::string kTimeHelp =
      "time grid 'start:stop:count' (inclusive) or a single value";
  static const std::string kRangeHelp =
      "distance range 'lo:hi' (inclusive) or a single integer";
  static const std::string kMuHelp = "split parameter in (0,1), or 'opt' (default opt)";
  static const std::string kBoundaryHelp = "open or periodic (default open)";

  auto* bound = app.add_subcommand("bound", "closed-form bound evaluation");
  bound->require_subcommand(1);

  BoundEvalArgs be;
  auto* eval = bound->add_subcommand("eval", "tabulate the hybrid and hk bounds on an (r, t) grid");
  eval->add_option("--alpha", be.alpha, kAlphaHelp)->required();
  eval->add_option("--r", be.r, kRangeHelp)->required();
  eval->add_option("--t", be.t, kTimeHelp)->required();
  eval->add_option("--mu", be.mu, kMuHelp);
  add_common(eval, be.common);

  BoundContourArgs bc;
  auto* contour = bound->add_subcommand(
      "contour", "causal-region contours t*(r) where the bounds reach eps");
  contour->add_option("--alpha", bc.alpha, kAlphaHelp)->required();
  contour->add_option("--r", bc.r, kRangeHelp)->required();
  contour->add_option("--eps", bc.eps, "contour level in (0,1) (default 1e-3)");
  contour->add_option("--mu", bc.mu, kMuHelp);
  add_common(contour, bc.common);

  auto* sim = app.add_subcommand("sim", "post-quench dynamics Q_r(t)");
  sim->require_subcommand(1);

  SimXYArgs sx;
  auto* sim_xy = sim->add_subcommand("xy", "long-range XY chain (single-excitation sector)");
  sim_xy->add_option("--alpha", sx.alpha, kAlphaHelp)->required();
  sim_xy->add_option("--N", sx.n, "chain length")->required();
  sim_xy->add_option("--t", sx.t, kTimeHelp)->required();
  sim_xy->add_option("--boundary", sx.boundary, kBoundaryHelp);
  sim_xy->add_option("--r", sx.r, kRangeHelp + "; default: every distance from 1");
  sim_xy->add_option("--mu", sx.mu, kMuHelp + "; used by --check-bounds");
  sim_xy->add_flag("--check-bounds", sx.check_bounds,
                   "append bound columns and a per-row compliance flag");
  sim_xy->add_flag("--oracle-check", sx.oracle_check,
                   "recompute every row with the dense oracle (N <= 12)");
  add_common(sim_xy, sx.common);

  SimTFIMArgs st;
  auto* sim_tfim =
      sim->add_subcommand("tfim", "long-range transverse-field Ising chain (Krylov)");
  sim_tfim->add_option("--alpha", st.base.alpha, kAlphaHelp)->required();
  sim_tfim->add_option("--N", st.base.n, "chain length (N <= 26)")->required();
  sim_tfim->add_option("--t", st.base.t, kTimeHelp)->required();
  sim_tfim->add_option("--Bz", st.bz, "transverse field (default 0.5)");
  sim_tfim->add_option("--boundary", st.base.boundary, kBoundaryHelp);
  sim_tfim->add_option("--r", st.base.r, kRangeHelp + "; default: every distance from 1");
  sim_tfim->add_option("--mu", st.base.mu, kMuHelp + "; used by --check-bounds");
  sim_tfim->add_option("--krylov-m", st.krylov_m, "Krylov subspace dimension (default 30)");
  sim_tfim->add_option("--krylov-dt", st.krylov_dt, "Krylov substep (default 0.05)");
  sim_tfim->add_option("--krylov-tol", st.krylov_tol,
                       "per-step residual tolerance (default 1e-10)");
  sim_tfim->add_flag("--check-bounds", st.base.check_bounds,
                     "append bound columns and a per-row compliance flag");
  sim_tfim->add_flag("--oracle-check", st.base.oracle_check,
                     "recompute every row with the dense oracle (N <= 12)");
  add_common(sim_tfim, st.base.common);

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "dense exact-diagonalization oracle (N <= 12)");
  oracle->add_option("--model", oa.model, "xy or tfim")->required();
  oracle->add_option("--alpha", oa.alpha, kAlphaHelp)->required();
  oracle->add_option("--N", oa.n, "chain length (N <= 12)")->required();
  oracle->add_option("--t", oa.t, kTimeHelp)->required();
  auto* bz_opt = oracle->add_option("--Bz", oa.bz, "transverse field, tfim only (default 0.5)");
  oracle->add_option("--boundary", oa.boundary, kBoundaryHelp);
  oracle->add_option("--r", oa.r, kRangeHelp + "; default: every distance from 1");
  oracle->add_option("--mu", oa.mu, kMuHelp + "; used by --check-bounds");
  oracle->add_flag("--check-bounds", oa.check_bounds,
                   "append bound columns and a per-row compliance flag");
  oracle->add_option("--dump-state", oa.dump_state,
                     "write the quenched state at the last time as raw (re,im) doubles");
  add_common(oracle, oa.common);

  VerifyArgs va;
  auto* verify = app.add_subcommand(
      "verify", "reproducibility and n-hop bound sweeps; JSON report, exit 1 on any failure");
  verify->add_option("--alpha", va.alpha, kAlphaHelp)->required();
  verify->add_option("--N", va.n, "window length (default 101)");
  verify->add_option("--boundary", va.boundary, kBoundaryHelp);
  verify->add_option("--max-r", va.max_r, "largest pair distance (default 30)");
  verify->add_option("--max-n", va.max_n, "largest hop order, must be <= max-r (default 4)");
  verify->add_option("--mu-list", va.mu_list,
                     "comma-separated mu values for the partial-sum checks");
  verify->add_option("--t", va.t, kTimeHelp);
  verify->add_option("--out", va.out,
                     "report file (default: stdout); relative paths honor LRB_OUT_DIR");
  verify->add_option("--threads", va.threads, "Eigen thread cap (default 1)");

  int rc = 0;
  eval->callback([&] { rc = cmd_bound_eval(be); });
  contour->callback([&] { rc = cmd_bound_contour(bc); });
  sim_xy->callback([&] { rc = run_sim(sx, nullptr); });
  sim_tfim->callback([&] { rc = run_sim(st.base, &st); });
  oracle->callback([&] {
    oa.bz_given = bz_opt->count() > 0;
    rc = cmd_oracle(oa);
  });
  verify->callback([&] { rc = cmd_verify(va); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

}  // namespace lrb::cli
