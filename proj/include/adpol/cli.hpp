#pragma once

// Batch commands behind the `adpol` executable: phi, verify and sweep. Each one
// reads a Scenario and writes a CSV table with '#'-prefixed header lines.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "adpol/adapted.hpp"
#include "adpol/scenario.hpp"
#include "adpol/verify.hpp"

#ifndef ADPOL_VERSION
#define ADPOL_VERSION "0.0.0"
#endif

namespace adpol {

inline constexpr const char* kVersion = ADPOL_VERSION;

enum ExitCode : int { kSuccess = 0, kVerificationFailure = 1, kConfigFailure = 2 };

struct RunOptions {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
  /// Worker threads; 0 means one per hardware thread.
  unsigned threads = 0;
};

/// A CSV table: header comment lines, column names and rows of preformatted fields.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Runs f(0..n-1) on a worker pool and returns the results in index order.
template <typename F>
auto parallel_map(std::size_t n, F&& f, unsigned threads = 0) {
  using R = decltype(f(std::size_t{0}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned count = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  count = static_cast<unsigned>(std::min<std::size_t>(count, std::max<std::size_t>(n, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
  }
  std::vector<R> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

namespace detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string num(cplx z) {
  return num(z.real()) + (std::signbit(z.imag()) ? "-" : "+") + num(std::abs(z.imag())) + "i";
}

inline std::string join(const Vec& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v(i));
  return s;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::string hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Status string for a failure while forming phi or J.
inline std::string failure_status(const std::exception& e) {
  if (dynamic_cast<const PoleOnPath*>(&e)) return "pole-on-path";
  if (dynamic_cast<const SingularMatrix*>(&e)) return "singular-endpoint";
  if (dynamic_cast<const AnalyticityDomainError*>(&e)) return "analyticity";
  if (dynamic_cast<const BlowupError*>(&e)) return "blowup";
  if (dynamic_cast<const ChartExit*>(&e)) return "chart-exit";
  if (dynamic_cast<const IntegratorFailure*>(&e)) return "integrator-failure";
  if (dynamic_cast<const DegeneratePolarization*>(&e)) return "degenerate";
  return std::string("error: ") + e.what();
}

inline std::vector<std::string> header(const std::string& command, const Scenario& sc) {
  return {"adpol " + std::string(kVersion), "command: " + command, "scenario_hash: fnv1a64:" + hex(sc.hash),
          "seed: " + std::to_string(sc.seed), "model: " + sc.model.name()};
}

}  // namespace detail

inline void write_table(const Table& t, std::ostream& os) {
  for (const auto& c : t.comments) os << "# " << c << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_field(row[i]);
    os << "\n";
  }
}

/// Writes the table to `path` by renaming a completed temporary file over it;
/// an empty path or "-" writes to `fallback`.
inline void emit_table(const Table& t, const std::string& path, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    write_table(t, fallback);
    fallback.flush();
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path() && !fs::exists(target.parent_path()))
    throw ConfigError("output directory does not exist: " + target.parent_path().string());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write output file '" + tmp.string() + "'");
    write_table(t, out);
    out.flush();
    if (!out) throw ConfigError("failed writing output file '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("cannot replace '" + path + "': " + ec.message());
  }
}

inline void apply_options(Scenario& sc, const RunOptions& opt) {
  if (opt.seed) sc.seed = *opt.seed;
  if (!(opt.tol_scale > 0)) throw ConfigError("--tol-scale must be positive");
}

inline std::string output_path(const Scenario& sc, const RunOptions& opt) {
  return opt.out ? *opt.out : sc.output;
}

// ---------------------------------------------------------------------------
// phi

inline Table run_phi(Scenario sc, const RunOptions& opt = {}) {
  apply_options(sc, opt);
  const auto points = sc.all_points();
  const auto svals = sc.all_s();
  Table t;
  t.comments = detail::header("phi", sc);
  t.columns = {"model", "point", "q", "p", "v", "re_s", "im_s", "phi", "sym_residual", "im_phi_eigenvalues", "status"};
  const std::size_t n = points.size() * svals.size();
  t.rows = parallel_map(
      n,
      [&](std::size_t k) {
        const std::size_t pi = k / svals.size();
        const GeodesicPoint& x = points[pi];
        const cplx s = svals[k % svals.size()];
        std::vector<std::string> row = {sc.model.name(), std::to_string(pi), detail::join(x.q), detail::join(x.p),
                                        detail::num(speed_squared(sc.model, x)), detail::num(s.real()),
                                        detail::num(s.imag()), "", "", "", ""};
        if (s.imag() == 0.0) {
          row[10] = "real-polarization branch";
          return row;
        }
        try {
          const CMat phi = phi_at(sc.model, x, s, sc.adapted).value;
          std::string entries;
          for (int i = 0; i < phi.rows(); ++i)
            for (int j = 0; j < phi.cols(); ++j) entries += (entries.empty() ? "" : " ") + detail::num(phi(i, j));
          row[7] = entries;
          row[8] = detail::num((phi - phi.transpose()).cwiseAbs().maxCoeff());
          const Mat b = 0.5 * (phi.imag() + phi.imag().transpose());
          Eigen::SelfAdjointEigenSolver<Mat> eig(b, Eigen::EigenvaluesOnly);
          row[9] = detail::join(eig.eigenvalues());
          const double sign = s.imag() > 0 ? 1.0 : -1.0;
          row[10] = (sign * eig.eigenvalues()).minCoeff() > 0 ? "ok" : "indefinite";
        } catch (const Error& e) {
          row[10] = detail::failure_status(e);
        }
        return row;
      },
      opt.threads);
  return t;
}

// ---------------------------------------------------------------------------
// verify

/// One row of the verify table.
struct VerifyRow {
  CheckReport report;
  std::size_t point = 0;
  std::string param;  ///< s, g or both
  std::string status; ///< "ok", "skipped: ..." or "error: ..."
  bool failed() const { return status.rfind("skipped", 0) != 0 && !report.passed; }
};

struct VerifyResult {
  Table table;
  std::size_t failures = 0;
  std::size_t skipped = 0;
  int exit_code() const { return failures ? kVerificationFailure : kSuccess; }
};

namespace detail {

inline std::vector<GroupElement> default_group_elements(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> a(-0.5, 0.5);
  std::vector<GroupElement> out;
  for (double b : {0.5, 1.0, 2.0, -1.0}) out.push_back({a(rng), b});
  return out;
}

inline std::string describe_g(const GroupElement& g) { return "g=(" + num(g.a) + " " + num(g.b) + ")"; }

}  // namespace detail

inline VerifyResult run_verify(Scenario sc, const RunOptions& opt = {}) {
  apply_options(sc, opt);
  const auto points = sc.all_points();
  std::vector<cplx> svals = sc.all_s();
  if (svals.empty()) svals.push_back(cplx(0, 1));
  std::vector<double> real_s = sc.real_s.empty() ? std::vector<double>{0.0, 0.5, 1.0} : sc.real_s;
  std::vector<GroupElement> gs =
      sc.group_elements.empty() ? detail::default_group_elements(sc.seed) : sc.group_elements;
  std::vector<std::string> checks = sc.checks;
  if (checks.empty())
    for (const auto& [name, _] : default_tolerances()) checks.push_back(name);

  VerifyConfig vcfg;
  vcfg.adapted = sc.adapted;
  vcfg.step = sc.step;
  const ModelMetric& M = sc.model;

  using Job = std::function<VerifyRow()>;
  std::vector<Job> jobs;
  for (const std::string& check : checks) {
    const double tol = sc.tolerances.at(check) * opt.tol_scale;
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const GeodesicPoint x = points[pi];
      auto skipped = [=](std::string why, std::string param) {
        VerifyRow r;
        r.report = make_report(check, NAN, tol, detail::describe(M, x));
        r.point = pi;
        r.param = std::move(param);
        r.status = "skipped: " + why;
        return r;
      };
      auto guarded = [=](std::string param, std::function<CheckReport()> body) {
        VerifyRow r;
        r.point = pi;
        r.param = param;
        try {
          r.report = body();
          r.status = "ok";
        } catch (const Error& e) {
          r.report = make_report(check, NAN, tol, detail::describe(M, x));
          r.status = "error: " + std::string(e.what());
        }
        return r;
      };
      auto inside = [=](const GeodesicPoint& y, cplx s) { return domain_check(M, y, s, vcfg.adapted); };

      if (check == "pullbacks") {
        for (const auto& g : gs)
          jobs.push_back([=] { return guarded(detail::describe_g(g), [=] { return check_pullbacks(M, x, g, vcfg, tol); }); });
      } else if (check == "real_polarization") {
        for (double s : real_s)
          jobs.push_back([=] {
            return guarded("s=" + detail::num(s), [=] { return check_real_polarization(M, x, s, vcfg, tol); });
          });
      } else {
        for (const cplx s : svals) {
          const std::string sp = "s=" + detail::num(s);
          if (s.imag() == 0.0) {
            jobs.push_back([=] { return skipped("real-polarization branch", sp); });
            continue;
          }
          if (check == "equivariance") {
            for (const auto& g : gs)
              jobs.push_back([=] {
                const std::string param = sp + " " + detail::describe_g(g);
                if (g.b == 0.0) return skipped("chi(g) = 0", param);
                const auto a = inside(x, act_on_complex(g, s).value());
                if (!a.inside) return skipped(a.status, param);
                const auto b = inside(act(M, g, x, vcfg.adapted), s);
                if (!b.inside) return skipped(b.status, param);
                return guarded(param, [=] { return check_equivariance(M, x, s, g, vcfg, tol); });
              });
            continue;
          }
          jobs.push_back([=]() -> VerifyRow {
            if (check == "fibration") {
              if (!in_fibration(M, {s, x}, vcfg.adapted)) return skipped("outside the fibration domain", sp);
              return guarded(sp, [=] { return check_fibration_holomorphy(M, x, s, vcfg.step, vcfg, tol); });
            }
            const auto d = inside(x, s);
            if (!d.inside) return skipped(d.status, sp);
            if (check == "kahler")
              return guarded(sp, [=] { return check_kahler_identity(M, x, s, vcfg.step, vcfg, tol); });
            if (check == "canonical_metric")
              return guarded(sp, [=] { return check_canonical_metric(M, x, s, vcfg, tol); });
            return guarded(sp, [=] { return check_monge_ampere_fiber(M, x, s, vcfg.step, vcfg, tol); });
          });
        }
      }
    }
  }

  const auto rows = parallel_map(jobs.size(), [&](std::size_t i) { return jobs[i](); }, opt.threads);
  VerifyResult res;
  res.table.comments = detail::header("verify", sc);
  res.table.comments.push_back("tol_scale: " + detail::num(opt.tol_scale));
  res.table.columns = {"check", "point", "param", "residual", "tolerance", "passed", "status", "context"};
  for (const auto& r : rows) {
    if (r.failed()) ++res.failures;
    if (r.status.rfind("skipped", 0) == 0) ++res.skipped;
    res.table.rows.push_back({r.report.name, std::to_string(r.point), r.param, detail::num(r.report.residual),
                              detail::num(r.report.tolerance), r.failed() ? "false" : (r.status == "ok" ? "true" : "skip"),
                              r.status, r.report.context});
  }
  res.table.comments.push_back("summary: " + std::to_string(rows.size()) + " rows, " + std::to_string(res.failures) +
                               " failed, " + std::to_string(res.skipped) + " skipped");
  return res;
}

// ---------------------------------------------------------------------------
// sweep

inline Table run_sweep(Scenario sc, const RunOptions& opt = {}) {
  apply_options(sc, opt);
  if (!sc.s_grid) throw ConfigError("sweep: the scenario needs an s_grid");
  const auto points = sc.all_points();
  const auto grid = sc.s_grid->points();
  Table t;
  t.comments = detail::header("sweep", sc);
  t.columns = {"point", "re_s", "im_s", "v", "margin", "inside", "status"};
  t.rows = parallel_map(
      points.size() * grid.size(),
      [&](std::size_t k) {
        const std::size_t pi = k / grid.size();
        const cplx s = grid[k % grid.size()];
        const GeodesicPoint& x = points[pi];
        DomainReport d;
        try {
          d = domain_check(sc.model, x, s, sc.adapted);
        } catch (const Error& e) {
          d = {false, NAN, detail::failure_status(e)};
        }
        return std::vector<std::string>{std::to_string(pi),       detail::num(s.real()),
                                        detail::num(s.imag()),    detail::num(speed_squared(sc.model, x)),
                                        detail::num(d.margin),    d.inside ? "true" : "false",
                                        d.status};
      },
      opt.threads);
  return t;
}

}  // namespace adpol
