// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--known-unattainable 3,4,5]
// The exit status counts failing lines whose criterion is not listed as
// known unattainable; listed criteria still print their real verdict.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pwacert/report.hpp"
#include "support.hpp"

using namespace pwacert;
using support::Analysed;

namespace {

struct Tally {
  std::set<std::string> known;
  int unexpected = 0;
  int failed_known = 0;

  void line(const std::string& criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %s: %s\n", pass ? "PASS" : "FAIL", criterion.c_str(), detail.c_str());
    if (pass) return;
    const std::string root = criterion.substr(0, criterion.find_first_of(".-"));
    if (known.count(root)) {
      ++failed_known;
    } else {
      ++unexpected;
    }
  }
};

std::string fmt(const VectorXd& v) {
  std::ostringstream s;
  s.precision(6);
  s << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v[i];
  return s.str() + ")";
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(8);
  s << v;
  return s.str();
}

bool within(const VectorXd& got, const VectorXd& want, double tol) {
  return got.size() == want.size() && ((got - want).cwiseAbs().array() <= tol).all();
}

bool within_rel(const VectorXd& got, const VectorXd& want, double rel) {
  if (got.size() != want.size()) return false;
  for (Eigen::Index i = 0; i < got.size(); ++i)
    if (std::abs(got[i] - want[i]) > rel * std::abs(want[i])) return false;
  return true;
}

VectorXd table_row(const IterationRecord& rec, CellPair p, int d) {
  VectorXd row = VectorXd::Constant(d + 1, std::nan(""));
  for (int l = 0; l <= d; ++l)
    if (auto it = rec.table.find({p, l}); it != rec.table.end()) row[l] = it->second;
  return row;
}

int refuted_at(const IterationTrace& tr, CellPair p) {
  for (const auto& r : tr.refuted)
    if (r.pair == p) return r.iteration;
  return -1;
}

double stage_seconds(const AnalysisReport& r, std::initializer_list<const char*> stages) {
  double total = 0.0;
  for (const auto& t : r.timings)
    for (const char* s : stages)
      if (t.stage == s) total += t.seconds;
  return total;
}

std::vector<CellPair> pairs_of(std::initializer_list<std::pair<int, int>> one_based) {
  std::vector<CellPair> out;
  for (auto [i, j] : one_based) out.push_back({std::size_t(i - 1), std::size_t(j - 1)});
  return out;
}

bool subset(const std::vector<CellPair>& a, const std::vector<CellPair>& b) {
  for (CellPair p : a)
    if (std::find(b.begin(), b.end(), p) == b.end()) return false;
  return true;
}

// Criterion 2 checks on one trace.
void check_refinement_ex1(Tally& t, const std::string& tag, const IterationTrace& tr) {
  const VectorXd w1 = tr.records.empty() ? VectorXd() : tr.records.front().omega;
  t.line("2.first" + tag, within(w1, Eigen::Vector3d(1.1036, 1.2443, 2.0), 0.01),
         "first policy fixed point " + fmt(w1) + " vs (1.1036, 1.2443, 2) +-0.01");
  t.line("2.final" + tag, within(tr.final_omega, Eigen::Vector3d(1.0, 1.2443, 2.0), 0.01),
         "final bounds " + fmt(tr.final_omega) + " vs (1, 1.2443, 2) +-0.01");
  const int iters = static_cast<int>(tr.records.size());
  t.line("2.iterations" + tag, tr.termination == Termination::FixedPoint && iters <= 4,
         std::to_string(iters) + " iterations, termination " +
             std::string(to_string(tr.termination)) + " (need fixed point within 4)");
}

void check_table_ex1(Tally& t, const std::string& tag, const IterationTrace& tr) {
  if (tr.records.empty()) {
    t.line("3" + tag, false, "no iteration recorded");
    return;
  }
  const IterationRecord& rec = tr.records.front();
  const VectorXd w11 = table_row(rec, {0, 0}, 2);
  const VectorXd w13 = table_row(rec, {0, 2}, 2);
  const VectorXd w14 = table_row(rec, {0, 3}, 2);
  t.line("3.w11" + tag, within(w11, Eigen::Vector3d::Zero(), 1e-3),
         "w11 " + fmt(w11) + " vs (0, 0, 0) +-1e-3");
  t.line("3.w13" + tag, within(w13, Eigen::Vector3d(0.0573, 0.0213, 0.0213), 0.01),
         "w13 " + fmt(w13) + " vs (0.0573, 0.0213, 0.0213) +-0.01");
  t.line("3.w14" + tag, within(w14, Eigen::Vector3d(0.3012, 0.1447, 0.1447), 0.01),
         "w14 " + fmt(w14) + " vs (0.3012, 0.1447, 0.1447) +-0.01");
}

void check_refinement_ex2(Tally& t, const std::string& tag, const IterationTrace& tr) {
  const int iters = static_cast<int>(tr.records.size());
  t.line("4.final" + tag,
         within_rel(tr.final_omega, Eigen::Vector3d(41.8956, 31.4449, 58.1165), 0.01) &&
             iters <= 6,
         "final bounds " + fmt(tr.final_omega) + " after " + std::to_string(iters) +
             " iterations vs (41.8956, 31.4449, 58.1165) +-1% within 6");
}

void check_refutation_ex2(Tally& t, const std::string& tag, const IterationTrace& tr,
                          const std::vector<std::string>& conclusions) {
  const int at11 = refuted_at(tr, {0, 0});
  const int at21 = refuted_at(tr, {1, 0});
  t.line("5.order" + tag, at11 == 0 && at21 == 1,
         "(1,1) refuted at " + std::to_string(at11) + ", (2,1) refuted at " + std::to_string(at21) +
             " (need 0 and 1; -1 means never)");
  bool affine = false;
  for (const auto& c : conclusions) affine = affine || c.find("constrained affine system") != std::string::npos;
  const bool remaining = subset(tr.remaining, pairs_of({{1, 2}, {2, 2}}));
  t.line("5.conclusion" + tag, remaining && affine,
         std::string("remaining switches ") + (remaining ? "within" : "not within") +
             " {(1,2),(2,2)}, constrained affine conclusion " + (affine ? "present" : "absent"));
}

// Criterion 7 on one certified system.
struct PropertyCounts {
  int oracle_checks = 0, oracle_bad = 0;
  int image_checks = 0, image_bad = 0;
  int decrease_checks = 0, decrease_bad = 0;
  int residual_checks = 0, residual_bad = 0;
  std::size_t points = 0, level_bad = 0, bound_bad = 0;
  std::vector<std::string> failures;

  void note(const std::string& what) {
    if (failures.size() < 10) failures.push_back(what);
  }
};

void property_suites(const std::string& name, const Analysed& a, const PqlCertificate& cert,
                     const IterationTrace& tr, PropertyCounts& c) {
  const int d = a.sys.dim();
  // (a) sampling oracle never exceeds the relaxed bound at any evaluated point.
  std::vector<VectorXd> evaluated{tr.initial};
  for (const auto& rec : tr.records)
    if (rec.image.size() > 0) evaluated.push_back(rec.omega);
  OracleOptions oracle;
  for (const VectorXd& omega : evaluated)
    for (CellPair p : a.sw.sw_bar)
      for (int l = 0; l <= d; ++l) {
        RelaxedEval e;
        try {
          e = eval_relaxed(cert, a.lifted, p, l, omega);
        } catch (const Error&) {
          continue;  // no relaxed bound to compare with
        }
        const RelaxedValue sharp = sharp_oracle(cert, a.sys, p, l, omega, oracle);
        ++c.oracle_checks;
        bool ok = true;
        if (!is_finite(e.value)) {
          ok = !is_finite(sharp);
        } else if (is_finite(sharp)) {
          ok = std::get<double>(sharp) <= std::get<double>(e.value) + 1e-5;
        }
        if (!ok) {
          ++c.oracle_bad;
          c.note(name + ": oracle above relaxed bound for (" + std::to_string(p.from + 1) + "," +
                 std::to_string(p.to + 1) + "), template " + std::to_string(l + 1));
        }
      }
  // (b) pre-fixed points and monotone decrease.
  auto image_ok = [&](const VectorXd& image, const VectorXd& omega) {
    ++c.image_checks;
    if (image.size() == 0 || !((image - omega).array() <= 1e-6).all()) {
      ++c.image_bad;
      c.note(name + ": relaxed image " + fmt(image) + " above " + fmt(omega));
    }
  };
  image_ok(tr.initial_image, tr.initial);
  VectorXd previous = tr.initial;
  for (const auto& rec : tr.records) {
    if (rec.image.size() > 0) image_ok(rec.image, rec.omega);
    ++c.decrease_checks;
    if (!((rec.omega - previous).array() <= 1e-7).all()) {
      ++c.decrease_bad;
      c.note(name + ": bounds increased from " + fmt(previous) + " to " + fmt(rec.omega));
    }
    previous = rec.omega;
  }
  // (c) certificate residuals and multiplier cones.
  auto psd = [&](const MatrixXd& m, double tol, const std::string& what) {
    ++c.residual_checks;
    if (!conic::psd_check(m, tol)) {
      ++c.residual_bad;
      c.note(name + ": " + what + " min eigenvalue " + fmt(conic::min_eigenvalue(m)));
    }
  };
  auto multiplier = [&](const Multiplier& m, const std::string& what) {
    ++c.residual_checks;
    if (m.nonneg.size() > 0 && m.nonneg.minCoeff() < -1e-8) {
      ++c.residual_bad;
      c.note(name + ": " + what + " has a negative entry");
    }
    psd(m.psd, 1e-7, what + " semidefinite part");
  };
  for (std::size_t i = 0; i < a.sys.cell_count(); ++i) {
    psd(level_residual(cert, a.lifted, i), 1e-6, "level residual " + std::to_string(i + 1));
    multiplier(cert.cell_multipliers.at(i), "cell multiplier " + std::to_string(i + 1));
  }
  for (CellPair p : a.sw.sw_bar) {
    psd(decrease_residual(cert, a.lifted, p), 1e-6, "decrease residual");
    multiplier(cert.switch_multipliers.at(p), "switch multiplier");
  }
  for (std::size_t i : a.sw.in_set) {
    psd(initial_residual(cert, a.lifted, i), 1e-6, "initial residual");
    multiplier(cert.initial_multipliers.at(i), "initial multiplier");
  }
  // (d) simulation against (alpha, beta) and the final bounds.
  const ReachSample sample = simulate(a.sys, 41, 60);
  c.points += sample.size();
  const auto level = check_level_bounds(sample, a.sys, cert);
  const auto bound = check_membership(sample, a.sys, cert, tr.final_omega);
  c.level_bad += level.size();
  c.bound_bad += bound.size();
  if (!level.empty()) c.note(name + ": simulated point violates " + level.front().bound);
  if (!bound.empty()) c.note(name + ": simulated point violates " + bound.front().bound);
}

SynthesisOptions synthesis_for(const PwaSystem& sys) {
  SynthesisOptions o;
  o.homogeneous = default_homogeneous(sys);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  Tally t;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--known-unattainable") {
      std::stringstream list(argv[i + 1]);
      for (std::string item; std::getline(list, item, ',');) t.known.insert(item);
    }

  // Example 1 through the full pipeline, as the command line runs it.
  const std::string ex1_path = support::data_path("quadrants.json");
  const std::string ex2_path = support::data_path("affine2.json");
  const AnalysisReport r1 = run_pipeline(ex1_path, {});
  const AnalysisReport r2 = run_pipeline(ex2_path, {});

  {
    const double a = r1.certificate ? r1.certificate->alpha : std::nan("");
    const double b = r1.certificate ? r1.certificate->beta : std::nan("");
    t.line("1.levels", std::abs(a - 2.0) <= 0.05 && std::abs(b - 2.0) <= 0.05,
           "alpha " + fmt(a) + ", beta " + fmt(b) + " vs 2 +-0.05");
    const double secs = stage_seconds(r1, {"parse", "analysis", "synthesis"});
    t.line("1.runtime", r1.certificate.has_value() && secs < 30.0,
           "parse, switch analysis and synthesis took " + fmt(secs) + " s (limit 30 s)");
  }
  if (r1.trace) {
    check_refinement_ex1(t, "", *r1.trace);
    check_table_ex1(t, "", *r1.trace);
  } else {
    t.line("2", false, "no iteration trace: " + r1.error.value_or("?"));
    t.line("3", false, "no iteration trace");
  }
  {
    const double a = r2.certificate ? r2.certificate->alpha : std::nan("");
    const double b = r2.certificate ? r2.certificate->beta : std::nan("");
    t.line("4.levels",
           std::abs(a - 58.1165) <= 0.01 * 58.1165 && std::abs(b - 286.4932) <= 0.01 * 286.4932,
           "alpha " + fmt(a) + ", beta " + fmt(b) + " vs 58.1165, 286.4932 +-1%");
  }
  if (r2.trace) {
    check_refinement_ex2(t, "", *r2.trace);
    check_refutation_ex2(t, "", *r2.trace, r2.conclusions);
  } else {
    t.line("4.final", false, "no iteration trace: " + r2.error.value_or("?"));
    t.line("5", false, "no iteration trace");
  }

  // Criterion 6.
  {
    const auto expected1 = pairs_of({{1, 1}, {1, 3}, {1, 4}, {2, 1}, {2, 4}, {3, 2}, {3, 3}, {4, 1}, {4, 2}});
    t.line("6.example1", r1.sw_bar == expected1,
           "sw_bar has " + std::to_string(r1.sw_bar.size()) + " pairs, pattern " +
               (r1.sw_bar == expected1 ? "matches" : "differs from") + " S");
    const auto expected2 = pairs_of({{1, 1}, {1, 2}, {2, 1}, {2, 2}});
    const bool in_ok = r2.in_set == std::vector<std::size_t>{1};
    t.line("6.example2", r2.sw_bar == expected2 && in_ok,
           std::string("sw_bar ") + (r2.sw_bar == expected2 ? "= I^2" : "differs from I^2") +
               ", In " + (in_ok ? "= {2}" : "differs from {2}"));
  }

  // Criterion 7: both fixtures plus 20 random systems.
  {
    PropertyCounts counts;
    int systems = 0;
    auto run = [&](const std::string& name, PwaSystem sys) {
      Analysed a = support::analyse(std::move(sys));
      const PqlCertificate cert = synthesize(a.sys, a.sw, a.lifted, synthesis_for(a.sys));
      const IterationTrace tr = iterate(a.sys, cert, a.lifted, a.sw, a.x0);
      property_suites(name, a, cert, tr, counts);
      ++systems;
    };
    run("example 1", support::quadrants());
    run("example 2", support::affine2());
    int random = 0, skipped = 0;
    std::string skip_reasons;
    for (std::uint64_t seed = 1; random < 20 && seed < 200; ++seed) {
      PwaSystem sys = support::random_system(seed);
      try {
        Analysed a = support::analyse(sys);
        const PqlCertificate cert = synthesize(a.sys, a.sw, a.lifted, synthesis_for(a.sys));
        if (!check_certificate(cert, a.sys, a.sw, a.lifted).accepted || !(cert.alpha > 0)) {
          ++skipped;
          continue;
        }
        const IterationTrace tr = iterate(a.sys, cert, a.lifted, a.sw, a.x0);
        property_suites("random seed " + std::to_string(seed), a, cert, tr, counts);
        ++random;
        ++systems;
      } catch (const Error& e) {
        ++skipped;
        if (skip_reasons.size() < 200) skip_reasons += std::string(" ") + e.what() + ";";
      }
    }
    std::printf("INFO random systems: %d certified, %d seeds skipped (no certificate with alpha > 0)%s\n",
                random, skipped, skip_reasons.empty() ? "" : (":" + skip_reasons).c_str());
    t.line("7.systems", random == 20, std::to_string(systems) + " systems analysed (" +
                                          std::to_string(random) + " random)");
    t.line("7a", counts.oracle_bad == 0 && counts.oracle_checks > 0,
           std::to_string(counts.oracle_checks) + " oracle comparisons, " +
               std::to_string(counts.oracle_bad) + " above relaxed bound + 1e-5");
    t.line("7b", counts.image_bad == 0 && counts.decrease_bad == 0,
           std::to_string(counts.image_checks) + " image checks (" + std::to_string(counts.image_bad) +
               " bad), " + std::to_string(counts.decrease_checks) + " decrease checks (" +
               std::to_string(counts.decrease_bad) + " bad)");
    t.line("7c", counts.residual_bad == 0,
           std::to_string(counts.residual_checks) + " residual and multiplier checks, " +
               std::to_string(counts.residual_bad) + " failing psd_check at 1e-6");
    t.line("7d", counts.level_bad == 0 && counts.bound_bad == 0,
           std::to_string(counts.points) + " simulated points, " + std::to_string(counts.level_bad) +
               " violations of (alpha, beta), " + std::to_string(counts.bound_bad) +
               " of the final bounds");
    for (const auto& f : counts.failures) std::printf("INFO property failure: %s\n", f.c_str());
  }

  // Criterion 8 and the reference-certificate runs.
  {
    Analysed a1 = support::analyse(support::quadrants());
    Analysed a2 = support::analyse(support::affine2());
    const PqlCertificate p1 = support::reference(a1.sys, "quadrants_reference_cert.json");
    const PqlCertificate p2 = support::reference(a2.sys, "affine2_reference_cert.json");
    const VerificationReport v1 = check_certificate(p1, a1.sys, a1.sw, a1.lifted);
    const VerificationReport v2 = check_certificate(p2, a2.sys, a2.sw, a2.lifted);
    auto why = [](const VerificationReport& v) {
      std::string s;
      for (const auto& f : v.failures()) s += "; " + f;
      return s;
    };
    t.line("8.example1", v1.accepted, "reference example 1 certificate " +
                                          std::string(v1.accepted ? "accepted" : "rejected") + why(v1));
    t.line("8.example2", v2.accepted, "reference example 2 certificate " +
                                          std::string(v2.accepted ? "accepted" : "rejected") + why(v2));

    const IterationTrace tr1 = iterate(a1.sys, p1, a1.lifted, a1.sw, a1.x0);
    const IterationTrace tr2 = iterate(a2.sys, p2, a2.lifted, a2.sw, a2.x0);
    const std::string tag = "-reference";
    check_refinement_ex1(t, tag, tr1);
    check_table_ex1(t, tag, tr1);
    check_refinement_ex2(t, tag, tr2);
    check_refutation_ex2(t, tag, tr2, trace_conclusions(a2.sys, a2.sw, tr2, p2.alpha).lines);
  }

  std::printf("SUMMARY %d unexpected failures, %d failures in criteria listed as unattainable\n",
              t.unexpected, t.failed_known);
  return t.unexpected == 0 ? 0 : 1;
}
