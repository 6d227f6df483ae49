#include "pwacert/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pwacert {

using nlohmann::json;

namespace {

json vec(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd to_vec(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json mat(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
  return rows;
}

MatrixXd to_mat(const json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  MatrixXd m(n, n == 0 ? 0 : static_cast<Eigen::Index>(j.at(0).size()));
  for (Eigen::Index r = 0; r < n; ++r) m.row(r) = to_vec(j.at(r)).transpose();
  return m;
}

// Pairs and templates are printed 1-based.
json pair_json(CellPair p) { return json::array({p.from + 1, p.to + 1}); }
CellPair to_pair(const json& j) {
  return {j.at(0).get<std::size_t>() - 1, j.at(1).get<std::size_t>() - 1};
}

json pairs_json(const std::vector<CellPair>& ps) {
  json out = json::array();
  for (CellPair p : ps) out.push_back(pair_json(p));
  return out;
}
std::vector<CellPair> to_pairs(const json& j) {
  std::vector<CellPair> out;
  for (const auto& p : j) out.push_back(to_pair(p));
  return out;
}

json cells_json(const std::vector<std::size_t>& cells) {
  json out = json::array();
  for (std::size_t i : cells) out.push_back(i + 1);
  return out;
}
std::vector<std::size_t> to_cells(const json& j) {
  std::vector<std::size_t> out;
  for (const auto& i : j) out.push_back(i.get<std::size_t>() - 1);
  return out;
}

json violation_json(const Violation& v) {
  return {{"point", vec(v.point)},
          {"generation", v.generation},
          {"bound", v.bound},
          {"value", v.value},
          {"limit", v.limit}};
}
Violation to_violation(const json& j) {
  return {to_vec(j.at("point")), j.at("generation").get<int>(), j.at("bound").get<std::string>(),
          j.at("value").get<double>(), j.at("limit").get<double>()};
}
json violations_json(const std::vector<Violation>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(violation_json(v));
  return out;
}
std::vector<Violation> to_violations(const json& j) {
  std::vector<Violation> out;
  for (const auto& v : j) out.push_back(to_violation(v));
  return out;
}

json record_json(const IterationRecord& rec) {
  json table = json::array();
  for (const auto& [key, value] : rec.table)
    table.push_back({{"pair", pair_json(key.first)}, {"template", key.second + 1}, {"value", value}});
  json policy = json::array();
  for (const auto& [key, entry] : rec.policy)
    policy.push_back({{"pair", pair_json(key.first)},
                      {"template", key.second + 1},
                      {"lambda", vec(entry.lambda)},
                      {"constant", entry.constant}});
  return {{"k", rec.k},
          {"omega", vec(rec.omega)},
          {"image", vec(rec.image)},
          {"pruned", pairs_json(rec.pruned)},
          {"table", table},
          {"policy", policy}};
}

IterationRecord to_record(const json& j) {
  IterationRecord rec;
  rec.k = j.at("k").get<int>();
  rec.omega = to_vec(j.at("omega"));
  rec.image = to_vec(j.at("image"));
  rec.pruned = to_pairs(j.at("pruned"));
  for (const auto& t : j.at("table"))
    rec.table.emplace(PairTemplate{to_pair(t.at("pair")), t.at("template").get<int>() - 1},
                      t.at("value").get<double>());
  for (const auto& p : j.at("policy"))
    rec.policy.emplace(PairTemplate{to_pair(p.at("pair")), p.at("template").get<int>() - 1},
                       PolicyEntry{to_vec(p.at("lambda")), p.at("constant").get<double>()});
  return rec;
}

Termination to_termination(const std::string& s) {
  for (Termination t : {Termination::FixedPoint, Termination::SelectionFailure,
                        Termination::MaxIters, Termination::Stalled, Termination::PolicyLpFailure})
    if (to_string(t) == s) return t;
  throw Error(ErrorKind::Parse, "unknown termination '" + s + "'");
}

json trace_json(const IterationTrace& tr) {
  json records = json::array();
  for (const auto& rec : tr.records) records.push_back(record_json(rec));
  json refuted = json::array();
  for (const auto& r : tr.refuted)
    refuted.push_back({{"pair", pair_json(r.pair)}, {"iteration", r.iteration}});
  return {{"initial", vec(tr.initial)},
          {"initial_image", vec(tr.initial_image)},
          {"initial_pruned", pairs_json(tr.initial_pruned)},
          {"iterations", records},
          {"termination", std::string(to_string(tr.termination))},
          {"message", tr.message},
          {"final", vec(tr.final_omega)},
          {"refuted", refuted},
          {"remaining", pairs_json(tr.remaining)}};
}

IterationTrace to_trace(const json& j) {
  IterationTrace tr;
  tr.initial = to_vec(j.at("initial"));
  tr.initial_image = to_vec(j.at("initial_image"));
  tr.initial_pruned = to_pairs(j.at("initial_pruned"));
  for (const auto& r : j.at("iterations")) tr.records.push_back(to_record(r));
  tr.termination = to_termination(j.at("termination").get<std::string>());
  tr.message = j.at("message").get<std::string>();
  tr.final_omega = to_vec(j.at("final"));
  for (const auto& r : j.at("refuted"))
    tr.refuted.push_back({to_pair(r.at("pair")), r.at("iteration").get<int>()});
  tr.remaining = to_pairs(j.at("remaining"));
  return tr;
}

std::string pair_text(CellPair p) {
  return "(" + std::to_string(p.from + 1) + "," + std::to_string(p.to + 1) + ")";
}

std::string pairs_text(const std::vector<CellPair>& ps) {
  std::string out = "{";
  for (std::size_t k = 0; k < ps.size(); ++k) out += (k ? "," : "") + pair_text(ps[k]);
  return out + "}";
}

std::string invariant_text(const VectorXd& omega, double alpha) {
  const auto d = omega.size() - 1;
  std::ostringstream out;
  out << std::setprecision(6) << "{x :";
  for (Eigen::Index k = 0; k < d; ++k) out << " x" << k + 1 << "^2 <= " << omega[k] << ",";
  out << " L(x) <= " << omega[d] << "} intersected with {x : L(x) <= " << alpha << "}";
  return out.str();
}

std::vector<std::size_t> reachable(const std::vector<std::size_t>& start,
                                   const std::vector<CellPair>& edges) {
  std::set<std::size_t> seen(start.begin(), start.end());
  std::vector<std::size_t> todo(start.begin(), start.end());
  while (!todo.empty()) {
    std::size_t i = todo.back();
    todo.pop_back();
    for (CellPair p : edges)
      if (p.from == i && seen.insert(p.to).second) todo.push_back(p.to);
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

bool default_homogeneous(const PwaSystem& sys) {
  for (const Cell& c : sys.cells()) {
    if (!c.dynamics.b.isZero(0.0)) return false;
    for (const ConstraintRow& r : c.guard.rows())
      if (r.b != 0.0) return false;
  }
  return true;
}

PqlCertificate CertificateSummary::certificate() const {
  PqlCertificate cert;
  cert.forms = forms;
  cert.alpha = alpha;
  cert.beta = beta;
  cert.homogeneous = homogeneous;
  return cert;
}

std::optional<VectorXd> AnalysisReport::final_bounds() const {
  if (trace && trace->final_omega.size() > 0) return trace->final_omega;
  if (!certificate) return std::nullopt;
  VectorXd w = VectorXd::Constant(dimension + 1, certificate->beta);
  w[dimension] = certificate->alpha;
  return w;
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Parse: return "parse";
    case Stage::Analysis: return "analysis";
    case Stage::Synthesis: return "synthesis";
    case Stage::Iteration: return "iteration";
    case Stage::Validation: return "validation";
  }
  return "validation";
}

TraceConclusions trace_conclusions(const PwaSystem& sys, const SwitchSets& sw,
                                   const IterationTrace& tr, double alpha) {
  TraceConclusions c;
  for (const auto& r : tr.refuted)
    c.lines.push_back("switch " + pair_text(r.pair) + " refuted at iteration " +
                      std::to_string(r.iteration));
  c.lines.push_back("remaining switches are contained in " + pairs_text(tr.remaining));
  c.reachable_cells = reachable(sw.in_set, tr.remaining);
  if (c.reachable_cells.size() == 1) {
    const std::string& name = sys.cell(c.reachable_cells.front()).name;
    c.lines.push_back("trajectories never leave " + name +
                      ": the system is a constrained affine system");
  }
  c.lines.push_back("invariant " + invariant_text(tr.final_omega, alpha));
  return c;
}

AnalysisReport run_pipeline(const std::string& system_path, const PipelineOptions& options) {
  AnalysisReport report;
  report.system_path = system_path;
  Stage current = Stage::Parse;
  auto timed = [&](Stage stage, const std::function<void()>& body) {
    current = stage;
    const auto start = std::chrono::steady_clock::now();
    body();
    const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - start;
    report.timings.push_back({std::string(stage_name(stage)), spent.count()});
    return stage < options.until;
  };

  try {
    std::optional<PwaSystem> sys;
    if (!timed(Stage::Parse, [&] {
          sys.emplace(load_system_file(system_path));
          report.dimension = sys->dim();
          for (const Cell& c : sys->cells()) report.cells.push_back(c.name);
        }))
      return report;

    SwitchSets sw;
    std::optional<X0Bounds> x0;
    if (!timed(Stage::Analysis, [&] {
          sw = compute_switch_sets(*sys, options.settings);
          report.switches_computed = true;
          report.sw_bar = sw.sw_bar;
          report.in_set = sw.in_set;
          const auto disjoint = guards_disjoint(*sys, options.settings);
          report.guards_disjoint = std::all_of(disjoint.begin(), disjoint.end(),
                                               [](const DisjointPair& p) { return p.disjoint; });
          x0 = x0_coordinate_bounds(*sys, options.settings);
          report.x0_bounds.assign(x0->values.data(), x0->values.data() + sys->dim());
        }))
      return report;

    const LiftedSystem lifted = build_lifted(*sys, sw);
    PqlCertificate cert;
    if (!timed(Stage::Synthesis, [&] {
          CertificateSummary summary;
          if (options.certificate_path) {
            std::ifstream in(*options.certificate_path);
            if (!in)
              throw Error(ErrorKind::CertificateRejected,
                          "cannot open certificate " + *options.certificate_path);
            std::stringstream text;
            text << in.rdbuf();
            cert = certificate_from_json(text.str(), *sys);
            summary.source = *options.certificate_path;
          } else {
            SynthesisOptions synth;
            synth.homogeneous = options.homogeneous.value_or(default_homogeneous(*sys));
            synth.settings = options.settings;
            cert = synthesize(*sys, sw, lifted, synth);
            summary.source = "synthesized";
          }
          VerifyOptions verify;
          verify.settings = options.settings;
          const VerificationReport checked = check_certificate(cert, *sys, sw, lifted, verify);
          summary.homogeneous = cert.homogeneous;
          summary.alpha = cert.alpha;
          summary.beta = cert.beta;
          summary.forms = cert.forms;
          summary.accepted = checked.accepted;
          summary.failures = checked.failures();
          report.certificate = summary;
          if (!checked.accepted) {
            std::string msg = "certificate rejected:";
            for (const auto& f : summary.failures) msg += "\n  " + f;
            throw Error(ErrorKind::CertificateRejected, msg);
          }
        }))
      return report;

    if (!timed(Stage::Iteration, [&] {
          IterationOptions it;
          it.max_iters = options.max_iters;
          it.tol = options.tol;
          it.settings = options.settings;
          report.trace = iterate(*sys, cert, lifted, sw, *x0, it);
          TraceConclusions c = trace_conclusions(*sys, sw, *report.trace, cert.alpha);
          report.reachable_cells = std::move(c.reachable_cells);
          report.conclusions = std::move(c.lines);
        }))
      return report;

    timed(Stage::Validation, [&] {
      const ReachSample sample = simulate(*sys, options.grid, options.steps);
      ValidationSummary v;
      v.grid = options.grid;
      v.steps = options.steps;
      v.points = sample.size();
      v.level_violations = check_level_bounds(sample, *sys, cert);
      v.bound_violations = check_membership(sample, *sys, cert, *report.final_bounds());
      report.validation = v;
      const std::size_t count = v.level_violations.size() + v.bound_violations.size();
      if (count > 0)
        throw Error(ErrorKind::Validation,
                    std::to_string(count) + " simulated points violate the reported bounds");
    });
  } catch (const std::exception& e) {
    report.exit_code = static_cast<int>(current);
    report.failed_stage = std::string(stage_name(current));
    report.error = e.what();
  }
  return report;
}

std::string report_to_json(const AnalysisReport& r, int indent) {
  json j;
  j["system"] = {{"path", r.system_path}, {"dimension", r.dimension}, {"cells", r.cells}};
  if (r.switches_computed)
    j["switches"] = {{"sw_bar", pairs_json(r.sw_bar)},
                     {"in", cells_json(r.in_set)},
                     {"disjoint", r.guards_disjoint},
                     {"x0_bounds", r.x0_bounds}};
  if (r.certificate) {
    const CertificateSummary& c = *r.certificate;
    json forms = json::array();
    for (std::size_t i = 0; i < c.forms.size(); ++i)
      forms.push_back({{"index", i + 1},
                       {"name", i < r.cells.size() ? r.cells[i] : ""},
                       {"P", mat(c.forms[i].P)},
                       {"q", vec(c.forms[i].q)}});
    j["certificate"] = {{"source", c.source},     {"homogeneous", c.homogeneous},
                        {"alpha", c.alpha},       {"beta", c.beta},
                        {"cells", forms},         {"accepted", c.accepted},
                        {"failures", c.failures}};
  }
  if (r.trace) j["iteration"] = trace_json(*r.trace);
  if (auto w = r.final_bounds(); w && r.certificate)
    j["invariant"] = {{"omega", vec(*w)},
                      {"alpha", r.certificate->alpha},
                      {"description", invariant_text(*w, r.certificate->alpha)}};
  j["reachable_cells"] = cells_json(r.reachable_cells);
  j["conclusions"] = r.conclusions;
  if (r.validation)
    j["validation"] = {{"grid", r.validation->grid},
                       {"steps", r.validation->steps},
                       {"points", r.validation->points},
                       {"level_violations", violations_json(r.validation->level_violations)},
                       {"bound_violations", violations_json(r.validation->bound_violations)}};
  json timings = json::array();
  for (const auto& t : r.timings) timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  j["timings"] = timings;
  j["status"] = {{"exit_code", r.exit_code}};
  if (r.failed_stage) j["status"]["stage"] = *r.failed_stage;
  if (r.error) j["status"]["error"] = *r.error;
  return j.dump(indent);
}

AnalysisReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("report is not valid JSON: ") + e.what());
  }
  try {
    AnalysisReport r;
    const json& s = j.at("system");
    r.system_path = s.at("path").get<std::string>();
    r.dimension = s.at("dimension").get<int>();
    r.cells = s.at("cells").get<std::vector<std::string>>();
    if (j.contains("switches")) {
      const json& sw = j.at("switches");
      r.switches_computed = true;
      r.sw_bar = to_pairs(sw.at("sw_bar"));
      r.in_set = to_cells(sw.at("in"));
      r.guards_disjoint = sw.at("disjoint").get<bool>();
      r.x0_bounds = sw.at("x0_bounds").get<std::vector<double>>();
    }
    if (j.contains("certificate")) {
      const json& c = j.at("certificate");
      CertificateSummary summary;
      summary.source = c.at("source").get<std::string>();
      summary.homogeneous = c.at("homogeneous").get<bool>();
      summary.alpha = c.at("alpha").get<double>();
      summary.beta = c.at("beta").get<double>();
      for (const auto& f : c.at("cells")) summary.forms.push_back({to_mat(f.at("P")), to_vec(f.at("q"))});
      summary.accepted = c.at("accepted").get<bool>();
      summary.failures = c.at("failures").get<std::vector<std::string>>();
      r.certificate = summary;
    }
    if (j.contains("iteration")) r.trace = to_trace(j.at("iteration"));
    r.reachable_cells = to_cells(j.at("reachable_cells"));
    r.conclusions = j.at("conclusions").get<std::vector<std::string>>();
    if (j.contains("validation")) {
      const json& v = j.at("validation");
      ValidationSummary summary;
      summary.grid = v.at("grid").get<int>();
      summary.steps = v.at("steps").get<int>();
      summary.points = v.at("points").get<std::size_t>();
      summary.level_violations = to_violations(v.at("level_violations"));
      summary.bound_violations = to_violations(v.at("bound_violations"));
      r.validation = summary;
    }
    for (const auto& t : j.at("timings"))
      r.timings.push_back({t.at("stage").get<std::string>(), t.at("seconds").get<double>()});
    const json& st = j.at("status");
    r.exit_code = st.at("exit_code").get<int>();
    if (st.contains("stage")) r.failed_stage = st.at("stage").get<std::string>();
    if (st.contains("error")) r.error = st.at("error").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed report: ") + e.what());
  }
}

AnalysisReport without_timings(AnalysisReport report) {
  for (auto& t : report.timings) t.seconds = 0.0;
  return report;
}

std::string violations_to_jsonl(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) out += violation_json(v).dump() + "\n";
  return out;
}

std::string emit_plot_data(const PwaSystem& sys, const PqlCertificate& cert, const VectorXd& omega,
                           const ReachSample& sample, int resolution) {
  const int d = sys.dim();
  VectorXd lo = -omega.head(d).cwiseMax(0.0).cwiseSqrt();
  VectorXd hi = -lo;
  for (const VectorXd& x : sample.points) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const VectorXd pad = 0.05 * (hi - lo).cwiseMax(1e-9);
  lo -= pad;
  hi += pad;

  std::ostringstream out;
  out << std::setprecision(10) << "section";
  for (int k = 0; k < d; ++k) out << ",x" << k + 1;
  out << ",generation,L,ratio\n";
  for (std::size_t s = 0; s < sample.size(); ++s) {
    out << "reach";
    for (int k = 0; k < d; ++k) out << "," << sample.points[s][k];
    out << "," << sample.generation[s] << ",,\n";
  }

  const int n = std::max(2, resolution);
  std::vector<int> idx(d, 0);
  VectorXd x(d);
  for (bool more = true; more;) {
    for (int k = 0; k < d; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * idx[k] / (n - 1);
    double level = std::numeric_limits<double>::quiet_NaN();
    try {
      level = evaluate_L(cert, sys, x);
    } catch (const Error&) {
      // Outside the partition or on an overlap; left blank.
    }
    double ratio = 0.0;
    for (int k = 0; k < d; ++k)
      ratio = std::max(ratio, omega[k] > 0 ? x[k] * x[k] / omega[k]
                                           : std::numeric_limits<double>::infinity());
    out << "field";
    for (int k = 0; k < d; ++k) out << "," << x[k];
    out << ",,";
    if (!std::isnan(level)) out << level;
    out << "," << ratio << "\n";
    more = false;
    for (int k = 0; k < d; ++k) {
      if (++idx[k] < n) {
        more = true;
        break;
      }
      idx[k] = 0;
    }
  }
  return out.str();
}

}  // namespace pwacert
