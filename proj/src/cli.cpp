#include "cqtsim/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cqtsim/kernels.hpp"
#include "cqtsim/oracle.hpp"
#include "cqtsim/script.hpp"

namespace cqt::cli {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct CommonOpts {
  double alpha = 2.0;
  int nmax = 64;
  double gt = -1.0;  // unset -> pi / (4 alpha)
  std::uint64_t seed = 1;
  int trials = 1;
  std::string format = "json";
  std::string out_path;

  ProtocolParams params() const {
    ProtocolParams p = ProtocolParams::for_alpha(alpha, nmax);
    if (gt >= 0.0) p.gt_probe = gt;
    p.seed = seed;
    return p;
  }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--alpha", opts.alpha, "coherent amplitude alpha")->capture_default_str();
  cmd->add_option("--nmax", opts.nmax, "Fock cutoff")->capture_default_str();
  cmd->add_option("--gt", opts.gt, "probe pulse area (default pi/(4 alpha))");
  cmd->add_option("--seed", opts.seed, "RNG seed (CQT_SEED overrides)")->capture_default_str();
  cmd->add_option("--trials", opts.trials, "number of trials")->check(CLI::PositiveNumber);
  cmd->add_option("--format", opts.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", opts.out_path, "write output to a file instead of stdout");
}

json params_json(const ProtocolParams& p) {
  return json{{"alpha", p.alpha},
              {"n_max", p.n_max},
              {"phi", p.phi},
              {"gt_probe", p.gt_probe},
              {"tail_tol", p.tail_tol},
              {"postselect_min", p.postselect_min},
              {"seed", p.seed},
              {"nbar", p.nbar()},
              {"nbar_rounded", p.nbar_rounded()}};
}

int emit(const CommonOpts& opts, std::ostream& out, std::ostream& err, const json& payload,
         const std::function<std::string()>& csv, int code) {
  std::string text;
  if (opts.format == "csv") {
    text = csv();
  } else {
    text = payload.dump(2);
    text += '\n';
  }
  if (!opts.out_path.empty()) {
    std::ofstream f(opts.out_path, std::ios::binary);
    if (!f) {
      err << "cannot open output file: " << opts.out_path << "\n";
      return 2;
    }
    f << text;
  } else {
    out << text;
  }
  return code;
}

struct TrialRow {
  int trial;
  std::string injection;
  std::string outcome1, outcome2;
  double probe_prob;
  double fidelity;
};

std::string trial_csv(const std::vector<TrialRow>& rows) {
  std::string out = "trial,injection,outcome1,outcome2,probe_prob,fidelity\n";
  for (const auto& r : rows) {
    out += std::to_string(r.trial) + "," + r.injection + "," + r.outcome1 + "," + r.outcome2 +
           "," + fmt(r.probe_prob) + "," + fmt(r.fidelity) + "\n";
  }
  return out;
}

json trial_json(const TrialRow& r) {
  return json{{"trial", r.trial},       {"injection", r.injection},
              {"outcome1", r.outcome1}, {"outcome2", r.outcome2},
              {"probe_prob", r.probe_prob}, {"fidelity", r.fidelity}};
}

InputQubit normalized_qubit(double zeta, double xi) {
  const double n = std::sqrt(zeta * zeta + xi * xi);
  if (n < 1e-12) throw UsageError("zeta and xi cannot both be zero");
  return InputQubit(cplx{zeta / n, 0.0}, cplx{xi / n, 0.0});
}

InputQubit haar_qubit(Rng& rng) {
  cplx z = rng.normal_cplx();
  cplx x = rng.normal_cplx();
  const double n = std::sqrt(std::norm(z) + std::norm(x));
  return InputQubit(z / n, x / n);
}

// ------------------------------------------------------------------ bell

int cmd_bell(const CommonOpts& opts, const std::string& kind_str, std::ostream& out,
             std::ostream& err) {
  const auto kind = parse_bell_kind(kind_str);
  if (!kind) {
    err << "unknown bell kind: " << kind_str << " (use phi+ phi- psi+ psi-)\n";
    return 2;
  }
  const ProtocolParams params = opts.params();
  BellPreparation prep = prepare_bell(params, *kind);
  const double fid = subsystem_fidelity(
      prep.state, std::array<std::string, 2>{"A1", "A2"}, bell_amplitudes(*kind));
  const std::string injection = to_string(preparation_injection(*kind));

  std::vector<TrialRow> rows;
  for (int t = 0; t < opts.trials; ++t)
    rows.push_back({t, injection, "", "", prep.success_probability, fid});

  json j{{"command", "bell"},
         {"kind", to_string(*kind)},
         {"injection", injection},
         {"params", params_json(params)},
         {"success_probability", prep.success_probability},
         {"fidelity", fid}};
  j["trials"] = json::array();
  for (const auto& r : rows) j["trials"].push_back(trial_json(r));
  return emit(opts, out, err, j, [&] { return trial_csv(rows); }, 0);
}

// ------------------------------------------------------------- discriminate

int cmd_discriminate(const CommonOpts& opts, const std::string& kind_str,
                     const std::string& inject_str, std::ostream& out, std::ostream& err) {
  const auto kind = parse_bell_kind(kind_str);
  if (!kind) {
    err << "unknown bell kind: " << kind_str << "\n";
    return 2;
  }
  std::optional<InjectionSign> sign = discrimination_injection(*kind);
  if (!inject_str.empty()) {
    sign = parse_injection(inject_str);
    if (!sign) {
      err << "injection must be plus or minus\n";
      return 2;
    }
  }
  const ProtocolParams params = opts.params();

  std::vector<TrialRow> rows;
  json jtrials = json::array();
  for (int t = 0; t < opts.trials; ++t) {
    Rng rng = Rng::derive(params.seed, static_cast<std::uint64_t>(t));
    BellPreparation prep = prepare_bell(params, *kind);
    DiscriminationResult res = discriminate_bell(prep.state, params, *sign, rng);
    const bool match = res.inferred && *res.inferred == *kind;
    rows.push_back({t, to_string(*sign), res.outcome1, res.outcome2, res.probe_probability,
                    match ? 1.0 : 0.0});
    json row = trial_json(rows.back());
    row["inferred"] = res.inferred ? to_string(*res.inferred) : "unknown";
    row["match"] = match;
    jtrials.push_back(std::move(row));
  }

  json j{{"command", "discriminate"},
         {"kind", to_string(*kind)},
         {"injection", to_string(*sign)},
         {"params", params_json(params)},
         {"trials", std::move(jtrials)}};
  return emit(opts, out, err, j, [&] { return trial_csv(rows); }, 0);
}

// ------------------------------------------------------------------ teleport

int cmd_teleport(const CommonOpts& opts, double zeta, double xi, const std::string& inject_str,
                 std::ostream& out, std::ostream& err) {
  const auto sign = parse_injection(inject_str);
  if (!sign) {
    err << "injection must be plus or minus\n";
    return 2;
  }
  const ProtocolParams params = opts.params();
  const InputQubit input = normalized_qubit(zeta, xi);

  std::vector<TrialRow> rows;
  json jtrials = json::array();
  int failures = 0;
  for (int t = 0; t < opts.trials; ++t) {
    Rng rng = Rng::derive(params.seed, static_cast<std::uint64_t>(t));
    TeleportRecord rec = teleport(input, params, *sign, rng);
    if (!rec.success) ++failures;
    rows.push_back({t, to_string(*sign), rec.message.outcome1, rec.message.outcome2,
                    rec.probe_probability, rec.fidelity});
    json row = trial_json(rows.back());
    row["success"] = rec.success;
    row["bell_branch_prob"] = rec.bell_branch_probability;
    row["bob_gate"] = rec.bob_gate;
    jtrials.push_back(std::move(row));
  }

  json j{{"command", "teleport"},
         {"zeta", input.zeta.real()},
         {"xi", input.xi.real()},
         {"injection", to_string(*sign)},
         {"params", params_json(params)},
         {"trials", std::move(jtrials)}};
  const int code = (opts.trials == 1 && failures == 1) ? 3 : 0;
  return emit(opts, out, err, j, [&] { return trial_csv(rows); }, code);
}

// -------------------------------------------------------------------- sweep

struct SweepPoint {
  double value;
  ProtocolParams params;
  double probe_prob;  // analytic excited-probe probability of one run
  double e3_rate;
  double mean_fidelity;
};

int cmd_sweep(const CommonOpts& opts, const std::string& spec, std::ostream& out,
              std::ostream& err) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos) {
    err << "sweep spec must look like gt=0.1:0.8:0.05 or alpha=1,1.5,2\n";
    return 2;
  }
  const std::string var = spec.substr(0, eq);
  if (var != "alpha" && var != "nmax" && var != "gt") {
    err << "sweep variable must be one of alpha, nmax, gt\n";
    return 2;
  }
  const std::string body = spec.substr(eq + 1);
  std::vector<double> values;
  try {
    if (body.find(':') != std::string::npos) {
      std::istringstream ss(body);
      std::string a, b, c;
      std::getline(ss, a, ':');
      std::getline(ss, b, ':');
      std::getline(ss, c);
      const double start = std::stod(a), stop = std::stod(b), step = std::stod(c);
      if (step <= 0.0 || stop < start) throw std::invalid_argument("bad range");
      const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
      for (int i = 0; i < count; ++i) values.push_back(start + i * step);
    } else {
      std::istringstream ss(body);
      std::string item;
      while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
    }
  } catch (const std::exception&) {
    err << "cannot parse sweep values: " << body << "\n";
    return 2;
  }
  if (values.empty()) {
    err << "sweep needs at least one value\n";
    return 2;
  }

  std::vector<SweepPoint> points(values.size());
  for (std::size_t pi = 0; pi < values.size(); ++pi) {
    CommonOpts local = opts;
    if (var == "alpha") local.alpha = values[pi];
    else if (var == "nmax") local.nmax = static_cast<int>(values[pi]);
    else local.gt = values[pi];
    SweepPoint& point = points[pi];
    point.value = values[pi];
    point.params = local.params();
    point.probe_prob =
        oracle::probe_success_probability(2.0 * point.params.alpha, point.params.gt_probe,
                                          point.params.n_max) /
        2.0;

    std::vector<char> success(static_cast<std::size_t>(opts.trials), 0);
    std::vector<double> fid(static_cast<std::size_t>(opts.trials), 0.0);
    const std::uint64_t point_stream = static_cast<std::uint64_t>(pi) * 0x100000ULL;
    // Trials are independent streams; order of completion never matters.
#pragma omp parallel for schedule(static)
    for (int t = 0; t < opts.trials; ++t) {
      Rng rng = Rng::derive(opts.seed, point_stream + static_cast<std::uint64_t>(t));
      const InputQubit input = haar_qubit(rng);
      const InjectionSign sign = (t % 2 == 0) ? InjectionSign::minus : InjectionSign::plus;
      TeleportRecord rec = teleport(input, point.params, sign, rng);
      success[static_cast<std::size_t>(t)] = rec.success ? 1 : 0;
      fid[static_cast<std::size_t>(t)] = rec.success ? rec.fidelity : 0.0;
    }
    int ok = 0;
    double fid_sum = 0.0;
    for (int t = 0; t < opts.trials; ++t) {
      ok += success[static_cast<std::size_t>(t)];
      fid_sum += fid[static_cast<std::size_t>(t)];
    }
    point.e3_rate = static_cast<double>(ok) / static_cast<double>(opts.trials);
    point.mean_fidelity = ok > 0 ? fid_sum / static_cast<double>(ok) : 0.0;
  }

  json jpoints = json::array();
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const SweepPoint& p = points[pi];
    jpoints.push_back({{"point", pi},
                       {"variable", var},
                       {"value", p.value},
                       {"trials", opts.trials},
                       {"probe_prob", p.probe_prob},
                       {"e3_rate", p.e3_rate},
                       {"mean_fidelity", p.mean_fidelity},
                       {"params", params_json(p.params)}});
  }
  json j{{"command", "sweep"},
         {"spec", {{"variable", var}, {"values", values}, {"trials", opts.trials},
                   {"seed", opts.seed}}},
         {"points", std::move(jpoints)}};

  auto csv = [&] {
    std::string text = "point,variable,value,trials,probe_prob,e3_rate,mean_fidelity\n";
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const SweepPoint& p = points[pi];
      text += std::to_string(pi) + "," + var + "," + fmt(p.value) + "," +
              std::to_string(opts.trials) + "," + fmt(p.probe_prob) + "," + fmt(p.e3_rate) +
              "," + fmt(p.mean_fidelity) + "\n";
    }
    return text;
  };
  return emit(opts, out, err, j, csv, 0);
}

// ---------------------------------------------------------------------- run

int cmd_run(const CommonOpts& opts, const std::string& path,
            const std::vector<std::string>& extra_params, std::ostream& out, std::ostream& err) {
  if (opts.format == "csv") {
    err << "csv output is not defined for run; use --format json\n";
    return 2;
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    err << "cannot open script: " << path << "\n";
    return 2;
  }
  std::stringstream buffer;
  buffer << f.rdbuf();

  std::map<std::string, double> params;
  params["alpha"] = opts.alpha;
  params["nmax"] = static_cast<double>(opts.nmax);
  params["gt"] = opts.gt >= 0.0 ? opts.gt : kPi / (4.0 * opts.alpha);
  for (const auto& kv : extra_params) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      err << "--param expects name=value, got: " << kv << "\n";
      return 2;
    }
    try {
      params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      err << "cannot parse parameter value in: " << kv << "\n";
      return 2;
    }
  }

  script::ProtocolScript parsed;
  try {
    parsed = script::parse_script(buffer.str());
  } catch (const ParseError& e) {
    err << path << ":" << e.what() << "\n";
    return 2;
  }
  if (const auto missing = script::unbound_params(parsed, params); !missing.empty()) {
    for (const auto& [name, line] : missing)
      err << path << ": parameter '${" << name << "}' (line " << line
          << ") is not bound; pass --param " << name << "=VALUE\n";
    return 2;
  }
  script::RunReport report = script::execute_script(parsed, params, opts.seed);

  json jparams = json::object();
  for (const auto& [k, v] : params) jparams[k] = v;
  json j{{"command", "run"},
         {"script", path},
         {"params", std::move(jparams)},
         {"seed", opts.seed},
         {"report", report.to_json()}};
  return emit(opts, out, err, j, [] { return std::string(); }, report.failed ? 1 : 0);
}

// ------------------------------------------------------------------ selftest

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Check> run_selftest() {
  std::vector<Check> checks;
  const auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({name, pass, detail});
  };

  {  // closed-form cat norms and orthogonality
    bool ok = true;
    double worst = 0.0;
    for (double alpha : {0.5, 1.0, 2.0}) {
      const FockCutoff cutoff(64);
      const cvec even = cat_state(alpha, CatParity::even, cutoff, false);
      const cvec odd = cat_state(alpha, CatParity::odd, cutoff, false);
      const double ee = kernels::norm_sqr(even.data(), even.size());
      const double oo = kernels::norm_sqr(odd.data(), odd.size());
      const double x = std::exp(-2.0 * alpha * alpha);
      worst = std::max({worst, std::abs(ee - 2.0 * (1.0 + x)), std::abs(oo - 2.0 * (1.0 - x)),
                        std::abs(kernels::inner(even.data(), odd.data(), even.size()))});
    }
    ok = worst < 1e-10;
    add("cat-norms", ok, "max deviation " + fmt(worst));
  }

  {  // dispersive pi flips the coherent amplitude
    const FockCutoff cutoff(64);
    CompositeState st = compose({{AtomSite{"A", AtomBasis::fg}, {cplx{1, 0}, cplx{0, 0}}}},
                                coherent_state(cplx{2, 0}, cutoff).amp, cutoff);
    CompositeState flipped = dispersive_gate(st, "A", kPi);
    CompositeState want = compose({{AtomSite{"A", AtomBasis::fg}, {cplx{1, 0}, cplx{0, 0}}}},
                                  coherent_state(cplx{-2, 0}, cutoff).amp, cutoff);
    const double fid = fidelity(flipped, want);
    add("dispersive-pi-flip", fid >= 1.0 - 1e-10, "fidelity " + fmt(fid));
  }

  {  // displacement inverse pair
    const FockCutoff cutoff(64);
    CompositeState st = compose({}, coherent_state(cplx{2, 0}, cutoff).amp, cutoff);
    CompositeState back = displace(displace(st, cplx{-1.5, 0}), cplx{1.5, 0});
    const double fid = fidelity(st, back);
    add("displacement-inverse", fid >= 1.0 - 1e-10, "fidelity " + fmt(fid));
  }

  {  // excited-probe rate against the scalar sum
    const ProtocolParams params;
    const double want = oracle::probe_success_probability(4.0, params.gt_probe, params.n_max);
    const FockCutoff cutoff(params.n_max);
    CompositeState st = compose({{AtomSite{"P", AtomBasis::fe}, {cplx{1, 0}, cplx{0, 0}}}},
                                coherent_state(cplx{-4, 0}, cutoff).amp, cutoff);
    st = jc_evolve(st, "P", params.gt_probe);
    const double got = branch_probability(st, "P", "e");
    const bool ok = std::abs(got - want) < 1e-9 && want >= 0.95;
    add("probe-rate", ok, "jc " + fmt(got) + " vs sum " + fmt(want));
  }

  {  // fast path against the dense oracle
    Rng rng(20240817);
    double worst = 0.0;
    CompositeState shape = CompositeState::ground(
        {{"A", AtomBasis::fg}, {"P", AtomBasis::fe}}, FockCutoff(8));
    const std::vector<oracle::PrimitiveSpec> specs{
        oracle::GateSpec{"A", Gate2::r_h()}, oracle::DispersiveSpec{"A", 0.7},
        oracle::DisplaceSpec{cplx{0.3, 0.2}}, oracle::JcSpec{"P", 0.37}};
    for (const auto& spec : specs) {
      const oracle::DenseUnitary u = dense_unitary(spec, shape);
      const std::size_t pstride = shape.stride(shape.atom_pos("P"));
      const std::size_t ncav = shape.ncav();
      for (int rep = 0; rep < 20; ++rep) {
        cvec amp(shape.dim());
        for (auto& a : amp) a = rng.normal_cplx();
        // clear the probe's stranded corner so the jc guard accepts the state
        for (std::size_t ob = 0; ob < shape.dim() / (2 * pstride); ++ob) {
          for (std::size_t q = 0; q < pstride / ncav; ++q)
            amp[ob * 2 * pstride + pstride + q * ncav + ncav - 1] = cplx{0, 0};
        }
        const double inv = 1.0 / std::sqrt(kernels::norm_sqr(amp.data(), amp.size()));
        for (auto& a : amp) a *= inv;
        CompositeState st(shape.sites(), shape.cutoff(), amp);
        CompositeState fast = st;
        if (const auto* g = std::get_if<oracle::GateSpec>(&spec))
          fast = apply_gate(st, g->atom, g->gate);
        else if (const auto* d = std::get_if<oracle::DispersiveSpec>(&spec))
          fast = dispersive_gate(st, d->atom, d->phi);
        else if (const auto* dis = std::get_if<oracle::DisplaceSpec>(&spec))
          fast = displace(st, dis->beta, 1.0);
        else if (const auto* jc = std::get_if<oracle::JcSpec>(&spec))
          fast = jc_evolve(st, jc->atom, jc->gt);
        const cvec ref = u.apply(amp);
        for (std::size_t i = 0; i < ref.size(); ++i)
          worst = std::max(worst, std::abs(ref[i] - fast.amp()[i]));
      }
    }
    add("dense-oracle-agreement", worst < 1e-10, "max |diff| " + fmt(worst));
  }

  {  // preparation and discrimination round trip
    const ProtocolParams params;
    bool ok = true;
    std::string detail;
    for (BellKind kind : {BellKind::phi_plus, BellKind::phi_minus, BellKind::psi_plus,
                          BellKind::psi_minus}) {
      BellPreparation prep = prepare_bell(params, kind);
      const double fid = subsystem_fidelity(
          prep.state, std::array<std::string, 2>{"A1", "A2"}, bell_amplitudes(kind));
      Rng rng(7);
      DiscriminationResult res =
          discriminate_bell(prep.state, params, discrimination_injection(kind), rng);
      if (fid < 1.0 - 1e-9 || !res.inferred || *res.inferred != kind) {
        ok = false;
        detail = to_string(kind) + " fidelity " + fmt(fid);
        break;
      }
    }
    add("bell-prepare-discriminate", ok, ok ? "all four kinds" : detail);
  }

  {  // basis states teleport exactly
    const ProtocolParams params;
    Rng rng(11);
    TeleportRecord rec = teleport(InputQubit(cplx{1, 0}, cplx{0, 0}), params,
                                  InjectionSign::minus, rng);
    const bool ok = !rec.success || rec.fidelity >= 1.0 - 1e-9;
    add("teleport-basis-state", ok,
        rec.success ? "fidelity " + fmt(rec.fidelity) : "probe not excited (allowed)");
  }

  return checks;
}

int cmd_selftest(const CommonOpts& opts, std::ostream& out, std::ostream& err) {
  const std::vector<Check> checks = run_selftest();
  bool all = true;
  for (const auto& c : checks) all = all && c.pass;

  if (opts.format == "csv") {
    std::string text = "name,pass,detail\n";
    for (const auto& c : checks)
      text += c.name + "," + (c.pass ? "1" : "0") + "," + c.detail + "\n";
    return emit(opts, out, err, json{}, [&] { return text; }, all ? 0 : 1);
  }
  json j{{"command", "selftest"}, {"passed", all}};
  j["checks"] = json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return emit(opts, out, err, j, [] { return std::string(); }, all ? 0 : 1);
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cavity-QED Bell-state and teleportation simulator"};
  app.name("cqtsim");
  app.require_subcommand(1);

  CommonOpts opts;

  std::string kind_str;
  std::string inject_str;
  double zeta = 1.0, xi = 0.0;
  std::string script_path;
  std::string sweep_spec;
  std::vector<std::string> extra_params;

  CLI::App* c_run = app.add_subcommand("run", "execute a .cqp protocol script");
  c_run->add_option("script", script_path, "path to the .cqp file")->required();
  c_run->add_option("--param", extra_params, "bind a script parameter, name=value");
  add_common(c_run, opts);

  CLI::App* c_bell = app.add_subcommand("bell", "prepare a Bell state");
  c_bell->add_option("--kind", kind_str, "phi+ phi- psi+ psi-")->required();
  add_common(c_bell, opts);

  CLI::App* c_disc = app.add_subcommand("discriminate", "prepare and identify a Bell state");
  c_disc->add_option("--kind", kind_str, "phi+ phi- psi+ psi-")->required();
  c_disc->add_option("--inject", inject_str, "plus or minus (default: matched to kind)");
  add_common(c_disc, opts);

  CLI::App* c_tel = app.add_subcommand("teleport", "teleport a qubit");
  c_tel->add_option("--zeta", zeta, "amplitude of |f>")->capture_default_str();
  c_tel->add_option("--xi", xi, "amplitude of |g>")->capture_default_str();
  c_tel->add_option("--inject", inject_str, "plus or minus")->default_val("minus");
  add_common(c_tel, opts);

  CLI::App* c_sweep = app.add_subcommand("sweep", "sweep a parameter over teleport trials");
  c_sweep->add_option("--spec", sweep_spec, "var=start:stop:step or var=v1,v2,...")->required();
  add_common(c_sweep, opts);

  CLI::App* c_self = app.add_subcommand("selftest", "run the built-in reference checks");
  add_common(c_self, opts);

  std::vector<const char*> argv;
  argv.push_back("cqtsim");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    err << app.help();
    return 2;
  }

  if (const char* env_seed = std::getenv("CQT_SEED")) {
    std::uint64_t v = 0;
    const std::string s(env_seed);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      err << "CQT_SEED must be an unsigned integer\n";
      return 2;
    }
    opts.seed = v;
  }

  try {
    if (c_run->parsed()) return cmd_run(opts, script_path, extra_params, out, err);
    if (c_bell->parsed()) return cmd_bell(opts, kind_str, out, err);
    if (c_disc->parsed()) return cmd_discriminate(opts, kind_str, inject_str, out, err);
    if (c_tel->parsed()) return cmd_teleport(opts, zeta, xi, inject_str, out, err);
    if (c_sweep->parsed()) return cmd_sweep(opts, sweep_spec, out, err);
    if (c_self->parsed()) return cmd_selftest(opts, out, err);
  } catch (const ScriptRuntimeError& e) {
    err << "script error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "no subcommand given\n";
  return 2;
}

}  // namespace cqt::cli
