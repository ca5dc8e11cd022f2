#include "dfskit/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "dfskit/checks.hpp"
#include "dfskit/decompose.hpp"
#include "dfskit/dynamics.hpp"
#include "dfskit/errors.hpp"
#include "dfskit/finder.hpp"
#include "dfskit/linalg.hpp"
#include "dfskit/models.hpp"
#include "dfskit/robustness.hpp"
#include "dfskit/serialize.hpp"

namespace dfskit {

namespace {

using io::Json;

struct GlobalArgs {
  std::uint64_t seed = 0xDF5;
  double tol = 1e-8;
  std::string out;
  std::string format = "json";
};

struct ModelArgs {
  std::string name;
  std::string input;
  std::size_t n = 0;
  std::size_t cutoff = 0;
  std::size_t modes = 1;
  double rate = 1.0;
  bool full_group = false;
  bool independent = false;
  std::vector<double> omegas, raman, rates, s;
  double delta = 0.0;
  double kappa = 1.0;
  double g = 1.0;
};

void add_model_options(CLI::App* sub, ModelArgs& m, bool with_input) {
  if (with_input) sub->add_option("--input,-i", m.input, "Model JSON file");
  sub->add_option("--model,-m", m.name, "Built-in model name")
      ->check(CLI::IsMember(models::model_names()));
  sub->add_option("--n", m.n, "Number of qubits, lower levels or atoms (K for weak_dephasing)");
  sub->add_option("--cutoff", m.cutoff, "Boson cutoff");
  sub->add_option("--modes", m.modes, "Bath modes (spin_boson)");
  sub->add_option("--rate", m.rate, "Noise rate");
  sub->add_flag("--full-group", m.full_group, "qx: list every non-identity group element");
  sub->add_flag("--independent", m.independent, "spin_boson: site-dependent couplings");
  sub->add_option("--omegas", m.omegas, "eit: Rabi frequencies");
  sub->add_option("--raman", m.raman, "eit: Raman detunings");
  sub->add_option("--rates", m.rates, "eit: emission rates");
  sub->add_option("--delta", m.delta, "eit: detuning");
  sub->add_option("--kappa", m.kappa, "dicke: cavity loss rate");
  sub->add_option("--g", m.g, "dicke: atom-cavity coupling");
  sub->add_option("--s", m.s, "dicke: mode-environment couplings");
}

std::size_t default_n(const std::string& name) {
  if (name == "eit") return 3;
  if (name == "dicke" || name == "spin_boson") return 2;
  return 4;
}

models::ModelBundle build_bundle(const ModelArgs& m) {
  const std::size_t n = m.n ? m.n : default_n(m.name);
  if (m.name == "weak_dephasing") return models::weak_collective_dephasing(n, m.rate);
  if (m.name == "strong_collective") return models::strong_collective(n, m.rate);
  if (m.name == "eit") {
    models::EitParams p;
    p.n = n;
    p.omegas = m.omegas;
    p.raman = m.raman;
    p.rates = m.rates;
    p.delta = m.delta;
    return models::eit_model(p);
  }
  if (m.name == "dicke") {
    models::DickeParams p;
    p.n = n;
    if (m.cutoff) p.cutoff = m.cutoff;
    p.g = m.g;
    p.kappa = m.kappa;
    if (!m.s.empty()) p.s.assign(m.s.begin(), m.s.end());
    return models::dicke_cavity_model(p);
  }
  if (m.name == "qx") return models::multiple_qubit_error_model(n, m.full_group, m.rate);
  if (m.name == "spin_boson") {
    models::SpinBosonParams p;
    p.n = n;
    p.modes = m.modes;
    if (m.cutoff) p.cutoff = m.cutoff;
    p.collective = !m.independent;
    p.rate = m.rate;
    return models::spin_boson_toy(p);
  }
  throw ValidationError("unknown model '" + m.name + "'");
}

Json model_config(const ModelArgs& m) {
  Json j;
  if (!m.input.empty()) {
    j["input"] = m.input;
    return j;
  }
  j["model"] = m.name;
  j["n"] = m.n ? m.n : default_n(m.name);
  if (m.cutoff) j["cutoff"] = m.cutoff;
  j["rate"] = m.rate;
  if (m.name == "qx") j["full_group"] = m.full_group;
  if (m.name == "spin_boson") {
    j["modes"] = m.modes;
    j["independent"] = m.independent;
  }
  if (m.name == "eit") {
    j["omegas"] = m.omegas;
    j["raman"] = m.raman;
    j["rates"] = m.rates;
    j["delta"] = m.delta;
  }
  if (m.name == "dicke") {
    j["g"] = m.g;
    j["kappa"] = m.kappa;
    j["s"] = m.s;
  }
  return j;
}

struct LoadedModel {
  ErrorModel error_model;
  std::optional<LindbladModel> lindblad;
  std::optional<models::ModelBundle> bundle;
};

LoadedModel load_model(const ModelArgs& m) {
  if (!m.input.empty() && !m.name.empty()) throw ValidationError("give either --input or --model, not both");
  if (!m.input.empty()) {
    const Json j = io::read_file(m.input);
    ErrorModel em = io::error_model_from_json(j);
    if (em.ops.empty()) throw ValidationError("model has an empty operator list");
    return LoadedModel{em, io::lindblad_from_json(j), std::nullopt};
  }
  if (m.name.empty()) throw ValidationError("a model is required (--input FILE or --model NAME)");
  models::ModelBundle b = build_bundle(m);
  return LoadedModel{b.error_model, b.lindblad, b};
}

Json base_report(const std::string& command, const GlobalArgs& g) {
  Json j;
  j["version"] = kVersion;
  j["config"] = Json{{"command", command}, {"seed", g.seed}, {"tol", g.tol}, {"format", g.format}};
  return j;
}

void emit(const GlobalArgs& g, std::ostream& out, const std::string& text) {
  if (g.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw ValidationError("cannot open output file '" + g.out + "'");
  f << text;
}

void write_side_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open output file '" + path + "'");
  f << text;
}

Json tuple_json(const std::vector<cplx>& t) {
  Json a = Json::array();
  for (const auto& c : t) a.push_back(io::complex_to_json(c));
  return a;
}

std::string tuple_text(const std::optional<std::vector<cplx>>& t) {
  if (!t) return "";
  std::ostringstream os;
  for (std::size_t i = 0; i < t->size(); ++i) {
    if (i) os << ";";
    os << io::format_shortest((*t)[i].real());
    if ((*t)[i].imag() != 0.0) os << (((*t)[i].imag() < 0) ? "" : "+") << io::format_shortest((*t)[i].imag()) << "i";
  }
  return os.str();
}

FinderOptions finder_options(const GlobalArgs& g, std::vector<std::string>& log) {
  FinderOptions o;
  o.cluster_tol = g.tol;
  o.null_tol = g.tol;
  o.log = [&log](const std::string& s) { log.push_back(s); };
  return o;
}

// ------------------------------------------------------------------- model

int cmd_model(const GlobalArgs& g, const ModelArgs& m, std::ostream& out) {
  if (m.name.empty()) throw ValidationError("model: a model name is required");
  const models::ModelBundle b = build_bundle(m);
  Json j = base_report("model", g);
  j["config"]["params"] = model_config(m);
  j["name"] = b.name;
  const Json em = io::error_model_to_json(b.error_model);
  for (auto it = em.begin(); it != em.end(); ++it) j[it.key()] = it.value();
  Json known = Json::array();
  for (const auto& kd : b.known_dfs) {
    Json e;
    e["eigen_tuple"] = tuple_json(kd.eigen_tuple);
    e["dim"] = kd.dim;
    e["description"] = kd.description;
    e["hs_invariant"] = kd.hs_invariant;
    if (kd.frame) e["frame"] = io::matrix_to_json(*kd.frame);
    known.push_back(std::move(e));
  }
  j["known_dfs"] = known;
  j["notes"] = b.notes;
  emit(g, out, io::dump(j));
  return 0;
}

// -------------------------------------------------------------------- find

struct FindArgs {
  bool null_only = false;
  bool abelian = false;
  bool no_frames = false;
};

int cmd_find(const GlobalArgs& g, const ModelArgs& m, const FindArgs& f, std::ostream& out) {
  const LoadedModel lm = load_model(m);
  std::vector<std::string> log;
  const FinderOptions opts = finder_options(g, log);
  std::vector<Subspace> found;
  std::string method = "eigenspace_intersection";
  if (f.null_only) {
    method = "common_null_space";
    Subspace s = find_semisimple_null_dfs(lm.error_model, opts);
    if (s.dim() > 0) found.push_back(std::move(s));
  } else if (f.abelian) {
    method = "abelian_group";
    found = abelian_group_dfs(lm.error_model.ops, opts);
  } else {
    found = find_df_subspaces(lm.error_model, opts);
  }

  if (g.format == "csv") {
    std::ostringstream os;
    os << "index,dim,residual,eigen_tuple\n";
    for (std::size_t i = 0; i < found.size(); ++i) {
      os << i << "," << found[i].dim() << "," << io::format_shortest(found[i].residual) << ","
         << tuple_text(found[i].eigen_tuple) << "\n";
    }
    emit(g, out, os.str());
    return 0;
  }
  Json j = base_report("find", g);
  j["config"]["params"] = model_config(m);
  j["config"]["method"] = method;
  j["dims"] = lm.error_model.space.dims();
  Json subs = Json::array();
  for (const auto& s : found) subs.push_back(io::subspace_to_json(s, !f.no_frames));
  j["subspaces"] = subs;
  if (lm.bundle) {
    Json checks = Json::array();
    for (const auto& kd : lm.bundle->known_dfs) {
      if (!kd.frame || kd.frame->cols() == 0) continue;
      const double r = found.empty() ? kd.frame->norm() : containment_residual(found, *kd.frame);
      checks.push_back(Json{{"description", kd.description}, {"dim", kd.dim}, {"containment_residual", r},
                            {"contained", r <= g.tol}});
    }
    j["known_dfs_check"] = checks;
    j["notes"] = lm.bundle->notes;
  }
  j["log"] = log;
  emit(g, out, io::dump(j));
  return 0;
}

// --------------------------------------------------------------- decompose

struct DecomposeArgs {
  bool label_j = false;
  bool no_basis = false;
};

bool collective_model(const ModelArgs& m) {
  return m.name == "strong_collective" || (m.name == "spin_boson" && !m.independent);
}

int cmd_decompose(const GlobalArgs& g, const ModelArgs& m, const DecomposeArgs& d, std::ostream& out) {
  const LoadedModel lm = load_model(m);
  DecomposeOptions opts;
  opts.seed = g.seed;
  opts.tol = g.tol;
  SubsystemDecomposition dec = decompose_algebra(lm.error_model.ops, opts);
  if (d.label_j || collective_model(m)) label_angular_momentum(dec);
  const SubsystemReport rep = verify_subsystem_condition(dec, lm.error_model, g.tol);
  if (g.format == "csv") {
    std::ostringstream os;
    os << "J_label,n,d,residual\n";
    for (const auto& b : dec.blocks) {
      os << b.label << "," << b.multiplicity << "," << b.block_dim << "," << io::format_shortest(b.residual) << "\n";
    }
    emit(g, out, os.str());
    return 0;
  }
  Json j = base_report("decompose", g);
  j["config"]["params"] = model_config(m);
  const Json dj = io::decomposition_to_json(dec, !d.no_basis);
  for (auto it = dj.begin(); it != dj.end(); ++it) j[it.key()] = it.value();
  j["subsystem_check"] = Json{{"max_deviation", rep.max_deviation}, {"pass", rep.pass}};
  emit(g, out, io::dump(j));
  return 0;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
  std::string subspace;
  std::string decomposition;
  std::string state;
  std::vector<double> eigen;
  std::string builtin;
  std::size_t samples = 16;
};

std::vector<cplx> estimate_tuple(const ErrorModel& em, const Matrix& frame) {
  std::vector<cplx> t;
  const auto k = static_cast<double>(frame.cols());
  for (const auto& op : em.ops) t.push_back((frame.adjoint() * op.matrix() * frame).trace() / k);
  return t;
}

Json check_subspace(const GlobalArgs& g, const LoadedModel& lm, const Subspace& s, std::size_t samples, bool& all_pass) {
  const ErrorModel& em = lm.error_model;
  const std::vector<cplx> tuple = s.eigen_tuple ? *s.eigen_tuple : estimate_tuple(em, s.frame);
  if (tuple.size() != em.ops.size()) throw ValidationError("verify: eigen_tuple length does not match the operator count");
  Json j;
  j["dim"] = s.dim();
  j["eigen_tuple"] = tuple_json(tuple);
  j["eigen_tuple_source"] = s.eigen_tuple ? "given" : "estimated";

  // Every basis column plus their normalized sum.
  std::vector<Vector> states;
  for (Eigen::Index c = 0; c < s.frame.cols(); ++c) states.push_back(s.frame.col(c));
  if (s.frame.cols() > 1) states.push_back(s.frame.rowwise().sum().normalized());
  StabilizerReport worst;
  worst.pass = true;
  for (const auto& v : states) {
    const StabilizerReport r = stabilizer_check(StateVector(em.space, v), em, tuple, samples, g.seed, g.tol);
    worst.pass = worst.pass && r.pass;
    worst.group_deviation = std::max(worst.group_deviation, r.group_deviation);
    worst.differential_deviation = std::max(worst.differential_deviation, r.differential_deviation);
  }
  j["stabilizer"] = Json{{"pass", worst.pass},
                         {"group_deviation", worst.group_deviation},
                         {"differential_deviation", worst.differential_deviation},
                         {"states_checked", states.size()}};
  all_pass = all_pass && worst.pass;

  const KrausSet kraus = random_environment_kraus(em.ops, g.seed);
  const DegeneracyReport q = qecc_degeneracy_check(kraus, s, g.tol);
  j["qecc"] = Json{{"pass", q.pass}, {"rank", q.rank}, {"residual", q.residual}, {"kraus_ops", kraus.size()}};
  all_pass = all_pass && q.pass;

  if (em.system_hamiltonian) {
    const InvarianceReport inv = check_hs_invariance(s, *em.system_hamiltonian, g.tol);
    j["hs_invariance"] = Json{{"pass", inv.pass}, {"leakage", inv.leakage}};
    all_pass = all_pass && inv.pass;
  }
  return j;
}

Json check_decomposition(const GlobalArgs& g, const LoadedModel& lm, const SubsystemDecomposition& d, bool& all_pass) {
  const SubsystemReport r = verify_subsystem_condition(d, lm.error_model, g.tol);
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back(Json{{"label", c.label}, {"op_index", c.op_index}, {"lambda_deviation", c.lambda_deviation},
                          {"leakage", c.leakage}});
  }
  all_pass = all_pass && r.pass;
  return Json{{"pass", r.pass}, {"max_deviation", r.max_deviation}, {"checks", checks}};
}

int cmd_verify(const GlobalArgs& g, ModelArgs m, const VerifyArgs& v, std::ostream& out) {
  const int sources = !v.subspace.empty() + !v.decomposition.empty() + !v.state.empty() + !v.builtin.empty();
  if (sources != 1) throw ValidationError("verify: give exactly one of --subspace, --decomposition, --state, --builtin");
  if (!v.builtin.empty() && m.input.empty() && m.name.empty()) {
    if (v.builtin == "four_qubit") {
      m.name = "strong_collective";
      m.n = 4;
    } else if (v.builtin == "three_qubit") {
      m.name = "strong_collective";
      m.n = 3;
    } else if (v.builtin == "qx_plus") {
      m.name = "qx";
      m.n = 4;
      m.full_group = true;
    }
  }
  const LoadedModel lm = load_model(m);
  const HilbertSpace& space = lm.error_model.space;
  auto require_space = [&](const HilbertSpace& want) {
    if (!(space == want)) throw ValidationError("verify: built-in states need a model on " + want.to_string());
  };

  Json j = base_report("verify", g);
  j["config"]["params"] = model_config(m);
  bool all_pass = true;
  Json subspaces = Json::array();
  if (!v.subspace.empty()) {
    const Json in = io::read_file(v.subspace);
    if (in.contains("subspaces")) {
      for (const auto& s : in.at("subspaces")) {
        subspaces.push_back(check_subspace(g, lm, io::subspace_from_json(s, space), v.samples, all_pass));
      }
    } else {
      subspaces.push_back(check_subspace(g, lm, io::subspace_from_json(in, space), v.samples, all_pass));
    }
    j["config"]["subspace"] = v.subspace;
  } else if (!v.state.empty()) {
    const DensityMatrix rho = io::density_from_json(io::read_file(v.state));
    if (!(rho.space() == space)) throw ValidationError("verify: state and model spaces differ");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    if (es.eigenvalues()(es.eigenvalues().size() - 1) < 1.0 - 1e-10) throw ValidationError("verify: state must be pure");
    const Vector psi = es.eigenvectors().col(es.eigenvalues().size() - 1);
    std::optional<std::vector<cplx>> tuple;
    if (!v.eigen.empty()) tuple = std::vector<cplx>(v.eigen.begin(), v.eigen.end());
    subspaces.push_back(check_subspace(g, lm, Subspace(space, Matrix(psi), tuple), v.samples, all_pass));
    j["config"]["state"] = v.state;
    j["config"]["eigen"] = v.eigen;
  } else if (!v.decomposition.empty()) {
    j["decomposition"] = check_decomposition(g, lm, io::decomposition_from_json(io::read_file(v.decomposition), space), all_pass);
    j["config"]["decomposition"] = v.decomposition;
  } else {
    j["config"]["builtin"] = v.builtin;
    if (v.builtin == "four_qubit") {
      require_space(HilbertSpace::qubits(4));
      subspaces.push_back(check_subspace(g, lm, Subspace(space, models::four_qubit_codewords()), v.samples, all_pass));
    } else if (v.builtin == "three_qubit") {
      require_space(HilbertSpace::qubits(3));
      j["decomposition"] = check_decomposition(g, lm, models::three_qubit_subsystem_block(), all_pass);
    } else if (v.builtin == "qx_plus") {
      if (!space.all_qubits() || space.num_factors() % 2 != 0) throw ValidationError("verify: qx_plus needs an even qubit count");
      const std::vector<int> signs(space.num_factors() / 2, 1);
      subspaces.push_back(check_subspace(g, lm, Subspace(space, models::qx_character_frame(signs)), v.samples, all_pass));
    } else {
      throw ValidationError("verify: unknown builtin '" + v.builtin + "' (four_qubit, three_qubit, qx_plus)");
    }
  }
  if (!subspaces.empty()) j["subspaces"] = subspaces;
  j["pass"] = all_pass;
  emit(g, out, io::dump(j));
  return 0;
}

// ------------------------------------------------------------------ evolve

struct EvolveArgs {
  std::string state;
  std::string bits;
  bool random_dfs = false;
  double t_final = 1.0;
  std::size_t steps = 0;
  std::size_t stride = 1;
  bool no_states = false;
  std::string csv;
};

Matrix pick_dfs_frame(const LoadedModel& lm, const GlobalArgs& g) {
  if (lm.bundle) {
    const models::KnownDfs* best = nullptr;
    for (const auto& kd : lm.bundle->known_dfs) {
      if (!kd.frame || !kd.hs_invariant) continue;
      if (!best || kd.frame->cols() > best->frame->cols()) best = &kd;
    }
    if (best) return *best->frame;
  }
  std::vector<std::string> log;
  const auto found = find_df_subspaces(lm.error_model, finder_options(g, log));
  const Subspace* best = nullptr;
  for (const auto& s : found) {
    if (!best || s.dim() > best->dim()) best = &s;
  }
  if (!best || best->dim() == 0) throw ValidationError("evolve: the model has no decoherence-free subspace");
  return best->frame;
}

int cmd_evolve(const GlobalArgs& g, const ModelArgs& m, const EvolveArgs& e, std::ostream& out) {
  const LoadedModel lm = load_model(m);
  if (!lm.lindblad) throw ValidationError("evolve: model has no Lindblad data");
  const int sources = !e.state.empty() + !e.bits.empty() + e.random_dfs;
  if (sources != 1) throw ValidationError("evolve: give exactly one of --state, --bits, --random-dfs");
  if (!(e.t_final >= 0.0) || !std::isfinite(e.t_final)) throw ValidationError("evolve: --t-final must be >= 0");
  std::optional<DensityMatrix> rho0;
  if (!e.state.empty()) {
    rho0 = io::density_from_json(io::read_file(e.state));
  } else if (!e.bits.empty()) {
    rho0 = DensityMatrix::pure(StateVector::from_bits(e.bits));
  } else {
    const Matrix frame = pick_dfs_frame(lm, g);
    linalg::Rng rng(g.seed);
    rho0 = DensityMatrix::pure(StateVector(lm.error_model.space, frame * linalg::random_state(frame.cols(), rng)));
  }
  if (!(rho0->space() == lm.lindblad->space())) throw ValidationError("evolve: state and model spaces differ");
  const std::size_t steps = e.steps ? e.steps : stable_steps(*lm.lindblad, e.t_final);
  EvolveOptions opts;
  opts.stride = e.stride;
  const Trajectory tr = lindblad_evolve(*rho0, *lm.lindblad, e.t_final, steps, opts);

  std::vector<double> fid;
  for (const auto& s : tr.states) fid.push_back(fidelity(*rho0, s));
  std::ostringstream csv;
  csv << "t,fidelity,trace,min_eig\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    csv << io::format_shortest(tr.times[i]) << "," << io::format_shortest(fid[i]) << ","
        << io::format_shortest(1.0 + tr.diagnostics[i].trace_deviation) << ","
        << io::format_shortest(tr.diagnostics[i].min_eigenvalue) << "\n";
  }
  if (!e.csv.empty()) write_side_file(e.csv, csv.str());
  if (g.format == "csv") {
    emit(g, out, csv.str());
    return 0;
  }
  Json j = base_report("evolve", g);
  j["config"]["params"] = model_config(m);
  j["config"]["t_final"] = e.t_final;
  j["config"]["steps"] = steps;
  j["config"]["stride"] = e.stride;
  j["config"]["initial"] = !e.state.empty() ? e.state : (!e.bits.empty() ? e.bits : std::string("random_dfs"));
  j["times"] = tr.times;
  j["fidelity"] = fid;
  Json tracej = Json::array(), mins = Json::array();
  for (const auto& d : tr.diagnostics) {
    tracej.push_back(1.0 + d.trace_deviation);
    mins.push_back(d.min_eigenvalue);
  }
  j["trace"] = tracej;
  j["min_eigenvalue"] = mins;
  if (!e.no_states) {
    Json states = Json::array();
    for (const auto& s : tr.states) states.push_back(io::matrix_to_json(s.matrix()));
    j["states"] = states;
  }
  emit(g, out, io::dump(j));
  return 0;
}

// -------------------------------------------------------------- robustness

struct RobustnessArgs {
  std::string experiment = "singlet";
  std::size_t n = 4;
  std::string convention = "both";
  double eps_min = 1e-3, eps_max = 1e-2;
  std::size_t eps_count = 6;
  double t_min = 0.1, t_max = 1.0;
  std::size_t t_count = 10;
  std::size_t fit_eps = 5, fit_times = 5;
  std::size_t steps = 200;
  std::string csv;
};

Json scaling_json(const ScalingReport& r) {
  Json j;
  j["convention"] = to_string(r.convention);
  j["epsilons"] = r.epsilons;
  j["times"] = r.times;
  j["baseline_fidelity"] = r.baseline;
  Json f = Json::array(), g = Json::array();
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    f.push_back(r.fidelity[i]);
    g.push_back(r.one_minus_f[i]);
  }
  j["fidelity"] = f;
  j["one_minus_f"] = g;
  j["p_eps"] = r.p_eps;
  j["p_t"] = r.p_t;
  j["log_c"] = r.log_c;
  j["fit_residual"] = r.fit_residual;
  j["fit_points"] = r.fit_points;
  j["slope_eps_at_t"] = r.slope_eps_at_t;
  j["slope_t_at_eps"] = r.slope_t_at_eps;
  j["monotone_in_eps"] = r.monotone_in_eps;
  return j;
}

int cmd_robustness(const GlobalArgs& g, const RobustnessArgs& a, std::ostream& out) {
  std::vector<InjectionConvention> convs;
  if (a.convention == "both") {
    convs = {InjectionConvention::Rate, InjectionConvention::Amplitude};
  } else {
    convs = {parse_convention(a.convention)};
  }
  if (a.experiment != "singlet" && a.experiment != "plus") {
    throw ValidationError("robustness: --experiment must be singlet or plus");
  }
  std::vector<ScalingReport> reports;
  for (auto c : convs) {
    PerturbationExperiment e = a.experiment == "singlet" ? collective_singlet_experiment(a.n, c, g.seed)
                                                         : unencoded_plus_experiment(c);
    e.epsilons = log_spaced(a.eps_min, a.eps_max, a.eps_count);
    e.times = lin_spaced(a.t_min, a.t_max, a.t_count);
    e.fit_eps = a.fit_eps;
    e.fit_times = a.fit_times;
    reports.push_back(run_perturbation(e, a.steps));
  }
  std::ostringstream csv;
  csv << "convention,epsilon,t,one_minus_f\n";
  for (const auto& r : reports) {
    for (std::size_t j = 0; j < r.times.size(); ++j) {
      csv << to_string(r.convention) << ",0," << io::format_shortest(r.times[j]) << ","
          << io::format_shortest(1.0 - r.baseline[j]) << "\n";
    }
    for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
      for (std::size_t j = 0; j < r.times.size(); ++j) {
        csv << to_string(r.convention) << "," << io::format_shortest(r.epsilons[i]) << ","
            << io::format_shortest(r.times[j]) << "," << io::format_shortest(r.one_minus_f[i][j]) << "\n";
      }
    }
  }
  if (!a.csv.empty()) write_side_file(a.csv, csv.str());
  if (g.format == "csv") {
    emit(g, out, csv.str());
    return 0;
  }
  Json j = base_report("robustness", g);
  j["config"]["experiment"] = a.experiment;
  j["config"]["n"] = a.n;
  j["config"]["convention"] = a.convention;
  j["config"]["eps_range"] = {a.eps_min, a.eps_max};
  j["config"]["eps_count"] = a.eps_count;
  j["config"]["t_range"] = {a.t_min, a.t_max};
  j["config"]["t_count"] = a.t_count;
  j["config"]["fit_window"] = {a.fit_eps, a.fit_times};
  j["config"]["steps"] = a.steps;
  Json exps = Json::array();
  for (const auto& r : reports) exps.push_back(scaling_json(r));
  j["experiments"] = exps;
  emit(g, out, io::dump(j));
  return 0;
}

// -------------------------------------------------------------------- dims

struct DimsArgs {
  std::string family = "strong_collective";
  std::size_t n_min = 2;
  std::size_t n_max = 10;
  bool formula_only = false;
};

struct DimRow {
  std::size_t n = 0;
  std::string label;
  std::uint64_t formula = 0;
  std::optional<std::uint64_t> numeric;
  double efficiency = 0.0;
  std::string status;
};

std::string half_label(long two_x) {
  if (two_x % 2 == 0) return std::to_string(two_x / 2);
  return std::to_string(two_x) + "/2";
}

int cmd_dims(const GlobalArgs& g, const DimsArgs& a, std::ostream& out) {
  const std::map<std::string, int> families{{"strong_collective", 0}, {"weak_dephasing", 1}, {"dicke", 2}};
  const auto fam = families.find(a.family);
  if (fam == families.end()) {
    throw ValidationError("dims: unknown family '" + a.family + "' (strong_collective, weak_dephasing, dicke)");
  }
  if (a.n_min < 1 || a.n_max < a.n_min || a.n_max > 20) throw ValidationError("dims: need 1 <= n-min <= n-max <= 20");
  std::vector<DimRow> rows;
  std::vector<std::string> log;
  const FinderOptions fopts = finder_options(g, log);
  for (std::size_t n = a.n_min; n <= a.n_max; ++n) {
    const bool numeric = !a.formula_only && n <= 12 && (std::size_t{1} << n) <= max_working_dim();
    const auto un = static_cast<unsigned>(n);
    if (fam->second == 0) {
      DimRow r{n, "c=(0,0,0)", models::singlet_dimension(un), std::nullopt, 0.0, ""};
      if (numeric) {
        const auto found = find_df_subspaces(models::strong_collective(n).error_model, fopts);
        std::uint64_t dim = 0;
        for (const auto& s : found) {
          bool zero = true;
          for (const auto& c : *s.eigen_tuple) zero = zero && std::abs(c) <= 1e-8;
          if (zero) dim = static_cast<std::uint64_t>(s.dim());
        }
        r.numeric = dim;
      }
      r.efficiency = models::encoding_efficiency(r.formula, un);
      rows.push_back(r);
    } else if (fam->second == 1) {
      std::vector<Subspace> found;
      if (numeric) found = find_df_subspaces(models::weak_collective_dephasing(n).error_model, fopts);
      for (std::size_t w = 0; w <= n; ++w) {
        const long two_lambda = static_cast<long>(n) - 2 * static_cast<long>(w);
        DimRow r{n, "lambda=" + half_label(two_lambda), models::binomial(un, static_cast<unsigned>(w)), std::nullopt, 0.0, ""};
        if (numeric) {
          std::uint64_t dim = 0;
          for (const auto& s : found) {
            if (std::abs((*s.eigen_tuple)[0] - cplx(static_cast<double>(two_lambda), 0.0)) <= 1e-8) {
              dim = static_cast<std::uint64_t>(s.dim());
            }
          }
          r.numeric = dim;
        }
        r.efficiency = models::encoding_efficiency(r.formula, un);
        rows.push_back(r);
      }
    } else {
      std::optional<SubsystemDecomposition> dec;
      if (numeric && n <= 8) {
        const auto space = HilbertSpace::qubits(n);
        DecomposeOptions o;
        o.seed = g.seed;
        o.tol = g.tol;
        dec = decompose_algebra({collective_spin(space, Pauli::Plus), collective_spin(space, Pauli::Minus),
                                 collective_spin(space, Pauli::Z)},
                                o);
        label_angular_momentum(*dec);
      }
      for (unsigned two_j = un % 2; two_j <= un; two_j += 2) {
        DimRow r{n, "J=" + half_label(two_j), models::spin_multiplicity(un, two_j), std::nullopt, 0.0, ""};
        if (dec) {
          std::uint64_t mult = 0;
          for (const auto& b : dec->blocks) {
            if (b.two_j && *b.two_j == static_cast<int>(two_j)) mult = static_cast<std::uint64_t>(b.multiplicity);
          }
          r.numeric = mult;
        }
        r.efficiency = models::encoding_efficiency(r.formula, un);
        rows.push_back(r);
      }
    }
  }
  bool all_ok = true;
  for (auto& r : rows) {
    if (!r.numeric) {
      r.status = "formula_only";
    } else if (*r.numeric == r.formula) {
      r.status = "OK";
    } else {
      r.status = "FAILED";
      all_ok = false;
    }
  }
  if (g.format == "csv") {
    std::ostringstream os;
    os << "family,n,label,formula,numeric,efficiency,status\n";
    for (const auto& r : rows) {
      os << a.family << "," << r.n << "," << r.label << "," << r.formula << ","
         << (r.numeric ? std::to_string(*r.numeric) : std::string()) << "," << io::format_shortest(r.efficiency) << ","
         << r.status << "\n";
    }
    emit(g, out, os.str());
    return 0;
  }
  Json j = base_report("dims", g);
  j["config"]["family"] = a.family;
  j["config"]["n_range"] = {a.n_min, a.n_max};
  j["config"]["formula_only"] = a.formula_only;
  Json jr = Json::array();
  for (const auto& r : rows) {
    Json e;
    e["n"] = r.n;
    e["label"] = r.label;
    e["formula"] = r.formula;
    e["numeric"] = r.numeric ? Json(*r.numeric) : Json(nullptr);
    e["efficiency"] = r.efficiency;
    if (a.family == "strong_collective") e["efficiency_asymptote"] = models::efficiency_asymptote(static_cast<unsigned>(r.n));
    e["status"] = r.status;
    jr.push_back(std::move(e));
  }
  j["rows"] = jr;
  j["all_match"] = all_ok;
  emit(g, out, io::dump(j));
  return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"dfskit: decoherence-free subspaces and noiseless subsystems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  GlobalArgs g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--tol", g.tol, "Tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out,-o", g.out, "Output path (default stdout)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  ModelArgs m;
  auto* model = app.add_subcommand("model", "Emit a built-in model as JSON");
  model->add_option("name", m.name, "Model name")->check(CLI::IsMember(models::model_names()));
  model->add_option("--n", m.n, "Number of qubits, lower levels or atoms");
  model->add_option("--cutoff", m.cutoff, "Boson cutoff");
  model->add_option("--modes", m.modes, "Bath modes (spin_boson)");
  model->add_option("--rate", m.rate, "Noise rate");
  model->add_flag("--full-group", m.full_group, "qx: every non-identity group element");
  model->add_flag("--independent", m.independent, "spin_boson: site-dependent couplings");
  model->add_option("--omegas", m.omegas, "eit: Rabi frequencies");
  model->add_option("--raman", m.raman, "eit: Raman detunings");
  model->add_option("--rates", m.rates, "eit: emission rates");
  model->add_option("--delta", m.delta, "eit: detuning");
  model->add_option("--kappa", m.kappa, "dicke: cavity loss rate");
  model->add_option("--g", m.g, "dicke: atom-cavity coupling");
  model->add_option("--s", m.s, "dicke: mode-environment couplings");

  FindArgs fa;
  auto* find = app.add_subcommand("find", "Find decoherence-free subspaces");
  add_model_options(find, m, true);
  find->add_flag("--null-only", fa.null_only, "Common null space only");
  find->add_flag("--abelian", fa.abelian, "Commuting generators: joint eigenspaces");
  find->add_flag("--no-frames", fa.no_frames, "Omit frames from the report");

  DecomposeArgs da;
  auto* decomp = app.add_subcommand("decompose", "Decompose the error algebra into noiseless subsystems");
  add_model_options(decomp, m, true);
  decomp->add_flag("--label-j", da.label_j, "Attach angular momentum labels");
  decomp->add_flag("--no-basis", da.no_basis, "Omit block bases from the report");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Verify a subspace, state or decomposition against a model");
  add_model_options(verify, m, true);
  verify->add_option("--subspace", va.subspace, "Subspace JSON or find report");
  verify->add_option("--decomposition", va.decomposition, "Decomposition JSON");
  verify->add_option("--state", va.state, "Pure state JSON");
  verify->add_option("--eigen", va.eigen, "Claimed eigenvalue tuple for --state (comma separated)")->delimiter(',');
  verify->add_option("--builtin", va.builtin, "four_qubit, three_qubit or qx_plus");
  verify->add_option("--samples", va.samples, "Stabilizer samples")->capture_default_str();

  EvolveArgs ea;
  auto* evolve = app.add_subcommand("evolve", "Integrate the Lindblad equation");
  add_model_options(evolve, m, true);
  evolve->add_option("--state", ea.state, "Initial state JSON");
  evolve->add_option("--bits", ea.bits, "Initial computational basis state");
  evolve->add_flag("--random-dfs", ea.random_dfs, "Random state in the model's largest DFS");
  evolve->add_option("--t-final", ea.t_final, "Final time")->capture_default_str();
  evolve->add_option("--steps", ea.steps, "RK4 steps (default 100 per unit time, raised for stiff generators)");
  evolve->add_option("--stride", ea.stride, "Record every stride-th step")->capture_default_str()->check(CLI::PositiveNumber);
  evolve->add_flag("--no-states", ea.no_states, "Omit density matrices from the report");
  evolve->add_option("--csv", ea.csv, "Also write the CSV table here");

  RobustnessArgs ra;
  auto* rob = app.add_subcommand("robustness", "Fidelity scaling under symmetry-breaking noise");
  rob->add_option("--experiment", ra.experiment, "singlet or plus")->capture_default_str();
  rob->add_option("--n", ra.n, "Qubits for the singlet experiment")->capture_default_str();
  rob->add_option("--convention", ra.convention, "rate, amplitude or both")->capture_default_str();
  rob->add_option("--eps-min", ra.eps_min)->capture_default_str();
  rob->add_option("--eps-max", ra.eps_max)->capture_default_str();
  rob->add_option("--eps-count", ra.eps_count)->capture_default_str();
  rob->add_option("--t-min", ra.t_min)->capture_default_str();
  rob->add_option("--t-max", ra.t_max)->capture_default_str();
  rob->add_option("--t-count", ra.t_count)->capture_default_str();
  rob->add_option("--fit-eps", ra.fit_eps, "Smallest eps values in the fit")->capture_default_str();
  rob->add_option("--fit-times", ra.fit_times, "Smallest times in the fit")->capture_default_str();
  rob->add_option("--steps", ra.steps, "RK4 steps over the largest time")->capture_default_str();
  rob->add_option("--csv", ra.csv, "Also write the CSV table here");

  DimsArgs dm;
  auto* dims = app.add_subcommand("dims", "Closed-form and numerical DFS dimensions");
  dims->add_option("--family", dm.family, "strong_collective, weak_dephasing or dicke")->capture_default_str();
  dims->add_option("--n-min", dm.n_min)->capture_default_str();
  dims->add_option("--n-max", dm.n_max)->capture_default_str();
  dims->add_flag("--formula-only", dm.formula_only, "Skip numerical cross-checks");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 2;
    }
    if (*model) return cmd_model(g, m, out);
    if (*find) return cmd_find(g, m, fa, out);
    if (*decomp) return cmd_decompose(g, m, da, out);
    if (*verify) return cmd_verify(g, m, va, out);
    if (*evolve) return cmd_evolve(g, m, ea, out);
    if (*rob) return cmd_robustness(g, ra, out);
    if (*dims) return cmd_dims(g, dm, out);
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::bad_alloc&) {
    err << "numerical error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

} // namespace dfskit
