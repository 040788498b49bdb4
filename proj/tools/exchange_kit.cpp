// exchange-kit: command-line front end for the exkit library.
//
// Exit codes: 0 success, 1 verified negative finding, 2 input error,
// 3 internal invariant violation.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <thread>

#include "exkit/exkit.hpp"

namespace {

using exkit::Element;
using exkit::Ring;
using exkit::json;
namespace io = exkit::io;

constexpr int kOk = 0, kFinding = 1, kInputError = 2, kBroken = 3;

struct Options {
  bool pretty = false;
  std::size_t cap = exkit::kDefaultCap;
};

void print_summary(const json& j, const std::string& prefix, std::ostream& out) {
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object() && !v.empty()) print_summary(v, key, out);
    else out << key << ": " << v.dump() << "\n";
  }
}

void emit(const Options& opt, const json& j) {
  if (opt.pretty) print_summary(j, "", std::cout);
  else std::cout << j.dump() << "\n";
}

/// Runs a command body, mapping library errors onto exit codes.
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const exkit::InvariantViolated& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kBroken;
  } catch (const exkit::Error& e) {
    std::cerr << (e.is_finding() ? "finding: " : "error: ") << e.what() << "\n";
    if (e.is_finding()) std::cout << json{{"finding", e.what()}}.dump() << "\n";
    return e.is_finding() ? kFinding : kInputError;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}

Element element_arg(const Ring& r, const std::string& text) {
  return r.from_json(io::parse_json_text(text, "element"));
}

std::vector<Element> family_arg(const Ring& r, const std::string& text) { return io::parse_family(r, text); }

// Commands ------------------------------------------------------------------------

int cmd_classify(const Options& opt, const std::string& path) {
  const Ring r = io::load_ring(path, opt.cap);
  emit(opt, io::classification_json(r, exkit::classify(r, opt.cap)));
  return kOk;
}

json chain_json(const Ring& r, const std::vector<Element>& fam, bool via_quotient, exkit::DecomposeBackend backend,
                std::size_t cap) {
  if (via_quotient) {
    auto cert = exkit::exchange_chain_via_quotient(r, fam, cap);
    json j = io::certificate_json(r, cert);
    j["method"] = "via_quotient";
    j["valid"] = static_cast<bool>(exkit::validate_certificate(r, cert));
    return j;
  }
  auto res = exkit::exchange_chain(r, fam, backend, cap);
  json j = io::certificate_json(r, res.certificate);
  json stages = json::array();
  for (const auto& s : res.stages) stages.push_back(io::stage_json(r, s));
  j["stages"] = stages;
  j["method"] = "chain";
  j["valid"] = static_cast<bool>(exkit::validate_certificate(r, res.certificate));
  return j;
}

exkit::DecomposeBackend backend_of(const std::string& name) {
  if (name == "auto") return exkit::DecomposeBackend::Auto;
  if (name == "kernel") return exkit::DecomposeBackend::KernelSplitting;
  if (name == "exhaustive") return exkit::DecomposeBackend::Exhaustive;
  throw exkit::ParseError("unknown backend " + name);
}

int cmd_chain(const Options& opt, const std::string& path, const std::string& family, bool via_quotient,
              const std::string& backend) {
  const Ring r = io::load_ring(path, opt.cap);
  emit(opt, chain_json(r, family_arg(r, family), via_quotient, backend_of(backend), opt.cap));
  return kOk;
}

int cmd_verify(const Options& opt, const std::string& path, std::size_t samples) {
  const Ring r = io::load_ring(path, opt.cap);
  auto v = exkit::verify_exchange_ring(r, samples, opt.cap);
  json j = {{"ring", r.descriptor()}, {"suitable", v.suitable}, {"exhaustive", v.exhaustive}, {"checked", v.checked}};
  if (v.failing_x) j["failing_x"] = r.to_json(*v.failing_x);
  emit(opt, j);
  return v.suitable ? kOk : kFinding;
}

int cmd_check(const Options& opt, const std::string& path) {
  const json j = io::parse_json_text(io::read_text(path), path == "-" ? "<stdin>" : path);
  auto [r, cert] = io::certificate_from_json(j, opt.cap);
  auto check = exkit::validate_certificate(r, cert);
  json out = {{"valid", check.valid}};
  if (!check.valid) out["failure"] = check.failure;
  emit(opt, out);
  return check.valid ? kOk : kFinding;
}

int cmd_radical(const Options& opt, const std::string& path) {
  const Ring r = io::load_ring(path, opt.cap);
  emit(opt, io::radical_json(exkit::jacobson_radical(r, opt.cap)));
  return kOk;
}

int cmd_lift(const Options& opt, const std::string& path, const std::string& x, const std::string& eps,
             const std::string& method) {
  const Ring r = io::load_ring(path, opt.cap);
  const auto rad = exkit::jacobson_radical(r, opt.cap);
  const Element xe = element_arg(r, x);
  const Element eb = rad.project(element_arg(r, eps));
  exkit::LiftMethod m = exkit::LiftMethod::Search;
  if (method == "newton") m = exkit::LiftMethod::Newton;
  else if (method != "search") throw exkit::ParseError("unknown lift method " + method);
  auto lift = exkit::lift_idempotent(rad, xe, eb, m, opt.cap);
  emit(opt, {{"ring", r.descriptor()},
             {"x", r.to_json(xe)},
             {"eps", rad.quotient.to_json(eb)},
             {"e", r.to_json(lift.e)},
             {"s", r.to_json(lift.s)},
             {"method", method}});
  return kOk;
}

// lemma subcommands ---------------------------------------------------------------

struct LemmaArgs {
  std::string ring, e, e_prime, family, x, phi, y, f, n, psi, history;
  bool mod_radical = false;
};

int cmd_lemma(const Options& opt, const std::string& which, const LemmaArgs& a) {
  const Ring r = io::load_ring(a.ring, opt.cap);
  json out = {{"ring", r.descriptor()}, {"lemma", which}};
  auto elems = [&](const std::vector<Element>& xs) { return io::elements_json(r, xs); };
  if (which == "equivalences") {
    const Element e = element_arg(r, a.e), e2 = element_arg(r, a.e_prime);
    auto rep = exkit::lemma1_equivalences(r, e, e2, opt.cap);
    out["clauses"] = io::lemma1_json(rep);
    if (rep.left_strongly_iso) {
      auto w = exkit::unit_from_strong_iso(r, e, e2);
      out["unit"] = {{"u", r.to_json(w.u)}, {"u_inv", r.to_json(w.u_inv)}};
    }
    emit(opt, out);
    return rep.all_agree() ? kOk : kBroken;
  }
  if (which == "refine") {
    const auto x = family_arg(r, a.x);
    if (x.size() != 3) throw exkit::ParseError("refine needs exactly three elements");
    auto ref = exkit::refine_three(r, x[0], x[1], x[2], exkit::DecomposeBackend::Auto, opt.cap);
    out["e"] = elems({ref.e1, ref.e2, ref.e3});
    out["s"] = elems({ref.s1, ref.s2, ref.s3});
  } else if (which == "transport") {
    const Element e = element_arg(r, a.e), e2 = element_arg(r, a.e_prime);
    out["family"] = elems(exkit::transport_family(r, e, e2, family_arg(r, a.family)));
  } else if (which == "orthogonalize") {
    const auto fam = family_arg(r, a.family);
    const auto rad = exkit::jacobson_radical(r, opt.cap);
    const Element u = r.sum(fam);
    out["u"] = r.to_json(u);
    out["family"] = elems(exkit::orthogonalize(r, fam, u, [&](const Element& y) { return rad.in_radical(y); }, opt.cap));
  } else if (which == "power-kill") {
    const auto fam = family_arg(r, a.family);
    const std::size_t n = a.n.empty() ? 1 : std::stoul(a.n);
    out["holds"] = exkit::power_kill(r, fam, element_arg(r, a.x), n);
  } else if (which == "regularize") {
    std::optional<exkit::Family<Element>> fam;
    if (!a.family.empty()) fam = family_arg(r, a.family);
    std::optional<exkit::RadicalData> rad;
    if (a.mod_radical) rad = exkit::jacobson_radical(r, opt.cap);
    auto w = exkit::regularize(r, element_arg(r, a.phi), fam, rad ? &*rad : nullptr, opt.cap);
    out["mode"] = a.mod_radical ? "mod_radical" : "exact";
    out["psi"] = r.to_json(w.psi);
    out["p"] = r.to_json(w.p);
    out["phi_prime"] = r.to_json(w.phi_prime);
    out["phi_prime_unit"] = w.phi_prime_inv.has_value();
    if (w.phi_prime_inv) out["phi_prime_inv"] = r.to_json(*w.phi_prime_inv);
    if (w.p_tilde) out["p_tilde"] = r.to_json(*w.p_tilde);
    if (w.phi_tilde) out["phi_tilde"] = r.to_json(*w.phi_tilde);
    if (w.phi_tilde_inv) out["phi_tilde_inv"] = r.to_json(*w.phi_tilde_inv);
  } else if (which == "pi-reduce") {
    std::optional<std::size_t> n;
    if (!a.n.empty()) n = std::stoul(a.n);
    std::optional<Element> psi;
    if (!a.psi.empty()) psi = element_arg(r, a.psi);
    auto w = exkit::pi_regular_reduce(r, element_arg(r, a.phi), family_arg(r, a.family), n, psi, opt.cap);
    out["n"] = w.n;
    out["psi"] = r.to_json(w.psi);
    out["psi_prime"] = r.to_json(w.psi_prime);
  } else if (which == "transfer") {
    std::vector<std::pair<Element, Element>> hist;
    if (!a.history.empty()) {
      const json h = io::parse_json_text(a.history, "--history");
      if (!h.is_array()) throw exkit::ParseError("--history must be [[r, y], ...]");
      for (const auto& p : h) {
        if (!p.is_array() || p.size() != 2) throw exkit::ParseError("--history entries are [r, y]");
        hist.emplace_back(r.from_json(p[0]), r.from_json(p[1]));
      }
    }
    auto w = exkit::transfer_idempotent(r, element_arg(r, a.y), element_arg(r, a.f), hist, opt.cap);
    out["g"] = r.to_json(w.g);
    out["z"] = r.to_json(w.z);
    out["r_prime"] = r.to_json(w.r_prime);
    out["f_double_prime"] = r.to_json(w.f_double_prime);
  } else {
    throw exkit::ParseError("unknown lemma " + which);
  }
  emit(opt, out);
  return kOk;
}

// colfin --------------------------------------------------------------------------

int cmd_colfin_demo(const Options& opt, std::size_t window, std::size_t depth) {
  auto rep = exkit::colfin::unit_limit_counterexample(window, depth);
  emit(opt, io::unit_limit_json(rep));
  return kOk;
}

int cmd_colfin_chain(const Options& opt, const std::string& desc, std::size_t depth, std::size_t window,
                     bool compare) {
  auto fam = io::parse_colfin_family(io::read_json_file(desc));
  auto rep = exkit::colfin::truncated_chain(fam, {depth, window});
  std::optional<exkit::colfin::DepthComparison> cmp;
  if (compare) cmp = exkit::colfin::compare_depths(fam, {depth, window});
  exkit::colfin::BlockScalarRing ring(rep.block_size);
  emit(opt, io::truncated_chain_json(rep, ring, cmp));
  return cmp && !cmp->agree() ? kFinding : kOk;
}

// module --------------------------------------------------------------------------

int cmd_module(const Options& opt, const std::string& which, const std::string& desc) {
  const auto m = exkit::FiniteAbelianModule::parse(desc);
  if (which == "c2") {
    auto rep = exkit::module_has_C2(m);
    emit(opt, io::module_c2_json(m, rep));
    return kOk;
  }
  auto rep = exkit::lemma8_check(m, opt.cap);
  emit(opt, io::lemma8_json(m, rep));
  return rep.implication_holds ? kOk : kBroken;
}

// corpus --------------------------------------------------------------------------

/// One manifest entry: classify the ring, compare the expected flags, and
/// run the expected chain outcome when one is listed.
json run_corpus_entry(const json& entry, const std::filesystem::path& base, std::size_t cap) {
  json out = {{"name", entry.value("name", "")}};
  json mismatches = json::array();
  try {
    const Ring r = io::load_ring((base / entry.at("ring").get<std::string>()).string(), cap);
    if (entry.contains("classification")) {
      const json got = io::classification_json(r, exkit::classify(r, cap));
      for (const auto& [k, v] : entry.at("classification").items())
        if (!got.contains(k) || got.at(k) != v)
          mismatches.push_back({{"field", k}, {"expected", v}, {"actual", got.value(k, json(nullptr))}});
    }
    if (entry.contains("chain")) {
      const json& c = entry.at("chain");
      const std::string expected = c.at("outcome").get<std::string>();
      std::string actual;
      try {
        std::vector<Element> fam;
        for (const auto& x : c.at("family")) fam.push_back(r.from_json(x));
        json cert = chain_json(r, fam, c.value("via_quotient", false), exkit::DecomposeBackend::Auto, cap);
        actual = cert.at("valid").get<bool>() ? "certificate" : "invalid_certificate";
        if (c.contains("e") && cert.at("e") != c.at("e"))
          mismatches.push_back({{"field", "chain.e"}, {"expected", c.at("e")}, {"actual", cert.at("e")}});
      } catch (const exkit::InvariantViolated&) {
        throw;
      } catch (const exkit::Error& e) {
        actual = e.is_finding() ? "finding" : "input_error";
      }
      if (actual != expected)
        mismatches.push_back({{"field", "chain.outcome"}, {"expected", expected}, {"actual", actual}});
    }
  } catch (const exkit::Error& e) {
    mismatches.push_back({{"field", "error"}, {"actual", e.what()}});
  } catch (const json::exception& e) {
    mismatches.push_back({{"field", "manifest"}, {"actual", e.what()}});
  }
  out["pass"] = mismatches.empty();
  out["mismatches"] = mismatches;
  return out;
}

int cmd_corpus(const Options& opt, const std::string& path, std::size_t jobs) {
  const json manifest = io::read_json_file(path);
  const auto base = std::filesystem::path(path).parent_path();
  if (!manifest.contains("entries") || !manifest.at("entries").is_array())
    throw exkit::ParseError(path + ": manifest needs an \"entries\" array");
  const json& entries = manifest.at("entries");
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<json> results(entries.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(jobs, entries.size()); ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < entries.size(); i = next++) results[i] = run_corpus_entry(entries[i], base, opt.cap);
    });
  for (auto& th : pool) th.join();
  std::size_t passed = 0;
  json list = json::array();
  for (auto& r : results) {
    passed += r.at("pass").get<bool>() ? 1 : 0;
    list.push_back(std::move(r));
  }
  emit(opt, {{"entries", list}, {"passed", passed}, {"failed", entries.size() - passed}});
  return passed == entries.size() ? kOk : kFinding;
}

std::size_t cap_from_env() {
  const char* v = std::getenv("EXCHANGE_KIT_CAP");
  if (!v || !*v) return exkit::kDefaultCap;
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v, &end, 10);
  if (*end != '\0' || n == 0) throw exkit::ParseError(std::string("EXCHANGE_KIT_CAP must be a positive integer, got ") + v);
  return static_cast<std::size_t>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exchange-ring toolkit: classification, decompositions, exchange chains"};
  app.require_subcommand(1);
  Options opt;
  app.add_flag("--pretty", opt.pretty, "Human-readable summary instead of JSON");

  std::string ring, family, backend = "auto", x, eps, method = "search", desc, which;
  bool via_quotient = false, compare = false;
  std::size_t samples = 1024, window = 8, depth = 8, jobs = 0;
  LemmaArgs la;

  auto* classify = app.add_subcommand("classify", "Classification report for a ring");
  classify->add_option("ring", ring, "Ring descriptor file")->required();

  auto* chain = app.add_subcommand("chain", "Run the exchange chain on a family summing to 1");
  chain->add_option("ring", ring, "Ring descriptor file")->required();
  chain->add_option("--family", family, "Comma list or JSON array of elements")->required();
  chain->add_flag("--via-quotient", via_quotient, "Run in R/J, lift, and orthogonalize");
  chain->add_option("--backend", backend, "auto, kernel or exhaustive");

  auto* verify = app.add_subcommand("verify", "Check the suitable condition for every (or sampled) x");
  verify->add_option("ring", ring, "Ring descriptor file")->required();
  verify->add_option("--samples", samples, "Sample budget for rings above 256 elements");

  auto* check = app.add_subcommand("check", "Validate a certificate produced by chain");
  check->add_option("certificate", ring, "Certificate file, or - for standard input")->required();

  auto* lemma = app.add_subcommand("lemma", "Idempotent calculus and regularization steps");
  lemma->add_option("which", which,
                    "equivalences, refine, transport, orthogonalize, power-kill, regularize, pi-reduce, transfer")
      ->required();
  lemma->add_option("ring", la.ring, "Ring descriptor file")->required();
  lemma->add_option("--e", la.e, "Idempotent e");
  lemma->add_option("--e-prime", la.e_prime, "Idempotent e'");
  lemma->add_option("--family", la.family, "Family of elements");
  lemma->add_option("--x", la.x, "Element, or the triple for refine");
  lemma->add_option("--phi", la.phi, "Element phi");
  lemma->add_option("--psi", la.psi, "Element psi with phi^n psi phi^n = phi^n");
  lemma->add_option("--n", la.n, "Power n");
  lemma->add_option("--y", la.y, "Element y'");
  lemma->add_option("--f", la.f, "Idempotent f'");
  lemma->add_option("--history", la.history, "JSON list of [r_i, y_i] pairs");
  lemma->add_flag("--mod-radical", la.mod_radical, "Regularize modulo the Jacobson radical");

  auto* radical = app.add_subcommand("radical", "Jacobson radical and quotient");
  radical->add_option("ring", ring, "Ring descriptor file")->required();

  auto* lift = app.add_subcommand("lift", "Lift an idempotent of R/J into Rx");
  lift->add_option("ring", ring, "Ring descriptor file")->required();
  lift->add_option("--x", x, "Element x")->required();
  lift->add_option("--eps", eps, "Representative of the idempotent in R/J")->required();
  lift->add_option("--method", method, "search or newton");

  auto* colfin = app.add_subcommand("colfin", "Column-finite matrices over Q");
  colfin->require_subcommand(1);
  auto* demo = colfin->add_subcommand("demo-limit", "Limit of units converging to the shift");
  demo->add_option("--window", window, "Observed window W");
  demo->add_option("--depth", depth, "Number of units u_n");
  auto* cchain = colfin->add_subcommand("chain", "Truncated chain on a summable family");
  cchain->add_option("--family", desc, "Family description file")->required();
  cchain->add_option("--depth", depth, "Stages N");
  cchain->add_option("--window", window, "Observed window W");
  cchain->add_flag("--compare", compare, "Compare stabilization against depth N + 2");

  auto* module = app.add_subcommand("module", "Finite abelian groups");
  module->require_subcommand(1);
  auto* c2 = module->add_subcommand("c2", "C2 property with witness");
  c2->add_option("factors", desc, "Cyclic orders \"2,4\" or pairs \"2^1,2^2\"")->required();
  auto* lemma8 = module->add_subcommand("lemma8", "C2 of the endomorphism ring against C2 of the module");
  lemma8->add_option("factors", desc, "Cyclic orders \"2,4\" or pairs \"2^1,2^2\"")->required();

  auto* corpus = app.add_subcommand("corpus", "Run a corpus manifest");
  corpus->add_option("manifest", ring, "Manifest file")->required();
  corpus->add_option("--jobs", jobs, "Worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  return guarded([&]() -> int {
    opt.cap = cap_from_env();
    if (*classify) return cmd_classify(opt, ring);
    if (*chain) return cmd_chain(opt, ring, family, via_quotient, backend);
    if (*verify) return cmd_verify(opt, ring, samples);
    if (*check) return cmd_check(opt, ring);
    if (*lemma) return cmd_lemma(opt, which, la);
    if (*radical) return cmd_radical(opt, ring);
    if (*lift) return cmd_lift(opt, ring, x, eps, method);
    if (*demo) return cmd_colfin_demo(opt, window, depth);
    if (*cchain) return cmd_colfin_chain(opt, desc, depth, window, compare);
    if (*c2) return cmd_module(opt, "c2", desc);
    if (*lemma8) return cmd_module(opt, "lemma8", desc);
    if (*corpus) return cmd_corpus(opt, ring, jobs);
    return kInputError;
  });
}
