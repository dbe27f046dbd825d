#pragma once

// The qortho command line. run() is separate from main() so the tests can
// drive it with in-memory streams.

#include <CLI11.hpp>

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qortho/qortho.hpp"

namespace qortho::cli {

enum ExitCode : int { kOk = 0, kChecksFailed = 1, kUsage = 2, kRange = 3, kNonconvergence = 4 };

inline constexpr const char* kVersion = "qortho v1";

/// Bad flag values that are not parameter-range problems.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<bool, long long, double, std::string, nlohmann::ordered_json>;

/// Output rows; CSV and JSON are two renderings of the same cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json extra_meta = nlohmann::ordered_json::object();
};

struct Flags {
  std::string q = "0", rho = "0", beta = "0", gamma = "0", y = "0", x;
  int n = -1;
  std::string family, pair, density = "N", suite = "all", q_grid;
  double tol = -1.0;
  int k_max = 500;
  int grid = 11;
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string out;
  bool binary = false;
  bool parallel = false;
};

namespace detail {

inline Scalar number(const std::string& flag, const std::string& text) {
  try {
    return Scalar::parse(text);
  } catch (const Error&) {
    throw UsageError("malformed number for " + flag + ": '" + text + "'");
  }
}

inline std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<Scalar> numbers(const std::string& flag, const std::string& s) {
  std::vector<Scalar> out;
  for (const auto& item : split(s)) out.push_back(number(flag, item));
  if (out.empty()) throw UsageError(flag + " needs at least one value");
  return out;
}

template <class F>
auto named(F&& parse, const std::string& what, const std::string& name) {
  try {
    return parse(name);
  } catch (const Error&) {
    throw UsageError("unknown " + what + " '" + name + "'");
  }
}

template <class T>
Family<T> make_family(FamilyTag tag, const T& q, const T& beta, const T& rho, const T& y) {
  switch (tag) {
    case FamilyTag::QHermite: return Family<T>::qhermite(q);
    case FamilyTag::Rogers: return Family<T>::rogers(beta, q);
    case FamilyTag::ASC: return Family<T>::asc(y, rho, q);
    case FamilyTag::BigB: return Family<T>::big_b(q);
    case FamilyTag::ChebT: return Family<T>::cheb_t();
    case FamilyTag::ChebU: return Family<T>::cheb_u();
    case FamilyTag::ChebTHat: return Family<T>::cheb_t_hat(q);
    case FamilyTag::ChebUHat: return Family<T>::cheb_u_hat(q);
    case FamilyTag::ClassicalHermite: return Family<T>::classical_hermite();
    case FamilyTag::Kesten: return Family<T>::kesten(y, rho);
    case FamilyTag::KestenHat: return Family<T>::kesten_hat(y, rho, q);
  }
  throw UsageError("unknown family");
}

inline DensityId make_density(DensityTag tag, double q, double y, double rho, double beta) {
  switch (tag) {
    case DensityTag::N: return DensityId::normal(q);
    case DensityTag::CN: return DensityId::conditional(y, rho, q);
    case DensityTag::R: return DensityId::rogers(beta, q);
    case DensityTag::U: return DensityId::semicircle(q);
    case DensityTag::T: return DensityId::arcsine(q);
    case DensityTag::K: return DensityId::kesten(y, rho, q);
  }
  throw UsageError("unknown density");
}

/// Abscissae from --x, or --grid equispaced points on S(q) ([-6, 6] when q = 1).
inline std::vector<double> abscissae(const Flags& f, double q) {
  std::vector<double> xs;
  if (!f.x.empty()) {
    for (const auto& s : numbers("--x", f.x)) xs.push_back(s.as_double());
    return xs;
  }
  if (f.grid < 2) throw UsageError("--grid needs at least 2 points");
  const double L = q == 1.0 ? 6.0 : support_radius(q);
  for (int i = 0; i < f.grid; ++i) xs.push_back(-L + 2.0 * L * i / (f.grid - 1));
  return xs;
}

inline void require_n(const Flags& f) {
  if (f.n < 0) throw UsageError("--n is required and must be >= 0");
}

inline std::string render_csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<V, long long>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<V, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<V, std::string>) {
          return v.find_first_of(",\"\n") == std::string::npos ? v : qortho::detail::csv_quote(v);
        } else {
          return qortho::detail::csv_quote(v.dump());
        }
      },
      c);
}

inline nlohmann::ordered_json render_json_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, double>) {
          // JSON has no inf/nan; spell them as in the CSV
          if (!std::isfinite(v)) return format_double(v);
          return v;
        } else {
          return v;
        }
      },
      c);
}

inline void emit(const Table& t, const std::string& subcommand, const std::string& flags, const std::string& format,
                 std::ostream& os) {
  if (format == "json") {
    nlohmann::ordered_json j;
    j["meta"]["version"] = kVersion;
    j["meta"]["subcommand"] = subcommand;
    j["meta"]["flags"] = flags;
    for (const auto& [k, v] : t.extra_meta.items()) j["meta"][k] = v;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
      nlohmann::ordered_json r;
      for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = render_json_cell(row[i]);
      j["rows"].push_back(std::move(r));
    }
    os << j.dump(2) << '\n';
    return;
  }
  os << "# " << kVersion << ", " << subcommand << ", " << flags << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << render_csv_cell(row[i]);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct Exactness {
  bool exact = true;
  std::vector<Scalar> values;
};

inline Exactness scalars(std::initializer_list<std::pair<const char*, const std::string*>> flags) {
  Exactness e;
  for (const auto& [name, text] : flags) {
    e.values.push_back(number(name, *text));
    e.exact = e.exact && e.values.back().exact();
  }
  return e;
}

inline Table cmd_eval(const Flags& f) {
  require_n(f);
  if (f.x.empty()) throw UsageError("--x is required");
  const FamilyTag tag = named(parse_family, "family", f.family);
  const Exactness p = scalars({{"--q", &f.q}, {"--beta", &f.beta}, {"--rho", &f.rho}, {"--y", &f.y}});
  const std::vector<Scalar> xs = numbers("--x", f.x);
  const bool exact = p.exact && std::all_of(xs.begin(), xs.end(), [](const Scalar& s) { return s.exact(); });
  Table t{{"n", "x", "value"}, {}, {}};
  if (exact) {
    const auto fam = make_family<Rational>(tag, p.values[0].as_exact(), p.values[1].as_exact(),
                                           p.values[2].as_exact(), p.values[3].as_exact());
    for (const auto& x : xs) {
      const Rational v = eval<Rational, Rational>(fam, f.n, x.as_exact());
      t.rows.push_back({static_cast<long long>(f.n), to_string(x.as_exact()), to_string(v)});
    }
  } else {
    const auto fam = make_family<double>(tag, p.values[0].as_double(), p.values[1].as_double(),
                                         p.values[2].as_double(), p.values[3].as_double());
    for (const auto& x : xs) {
      t.rows.push_back({static_cast<long long>(f.n), x.as_double(), eval(fam, f.n, x.as_double())});
    }
  }
  return t;
}

inline Table cmd_coeffs(const Flags& f) {
  require_n(f);
  const FamilyTag tag = named(parse_family, "family", f.family);
  const Exactness p = scalars({{"--q", &f.q}, {"--beta", &f.beta}, {"--rho", &f.rho}, {"--y", &f.y}});
  const auto fam = make_family<Rational>(tag, p.values[0].as_exact(), p.values[1].as_exact(), p.values[2].as_exact(),
                                         p.values[3].as_exact());
  const RationalPoly poly = coeffs(fam, f.n);
  Table t{{"n", "power", "coefficient"}, {}, {}};
  for (int i = 0; i <= poly.degree(); ++i) {
    t.rows.push_back({static_cast<long long>(f.n), static_cast<long long>(i), to_string(poly[i])});
  }
  return t;
}

inline Table cmd_density(const Flags& f) {
  const DensityTag tag = named(parse_density, "density", f.density);
  const double q = number("--q", f.q).as_double();
  const DensityId d = make_density(tag, q, number("--y", f.y).as_double(), number("--rho", f.rho).as_double(),
                                   number("--beta", f.beta).as_double());
  Table t{{"x", "value", "truncation_error"}, {}, {}};
  for (double x : abscissae(f, q)) {
    const TruncatedValue v = density_eval_bounded(d, x);
    t.rows.push_back({x, v.value, v.error});
  }
  return t;
}

inline Table cmd_expand(const Flags& f) {
  const ExpansionId id = named(parse_expansion, "expansion", f.pair);
  ExpansionSpec spec;
  spec.id = id;
  spec.params.q = number("--q", f.q).as_double();
  spec.params.y = number("--y", f.y).as_double();
  spec.params.rho = number("--rho", f.rho).as_double();
  spec.params.beta = number("--beta", f.beta).as_double();
  validate(id, spec.params);
  spec.options.k_max = f.k_max;
  spec.options.k = f.n;
  if (f.tol >= 0.0) spec.options.tol = f.tol;
  const int k_max = spec.options.k >= 0 ? std::max(spec.options.k, 20) : spec.options.k_max;
  const ExpansionSeries series(id, spec.params, k_max);
  const DensityId target = expansion_target(id, spec.params);
  Table t{{"x", "value", "target", "terms", "tail_bound"}, {}, {}};
  for (double x : abscissae(f, effective_q(id, spec.params))) {
    const ExpansionValue v = expansion_eval(series, x, spec.options);
    t.rows.push_back({x, v.value, density_eval(target, x), static_cast<long long>(v.terms), v.tail_bound});
  }
  return t;
}

inline Table cmd_connect(const Flags& f) {
  require_n(f);
  const ConnectionPair pair = named(parse_pair, "pair", f.pair);
  const Exactness p =
      scalars({{"--q", &f.q}, {"--y", &f.y}, {"--rho", &f.rho}, {"--beta", &f.beta}, {"--gamma", &f.gamma}});
  Table t{{"n", "k", "value"}, {}, {}};
  if (p.exact) {
    PairParams<Rational> a{p.values[0].as_exact(), p.values[1].as_exact(), p.values[2].as_exact(),
                           p.values[3].as_exact(), p.values[4].as_exact()};
    const std::vector<Rational> row = connect_closed_form(pair, a, f.n);
    for (int k = f.n; k >= 0; --k) {
      const Rational& g = row[static_cast<std::size_t>(k)];
      if (g != 0) t.rows.push_back({static_cast<long long>(f.n), static_cast<long long>(k), to_string(g)});
    }
  } else {
    PairParams<double> a{p.values[0].as_double(), p.values[1].as_double(), p.values[2].as_double(),
                         p.values[3].as_double(), p.values[4].as_double()};
    const std::vector<double> row = connect_closed_form(pair, a, f.n);
    for (int k = f.n; k >= 0; --k) {
      const double g = row[static_cast<std::size_t>(k)];
      if (g != 0.0) t.rows.push_back({static_cast<long long>(f.n), static_cast<long long>(k), g});
    }
  }
  return t;
}

inline Table cmd_verify(const Flags& f, bool& all_passed) {
  VerifyConfig c;
  if (!f.q_grid.empty()) {
    c.q_grid.clear();
    for (const auto& s : numbers("--q-grid", f.q_grid)) c.q_grid.push_back(s.as_double());
  }
  if (f.tol >= 0.0) c.tol = f.tol;
  if (f.suite != "all") {
    c.select = split(f.suite);
    if (c.select.empty()) throw UsageError("--suite is empty");
  }
  const std::vector<VerificationReport> reports = run_all(c);
  if (reports.empty()) throw UsageError("--suite '" + f.suite + "' selects no checks");
  all_passed = all_pass(reports);
  Table t{{"check_id", "params_json", "residual", "tolerance", "pass"}, {}, {}};
  for (const auto& r : reports) t.rows.push_back({r.check_id, r.params, r.residual, r.tolerance, r.pass});
  return t;
}

inline SampleResult cmd_sample(const Flags& f) {
  require_n(f);
  const DensityTag tag = named(parse_density, "density", f.density);
  if (tag != DensityTag::N && tag != DensityTag::CN) throw UsageError("sample supports --density N or CN");
  SamplerConfig c;
  c.density = make_density(tag, number("--q", f.q).as_double(), number("--y", f.y).as_double(),
                           number("--rho", f.rho).as_double(), 0.0);
  c.seed = f.seed;
  c.parallel = f.parallel;
  return sample(c, static_cast<std::size_t>(f.n));
}

inline std::string join(const std::vector<std::string>& v, std::size_t from) {
  std::string s;
  for (std::size_t i = from; i < v.size(); ++i) s += (i > from ? " " : "") + v[i];
  return s;
}

}  // namespace detail

/// Runs one command; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"q-orthogonal polynomials, densities, expansions and checks", "qortho"};
  app.require_subcommand(1);
  Flags f;

  const auto params = [&](CLI::App* s) {
    s->add_option("--q", f.q, "q, decimal or p/q");
    s->add_option("--rho", f.rho, "rho");
    s->add_option("--y", f.y, "conditioning point y");
    s->add_option("--beta", f.beta, "Rogers beta (gamma for N_over_R)");
  };
  const auto common = [&](CLI::App* s) {
    s->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--out", f.out, "write to this file instead of stdout");
  };

  CLI::App* eval_cmd = app.add_subcommand("eval", "p_n(x) for a family");
  eval_cmd->add_option("--family", f.family, "family name")->required();
  eval_cmd->add_option("--n", f.n, "degree")->required();
  eval_cmd->add_option("--x", f.x, "point(s), comma separated")->required();
  params(eval_cmd);
  common(eval_cmd);

  CLI::App* coeffs_cmd = app.add_subcommand("coeffs", "exact monomial coefficients of p_n");
  coeffs_cmd->add_option("--family", f.family, "family name")->required();
  coeffs_cmd->add_option("--n", f.n, "degree")->required();
  params(coeffs_cmd);
  common(coeffs_cmd);

  CLI::App* density_cmd = app.add_subcommand("density", "density values");
  density_cmd->add_option("--density", f.density, "N, CN, R, U, T or K");
  density_cmd->add_option("--x", f.x, "point(s), comma separated");
  density_cmd->add_option("--grid", f.grid, "equispaced points on S(q) when --x is absent");
  params(density_cmd);
  common(density_cmd);

  CLI::App* expand_cmd = app.add_subcommand("expand", "truncated density expansion");
  expand_cmd->add_option("--pair", f.pair, "expansion, e.g. CN_over_N")->required();
  expand_cmd->add_option("--x", f.x, "point(s), comma separated");
  expand_cmd->add_option("--grid", f.grid, "equispaced points on S(q) when --x is absent");
  expand_cmd->add_option("--n", f.n, "fixed truncation order (adaptive if absent)");
  expand_cmd->add_option("--k-max", f.k_max, "largest adaptive order");
  expand_cmd->add_option("--tol", f.tol, "tail tolerance");
  params(expand_cmd);
  common(expand_cmd);

  CLI::App* connect_cmd = app.add_subcommand("connect", "connection coefficients of row n");
  connect_cmd->add_option("--pair", f.pair, "pair, e.g. t-from-u")->required();
  connect_cmd->add_option("--n", f.n, "degree")->required();
  connect_cmd->add_option("--gamma", f.gamma, "Rogers source parameter");
  params(connect_cmd);
  common(connect_cmd);

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the verification registry");
  verify_cmd->add_option("--suite", f.suite, "all, or comma-separated check-id prefixes");
  verify_cmd->add_option("--q-grid", f.q_grid, "comma-separated q values");
  verify_cmd->add_option("--tol", f.tol, "quadrature tolerance");
  common(verify_cmd);

  CLI::App* sample_cmd = app.add_subcommand("sample", "rejection samples from fN or fCN");
  sample_cmd->add_option("--density", f.density, "N or CN");
  sample_cmd->add_option("--n", f.n, "number of samples")->required();
  sample_cmd->add_option("--seed", f.seed, "seed");
  sample_cmd->add_flag("--binary", f.binary, "little-endian float64 instead of text");
  sample_cmd->add_flag("--parallel", f.parallel, "generate batches concurrently");
  params(sample_cmd);
  common(sample_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "qortho: " << e.what() << '\n';
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  const std::string flags = detail::join(args, 1);

  std::ofstream file;
  if (!f.out.empty()) {
    file.open(f.out, std::ios::binary);
    if (!file) {
      err << "qortho: cannot open " << f.out << '\n';
      return kUsage;
    }
  }
  std::ostream& os = f.out.empty() ? out : file;

  try {
    if (name == "sample") {
      const SampleResult r = detail::cmd_sample(f);
      err << "qortho: " << r.samples.size() << " samples from " << r.proposals << " proposals, M = " << r.M << '\n';
      if (f.binary) {
        write_samples_binary(os, r.samples);
      } else if (f.format == "json") {
        Table t{{"x"}, {}, {}};
        for (double x : r.samples) t.rows.push_back({x});
        t.extra_meta["M"] = r.M;
        t.extra_meta["proposals"] = r.proposals;
        detail::emit(t, name, flags, f.format, os);
      } else {
        os << "# " << kVersion << ", " << name << ", " << flags << '\n';
        write_samples_text(os, r.samples);
      }
      return kOk;
    }
    Table t;
    bool passed = true;
    if (name == "eval") t = detail::cmd_eval(f);
    if (name == "coeffs") t = detail::cmd_coeffs(f);
    if (name == "density") t = detail::cmd_density(f);
    if (name == "expand") t = detail::cmd_expand(f);
    if (name == "connect") t = detail::cmd_connect(f);
    if (name == "verify") t = detail::cmd_verify(f, passed);
    detail::emit(t, name, flags, f.format, os);
    return passed ? kOk : kChecksFailed;
  } catch (const UsageError& e) {
    err << "qortho: " << e.what() << '\n';
    return kUsage;
  } catch (const Nonconvergence& e) {
    err << "qortho: " << e.what() << '\n';
    return kNonconvergence;
  } catch (const Error& e) {
    err << "qortho: " << e.what() << '\n';
    return kRange;
  }
}

}  // namespace qortho::cli
