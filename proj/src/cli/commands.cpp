#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "cli/json_io.hpp"
#include "hoc/bounds.hpp"
#include "hoc/cli.hpp"
#include "hoc/diff_ops.hpp"
#include "hoc/efron_stein.hpp"
#include "hoc/hoeffding.hpp"
#include "hoc/montecarlo.hpp"
#include "hoc/smooth.hpp"

namespace hoc::cli {

namespace {

constexpr int kTailGridPoints = 20;

class Table {
 public:
  explicit Table(std::string title) : title_(std::move(title)) {}

  void header(std::vector<std::string> h) { header_ = std::move(h); }
  void row(std::vector<std::string> r) { rows_.push_back(std::move(r)); }
  void line(std::string text) { lines_.push_back(std::move(text)); }

  std::string render() const {
    std::ostringstream out;
    out << title_ << "\n";
    std::vector<std::size_t> width(header_.size(), 0);
    auto grow = [&](const std::vector<std::string>& r) {
      for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
    };
    grow(header_);
    for (const auto& r : rows_) grow(r);
    auto emit = [&](const std::vector<std::string>& r) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        out << r[c];
        if (c + 1 < r.size()) out << std::string(width[c] - r[c].size() + 2, ' ');
      }
      out << "\n";
    };
    if (!header_.empty()) emit(header_);
    for (const auto& r : rows_) emit(r);
    for (const auto& l : lines_) out << l << "\n";
    return out.str();
  }

 private:
  std::string title_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> lines_;
};

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

std::string status(bool pass) { return pass ? "pass" : "FAIL"; }

std::string set_text(const std::vector<int>& indices) {
  std::string s = "{";
  for (std::size_t k = 0; k < indices.size(); ++k) s += (k ? "," : "") + std::to_string(indices[k] + 1);
  return s + "}";
}

struct Outcome {
  int code = kPass;
  json result = json::object();
  std::string table;
};

struct Context {
  const RunConfig& cfg;
  Limits limits;
  json input;
  int resolved_order = 0;

  SpacePtr space() const {
    if (!input.contains("space")) throw ValidationError("input needs a \"space\" entry");
    return parse_space(input.at("space"), limits);
  }
  FunctionTable function(const SpacePtr& space) const {
    if (!input.contains("function")) throw ValidationError("input needs a \"function\" entry");
    return parse_function(input.at("function"), space);
  }
};

int auto_order(const Context& ctx, const FunctionTable& f) {
  if (ctx.cfg.order > 0) return ctx.cfg.order;
  return std::max(1, lowest_nonvanishing_degree(decompose(f)));
}

json tail_grid(const FunctionTable& f, const std::function<double(double)>& bound, bool& ok) {
  json grid = json::array();
  const double top = f.sup_norm();
  for (int j = 1; j <= kTailGridPoints; ++j) {
    const double t = top * j / kTailGridPoints;
    const double exact = exact_tail(f, t);
    const double b = bound(t);
    const bool pass = exact <= b + 1e-12;
    ok &= pass;
    grid.push_back({{"t", t}, {"exact", exact}, {"bound", b}, {"pass", pass}});
  }
  return grid;
}

void certificate_rows(Table& table, const Certificate& cert) {
  table.header({"condition", "value", "threshold", "status"});
  for (const auto& c : cert.conditions) table.row({c.name, fmt(c.value), fmt(c.threshold), status(c.pass)});
  table.line("claim: " + cert.claim + (cert.issued ? "" : "  (not issued)"));
  table.line("constant c = " + fmt(cert.constant) + ", scale s = " + fmt(cert.scale));
  if (cert.exact_value) table.line("exact value = " + fmt(*cert.exact_value));
  for (const auto& n : cert.notes) table.line("note: " + n);
}

bool certificate_sound(const Certificate& cert) {
  return cert.issued && (!cert.exact_value || *cert.exact_value <= 2.0);
}

Outcome cmd_decompose(Context& ctx) {
  const auto space = ctx.space();
  const auto f = ctx.function(space);
  const auto dec = decompose(f);
  Outcome o;
  Table table("hoc decompose");
  table.header({"S", "l2"});
  json comps = json::array();
  for (const auto& [S, h] : dec.components()) {
    const double l2 = std::sqrt(std::max(h.inner(h), 0.0));
    comps.push_back({{"S", one_based(S.indices())}, {"l2", l2}});
    table.row({set_text(S.indices()), fmt(l2)});
  }
  o.result["components"] = comps;
  o.result["degree_profile"] = degree_profile(dec);
  o.result["mean"] = dec.mean();
  o.result["lowest_nonvanishing_degree"] = lowest_nonvanishing_degree(dec);
  o.table = table.render();
  return o;
}

Outcome cmd_tensor(Context& ctx) {
  const auto space = ctx.space();
  const auto f = ctx.function(space);
  const auto kind = parse_kind(ctx.cfg.kind);
  const int d = ctx.cfg.order > 0 ? ctx.cfg.order : 1;
  ctx.resolved_order = d;
  const auto field = difference_tensor(f, kind, d);
  Outcome o;
  Table table("hoc tensor (" + std::string(to_string(kind)) + ", order " + std::to_string(d) + ")");
  table.header({"index", "linf", "l2"});
  json entries = json::array();
  for (const auto& [t, e] : field.entries()) {
    const double linf = lp_norm(e, std::numeric_limits<double>::infinity());
    const double l2 = lp_norm(e, 2.0);
    entries.push_back({{"index", one_based(t)}, {"linf", linf}, {"l2", l2}});
    table.row({set_text(t), fmt(linf), fmt(l2)});
  }
  const auto hs = hs_field(field);
  o.result["kind"] = std::string(to_string(kind));
  o.result["order"] = d;
  o.result["entries"] = entries;
  o.result["hs_linf"] = lp_norm(hs, std::numeric_limits<double>::infinity());
  o.result["hs_l2"] = lp_norm(hs, 2.0);
  table.line("HS norms: L^inf " + fmt(o.result["hs_linf"].get<double>()) + ", L^2 " +
             fmt(o.result["hs_l2"].get<double>()));
  o.table = table.render();
  return o;
}

Outcome cmd_verify(Context& ctx) {
  const auto space = ctx.space();
  const auto f = ctx.function(space);
  const auto checks = verify_identities(f, ctx.cfg.tolerance);
  Outcome o;
  Table table("hoc verify-identities");
  table.header({"check", "residual", "tolerance", "status"});
  json list = json::array();
  bool all = true;
  for (const auto& c : checks) {
    list.push_back({{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    table.row({c.name, fmt(c.residual), fmt(c.tolerance), status(c.pass)});
    all &= c.pass;
  }
  o.result["checks"] = list;
  o.result["all_pass"] = all;
  o.code = all ? kPass : kCheckFailed;
  o.table = table.render();
  return o;
}

Outcome certify_exp(Context& ctx) {
  const auto space = ctx.space();
  const auto f = ctx.function(space);
  const int d = auto_order(ctx, f);
  ctx.resolved_order = d;
  const auto cert = exp_moment_certificate(f, d);
  Outcome o;
  bool grid_ok = true;
  json grid = tail_grid(
      f,
      [&](double t) {
        if (!cert.issued) return 1.0;
        return std::min(1.0, 2.0 * std::exp(-cert.constant * std::pow(t / cert.scale, 2.0 / d)));
      },
      grid_ok);
  o.result["certificate"] = to_json(cert);
  o.result["deviation_grid"] = grid;
  o.code = certificate_sound(cert) && grid_ok ? kPass : kCheckFailed;
  Table table("hoc certify (EXP_MOMENT, order " + std::to_string(d) + ")");
  certificate_rows(table, cert);
  table.line(std::string("deviation bound 2 exp(-c (t/s)^{2/d}) on a 20-point grid: ") + status(grid_ok));
  o.table = table.render();
  return o;
}

Outcome certify_tail(Context& ctx) {
  const auto space = ctx.space();
  const auto f = ctx.function(space);
  const int d = auto_order(ctx, f);
  ctx.resolved_order = d;
  if (std::abs(f.mean()) > 1e-12 * std::max(1.0, f.sup_norm())) throw PreconditionError("tail bound needs E f = 0");
  const auto norms = discrete_norms(f, d);
  auto at = tail_from_norms(norms, ctx.cfg.t);
  at.exact_probability = exact_tail(f, ctx.cfg.t);
  bool ok = *at.exact_probability <= at.bound + 1e-12;
  json grid = tail_grid(f, [&](double t) { return tail_from_norms(norms, t).bound; }, ok);
  Outcome o;
  o.result["tail"] = to_json(at);
  o.result["grid"] = grid;
  o.result["norms"] = {{"hs2", norms.hs2}, {"hs_inf", norms.hs_inf}};
  o.code = ok ? kPass : kCheckFailed;
  Table table("hoc certify (TAIL, order " + std::to_string(d) + ")");
  table.header({"t", "eta", "bound", "exact"});
  table.row({fmt(at.t), fmt(at.eta), fmt(at.bound), fmt(*at.exact_probability)});
  table.line(std::string("exact tails below the bound on a 20-point grid: ") + status(ok));
  o.table = table.render();
  return o;
}

Outcome certify_sup(Context& ctx) {
  const auto space = ctx.space();
  if (!ctx.input.contains("functions")) throw ValidationError("sup statement needs a \"functions\" list");
  std::vector<FunctionTable> fs;
  for (const auto& j : ctx.input.at("functions")) fs.push_back(parse_function(j, space));
  const int d = ctx.cfg.order > 0 ? ctx.cfg.order : 1;
  ctx.resolved_order = d;
  const auto cert = sup_certificate(fs, d);
  Outcome o;
  o.result["certificate"] = to_json(cert);
  o.code = certificate_sound(cert) ? kPass : kCheckFailed;
  Table table("hoc certify (SUP, order " + std::to_string(d) + ")");
  certificate_rows(table, cert);
  o.table = table.render();
  return o;
}

Outcome certify_ustat(Context& ctx) {
  const auto space = ctx.space();
  if (!ctx.input.contains("kernel")) throw ValidationError("ustat statement needs a \"kernel\" function");
  const auto kernel = parse_function(ctx.input.at("kernel"), space);
  const int n = ctx.input.at("n").get<int>();
  const double M = ctx.input.at("M").get<double>();
  const int d = space->dimension();
  if (ctx.cfg.order > 0 && ctx.cfg.order != d) {
    throw ValidationError("--order must match the kernel arity " + std::to_string(d));
  }
  ctx.resolved_order = d;
  const auto cert = ustat_certificate(kernel, n, M);
  Outcome o;
  o.result["certificate"] = to_json(cert);
  o.code = certificate_sound(cert) ? kPass : kCheckFailed;
  Table table("hoc certify (USTAT, order " + std::to_string(d) + ", n " + std::to_string(n) + ")");
  certificate_rows(table, cert);
  o.table = table.render();
  return o;
}

Outcome cmd_certify(Context& ctx) {
  const std::string s = ctx.cfg.statement.empty() ? "exp" : ctx.cfg.statement;
  Outcome o;
  if (s == "exp") {
    o = certify_exp(ctx);
  } else if (s == "tail") {
    o = certify_tail(ctx);
  } else if (s == "sup") {
    o = certify_sup(ctx);
  } else if (s == "ustat") {
    o = certify_ustat(ctx);
  } else {
    throw ValidationError("unknown statement '" + s + "' (expected exp, tail, sup or ustat)");
  }
  o.result["input"] = ctx.input;
  return o;
}

Outcome smooth_lsi(Context& ctx) {
  const int d = ctx.cfg.order;
  if (d < 1) throw ValidationError("smooth-certify needs --order >= 1");
  ctx.resolved_order = d;
  LsiVariant variant;
  if (ctx.cfg.variant == "op") {
    variant = LsiVariant::OP_CONDITIONS;
  } else if (ctx.cfg.variant == "hs") {
    variant = LsiVariant::HS_CONDITIONS;
  } else {
    throw ValidationError("unknown variant '" + ctx.cfg.variant + "' (expected op or hs)");
  }
  std::optional<MultilinearPolynomial> poly;
  SmoothNorms norms;
  if (ctx.input.contains("function")) {
    const auto& fn = ctx.input.at("function");
    if (!fn.contains("poly")) throw ValidationError("smooth setting needs a polynomial function");
    poly = parse_poly(fn.at("poly"), -1);
    if (poly->coefficient(CoordSet{}) != 0.0) throw PreconditionError("smooth certificates need a centered function");
    norms = smooth_norms_for_polynomial(*poly, d, ctx.cfg.samples, ctx.cfg.seed);
  } else if (ctx.input.contains("norms")) {
    norms = parse_norms(ctx.input.at("norms"), d);
  } else {
    throw ValidationError("smooth-certify needs a \"function\" polynomial or a \"norms\" object");
  }
  const auto cert = lsi_certificate(norms, ctx.cfg.sigma2, d, variant);
  Outcome o;
  o.result["norms"] = to_json(norms);
  o.result["certificate"] = to_json(cert);
  bool ok = cert.issued;
  Table table("hoc smooth-certify (LSI, order " + std::to_string(d) + ")");
  certificate_rows(table, cert);

  const bool has_tail_norms = norms.op_inf && static_cast<int>(norms.op2.size()) >= d - 1 &&
                              std::all_of(norms.op2.begin(), norms.op2.begin() + (d - 1), [](const auto& v) { return v.has_value(); });
  if (has_tail_norms) {
    const auto tail = continuous_tail(norms, ctx.cfg.sigma2, d, ctx.cfg.t);
    o.result["tail"] = to_json(tail);
    table.line("tail bound at t = " + fmt(tail.t) + ": " + fmt(tail.bound));
    if (poly) {
      const auto source = SampleSource::gaussian(poly->dimension());
      const auto mc = empirical_tail(source, poly_function(*poly), ctx.cfg.t, ctx.cfg.samples, ctx.cfg.seed);
      const bool pass = mc.value <= tail.bound + 3.0 * mc.std_error;
      o.result["mc_tail"] = to_json(mc);
      o.result["mc_tail_pass"] = pass;
      ok &= pass;
      table.line("Monte Carlo tail " + fmt(mc.value) + " +- " + fmt(mc.std_error) + ": " + status(pass));
    }
  }
  if (poly && cert.issued) {
    const auto source = SampleSource::gaussian(poly->dimension());
    const auto mc = sample_exp_moment(source, poly_function(*poly), cert.values.at("exponent_constant"), 2.0 / d,
                                      ctx.cfg.samples, ctx.cfg.seed);
    const bool pass = mc.value <= 2.0 + 3.0 * mc.std_error;
    o.result["mc_moment"] = to_json(mc);
    o.result["mc_moment_pass"] = pass;
    o.result["mc_measure"] = "standard Gaussian";
    ok &= pass;
    table.line("Monte Carlo moment under the standard Gaussian " + fmt(mc.value) + " +- " + fmt(mc.std_error) + ": " +
               status(pass));
  }
  o.code = ok ? kPass : kCheckFailed;
  o.table = table.render();
  return o;
}

Outcome smooth_sphere(Context& ctx) {
  const int d = ctx.cfg.order;
  if (d < 1) throw ValidationError("smooth-certify needs --order >= 1");
  ctx.resolved_order = d;
  if (!ctx.input.contains("sphere")) throw ValidationError("sphere setting needs a \"sphere\" norms object");
  const auto& s = ctx.input.at("sphere");
  const int n = s.at("n").get<int>();
  const auto op2 = s.contains("op2") ? s.at("op2").get<std::vector<double>>() : std::vector<double>{};
  const auto cert = sphere_certificate(n, d, op2, s.at("sup_op").get<double>());
  Outcome o;
  o.result["certificate"] = to_json(cert);
  o.code = cert.issued ? kPass : kCheckFailed;
  Table table("hoc smooth-certify (SPHERE, order " + std::to_string(d) + ", n " + std::to_string(n) + ")");
  certificate_rows(table, cert);
  o.table = table.render();
  return o;
}

Outcome cmd_smooth(Context& ctx) {
  Outcome o;
  if (ctx.cfg.setting == "lsi") {
    o = smooth_lsi(ctx);
  } else if (ctx.cfg.setting == "sphere") {
    o = smooth_sphere(ctx);
  } else {
    throw ValidationError("unknown setting '" + ctx.cfg.setting + "' (expected lsi or sphere)");
  }
  o.result["input"] = ctx.input;
  return o;
}

Outcome cmd_mc_validate(Context& ctx) {
  const std::string path = !ctx.cfg.statement.empty() ? ctx.cfg.statement : ctx.cfg.input;
  if (path.empty()) throw ValidationError("mc-validate needs --statement <certificate.json>");
  json doc = read_json_file(path);
  const json& body = doc.contains("result") ? doc.at("result") : doc;
  if (!body.contains("certificate") || !body.contains("input")) {
    throw ValidationError("file does not contain a certificate with its input");
  }
  const json& cj = body.at("certificate");
  const json& input = body.at("input");
  const std::string kind = cj.at("statement").get<std::string>();
  const int d = cj.at("order").get<int>();
  ctx.resolved_order = d;
  const auto& values = cj.at("values");

  std::optional<SampleSource> source;
  PointFunction g;
  double c = cj.at("constant").get<double>();
  if (kind == "SPHERE") throw ValidationError("sphere certificates carry no function to sample");
  if (kind == "LSI") {
    if (!input.contains("function")) throw ValidationError("certificate was built from norms only; nothing to sample");
    auto poly = parse_poly(input.at("function").at("poly"), -1);
    source = SampleSource::gaussian(poly.dimension());
    g = poly_function(std::move(poly));
    c = values.at("exponent_constant").get<double>();
  } else {
    auto space = parse_space(input.at("space"), ctx.limits);
    double s = cj.at("scale").get<double>();
    FunctionTable f = FunctionTable::constant(space, 0.0);
    if (kind == "EXP_MOMENT") {
      f = parse_function(input.at("function"), space);
    } else if (kind == "USTAT") {
      const auto kernel = parse_function(input.at("kernel"), space);
      f = ustat_build(kernel, input.at("n").get<int>());
      c = values.at("c0").get<double>();
      space = f.space();
    } else if (kind == "SUP") {
      std::vector<FunctionTable> fs;
      for (const auto& j : input.at("functions")) fs.push_back(parse_function(j, space));
      f = fs.front().abs();
      for (std::size_t k = 1; k < fs.size(); ++k) {
        auto& v = f.mutable_values();
        for (std::size_t o = 0; o < v.size(); ++o) v[o] = std::max(v[o], std::abs(fs[k][o]));
      }
      f += -f.mean();
    } else {
      throw ValidationError("cannot sample a certificate of kind " + kind);
    }
    source = SampleSource::product(space);
    g = table_function(f * (1.0 / s));
  }

  const auto mc = sample_exp_moment(*source, g, c, 2.0 / d, ctx.cfg.samples, ctx.cfg.seed);
  Outcome o;
  o.result["statement"] = kind;
  o.result["certificate_file"] = path;
  o.result["estimate"] = to_json(mc);
  const bool issued = cj.at("issued").get<bool>();
  const bool below = mc.value <= 2.0 + 3.0 * mc.std_error;
  bool consistent = true;
  if (cj.at("exact_value").is_number()) {
    const double exact = cj.at("exact_value").get<double>();
    consistent = std::abs(mc.value - exact) <= 4.0 * mc.std_error + 1e-12;
    o.result["exact_value"] = exact;
  }
  o.result["issued"] = issued;
  o.result["below_two"] = below;
  o.result["matches_exact"] = consistent;
  o.code = issued && below && consistent ? kPass : kCheckFailed;
  Table table("hoc mc-validate (" + kind + ", order " + std::to_string(d) + ")");
  table.header({"estimate", "std_error", "samples", "status"});
  table.row({fmt(mc.value), fmt(mc.std_error), std::to_string(mc.samples), status(o.code == kPass)});
  if (!issued) table.line("certificate was not issued");
  if (mc.clamped) table.line("note: exponent arguments above 700 were clamped");
  o.table = table.render();
  return o;
}

Outcome cmd_report(Context& ctx) {
  Outcome o;
  const auto dec = cmd_decompose(ctx);
  const auto ver = cmd_verify(ctx);
  Outcome cert;
  Outcome tail;
  const auto space = ctx.space();
  const auto f = ctx.function(space);
  o.result["decompose"] = dec.result;
  o.result["verify_identities"] = ver.result;
  o.code = std::max(o.code, ver.code);
  std::string text = dec.table + "\n" + ver.table;
  if (std::abs(f.mean()) <= 1e-12 * std::max(1.0, f.sup_norm())) {
    cert = certify_exp(ctx);
    tail = certify_tail(ctx);
    o.result["certificate"] = cert.result;
    o.result["tail"] = tail.result;
    o.code = std::max({o.code, cert.code, tail.code});
    text += "\n" + cert.table + "\n" + tail.table;
  } else {
    o.result["certificate"] = nullptr;
    text += "\ncertificates skipped: E f != 0\n";
  }
  o.table = text;
  return o;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json config_json(const RunConfig& cfg, int resolved_order) {
  return {{"command", cfg.command},   {"input", cfg.input},     {"output", cfg.output},
          {"order", cfg.order},       {"resolved_order", resolved_order},
          {"statement", cfg.statement}, {"seed", cfg.seed},     {"samples", cfg.samples},
          {"budget", cfg.budget},     {"tolerance", cfg.tolerance}, {"kind", cfg.kind},
          {"t", cfg.t},               {"sigma2", cfg.sigma2},   {"variant", cfg.variant},
          {"setting", cfg.setting},   {"threads_env", "CONC_THREADS"}};
}

const std::map<std::string, std::function<Outcome(Context&)>>& commands() {
  static const std::map<std::string, std::function<Outcome(Context&)>> table = {
      {"decompose", cmd_decompose},       {"tensor", cmd_tensor},         {"verify-identities", cmd_verify},
      {"certify", cmd_certify},           {"smooth-certify", cmd_smooth}, {"mc-validate", cmd_mc_validate},
      {"report", cmd_report}};
  return table;
}

}  // namespace

RunResult execute(const RunConfig& config) {
  RunResult res;
  json report;
  report["tool"] = "hoc";
  report["version"] = kVersion;
  report["timestamp"] = timestamp();
  Context ctx{config, Limits{}, json::object(), 0};
  ctx.limits.max_tensor_evaluations = config.budget;
  try {
    const auto it = commands().find(config.command);
    if (it == commands().end()) throw ValidationError("unknown command '" + config.command + "'");
    if (config.command != "mc-validate") {
      if (config.input.empty()) throw ValidationError("--input is required");
      ctx.input = read_json_file(config.input);
    }
    auto outcome = it->second(ctx);
    res.exit_code = outcome.code;
    res.table = outcome.table;
    report["result"] = std::move(outcome.result);
    report["status"] = outcome.code == kPass ? "pass" : "fail";
  } catch (const BudgetError& e) {
    res.exit_code = kUsageError;
    report["status"] = "error";
    report["error"] = std::string("budget exceeded: ") + e.what();
  } catch (const std::exception& e) {
    res.exit_code = kUsageError;
    report["status"] = "error";
    report["error"] = e.what();
  }
  if (res.exit_code == kUsageError) res.table = "error: " + report["error"].get<std::string>() + "\n";
  report["exit_code"] = res.exit_code;
  report["config"] = config_json(config, ctx.resolved_order);
  res.report = report.dump(2) + "\n";
  return res;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto res = execute(config);
  if (config.output.empty()) {
    out << res.report;
    err << res.table;
    return res.exit_code;
  }
  std::ofstream file(config.output);
  if (!file) {
    err << "error: cannot write '" << config.output << "'\n";
    return kUsageError;
  }
  file << res.report;
  out << res.table;
  return res.exit_code;
}

}  // namespace hoc::cli
