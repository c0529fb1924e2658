#include "stablepc/experiments/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stablepc/matrix_market.hpp"
#include "stablepc/metrics.hpp"

namespace stablepc::experiments {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Status status_from_string(std::string_view s) {
  for (const Status st : {Status::converged, Status::max_iters, Status::breakdown, Status::no_progress}) {
    if (to_string(st) == s) return st;
  }
  throw InvalidSpec("unknown status '" + std::string(s) + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::optional<double> parse_optional(const std::string& field, std::size_t lineno) {
  if (field.empty()) return std::nullopt;
  double v = 0.0;
  if (!parse_double(field, v)) throw ParseError("bad number '" + field + "'", lineno);
  return v;
}

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingData("missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void save_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

json meta_json(const ProblemMeta& m) {
  return {{"generator", m.generator},
          {"n", m.n},
          {"kappa_a", m.kappa_a},
          {"kappa_pre", optional_number(m.kappa_pre)},
          {"side", std::string(to_string(m.side))},
          {"seed", m.seed}};
}

ProblemMeta meta_from_json(const json& j) {
  ProblemMeta m;
  m.generator = j.at("generator").get<std::string>();
  m.n = j.at("n").get<std::size_t>();
  m.kappa_a = j.at("kappa_a").get<double>();
  m.kappa_pre = number_or_null(j.at("kappa_pre"));
  m.side = side_from_string(j.at("side").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

const char* preconditioner_file(PreconditionerSpec::Form form) {
  switch (form) {
    case PreconditionerSpec::Form::identity: return nullptr;
    case PreconditionerSpec::Form::dense_inverse: return "Pinv.mtx";
    case PreconditionerSpec::Form::cholesky: return "P.mtx";
    case PreconditionerSpec::Form::nystrom: return "F.mtx";
  }
  return nullptr;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<Row>& rows) {
  out << kCsvHeader << '\n';
  for (const Row& r : rows) {
    out << r.iteration << ',' << format_double(r.residual) << ',';
    if (r.berr) out << format_double(*r.berr);
    out << ',';
    if (r.forward_error) out << format_double(*r.forward_error);
    out << ',';
    if (r.event != Event::none) out << to_string(r.event);
    out << '\n';
  }
}

void write_csv(const fs::path& path, const std::vector<Row>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(out, rows);
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Row> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw EmptyFile("CSV has no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError("unexpected CSV header '" + line + "'", 1);
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 5) throw ParseError("expected 5 fields", lineno);
    Row r;
    try {
      std::size_t pos = 0;
      r.iteration = std::stoul(f[0], &pos);
      if (pos != f[0].size()) throw std::invalid_argument(f[0]);
    } catch (const std::exception&) {
      throw ParseError("bad iteration '" + f[0] + "'", lineno);
    }
    const auto residual = parse_optional(f[1], lineno);
    if (!residual) throw ParseError("missing residual", lineno);
    r.residual = *residual;
    r.berr = parse_optional(f[2], lineno);
    r.forward_error = parse_optional(f[3], lineno);
    try {
      r.event = event_from_string(f[4]);
    } catch (const InvalidSpec& e) {
      throw ParseError(e.what(), lineno);
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<Row> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingData("missing " + path.string());
  return read_csv(in);
}

std::string summary_json(const ExperimentOutput& out) {
  json cases = json::array();
  for (const CaseInfo& c : out.cases) {
    cases.push_back({{"name", c.name},
                     {"meta", meta_json(c.meta)},
                     {"norm_a", c.norm_a},
                     {"norm_b", c.norm_b}});
  }
  json runs = json::array();
  for (const Run& r : out.runs) {
    const RunSummary& s = r.summary;
    runs.push_back({{"case", s.case_name},
                    {"solver", s.solver},
                    {"csv", s.id() + ".csv"},
                    {"status", std::string(to_string(s.status))},
                    {"iterations", s.iterations},
                    {"refinements", s.refinements},
                    {"final_berr", optional_number(s.final_berr)},
                    {"final_forward_error", optional_number(s.final_forward_error)},
                    {"final_residual", s.final_residual},
                    {"counts",
                     {{"apply", s.counts.apply},
                      {"apply_adjoint", s.counts.apply_adjoint},
                      {"pre", s.counts.pre},
                      {"pre_adjoint", s.counts.pre_adjoint}}},
                    {"target_berr", optional_number(s.target_berr)},
                    {"met_target", s.met_target}});
  }
  const json doc = {{"experiment", std::string(to_string(out.config.experiment))},
                    {"config", to_toml(out.config)},
                    {"cases", std::move(cases)},
                    {"runs", std::move(runs)}};
  return doc.dump(2) + "\n";
}

void write_output(const fs::path& dir, const ExperimentOutput& out) {
  fs::create_directories(dir);
  for (const Run& r : out.runs) write_csv(dir / (r.summary.id() + ".csv"), r.rows);
  save_text(dir / "summary.json", summary_json(out));
}

ExperimentOutput read_output(const fs::path& dir) {
  const json doc = load_json(dir / "summary.json");
  ExperimentOutput out;
  try {
    out.config = parse_config(doc.at("config").get<std::string>());
    for (const json& c : doc.at("cases")) {
      out.cases.push_back({c.at("name").get<std::string>(), meta_from_json(c.at("meta")),
                           c.at("norm_a").get<double>(), c.at("norm_b").get<double>()});
    }
    for (const json& j : doc.at("runs")) {
      Run r;
      RunSummary& s = r.summary;
      s.case_name = j.at("case").get<std::string>();
      s.solver = j.at("solver").get<std::string>();
      s.status = status_from_string(j.at("status").get<std::string>());
      s.iterations = j.at("iterations").get<std::size_t>();
      s.refinements = j.at("refinements").get<std::size_t>();
      s.final_berr = number_or_null(j.at("final_berr"));
      s.final_forward_error = number_or_null(j.at("final_forward_error"));
      s.final_residual = j.at("final_residual").get<double>();
      const json& counts = j.at("counts");
      s.counts = {counts.at("apply").get<std::size_t>(), counts.at("apply_adjoint").get<std::size_t>(),
                  counts.at("pre").get<std::size_t>(), counts.at("pre_adjoint").get<std::size_t>()};
      s.target_berr = number_or_null(j.at("target_berr"));
      s.met_target = j.at("met_target").get<bool>();
      r.rows = read_csv(dir / j.at("csv").get<std::string>());
      out.runs.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ParseError("summary.json: " + std::string(e.what()), 0);
  }
  return out;
}

std::string summary_table(const ExperimentOutput& out) {
  std::ostringstream os;
  char line[512];
  std::snprintf(line, sizeof line, "%-28s %-11s %6s %5s %11s %11s  %-23s %s\n", "run", "status",
                "iters", "refs", "berr", "fwd_err", "matvecs A/At/P/Pt", "target");
  os << line;
  for (const Run& r : out.runs) {
    const RunSummary& s = r.summary;
    auto num = [](const std::optional<double>& v) {
      char buf[32];
      if (v) {
        std::snprintf(buf, sizeof buf, "%.3e", *v);
      } else {
        std::snprintf(buf, sizeof buf, "-");
      }
      return std::string(buf);
    };
    const std::string counts = std::to_string(s.counts.apply) + "/" +
                               std::to_string(s.counts.apply_adjoint) + "/" +
                               std::to_string(s.counts.pre) + "/" + std::to_string(s.counts.pre_adjoint);
    const std::string verdict = !s.target_berr ? "-" : s.met_target ? "met" : "missed";
    std::snprintf(line, sizeof line, "%-28s %-11s %6zu %5zu %11s %11s  %-23s %s\n", s.id().c_str(),
                  std::string(to_string(s.status)).c_str(), s.iterations, s.refinements,
                  num(s.final_berr).c_str(), num(s.final_forward_error).c_str(), counts.c_str(),
                  verdict.c_str());
    os << line;
  }
  return os.str();
}

void write_problem(const fs::path& dir, const NamedInstance& c, bool measure) {
  const ProblemInstance& p = c.instance;
  fs::create_directories(dir);
  write_matrix_market(dir / "A.mtx", *p.a);
  write_matrix_market(dir / "b.mtx", p.b);
  if (p.x_ref) write_matrix_market(dir / "x_ref.mtx", *p.x_ref);
  const char* pre_file = preconditioner_file(p.pre_spec.form);
  if (pre_file) write_matrix_market(dir / pre_file, p.pre_spec.matrix);

  json measured = json::object();
  if (measure) {
    measured["kappa_a"] = condition_number_oracle(*p.a);
    switch (p.pre_spec.form) {
      case PreconditionerSpec::Form::dense_inverse:
        measured["kappa_pre"] = condition_number_oracle(
            p.meta.side == Side::left ? matmul(p.pre_spec.matrix, *p.a)
                                      : matmul(*p.a, p.pre_spec.matrix));
        break;
      case PreconditionerSpec::Form::identity:
        measured["kappa_pre"] = measured["kappa_a"];
        break;
      default:
        measured["kappa_pre"] = nullptr;  // not formed densely
        break;
    }
  }
  const json doc = {
      {"case", c.name},
      {"meta", meta_json(p.meta)},
      {"norm_a", p.norm_a},
      {"preconditioner",
       {{"form", std::string(to_string(p.pre_spec.form))},
        {"file", pre_file ? json(pre_file) : json(nullptr)},
        {"lambda", p.pre_spec.lambda}}},
      {"files", {{"A", "A.mtx"}, {"b", "b.mtx"}, {"x_ref", p.x_ref ? json("x_ref.mtx") : json(nullptr)}}},
      {"measured", std::move(measured)},
  };
  save_text(dir / "meta.json", doc.dump(2) + "\n");
}

NamedInstance read_problem(const fs::path& dir) {
  const json doc = load_json(dir / "meta.json");
  try {
    PreconditionerSpec pre;
    const json& pj = doc.at("preconditioner");
    pre.form = preconditioner_form_from_string(pj.at("form").get<std::string>());
    pre.lambda = pj.at("lambda").get<double>();
    if (!pj.at("file").is_null()) {
      const fs::path f = dir / pj.at("file").get<std::string>();
      if (!fs::exists(f)) throw MissingData("missing " + f.string());
      pre.matrix = read_matrix_market(f);
    }
    const fs::path a_path = dir / "A.mtx";
    const fs::path b_path = dir / "b.mtx";
    if (!fs::exists(a_path)) throw MissingData("missing " + a_path.string());
    if (!fs::exists(b_path)) throw MissingData("missing " + b_path.string());
    DenseMatrix a = read_matrix_market(a_path);
    Vector b = read_matrix_market_vector(b_path);
    const bool has_ref = fs::exists(dir / "x_ref.mtx");
    ProblemInstance inst = make_instance(std::move(a), std::move(pre), std::move(b),
                                         doc.at("norm_a").get<double>(),
                                         meta_from_json(doc.at("meta")), !has_ref);
    if (has_ref) inst.x_ref = read_matrix_market_vector(dir / "x_ref.mtx");
    return {doc.at("case").get<std::string>(), std::move(inst)};
  } catch (const json::exception& e) {
    throw ParseError("meta.json: " + std::string(e.what()), 0);
  }
}

std::vector<fs::path> problem_dirs(const fs::path& dir, const std::vector<NamedInstance>& cases) {
  std::vector<fs::path> dirs;
  for (const NamedInstance& c : cases) dirs.push_back(c.name.empty() ? dir : dir / c.name);
  return dirs;
}

std::vector<NamedInstance> read_problems(const fs::path& dir) {
  if (fs::exists(dir / "meta.json")) {
    std::vector<NamedInstance> one;
    one.push_back(read_problem(dir));
    return one;
  }
  std::vector<fs::path> subdirs;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) subdirs.push_back(entry.path());
    }
  }
  if (subdirs.empty()) throw MissingData("no problem files under " + dir.string());
  std::sort(subdirs.begin(), subdirs.end());
  std::vector<NamedInstance> cases;
  for (const fs::path& d : subdirs) cases.push_back(read_problem(d));
  return cases;
}

}  // namespace stablepc::experiments
