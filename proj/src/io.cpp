#include "precshrink/io.hpp"

#include "precshrink/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace precshrink {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

bool parse_number(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

template <typename Int>
bool parse_integer(const std::string& text, Int& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class ConfigParser {
 public:
  explicit ConfigParser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(int line, const std::string& field, const std::string& msg) const {
    std::string text = source_ + ":" + std::to_string(line) + ": ";
    if (!field.empty()) text += field + ": ";
    throw Error(ErrorCode::parse_error, text + msg);
  }

  double number(int line, const std::string& key, const std::string& value) const {
    double v;
    if (!parse_number(value, v)) fail(line, key, "expected a number, got '" + value + "'");
    return v;
  }

  bool boolean(int line, const std::string& key, const std::string& value) const {
    if (value == "true" || value == "yes" || value == "1") return true;
    if (value == "false" || value == "no" || value == "0") return false;
    fail(line, key, "expected true or false, got '" + value + "'");
  }

  SpectralAtom atom(int line, const std::string& key, const std::string& value) const {
    const auto parts = split(value, ',');
    if (parts.size() != 2) fail(line, key, "expected 'weight, eigenvalue'");
    return {number(line, key, parts[0]), number(line, key, parts[1])};
  }

 private:
  std::string source_;
};

struct SpectrumBuilder {
  std::vector<SpectralAtom> atoms;
  std::string named;
  int line = 0;
};

SpectrumSpec finish_spectrum(const ConfigParser& parser, const SpectrumBuilder& b, const std::string& section) {
  if (!b.named.empty() && !b.atoms.empty()) parser.fail(b.line, section, "give either a name or atom lines, not both");
  try {
    if (!b.named.empty()) {
      auto spec = named_spectrum(b.named);
      if (!spec) parser.fail(b.line, section, "unknown spectrum name '" + b.named + "'");
      return *spec;
    }
    if (b.atoms.empty()) parser.fail(b.line, section, "spectrum has no atoms");
    return SpectrumSpec(b.atoms);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse_error) throw;
    parser.fail(b.line, section, e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  ConfigParser parser(source);
  ExperimentConfig cfg;
  cfg.estimators.clear();
  SpectrumBuilder spectrum;
  bool have_spectrum = false;
  struct TargetDraft {
    std::string name;
    std::string kind;
    SpectrumBuilder prior;
    int line;
  };
  std::vector<TargetDraft> targets;

  std::string section;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') parser.fail(line_no, "", "unterminated section header");
      const std::string header = trim(std::string_view(line).substr(1, line.size() - 2));
      if (header == "experiment" || header == "distribution" || header == "spectrum") {
        section = header;
        if (header == "spectrum") {
          have_spectrum = true;
          spectrum.line = line_no;
        }
      } else if (header.rfind("target", 0) == 0) {
        const std::string name = trim(std::string_view(header).substr(6));
        if (name.empty()) parser.fail(line_no, "", "target section needs a name: [target NAME]");
        targets.push_back({name, "", {}, line_no});
        targets.back().prior.line = line_no;
        section = "target";
      } else {
        parser.fail(line_no, "", "unknown section [" + header + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) parser.fail(line_no, "", "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) parser.fail(line_no, key, "key outside of any section");

    if (section == "experiment") {
      if (key == "name") {
        cfg.name = value;
      } else if (key == "c") {
        cfg.c = parser.number(line_no, key, value);
      } else if (key == "p_grid") {
        cfg.p_grid.clear();
        for (const auto& part : split(value, ',')) {
          int p;
          if (!parse_integer(part, p) || p < 1) parser.fail(line_no, key, "expected positive integers, got '" + part + "'");
          cfg.p_grid.push_back(p);
        }
      } else if (key == "replications") {
        if (!parse_integer(value, cfg.replications) || cfg.replications < 1)
          parser.fail(line_no, key, "expected a positive integer");
      } else if (key == "seed") {
        std::uint64_t seed;
        if (!parse_integer(value, seed)) parser.fail(line_no, key, "expected an unsigned 64-bit integer");
        cfg.seed = seed;
      } else if (key == "estimators") {
        cfg.estimators.clear();
        for (const auto& id : split(value, ',')) {
          if (!is_known_estimator(id)) parser.fail(line_no, key, "unknown estimator '" + id + "'");
          cfg.estimators.push_back(id);
        }
      } else if (key == "clamp") {
        cfg.clamp = parser.boolean(line_no, key, value);
      } else if (key == "center") {
        cfg.center = parser.boolean(line_no, key, value);
      } else {
        parser.fail(line_no, key, "unknown key in [experiment]");
      }
    } else if (section == "distribution") {
      if (key == "kind") {
        if (value == "gaussian")
          cfg.distribution.kind = DistributionKind::gaussian;
        else if (value == "student_t")
          cfg.distribution.kind = DistributionKind::student_t;
        else
          parser.fail(line_no, key, "expected gaussian or student_t");
      } else if (key == "df") {
        cfg.distribution.degrees_of_freedom = parser.number(line_no, key, value);
      } else if (key == "allow_heavy_tails") {
        cfg.distribution.allow_heavy_tails = parser.boolean(line_no, key, value);
      } else {
        parser.fail(line_no, key, "unknown key in [distribution]");
      }
    } else if (section == "spectrum") {
      if (key == "atom")
        spectrum.atoms.push_back(parser.atom(line_no, key, value));
      else if (key == "name")
        spectrum.named = value;
      else
        parser.fail(line_no, key, "unknown key in [spectrum]");
    } else {
      auto& t = targets.back();
      if (key == "kind")
        t.kind = value;
      else if (key == "atom")
        t.prior.atoms.push_back(parser.atom(line_no, key, value));
      else if (key == "name")
        t.prior.named = value;
      else
        parser.fail(line_no, key, "unknown key in [target " + t.name + "]");
    }
  }

  if (!have_spectrum) parser.fail(line_no, "spectrum", "missing [spectrum] section");
  cfg.spectrum = finish_spectrum(parser, spectrum, "spectrum");
  for (const auto& t : targets) {
    if (t.kind == "identity_over_p" || t.kind.empty()) {
      if (!t.prior.atoms.empty() || !t.prior.named.empty()) {
        if (t.kind.empty()) {
          cfg.targets.push_back(TargetSpec::from_prior(t.name, finish_spectrum(parser, t.prior, "target " + t.name)));
          continue;
        }
        parser.fail(t.line, "target " + t.name, "identity_over_p takes no spectrum");
      }
      cfg.targets.push_back({t.name, TargetKind::identity_over_p, std::nullopt});
    } else if (t.kind == "true_precision") {
      cfg.targets.push_back({t.name, TargetKind::true_precision, std::nullopt});
    } else if (t.kind == "prior") {
      cfg.targets.push_back(TargetSpec::from_prior(t.name, finish_spectrum(parser, t.prior, "target " + t.name)));
    } else {
      parser.fail(t.line, "target " + t.name, "unknown kind '" + t.kind + "'");
    }
  }
  try {
    if (cfg.name.empty()) cfg.name = "custom";
    cfg.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse_error) throw;
    // Seeds may legitimately come from the command line.
    if (!cfg.seed && std::string(e.what()) == "a seed is required") return cfg;
    parser.fail(line_no, "", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path), path); }

SpectrumSpec parse_spectrum_text(const std::string& text) {
  if (auto named = named_spectrum(trim(text))) return *named;
  std::vector<SpectralAtom> atoms;
  for (const auto& part : split(text, ',')) {
    const auto fields = split(part, ':');
    double w, e;
    if (fields.size() != 2 || !parse_number(fields[0], w) || !parse_number(fields[1], e))
      throw Error(ErrorCode::parse_error, "spectrum atom '" + part + "' is not 'weight:eigenvalue'");
    atoms.push_back({w, e});
  }
  return SpectrumSpec(std::move(atoms));
}

SpectrumSpec load_spectrum_json(const std::string& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("atoms")) doc = doc["atoms"];
  if (!doc.is_array()) throw Error(ErrorCode::parse_error, path + ": expected an array of {weight, eigenvalue}");
  std::vector<SpectralAtom> atoms;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& a = doc[i];
    if (!a.is_object() || !a.contains("weight") || !a.contains("eigenvalue") || !a["weight"].is_number() ||
        !a["eigenvalue"].is_number())
      throw Error(ErrorCode::parse_error,
                  path + ": atom " + std::to_string(i) + " needs numeric 'weight' and 'eigenvalue'");
    atoms.push_back({a["weight"].get<double>(), a["eigenvalue"].get<double>()});
  }
  return SpectrumSpec(std::move(atoms));
}

Eigen::MatrixXd read_matrix_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    const auto cells = split(line, ',');
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v;
      if (!parse_number(cells[j], v) || !std::isfinite(v))
        throw Error(ErrorCode::parse_error, source + ":" + std::to_string(line_no) + ": column " +
                                                std::to_string(j + 1) + ": non-numeric cell '" + cells[j] + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::parse_error, source + ":" + std::to_string(line_no) + ": ragged row with " +
                                              std::to_string(row.size()) + " cells, expected " +
                                              std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::parse_error, source + ": empty matrix");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, path + ": cannot open file");
  return read_matrix_csv(in, path);
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::string format_double(double value) {
  if (std::isnan(value)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

const char* const kResultHeader =
    "experiment,p,n,c,distribution,estimator_id,target,mean_loss,prial_percent,mean_alpha,mean_beta,"
    "replications,seed,status,reason";

std::vector<ResultRow> result_rows(const ExperimentConfig& config, const std::vector<DimensionRun>& runs) {
  std::vector<ResultRow> rows;
  for (const auto& run : runs) {
    const auto& r = run.report;
    for (const auto& e : r.estimators) {
      ResultRow row;
      row.experiment = config.name;
      row.p = r.p;
      row.n = r.n;
      row.c = r.c;
      row.distribution = config.distribution.label();
      row.estimator_id = e.estimator_id;
      row.target = e.target;
      row.mean_loss = e.mean_loss;
      row.prial_percent = e.prial_percent;
      row.mean_alpha = e.mean_alpha;
      row.mean_beta = e.mean_beta;
      row.replications = e.replications;
      row.seed = config.seed.value_or(0);
      row.status = e.status == RowStatus::ok ? "ok" : "skipped";
      row.reason = e.reason;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch != '\r') {
      fields.back() += ch;
    }
  }
  return fields;
}

double field_double(const std::string& s, int line) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v;
  if (!parse_number(s, v)) throw Error(ErrorCode::parse_error, "results:" + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

template <typename Int>
Int field_int(const std::string& s, int line) {
  Int v;
  if (!parse_integer(s, v)) throw Error(ErrorCode::parse_error, "results:" + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultHeader << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.experiment) << ',' << r.p << ',' << r.n << ',' << format_double(r.c) << ','
        << csv_field(r.distribution) << ',' << csv_field(r.estimator_id) << ',' << csv_field(r.target) << ','
        << format_double(r.mean_loss) << ',' << format_double(r.prial_percent) << ','
        << format_double(r.mean_alpha) << ',' << format_double(r.mean_beta) << ',' << r.replications << ','
        << r.seed << ',' << r.status << ',' << csv_field(r.reason) << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kResultHeader)
    throw Error(ErrorCode::parse_error, "results:1: unexpected header");
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = csv_split(line);
    if (f.size() != 15)
      throw Error(ErrorCode::parse_error, "results:" + std::to_string(line_no) + ": expected 15 fields");
    ResultRow r;
    r.experiment = f[0];
    r.p = field_int<int>(f[1], line_no);
    r.n = field_int<int>(f[2], line_no);
    r.c = field_double(f[3], line_no);
    r.distribution = f[4];
    r.estimator_id = f[5];
    r.target = f[6];
    r.mean_loss = field_double(f[7], line_no);
    r.prial_percent = field_double(f[8], line_no);
    r.mean_alpha = field_double(f[9], line_no);
    r.mean_beta = field_double(f[10], line_no);
    r.replications = field_int<int>(f[11], line_no);
    r.seed = field_int<std::uint64_t>(f[12], line_no);
    r.status = f[13];
    r.reason = f[14];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace precshrink
