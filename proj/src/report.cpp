#include "mvlrt/report.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>

namespace mvlrt {

namespace {

using nlohmann::json;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view field, double& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

json ratios_json(const DimensionRatios<double>& r) {
  return {{"n1", r.n1},       {"n2", r.n2},          {"p", r.p},
          {"n", r.n},         {"y1", r.y1},          {"y2", r.y2},
          {"r_n", r.r_n},     {"h", r.h},            {"c1", r.c1},
          {"c2", r.c2},       {"y1_gt_1", r.y1_gt_1}, {"y2_gt_1", r.y2_gt_1},
          {"near_unity", r.near_unity}};
}

DimensionRatios<double> ratios_from_json(const json& j) {
  DimensionRatios<double> r;
  r.n1 = j.at("n1").get<Index>();
  r.n2 = j.at("n2").get<Index>();
  r.p = j.at("p").get<Index>();
  r.n = j.at("n").get<Index>();
  r.y1 = j.at("y1").get<double>();
  r.y2 = j.at("y2").get<double>();
  r.r_n = j.at("r_n").get<double>();
  r.h = j.at("h").get<double>();
  r.c1 = j.at("c1").get<double>();
  r.c2 = j.at("c2").get<double>();
  r.y1_gt_1 = j.at("y1_gt_1").get<bool>();
  r.y2_gt_1 = j.at("y2_gt_1").get<bool>();
  r.near_unity = j.at("near_unity").get<bool>();
  return r;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Input, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

SampleSet<double> parse_sample_csv(const std::string& text, const std::string& label) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size() && numeric; ++i) {
      numeric = parse_number(fields[i], values[i]);
    }
    if (first) {
      first = false;
      width = fields.size();
      if (!numeric) continue;  // header
    }
    if (fields.size() != width) {
      std::ostringstream os;
      os << label << ": line " << line_no << " has " << fields.size() << " fields, expected "
         << width;
      throw Error(ErrorKind::Input, os.str());
    }
    if (!numeric) {
      std::ostringstream os;
      os << label << ": line " << line_no << " contains a non-numeric field";
      throw Error(ErrorKind::Input, os.str());
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorKind::Input, label + ": no observations");

  SampleSet<double> s{Matrix<double>(static_cast<Index>(rows.size()), static_cast<Index>(width)),
                      label};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      s.observations(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return s;
}

SampleSet<double> read_sample_csv(const std::filesystem::path& path, const std::string& label) {
  return parse_sample_csv(read_file(path), label);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Internal, "sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string format_double(double value) {
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    double back = 0.0;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (back == value) break;
  }
  return buf;
}

json to_json(const TestReport<double>& r) {
  json j = {{"test", to_string(r.test)},
            {"statistic", r.statistic},
            {"z_score", r.z_score},
            {"p_value", r.p_value},
            {"reject", r.reject},
            {"alpha", r.alpha},
            {"warnings", r.warnings}};
  if (r.ml) {
    const auto& d = *r.ml;
    j["ml"] = {{"zh", d.zh},
               {"t_n", d.t_n},
               {"t_limit", d.t_limit},
               {"ratios", ratios_json(d.ratios)},
               {"centering",
                {{"l_n", d.centering.l_n},
                 {"mu_n", d.centering.mu_n},
                 {"nu_n2", d.centering.nu_n2},
                 {"nu_n", d.centering.nu_n}}},
               {"betas_used",
                {{"beta1", d.betas_used.beta1},
                 {"beta2", d.betas_used.beta2},
                 {"source", to_string(d.betas_used.source)}}},
               {"zero_count", d.zero_count},
               {"one_count", d.one_count},
               {"interior_count", d.interior_count},
               {"clamp_tolerance", d.clamp_tolerance}};
  }
  if (r.hn) {
    const auto& g = *r.hn;
    j["hn"] = {{"delta2_hat", g.delta2_hat},         {"frob2_hat", g.frob2_hat},
               {"sigma10_2", g.sigma10_2},           {"sigma20_2", g.sigma20_2},
               {"frobenius_hat1", g.frobenius_hat1}, {"frobenius_hat2", g.frobenius_hat2},
               {"k1", g.k1},                         {"k2", g.k2},
               {"tr_s1s2", g.tr_s1s2}};
  }
  return j;
}

TestReport<double> report_from_json(const json& j) {
  TestReport<double> r;
  r.test = j.at("test").get<std::string>() == "ml" ? TestKind::ML : TestKind::HN;
  r.statistic = j.at("statistic").get<double>();
  r.z_score = j.at("z_score").get<double>();
  r.p_value = j.at("p_value").get<double>();
  r.reject = j.at("reject").get<bool>();
  r.alpha = j.at("alpha").get<double>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (j.contains("ml")) {
    const auto& m = j.at("ml");
    MlDetails<double> d;
    d.zh = m.at("zh").get<double>();
    d.t_n = m.at("t_n").get<double>();
    d.t_limit = m.at("t_limit").get<double>();
    d.ratios = ratios_from_json(m.at("ratios"));
    const auto& c = m.at("centering");
    d.centering = {c.at("l_n").get<double>(), c.at("mu_n").get<double>(),
                   c.at("nu_n2").get<double>(), c.at("nu_n").get<double>()};
    const auto& b = m.at("betas_used");
    d.betas_used = {b.at("beta1").get<double>(), b.at("beta2").get<double>(),
                    b.at("source").get<std::string>() == "known" ? MomentSource::Known
                                                                 : MomentSource::Estimated};
    d.zero_count = m.at("zero_count").get<Index>();
    d.one_count = m.at("one_count").get<Index>();
    d.interior_count = m.at("interior_count").get<Index>();
    d.clamp_tolerance = m.at("clamp_tolerance").get<double>();
    r.ml = d;
  }
  if (j.contains("hn")) {
    const auto& h = j.at("hn");
    HnIngredients<double> g;
    g.delta2_hat = h.at("delta2_hat").get<double>();
    g.frob2_hat = h.at("frob2_hat").get<double>();
    g.sigma10_2 = h.at("sigma10_2").get<double>();
    g.sigma20_2 = h.at("sigma20_2").get<double>();
    g.frobenius_hat1 = h.at("frobenius_hat1").get<double>();
    g.frobenius_hat2 = h.at("frobenius_hat2").get<double>();
    g.k1 = h.at("k1").get<double>();
    g.k2 = h.at("k2").get<double>();
    g.tr_s1s2 = h.at("tr_s1s2").get<double>();
    r.hn = g;
  }
  return r;
}

json test_document(const std::vector<TestReport<double>>& reports,
                   const std::vector<InputDigest>& inputs) {
  json doc = {{"tool", kToolName}, {"version", kToolVersion}};
  doc["inputs"] = json::array();
  for (const auto& in : inputs) {
    doc["inputs"].push_back({{"label", in.label},
                             {"path", in.path},
                             {"sha256", in.sha256},
                             {"rows", in.rows},
                             {"columns", in.columns}});
  }
  doc["reports"] = json::array();
  for (const auto& r : reports) doc["reports"].push_back(to_json(r));
  return doc;
}

void write_summary(std::ostream& os, const TestReport<double>& r) {
  auto line = [&os](const char* key, const std::string& value) {
    os << "  " << std::left << std::setw(18) << key << value << '\n';
  };
  os << (r.test == TestKind::ML ? "Modified LRT (ML)" : "L2-norm comparator (HN)") << '\n';
  line("statistic", format_double(r.statistic));
  line("z score", format_double(r.z_score));
  line("p value", format_double(r.p_value));
  line("alpha", format_double(r.alpha));
  line("decision", r.reject ? "reject H0" : "do not reject H0");
  if (r.ml) {
    const auto& d = *r.ml;
    line("ZH", format_double(d.zh));
    line("T_n", format_double(d.t_n) + " (limit " + format_double(d.t_limit) + ")");
    line("(n1, n2, p)", "(" + std::to_string(d.ratios.n1) + ", " + std::to_string(d.ratios.n2) +
                            ", " + std::to_string(d.ratios.p) + ")");
    line("y1, y2, r_n", format_double(d.ratios.y1) + ", " + format_double(d.ratios.y2) + ", " +
                            format_double(d.ratios.r_n));
    line("l_n, mu_n, nu_n", format_double(d.centering.l_n) + ", " +
                                format_double(d.centering.mu_n) + ", " +
                                format_double(d.centering.nu_n));
    line("beta1, beta2", format_double(d.betas_used.beta1) + ", " +
                             format_double(d.betas_used.beta2) + " (" +
                             to_string(d.betas_used.source) + ")");
    line("eigenvalues", std::to_string(d.interior_count) + " interior, " +
                            std::to_string(d.zero_count) + " at 0, " +
                            std::to_string(d.one_count) + " at 1");
  }
  if (r.hn) {
    const auto& g = *r.hn;
    line("|d|^2 estimate", format_double(g.delta2_hat));
    line("|D|_F^2 estimate", format_double(g.frob2_hat));
    line("sigma10^2", format_double(g.sigma10_2));
    line("sigma20^2", format_double(g.sigma20_2));
  }
}

void write_table_header(std::ostream& os) { os << kTableHeader << '\n'; }

void write_table_row(std::ostream& os, Index n1, Index n2, Index p, const std::string& a,
                     TestKind test, Index reps, std::uint64_t seed, double rate) {
  os << n1 << ',' << n2 << ',' << p << ',' << a << ',' << to_string(test) << ',' << reps << ','
     << seed << ',' << format_double(rate) << '\n';
}

namespace {

std::string a_field(sim::ModelKind kind, double a) {
  return kind == sim::ModelKind::I ? format_double(a) : "NA";
}

}  // namespace

void write_scenario_rows(std::ostream& os, const sim::SimulationModel& model,
                         const sim::ScenarioResult& result) {
  const auto a = a_field(model.kind, model.a);
  if (result.rate_ml) {
    write_table_row(os, model.n1, model.n2, model.p, a, TestKind::ML, result.replications,
                    result.seed, *result.rate_ml);
  }
  if (result.rate_hn) {
    write_table_row(os, model.n1, model.n2, model.p, a, TestKind::HN, result.replications,
                    result.seed, *result.rate_hn);
  }
}

void write_table_csv(std::ostream& os, const std::vector<sim::TableRow>& rows) {
  write_table_header(os);
  for (const auto& row : rows) {
    sim::SimulationModel model{row.cell.model, row.cell.a, row.cell.n1, row.cell.n2, row.cell.p,
                               sim::Distribution::Gamma};
    write_scenario_rows(os, model, row.result);
  }
}

json scenario_json(const sim::SimulationModel& model, const sim::ScenarioResult& result,
                   double alpha) {
  json j = {{"tool", kToolName},
            {"version", kToolVersion},
            {"model", sim::to_string(model.kind)},
            {"distribution", sim::to_string(model.distribution)},
            {"n1", model.n1},
            {"n2", model.n2},
            {"p", model.p},
            {"reps", result.replications},
            {"seed", result.seed},
            {"alpha", alpha}};
  j["a"] = model.kind == sim::ModelKind::I ? json(model.a) : json(nullptr);
  j["rates"] = json::object();
  j["rejections"] = json::object();
  if (result.rate_ml) {
    j["rates"]["ml"] = *result.rate_ml;
    j["rejections"]["ml"] = result.rejections_ml;
  }
  if (result.rate_hn) {
    j["rates"]["hn"] = *result.rate_hn;
    j["rejections"]["hn"] = result.rejections_hn;
  }
  return j;
}

json table_sidecar_json(sim::Table table, Index reps, std::uint64_t seed,
                        const std::vector<sim::TableRow>& rows) {
  const int number = table == sim::Table::T1 ? 1 : table == sim::Table::T2 ? 2 : 3;
  json j = {{"tool", kToolName}, {"version", kToolVersion}, {"table", number},
            {"reps", reps},      {"seed", seed}};
  j["cells"] = json::array();
  for (const auto& row : rows) {
    json cell = {{"model", sim::to_string(row.cell.model)},
                 {"regime", row.cell.regime},
                 {"n1", row.cell.n1},
                 {"n2", row.cell.n2},
                 {"p", row.cell.p},
                 {"seed", row.seed},
                 {"runtime_ms", row.result.runtime_ms},
                 {"rate_ml", *row.result.rate_ml},
                 {"rate_hn", *row.result.rate_hn}};
    cell["a"] = row.cell.model == sim::ModelKind::I ? json(row.cell.a) : json(nullptr);
    j["cells"].push_back(std::move(cell));
  }
  return j;
}

json null_summary_json(Index n1, Index n2, Index p, Index reps, std::uint64_t seed,
                       const sim::NullDistribution& dist) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"n1", n1},
          {"n2", n2},
          {"p", p},
          {"reps", reps},
          {"seed", seed},
          {"mean", dist.mean},
          {"variance", dist.variance},
          {"sup_distance", dist.sup_distance}};
}

}  // namespace mvlrt
