#include "wdmix/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wdmix {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Non-empty lines of a CSV text; the first is the header.
std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    const std::string_view line = trim(rest.substr(0, nl));
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw Error(ErrorCode::EmptyInput, "CSV has no header row");
  return lines;
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

int parse_int(std::string_view s, std::size_t line) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": '" + std::string(s) + "' is not an integer");
  }
  return v;
}

bool parse_flag(std::string_view s, std::size_t line) {
  if (s == "1" || s == "true" || s == "TRUE" || s == "True") return true;
  if (s == "0" || s == "false" || s == "FALSE" || s == "False") return false;
  throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": '" + std::string(s) + "' is not a boolean");
}

std::vector<std::string_view> checked_row(std::string_view line, std::size_t width, std::size_t number) {
  auto cells = split(line);
  if (cells.size() != width) {
    throw Error(ErrorCode::NonRectangular, "line " + std::to_string(number) + " has " + std::to_string(cells.size()) +
                                               " fields, expected " + std::to_string(width));
  }
  return cells;
}

const char* shape_name(CovarianceShape s) { return s == CovarianceShape::Full ? "full" : "diagonal"; }

const char* cause_name(AnnihilationCause c) { return c == AnnihilationCause::Starved ? "starved" : "forced"; }

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

Dataset parse_dataset_csv(const std::string& text) {
  const auto lines = lines_of(text);
  const auto header = split(lines[0]);
  int label_col = -1, outlier_col = -1;
  std::vector<std::size_t> coord_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "label") {
      label_col = static_cast<int>(c);
    } else if (header[c] == "outlier") {
      outlier_col = static_cast<int>(c);
    } else {
      coord_cols.push_back(c);
    }
  }
  if (coord_cols.empty()) throw Error(ErrorCode::Parse, "CSV has no coordinate columns");
  const std::size_t n = lines.size() - 1;
  if (n == 0) throw Error(ErrorCode::EmptyInput, "CSV has no data rows");

  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(coord_cols.size()));
  std::vector<int> labels;
  std::vector<bool> flags;
  for (std::size_t r = 0; r < n; ++r) {
    const auto cells = checked_row(lines[r + 1], header.size(), r + 2);
    for (std::size_t j = 0; j < coord_cols.size(); ++j) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = parse_double(cells[coord_cols[j]], r + 2);
    }
    if (label_col >= 0) labels.push_back(parse_int(cells[static_cast<std::size_t>(label_col)], r + 2));
    if (outlier_col >= 0) flags.push_back(parse_flag(cells[static_cast<std::size_t>(outlier_col)], r + 2));
  }
  std::optional<std::vector<int>> opt_labels;
  std::optional<std::vector<bool>> opt_flags;
  if (label_col >= 0) opt_labels = std::move(labels);
  if (outlier_col >= 0) opt_flags = std::move(flags);
  return Dataset(std::move(x), std::move(opt_labels), std::nullopt, std::move(opt_flags));
}

Dataset read_dataset_csv(const std::filesystem::path& path) { return parse_dataset_csv(read_text(path)); }

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  for (int j = 0; j < data.dim(); ++j) out += (j ? ",x" : "x") + std::to_string(j + 1);
  if (data.labels()) out += ",label";
  if (data.outlier_flags()) out += ",outlier";
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.dim(); ++j) {
      if (j) out += ',';
      out += format_double(data.points()(static_cast<Eigen::Index>(i), j));
    }
    if (data.labels()) out += ',' + std::to_string((*data.labels())[i]);
    if (data.outlier_flags()) out += (*data.outlier_flags())[i] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

Dataset parse_segment_csv(const std::string& text) {
  const auto lines = lines_of(text);
  const auto header = split(lines[0]);
  int cx = -1, cy = -1, cm = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "x") cx = static_cast<int>(c);
    if (header[c] == "y") cy = static_cast<int>(c);
    if (header[c] == "modality") cm = static_cast<int>(c);
  }
  if (cx < 0 || cy < 0 || cm < 0) throw Error(ErrorCode::Parse, "segment CSV needs columns x, y, modality");
  const std::size_t n = lines.size() - 1;
  if (n == 0) throw Error(ErrorCode::EmptyInput, "segment has no observations");
  Matrix x(static_cast<Eigen::Index>(n), 2);
  std::vector<Modality> mod;
  for (std::size_t r = 0; r < n; ++r) {
    const auto cells = checked_row(lines[r + 1], header.size(), r + 2);
    x(static_cast<Eigen::Index>(r), 0) = parse_double(cells[static_cast<std::size_t>(cx)], r + 2);
    x(static_cast<Eigen::Index>(r), 1) = parse_double(cells[static_cast<std::size_t>(cy)], r + 2);
    const auto m = cells[static_cast<std::size_t>(cm)];
    if (m == "a") {
      mod.push_back(Modality::Audio);
    } else if (m == "v") {
      mod.push_back(Modality::Visual);
    } else {
      throw Error(ErrorCode::Parse, "line " + std::to_string(r + 2) + ": modality must be 'a' or 'v'");
    }
  }
  return Dataset(std::move(x), std::nullopt, std::move(mod));
}

std::vector<GroundTruth> parse_ground_truth_csv(const std::string& text) {
  const auto lines = lines_of(text);
  const auto header = split(lines[0]);
  int cid = -1, cx = -1, cy = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "segment_id") cid = static_cast<int>(c);
    if (header[c] == "x_g") cx = static_cast<int>(c);
    if (header[c] == "y_g") cy = static_cast<int>(c);
  }
  if (cid < 0 || cx < 0 || cy < 0) throw Error(ErrorCode::Parse, "ground truth CSV needs segment_id, x_g, y_g");
  std::vector<GroundTruth> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = checked_row(lines[r], header.size(), r + 1);
    out.push_back({std::string(cells[static_cast<std::size_t>(cid)]),
                   parse_double(cells[static_cast<std::size_t>(cx)], r + 1),
                   parse_double(cells[static_cast<std::size_t>(cy)], r + 1)});
  }
  return out;
}

nlohmann::ordered_json model_to_json(const MixtureModel& model, const AssignmentRule& rule) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["covariance_shape"] = shape_name(model.shape());
  doc["dimension"] = model.dim();
  doc["assignment_rule"] = {{"algorithm", rule.algorithm},
                            {"q", rule.q},
                            {"sigma", rule.sigma},
                            {"ez_variant", rule.ez_variant == EzVariant::Prior ? "prior" : "posterior"}};
  auto comps = nlohmann::ordered_json::array();
  for (int k = 0; k < model.num_components(); ++k) {
    const auto& c = model.component(k);
    std::vector<double> cov;
    for (int r = 0; r < c.dim(); ++r) {
      for (int s = 0; s < c.dim(); ++s) cov.push_back(c.covariance()(r, s));
    }
    comps.push_back({{"weight", model.proportions()(k)},
                     {"mean", std::vector<double>(c.mean().data(), c.mean().data() + c.dim())},
                     {"covariance", cov}});
  }
  doc["components"] = comps;
  return doc;
}

StoredModel model_from_json(const nlohmann::json& doc) {
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw Error(ErrorCode::Parse, "unsupported model schema_version " + std::to_string(version));
    }
    const std::string shape_text = doc.at("covariance_shape").get<std::string>();
    CovarianceShape shape;
    if (shape_text == "full") {
      shape = CovarianceShape::Full;
    } else if (shape_text == "diagonal") {
      shape = CovarianceShape::Diagonal;
    } else {
      throw Error(ErrorCode::Parse, "unknown covariance_shape '" + shape_text + "'");
    }
    const int d = doc.at("dimension").get<int>();
    std::vector<GaussianComponent> comps;
    std::vector<double> weights;
    for (const auto& c : doc.at("components")) {
      const auto mean = c.at("mean").get<std::vector<double>>();
      const auto cov = c.at("covariance").get<std::vector<double>>();
      if (static_cast<int>(mean.size()) != d || static_cast<int>(cov.size()) != d * d) {
        throw Error(ErrorCode::Parse, "component size does not match dimension");
      }
      Matrix sigma(d, d);
      for (int r = 0; r < d; ++r) {
        for (int s = 0; s < d; ++s) sigma(r, s) = cov[static_cast<std::size_t>(r * d + s)];
      }
      comps.emplace_back(Eigen::Map<const Vector>(mean.data(), d), std::move(sigma), shape);
      weights.push_back(c.at("weight").get<double>());
    }
    if (comps.empty()) throw Error(ErrorCode::Parse, "model has no components");
    StoredModel out{MixtureModel(std::move(comps), Eigen::Map<const Vector>(weights.data(),
                                                                            static_cast<Eigen::Index>(weights.size()))),
                    {}};
    if (doc.contains("assignment_rule")) {
      const auto& r = doc.at("assignment_rule");
      out.rule.algorithm = r.at("algorithm").get<std::string>();
      out.rule.q = r.at("q").get<int>();
      out.rule.sigma = r.at("sigma").get<double>();
      out.rule.ez_variant = r.value("ez_variant", "prior") == "posterior" ? EzVariant::Posterior : EzVariant::Prior;
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("model JSON: ") + e.what());
  }
}

nlohmann::ordered_json report_to_json(const FitReport& report) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["iterations"] = report.iterations;
  doc["converged"] = report.converged;
  doc["objective_trace"] = report.objective_trace;
  auto events = nlohmann::ordered_json::array();
  for (const auto& e : report.annihilation_log) {
    events.push_back({{"iteration", e.iteration},
                      {"component", e.component},
                      {"proportion", e.proportion},
                      {"cause", cause_name(e.cause)}});
  }
  doc["annihilation_log"] = events;
  doc["k_plus_history"] = report.k_plus_history;
  return doc;
}

std::string assignments_to_csv(const std::vector<int>& clusters, const Vector* weights) {
  if (weights && static_cast<std::size_t>(weights->size()) != clusters.size()) {
    throw Error(ErrorCode::LengthMismatch, "one weight per assignment required");
  }
  std::string out = weights ? "index,cluster,weight\n" : "index,cluster\n";
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    out += std::to_string(i) + ',' + std::to_string(clusters[i]);
    if (weights) out += ',' + format_double((*weights)(static_cast<Eigen::Index>(i)));
    out += '\n';
  }
  return out;
}

std::vector<int> parse_assignments_csv(const std::string& text) {
  const auto lines = lines_of(text);
  const auto header = split(lines[0]);
  int col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "cluster") col = static_cast<int>(c);
  }
  if (col < 0) throw Error(ErrorCode::Parse, "assignments CSV needs a cluster column");
  std::vector<int> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = checked_row(lines[r], header.size(), r + 1);
    out.push_back(parse_int(cells[static_cast<std::size_t>(col)], r + 1));
  }
  return out;
}

std::string dump_json(const nlohmann::ordered_json& doc) { return doc.dump(2) + "\n"; }

}  // namespace wdmix
