#include "yoto/export.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "yoto/text_io.hpp"

namespace yoto {

namespace {

using nlohmann::json;

std::runtime_error io_error(const std::filesystem::path& path, const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

// JSON has no inf/nan; diverged runs may carry them.
json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double read_number(const json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

json numbers(const std::vector<double>& xs) {
  json arr = json::array();
  for (double x : xs) arr.push_back(number(x));
  return arr;
}

std::vector<double> read_numbers(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(read_number(x));
  return out;
}

TrajectoryRecord record_from_json(const json& j) {
  TrajectoryRecord r;
  r.t = j.at("t").get<std::int64_t>();
  r.mu = read_numbers(j.at("mu"));
  r.lambda = read_numbers(j.at("lambda"));
  r.losses = read_numbers(j.at("l"));
  r.composite = read_number(j.at("L_e"));
  r.regularizer = read_number(j.at("L_r"));
  r.val_basic_loss = read_number(j.at("val_basic_loss"));
  return r;
}

TrajectoryFile import_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path, "cannot open for reading");
  std::string line;
  if (!std::getline(in, line)) throw io_error(path, "missing header");
  const auto header = split_csv(line);
  if (header.size() < 7 || (header.size() - 4) % 3 != 0) throw io_error(path, "malformed header");
  const std::size_t n = (header.size() - 4) / 3;
  if (header != trajectory_columns(n)) throw io_error(path, "unexpected trajectory columns");

  TrajectoryFile out;
  out.loss_count = n;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw io_error(path, "line " + std::to_string(line_no) + ": wrong number of fields");
    }
    TrajectoryRecord r;
    r.t = std::stoll(f[0]);
    for (std::size_t i = 0; i < n; ++i) {
      r.mu.push_back(parse_double(f[1 + i]));
      r.lambda.push_back(parse_double(f[1 + n + i]));
      r.losses.push_back(parse_double(f[1 + 2 * n + i]));
    }
    r.composite = parse_double(f[1 + 3 * n]);
    r.regularizer = parse_double(f[2 + 3 * n]);
    r.val_basic_loss = parse_double(f[3 + 3 * n]);
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace

ExportFormat parse_export_format(const std::string& text) {
  if (text == "csv") return ExportFormat::kCsv;
  if (text == "json") return ExportFormat::kJson;
  throw std::invalid_argument("export format must be csv or json");
}

std::vector<std::string> trajectory_columns(std::size_t loss_count) {
  std::vector<std::string> cols{"t"};
  for (const char* prefix : {"mu_", "lambda_", "l_"}) {
    for (std::size_t i = 0; i < loss_count; ++i) cols.push_back(prefix + std::to_string(i));
  }
  cols.insert(cols.end(), {"L_e", "L_r", "val_basic_loss"});
  return cols;
}

void export_trajectory(const std::vector<TrajectoryRecord>& trajectory, std::size_t loss_count,
                       ExportFormat format, const std::filesystem::path& path) {
  for (const auto& r : trajectory) {
    if (r.mu.size() != loss_count || r.lambda.size() != loss_count ||
        r.losses.size() != loss_count) {
      throw std::invalid_argument("trajectory record width does not match loss count");
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw io_error(path, "cannot open for writing");

  if (format == ExportFormat::kJson) {
    json doc;
    doc["columns"] = trajectory_columns(loss_count);
    doc["records"] = json::array();
    for (const auto& r : trajectory) doc["records"].push_back(to_json(r));
    out << doc.dump(1) << '\n';
  } else {
    out << join(trajectory_columns(loss_count), ",") << '\n';
    for (const auto& r : trajectory) {
      std::vector<double> row;
      row.insert(row.end(), r.mu.begin(), r.mu.end());
      row.insert(row.end(), r.lambda.begin(), r.lambda.end());
      row.insert(row.end(), r.losses.begin(), r.losses.end());
      row.insert(row.end(), {r.composite, r.regularizer, r.val_basic_loss});
      out << r.t << ',' << join_numbers(row) << '\n';
    }
  }
  if (!out) throw io_error(path, "write failed");
}

TrajectoryFile import_trajectory_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path, "cannot open for reading");
  const int first = in.peek();
  in.close();
  if (first != '{') return import_csv(path);

  std::ifstream json_in(path);
  json doc;
  try {
    json_in >> doc;
  } catch (const json::exception& e) {
    throw io_error(path, e.what());
  }
  TrajectoryFile out;
  const auto columns = doc.at("columns").get<std::vector<std::string>>();
  if (columns.size() < 7 || (columns.size() - 4) % 3 != 0 ||
      columns != trajectory_columns((columns.size() - 4) / 3)) {
    throw io_error(path, "unexpected trajectory columns");
  }
  out.loss_count = (columns.size() - 4) / 3;
  for (const auto& r : doc.at("records")) out.records.push_back(record_from_json(r));
  return out;
}

std::vector<TrajectoryRecord> import_trajectory(const std::filesystem::path& path) {
  return import_trajectory_file(path).records;
}

json to_json(const TrajectoryRecord& r) {
  return json{{"t", r.t},
              {"mu", numbers(r.mu)},
              {"lambda", numbers(r.lambda)},
              {"l", numbers(r.losses)},
              {"L_e", number(r.composite)},
              {"L_r", number(r.regularizer)},
              {"val_basic_loss", number(r.val_basic_loss)}};
}

json to_json(const RunResult& r) {
  return json{{"seed", r.seed},
              {"final", to_json(r.final_record)},
              {"best_val_basic_loss", number(r.best_val_basic_loss)},
              {"best_step", r.best_step},
              {"diverged", r.diverged},
              {"error", r.error},
              {"wall_time_s", r.wall_time_s}};
}

json to_json(const GridResult& g) {
  json rows = json::array();
  for (const auto& row : g.rows) {
    rows.push_back({{"point", row.point},
                    {"raw_weights", numbers(row.raw_weights)},
                    {"lambda", numbers(row.lambda)},
                    {"seed", row.seed},
                    {"final_val_basic_loss", number(row.final_val_basic_loss)},
                    {"diverged", row.diverged}});
  }
  json points = json::array();
  for (const auto& p : g.points) {
    points.push_back({{"point", p.point},
                      {"raw_weights", numbers(p.raw_weights)},
                      {"lambda", numbers(p.lambda)},
                      {"mean_val_basic_loss", number(p.mean_val_basic_loss)},
                      {"std_val_basic_loss", number(p.std_val_basic_loss)},
                      {"completed_runs", p.completed_runs}});
  }
  json runs = json::array();
  for (const auto& r : g.runs) runs.push_back(to_json(r.result));
  return json{{"rows", rows}, {"points", points}, {"best_point", g.best_point}, {"runs", runs}};
}

json to_json(const SeedStudyReport& s) {
  json runs = json::array();
  for (const auto& r : s.runs) runs.push_back(to_json(r.result));
  json final_mu = json::array();
  for (const auto& m : s.final_mu) final_mu.push_back(numbers(m));
  return json{{"seeds", s.seeds},
              {"final_mu", final_mu},
              {"max_pairwise_final_mu_distance", number(s.max_pairwise_final_mu_distance)},
              {"max_pairwise_final_mu1_distance", number(s.max_pairwise_final_mu1_distance)},
              {"mu1_range", number(s.mu1_range)},
              {"max_step_spread", number(s.max_step_spread)},
              {"step_spread", numbers(s.step_spread)},
              {"mean_val_basic_loss", number(s.mean_val_basic_loss)},
              {"std_val_basic_loss", number(s.std_val_basic_loss)},
              {"runs", runs}};
}

json to_json(const InitSweepReport& s) {
  json runs = json::array();
  for (const auto& r : s.runs) runs.push_back(to_json(r.result));
  json final_mu = json::array();
  for (const auto& m : s.final_mu) final_mu.push_back(numbers(m));
  json final_lambda = json::array();
  for (const auto& l : s.final_lambda) final_lambda.push_back(numbers(l));
  json centers = json::array();
  for (const auto& c : s.cluster_centers) centers.push_back(numbers(c));
  return json{{"epsilons", numbers(s.epsilons)},
              {"final_mu", final_mu},
              {"final_lambda", final_lambda},
              {"cluster_of", s.cluster_of},
              {"cluster_centers", centers},
              {"threshold", number(s.threshold)},
              {"runs", runs}};
}

void write_json(const json& value, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw io_error(path, "cannot open for writing");
  out << value.dump(2) << '\n';
  if (!out) throw io_error(path, "write failed");
}

}  // namespace yoto
