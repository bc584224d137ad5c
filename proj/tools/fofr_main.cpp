// Command-line surface for function-on-function regression inference:
// fitting, confidence sets, the mean-equality bootstrap test, synthetic-data
// studies, and plot-data emission. See README.md for formats and examples.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fofr/csv.hpp"
#include "fofr/experiments.hpp"
#include "fofr/inference.hpp"
#include "fofr/parallel.hpp"
#include "fofr/study_config.hpp"

namespace {

using namespace fofr;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::ParseError:
      return 2;
    case ErrorKind::IncompatibleGrid:
    case ErrorKind::InvalidArgument:
      return 3;
    case ErrorKind::TruncationTooLarge:
    case ErrorKind::DegenerateInput:
    case ErrorKind::NumericalFailure:
      return 4;
  }
  return 4;
}

// Streams: replication-style layout shared with the coverage study, so a
// simulate run with a given seed reproduces that study's first dataset.
constexpr std::uint64_t kDataStream = 0;

struct TruncationFlags {
  std::string k_spec = "loocv";
  int k_max = 10;
  std::string g_spec = "k";
  int h = 0;        // 0: derived from delta
  int delta = 0;
  bool has_h = false;
};

struct ResolvedTruncations {
  int k = 0, g = 0, h = 0;
};

int parse_int_flag(const std::string& spec, const char* what) {
  int value = 0;
  const auto res =
      std::from_chars(spec.data(), spec.data() + spec.size(), value);
  if (res.ec != std::errc() || res.ptr != spec.data() + spec.size()) {
    fail(ErrorKind::ParseError, std::string(what) + ": not an integer: '" +
                                    spec + "'");
  }
  return value;
}

ResolvedTruncations resolve_truncations(const TruncationFlags& tf,
                                        const FnSet& x, const FnSet& y,
                                        int threads) {
  ResolvedTruncations out;
  if (tf.k_spec == "loocv") {
    // loocv_select caps the search by the per-fold numerical ranks
    out.k = loocv_select(x, y, tf.k_max, threads);
  } else {
    out.k = parse_int_flag(tf.k_spec, "--k");
  }
  out.g = tf.g_spec == "k" ? out.k : parse_int_flag(tf.g_spec, "--g");
  out.h = tf.has_h ? tf.h : out.k + tf.delta;
  return out;
}

FnSet resample_to(const CurveTable& table, const GridPtr& grid) {
  MatrixXd rows(table.rows.rows(), grid->size());
  for (int i = 0; i < table.rows.rows(); ++i) {
    const Fn f{table.grid, table.rows.row(i).transpose()};
    for (int c = 0; c < grid->size(); ++c) {
      rows(i, c) = eval_at(f, grid->points()[c]);
    }
  }
  return FnSet{grid, std::move(rows)};
}

struct LoadedData {
  FnSet x, y;
  Fn x0;
  bool has_x0 = false;
};

LoadedData load_xy(const std::string& x_path, const std::string& y_path,
                   const std::string& x0_path, int grid_m) {
  const CurveTable xt = read_curve_table(x_path);
  const CurveTable yt = read_curve_table(y_path);
  std::optional<CurveTable> x0t;
  if (!x0_path.empty()) {
    x0t = read_curve_table(x0_path);
    if (x0t->rows.rows() != 1) {
      fail(ErrorKind::InvalidArgument,
           x0_path + ": x0 must hold exactly one curve");
    }
  }

  LoadedData data;
  if (grid_m > 0) {
    const GridPtr grid = Grid::uniform(grid_m);
    data.x = resample_to(xt, grid);
    data.y = resample_to(yt, grid);
    if (x0t) {
      data.x0 = resample_to(*x0t, grid).row(0);
      data.has_x0 = true;
    }
  } else {
    if (!Grid::same(xt.grid, yt.grid)) {
      fail(ErrorKind::IncompatibleGrid,
           x_path + " and " + y_path +
               " use different grids (pass --grid-m to resample)");
    }
    data.x = FnSet{xt.grid, xt.rows};
    data.y = FnSet{xt.grid, yt.rows};
    if (x0t) {
      if (!Grid::same(xt.grid, x0t->grid)) {
        fail(ErrorKind::IncompatibleGrid,
             x0_path + ": x0 grid differs from the data grid");
      }
      data.x0 = Fn{xt.grid, x0t->rows.row(0).transpose()};
      data.has_x0 = true;
    }
  }
  if (data.x.n() != data.y.n()) {
    fail(ErrorKind::InvalidArgument,
         "x and y hold different numbers of curves");
  }
  return data;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) fail(ErrorKind::ParseError, path + ": cannot open for writing");
  return file;
}

void print_metadata(std::ostream& os, const std::string& cmd,
                    std::uint64_t seed) {
  os << "# fofr " << cmd << "\n";
  os << "# rng=" << kRngName << " seed=" << seed << "\n";
}

// ---------------------------------------------------------------- fit ----

int cmd_fit(const std::string& x_path, const std::string& y_path,
            const TruncationFlags& tf, int grid_m, const std::string& out,
            int threads) {
  const LoadedData data = load_xy(x_path, y_path, "", grid_m);
  const ResolvedTruncations tr =
      resolve_truncations(tf, data.x, data.y, threads);

  FpcaPtr fpca = fit_fpca_shared(data.x);
  const FofrModel model = fit_fofr_with(fpca, data.y, tr.k);
  const double mse = in_sample_mse(model, data.x, data.y);

  print_metadata(std::cout, "fit", 0);
  std::cout << "k_selected: " << tr.k << "\n";
  std::cout << "rank: " << fpca->rank() << "\n";
  std::cout << "in_sample_mse: " << format_double(mse) << "\n";
  std::cout << "eigenvalues:\nj,gamma\n";
  for (int j = 0; j < fpca->rank(); ++j) {
    std::cout << (j + 1) << "," << format_double(fpca->eigvals[j]) << "\n";
  }

  if (!out.empty()) {
    nlohmann::json model_json;
    model_json["h"] = model.h;
    model_json["grid"] = std::vector<double>(
        data.x.grid->points().data(),
        data.x.grid->points().data() + data.x.grid->size());
    model_json["intercept"] = std::vector<double>(
        model.intercept.values.data(),
        model.intercept.values.data() + model.intercept.values.size());
    model_json["ybar"] = std::vector<double>(
        model.ybar.values.data(),
        model.ybar.values.data() + model.ybar.values.size());
    model_json["eigvals"] = std::vector<double>(
        fpca->eigvals.data(), fpca->eigvals.data() + fpca->rank());
    std::vector<std::vector<double>> coefs;
    for (int j = 0; j < model.slope_coefs.rows(); ++j) {
      coefs.emplace_back(model.slope_coefs.row(j).data(),
                         model.slope_coefs.row(j).data() +
                             model.slope_coefs.cols());
    }
    model_json["slope_coefs"] = coefs;
    std::ofstream os(out);
    if (!os) fail(ErrorKind::ParseError, out + ": cannot open for writing");
    os << model_json.dump(1) << "\n";
  }
  return 0;
}

// -------------------------------------------------------------- infer ----

void write_interval_row(std::ostream& os, const std::string& target,
                        const Interval& iv, std::uint64_t seed) {
  os << target << "," << method_name(iv.method) << ","
     << format_double(iv.level) << "," << format_double(iv.center) << ","
     << format_double(iv.halfwidth) << "," << format_double(iv.lower) << ","
     << format_double(iv.upper) << ","
     << (iv.target == TargetKind::Evaluation ? format_double(iv.eval_t)
                                             : std::string())
     << "," << seed << "," << kRngName << "\n";
}

int cmd_infer(const std::string& x_path, const std::string& y_path,
              const std::string& x0_path, const TruncationFlags& tf,
              int grid_m, int B, double level, std::uint64_t seed,
              const std::string& proj_spec, const std::vector<double>& eval_ts,
              const std::string& method_spec, const std::string& out,
              const std::string& out_center, int threads) {
  const LoadedData data = load_xy(x_path, y_path, x0_path, grid_m);
  if (!data.has_x0) {
    fail(ErrorKind::InvalidArgument, "infer: --x0 is required");
  }
  const ResolvedTruncations tr =
      resolve_truncations(tf, data.x, data.y, threads);

  BootConfig cfg;
  cfg.k = tr.k;
  cfg.g = tr.g;
  cfg.h = tr.h;
  cfg.B = B;
  cfg.seed = seed;

  const bool do_clt = method_spec == "clt" || method_spec == "both";
  const bool do_rb = method_spec == "rb" || method_spec == "both";
  if (!do_clt && !do_rb) {
    fail(ErrorKind::ParseError, "--method must be clt, rb, or both");
  }

  const Fn proj_x = resolve_projection(proj_spec, data.x.grid);

  std::ofstream file;
  std::ostream& os = open_out(file, out);
  print_metadata(os, "infer", seed);
  os << "# k=" << tr.k << " g=" << tr.g << " h=" << tr.h << " B=" << B << "\n";
  os << "target,method,level,center,halfwidth,lower,upper,eval_t,seed,rng\n";

  Fn ball_center;
  for (int pass = 0; pass < 2; ++pass) {
    const Method method = pass == 0 ? Method::CLT : Method::RB;
    if ((method == Method::CLT && !do_clt) || (method == Method::RB && !do_rb))
      continue;
    const ConfidenceBall ball =
        method == Method::CLT
            ? clt_ball(data.x, data.y, data.x0, tr.h, tr.k, level, seed)
            : rb_ball(data.x, data.y, data.x0, cfg, level, threads);
    ball_center = ball.center;
    const double center_norm = norm(ball.center);
    os << "mr," << method_name(method) << "," << format_double(level) << ","
       << format_double(center_norm) << "," << format_double(ball.radius)
       << ",,,," << seed << "," << kRngName << "\n";
    write_interval_row(os, "proj",
                       proj_interval(data.x, data.y, data.x0, proj_x, method,
                                     cfg, level, threads),
                       seed);
    for (double t : eval_ts) {
      write_interval_row(os, "eval",
                         eval_interval(data.x, data.y, data.x0, t, method, cfg,
                                       level, threads),
                         seed);
    }
  }

  if (!out_center.empty() && ball_center.grid) {
    write_curve_table_file(out_center, ball_center.grid,
                           ball_center.values.transpose(), nullptr,
                           {"fofr infer center curve"});
  }
  return 0;
}

// --------------------------------------------------------------- test ----

int cmd_test(const std::string& x_path, const std::string& y_path,
             const std::string& x0_path, const TruncationFlags& tf, int grid_m,
             int B, std::uint64_t seed, int threads) {
  const LoadedData data = load_xy(x_path, y_path, x0_path, grid_m);
  if (!data.has_x0) {
    fail(ErrorKind::InvalidArgument, "test: --x0 is required");
  }
  const ResolvedTruncations tr =
      resolve_truncations(tf, data.x, data.y, threads);
  BootConfig cfg;
  cfg.k = tr.k;
  cfg.g = tr.g;
  cfg.h = tr.h;
  cfg.B = B;
  cfg.seed = seed;

  const TestResult res =
      mean_equality_test(data.x, data.y, data.x0, cfg, threads);
  print_metadata(std::cout, "test", seed);
  std::cout << "# k=" << tr.k << " g=" << tr.g << " h=" << tr.h << "\n";
  std::cout << "statistic,p_value,B\n";
  std::cout << format_double(res.statistic) << ","
            << format_double(res.p_value) << "," << res.B << "\n";
  return 0;
}

// ----------------------------------------------------------- simulate ----

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override) {
  StudyConfig cfg = load_study_config(config_path);
  if (seed_override) cfg.seed = *seed_override;

  std::filesystem::create_directories(out_dir);
  const StudyContext ctx = make_study_context(cfg.scenario);
  RngStream rng{StreamKey(cfg.seed).child(kDataStream).child(0)};
  const Dataset ds = gen_dataset(ctx, cfg.scenario, rng);

  const std::vector<std::string> meta = {
      "fofr simulate",
      std::string("rng=") + kRngName + " seed=" + std::to_string(cfg.seed)};
  const auto path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  write_curve_table_file(path("x.csv"), ctx.grid, ds.X.rows, nullptr, meta);
  write_curve_table_file(path("y.csv"), ctx.grid, ds.Y.rows, nullptr, meta);
  write_curve_table_file(path("x0.csv"), ctx.grid,
                         ds.truth.x0.values.transpose(), nullptr, meta);
  write_curve_table_file(path("truth_mu_x0.csv"), ctx.grid,
                         ds.truth.mu_x0.values.transpose(), nullptr, meta);
  write_curve_table_file(path("slope_kernel.csv"), ctx.grid,
                         ds.truth.slope.kernel, nullptr, meta);
  {
    std::ofstream os(path("eigvals.csv"));
    if (!os) {
      fail(ErrorKind::ParseError,
           path("eigvals.csv") + std::string(": cannot open for writing"));
    }
    os << "j,gamma\n";
    for (int j = 0; j < ds.truth.pop_eigvals.size(); ++j) {
      os << (j + 1) << "," << format_double(ds.truth.pop_eigvals[j]) << "\n";
    }
  }
  std::cout << "# fofr simulate\n# rng=" << kRngName << " seed=" << cfg.seed
            << "\nwrote: " << out_dir << "\n";
  return 0;
}

// ----------------------------------------------------------- coverage ----

int cmd_coverage(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed_override, int threads) {
  StudyConfig cfg = load_study_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  if (cfg.M < 1) {
    fail(ErrorKind::ParseError, "coverage: study.M must be >= 1");
  }

  CoverageOptions opt;
  opt.k_max = cfg.k_max;
  opt.level = cfg.level;
  opt.eval_t = cfg.eval_ts.empty() ? 0.9 : cfg.eval_ts.front();
  opt.threads = threads > 0 ? threads : cfg.threads;
  const GridPtr grid = Grid::uniform(cfg.scenario.grid_m);
  opt.proj_values = resolve_projection(cfg.proj_spec, grid).values;

  const CoverageReport report = coverage_study(
      cfg.scenario, cfg.n_list, cfg.deltas, cfg.M, cfg.B, cfg.seed, opt);

  const std::string out = !out_path.empty() ? out_path : cfg.out;
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  write_coverage_csv(os, report);
  return 0;
}

// ----------------------------------------------------------- plotdata ----

int cmd_plotdata(const std::vector<std::string>& curve_paths,
                 const std::string& intervals_path, const std::string& out) {
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  print_metadata(os, "plotdata", 0);
  os << "series,t,value\n";
  for (const auto& path : curve_paths) {
    const CurveTable table = read_curve_table(path);
    const std::string base =
        std::filesystem::path(path).filename().stem().string();
    for (int i = 0; i < table.rows.rows(); ++i) {
      const std::string series =
          base + ":" +
          (table.ids.empty() ? std::to_string(i + 1)
                             : table.ids[static_cast<std::size_t>(i)]);
      for (int c = 0; c < table.grid->size(); ++c) {
        os << series << "," << format_double(table.grid->points()[c]) << ","
           << format_double(table.rows(i, c)) << "\n";
      }
    }
  }
  if (!intervals_path.empty()) {
    std::ifstream in(intervals_path);
    if (!in) fail(ErrorKind::ParseError, intervals_path + ": cannot open");
    std::string line;
    bool seen_header = false;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      if (!seen_header) {
        seen_header = true;  // column header of the infer table
        continue;
      }
      const auto fields = split_csv_line(line);
      if (fields.size() < 8 || fields[0] != "eval") continue;
      const std::string series = fields[1] + ":eval";
      const double t =
          parse_double_token(fields[7], intervals_path, line_no, 8);
      os << series << ":lower," << format_double(t) << "," << fields[5]
         << "\n";
      os << series << ":upper," << format_double(t) << "," << fields[6]
         << "\n";
    }
  }
  return 0;
}

// ------------------------------------------------------------ weather ----

struct DayByCityTable {
  std::vector<std::string> cities;
  MatrixXd values;  // 365 x C
};

DayByCityTable read_day_by_city(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, path + ": cannot open");
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line()) fail(ErrorKind::ParseError, path + ": empty table");
  DayByCityTable table;
  table.cities = split_csv_line(line);
  const int c_count = static_cast<int>(table.cities.size());
  if (c_count < 1) fail(ErrorKind::ParseError, path + ": no city columns");
  std::vector<VectorXd> rows;
  while (next_line()) {
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != c_count) {
      fail(ErrorKind::ParseError,
           path + " line " + std::to_string(line_no) + ": expected " +
               std::to_string(c_count) + " fields, got " +
               std::to_string(fields.size()));
    }
    VectorXd row(c_count);
    for (int c = 0; c < c_count; ++c) {
      row[c] = parse_double_token(fields[static_cast<std::size_t>(c)], path,
                                  line_no, c + 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != 365) {
    fail(ErrorKind::InvalidArgument,
         path + ": expected 365 daily rows, got " +
             std::to_string(rows.size()));
  }
  table.values.resize(365, c_count);
  for (int d = 0; d < 365; ++d) {
    table.values.row(d) = rows[static_cast<std::size_t>(d)].transpose();
  }
  return table;
}

int cmd_weather(const std::string& temp_path, const std::string& precip_path,
                const std::string& regions_path, const std::string& out_dir) {
  const DayByCityTable temp = read_day_by_city(temp_path);
  const DayByCityTable precip = read_day_by_city(precip_path);
  if (temp.cities != precip.cities) {
    fail(ErrorKind::InvalidArgument,
         "temperature and precipitation tables list different cities");
  }
  const int c_count = static_cast<int>(temp.cities.size());

  // strictly positive precipitation; offending cells are reported, never
  // imputed
  for (int d = 0; d < 365; ++d) {
    for (int c = 0; c < c_count; ++c) {
      if (!(precip.values(d, c) > 0.0)) {
        fail(ErrorKind::ParseError,
             precip_path + ": non-positive precipitation for city '" +
                 temp.cities[static_cast<std::size_t>(c)] + "' on day " +
                 std::to_string(d + 1));
      }
    }
  }

  // regions: city,region rows
  std::map<std::string, std::string> region_of;
  {
    std::ifstream in(regions_path);
    if (!in) fail(ErrorKind::ParseError, regions_path + ": cannot open");
    std::string line;
    int line_no = 0;
    bool header_skipped = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto fields = split_csv_line(line);
      if (!header_skipped && fields.size() >= 2 && fields[0] == "city") {
        header_skipped = true;
        continue;
      }
      if (fields.size() != 2) {
        fail(ErrorKind::ParseError,
             regions_path + " line " + std::to_string(line_no) +
                 ": expected city,region");
      }
      region_of[fields[0]] = fields[1];
    }
  }

  const GridPtr grid = Grid::uniform(365);  // day d at t = (d-1)/364
  MatrixXd x_rows(c_count, 365), y_rows(c_count, 365);
  std::map<std::string, std::vector<int>> members;
  for (int c = 0; c < c_count; ++c) {
    const auto& city = temp.cities[static_cast<std::size_t>(c)];
    const auto it = region_of.find(city);
    if (it == region_of.end()) {
      fail(ErrorKind::InvalidArgument,
           regions_path + ": no region for city '" + city + "'");
    }
    members[it->second].push_back(c);
    x_rows.row(c) = temp.values.col(c).transpose();
    for (int d = 0; d < 365; ++d) {
      y_rows(c, d) = std::log10(precip.values(d, c));
    }
  }

  std::filesystem::create_directories(out_dir);
  const auto path = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  const std::vector<std::string> meta = {"fofr weather"};
  write_curve_table_file(path("x.csv"), grid, x_rows, &temp.cities, meta);
  write_curve_table_file(path("y.csv"), grid, y_rows, &temp.cities, meta);
  for (const auto& [region, idxs] : members) {
    MatrixXd avg = MatrixXd::Zero(1, 365);
    for (int c : idxs) avg.row(0) += x_rows.row(c);
    avg /= static_cast<double>(idxs.size());
    const std::vector<std::string> id = {region};
    write_curve_table_file(path("x0_" + region + ".csv"), grid, avg, &id,
                           meta);
  }
  std::cout << "# fofr weather\nwrote: " << out_dir << " ("
            << members.size() << " regions)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inference for linear function-on-function regression"};
  // --h is a truncation flag, so help stays on --help only
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit the truncated FPC regression");
  std::string fit_x, fit_y, fit_out;
  TruncationFlags fit_tf;
  int fit_grid_m = 0, fit_threads = 0;
  fit->add_option("--x", fit_x, "regressor CurveTable")->required();
  fit->add_option("--y", fit_y, "response CurveTable")->required();
  fit->add_option("--k", fit_tf.k_spec, "truncation (integer or 'loocv')");
  fit->add_option("--k-max", fit_tf.k_max, "LOOCV search bound");
  fit->add_option("--grid-m", fit_grid_m, "resample onto a uniform grid");
  fit->add_option("--out", fit_out, "write the fitted model as JSON");
  fit->add_option("--threads", fit_threads, "worker threads (0 = auto)");

  // infer
  auto* infer = app.add_subcommand("infer", "Confidence sets for mu(x0)");
  std::string inf_x, inf_y, inf_x0, inf_proj = "cubic", inf_method = "both";
  std::string inf_out, inf_out_center;
  TruncationFlags inf_tf;
  std::vector<double> inf_eval_ts = {0.9};
  int inf_grid_m = 0, inf_B = 1000, inf_threads = 0;
  double inf_level = 0.95;
  std::uint64_t inf_seed = 0;
  infer->add_option("--x", inf_x)->required();
  infer->add_option("--y", inf_y)->required();
  infer->add_option("--x0", inf_x0, "new regressor (single-curve table)")
      ->required();
  infer->add_option("--k", inf_tf.k_spec, "integer or 'loocv'");
  infer->add_option("--k-max", inf_tf.k_max);
  infer->add_option("--g", inf_tf.g_spec, "integer or 'k'");
  auto* h_opt = infer->add_option("--h", inf_tf.h, "estimation truncation");
  infer->add_option("--delta", inf_tf.delta, "h = k + delta when --h unset");
  infer->add_option("--B", inf_B, "bootstrap resamples");
  infer->add_option("--level", inf_level, "confidence level");
  infer->add_option("--seed", inf_seed, "bootstrap / calibration seed");
  infer->add_option("--grid-m", inf_grid_m);
  infer->add_option("--proj", inf_proj, "cubic | constant | CSV path");
  infer->add_option("--eval-t", inf_eval_ts, "evaluation points")
      ->delimiter(',');
  infer->add_option("--method", inf_method, "clt | rb | both");
  infer->add_option("--out", inf_out, "write the table here (default stdout)");
  infer->add_option("--out-center", inf_out_center,
                    "write the ball center curve");
  infer->add_option("--threads", inf_threads);

  // test
  auto* test_cmd = app.add_subcommand("test", "Bootstrap mean-equality test");
  std::string t_x, t_y, t_x0;
  TruncationFlags t_tf;
  int t_grid_m = 0, t_B = 1000, t_threads = 0;
  std::uint64_t t_seed = 0;
  test_cmd->add_option("--x", t_x)->required();
  test_cmd->add_option("--y", t_y)->required();
  test_cmd->add_option("--x0", t_x0)->required();
  test_cmd->add_option("--k", t_tf.k_spec);
  test_cmd->add_option("--k-max", t_tf.k_max);
  test_cmd->add_option("--g", t_tf.g_spec);
  auto* t_h_opt = test_cmd->add_option("--h", t_tf.h);
  test_cmd->add_option("--delta", t_tf.delta);
  test_cmd->add_option("--B", t_B);
  test_cmd->add_option("--seed", t_seed);
  test_cmd->add_option("--grid-m", t_grid_m);
  test_cmd->add_option("--threads", t_threads);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Write a synthetic dataset");
  std::string sim_config, sim_out_dir = ".";
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", sim_config, "StudyConfig JSON")->required();
  sim->add_option("--out-dir", sim_out_dir);
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "override seed");

  // coverage
  auto* cov = app.add_subcommand("coverage", "Monte Carlo coverage study");
  std::string cov_config, cov_out;
  std::uint64_t cov_seed = 0;
  int cov_threads = 0;
  cov->add_option("--config", cov_config, "StudyConfig JSON")->required();
  cov->add_option("--out", cov_out, "report path (default from config)");
  auto* cov_seed_opt = cov->add_option("--seed", cov_seed, "override seed");
  cov->add_option("--threads", cov_threads);

  // plotdata
  auto* plot = app.add_subcommand("plotdata", "Long-format series emission");
  std::vector<std::string> plot_curves;
  std::string plot_intervals, plot_out;
  plot->add_option("--curves", plot_curves, "CurveTable files")
      ->delimiter(',');
  plot->add_option("--intervals", plot_intervals, "an infer output table");
  plot->add_option("--out", plot_out);

  // weather
  auto* weather = app.add_subcommand(
      "weather", "Convert day-by-city weather tables to CurveTables");
  std::string w_temp, w_precip, w_regions, w_out_dir = ".";
  weather->add_option("--temp", w_temp, "365 x cities temperatures")
      ->required();
  weather->add_option("--precip", w_precip, "365 x cities precipitation (mm)")
      ->required();
  weather->add_option("--regions", w_regions, "city,region map")->required();
  weather->add_option("--out-dir", w_out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  inf_tf.has_h = h_opt->count() > 0;
  t_tf.has_h = t_h_opt->count() > 0;

  try {
    if (fit->parsed()) {
      return cmd_fit(fit_x, fit_y, fit_tf, fit_grid_m, fit_out, fit_threads);
    }
    if (infer->parsed()) {
      return cmd_infer(inf_x, inf_y, inf_x0, inf_tf, inf_grid_m, inf_B,
                       inf_level, inf_seed, inf_proj, inf_eval_ts, inf_method,
                       inf_out, inf_out_center, inf_threads);
    }
    if (test_cmd->parsed()) {
      return cmd_test(t_x, t_y, t_x0, t_tf, t_grid_m, t_B, t_seed, t_threads);
    }
    if (sim->parsed()) {
      std::optional<std::uint64_t> seed;
      if (sim_seed_opt->count() > 0) seed = sim_seed;
      return cmd_simulate(sim_config, sim_out_dir, seed);
    }
    if (cov->parsed()) {
      std::optional<std::uint64_t> seed;
      if (cov_seed_opt->count() > 0) seed = cov_seed;
      return cmd_coverage(cov_config, cov_out, seed, cov_threads);
    }
    if (plot->parsed()) {
      return cmd_plotdata(plot_curves, plot_intervals, plot_out);
    }
    if (weather->parsed()) {
      return cmd_weather(w_temp, w_precip, w_regions, w_out_dir);
    }
  } catch (const Error& e) {
    std::cerr << "fofr: error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "fofr: error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
