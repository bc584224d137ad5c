#include "fofr/study_config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fofr/csv.hpp"

namespace fofr {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      fail(ErrorKind::ParseError,
           "config: unknown key '" + key + "' in " + where);
    }
  }
}

LatentLaw parse_latent(const std::string& s, const std::string& where) {
  if (s == "normal") return LatentLaw::Normal;
  if (s == "exp") return LatentLaw::CenteredExp;
  if (s == "none") return LatentLaw::None;
  fail(ErrorKind::ParseError,
       "config: " + where + " must be normal|exp|none, got '" + s + "'");
}

WLaw parse_w(const std::string& s, const std::string& where) {
  if (s == "normal") return WLaw::Normal;
  if (s == "rademacher") return WLaw::Rademacher;
  fail(ErrorKind::ParseError,
       "config: " + where + " must be normal|rademacher, got '" + s + "'");
}

SlopeKind parse_slope(const std::string& s) {
  if (s == "prod") return SlopeKind::Prod;
  if (s == "diag") return SlopeKind::Diag;
  if (s == "exp") return SlopeKind::Exp;
  fail(ErrorKind::ParseError,
       "config: scenario.slope must be prod|diag|exp, got '" + s + "'");
}

std::vector<int> int_or_list(const json& v, const std::string& where) {
  std::vector<int> out;
  if (v.is_number_integer()) {
    out.push_back(v.get<int>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number_integer()) {
        fail(ErrorKind::ParseError, "config: " + where + " must hold integers");
      }
      out.push_back(e.get<int>());
    }
  } else {
    fail(ErrorKind::ParseError,
         "config: " + where + " must be an integer or a list");
  }
  if (out.empty()) {
    fail(ErrorKind::ParseError, "config: " + where + " must not be empty");
  }
  return out;
}

}  // namespace

StudyConfig parse_study_config(const std::string& json_text,
                               const std::string& name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, name + ": " + e.what());
  }
  if (!root.is_object()) {
    fail(ErrorKind::ParseError, name + ": top level must be an object");
  }
  check_keys(root, "top level",
             {"scenario", "truncations", "bootstrap", "inference", "study"});

  StudyConfig cfg;

  if (root.contains("scenario")) {
    const json& sc = root["scenario"];
    check_keys(sc, "scenario",
               {"a", "J0", "latent", "w", "error_latent", "error_w", "slope",
                "b1", "b2", "sign_seed", "n", "grid_m", "error_scale"});
    if (sc.contains("a")) cfg.scenario.spectrum.a = sc["a"].get<double>();
    if (sc.contains("J0")) cfg.scenario.spectrum.J0 = sc["J0"].get<int>();
    if (sc.contains("latent")) {
      cfg.scenario.x_law.latent =
          parse_latent(sc["latent"].get<std::string>(), "scenario.latent");
      cfg.scenario.e_law.latent = cfg.scenario.x_law.latent;
    }
    if (sc.contains("w")) {
      cfg.scenario.x_law.w = parse_w(sc["w"].get<std::string>(), "scenario.w");
      cfg.scenario.e_law.w = cfg.scenario.x_law.w;
    }
    if (sc.contains("error_latent")) {
      cfg.scenario.e_law.latent = parse_latent(
          sc["error_latent"].get<std::string>(), "scenario.error_latent");
    }
    if (sc.contains("error_w")) {
      cfg.scenario.e_law.w =
          parse_w(sc["error_w"].get<std::string>(), "scenario.error_w");
    }
    if (sc.contains("slope")) {
      cfg.scenario.slope.kind = parse_slope(sc["slope"].get<std::string>());
    }
    if (sc.contains("b1")) cfg.scenario.slope.b1 = sc["b1"].get<double>();
    if (sc.contains("b2")) cfg.scenario.slope.b2 = sc["b2"].get<double>();
    if (sc.contains("sign_seed")) {
      cfg.scenario.slope.sign_seed = sc["sign_seed"].get<std::uint64_t>();
    }
    if (sc.contains("n")) cfg.scenario.n = sc["n"].get<int>();
    if (sc.contains("grid_m")) cfg.scenario.grid_m = sc["grid_m"].get<int>();
    if (sc.contains("error_scale")) {
      cfg.scenario.error_scale = sc["error_scale"].get<double>();
    }
  }

  if (root.contains("truncations")) {
    const json& tr = root["truncations"];
    check_keys(tr, "truncations", {"k", "k_max", "g", "h", "delta"});
    if (tr.contains("k")) {
      if (tr["k"].is_string()) {
        if (tr["k"].get<std::string>() != "loocv") {
          fail(ErrorKind::ParseError,
               "config: truncations.k must be an integer or \"loocv\"");
        }
        cfg.k_loocv = true;
      } else {
        cfg.k_loocv = false;
        cfg.k = tr["k"].get<int>();
      }
    }
    if (tr.contains("k_max")) cfg.k_max = tr["k_max"].get<int>();
    if (tr.contains("g")) {
      if (tr["g"].is_string()) {
        if (tr["g"].get<std::string>() != "k") {
          fail(ErrorKind::ParseError,
               "config: truncations.g must be an integer or \"k\"");
        }
        cfg.g_equals_k = true;
      } else {
        cfg.g_equals_k = false;
        cfg.g = tr["g"].get<int>();
      }
    }
    if (tr.contains("h")) {
      cfg.has_h = true;
      cfg.h = tr["h"].get<int>();
    }
    if (tr.contains("delta")) {
      cfg.deltas = int_or_list(tr["delta"], "truncations.delta");
    }
  }

  if (root.contains("bootstrap")) {
    const json& bs = root["bootstrap"];
    check_keys(bs, "bootstrap", {"B", "seed"});
    if (bs.contains("B")) cfg.B = bs["B"].get<int>();
    if (bs.contains("seed")) cfg.seed = bs["seed"].get<std::uint64_t>();
  }

  if (root.contains("inference")) {
    const json& inf = root["inference"];
    check_keys(inf, "inference", {"proj", "eval_t", "level"});
    if (inf.contains("proj")) {
      if (inf["proj"].is_string()) {
        cfg.proj_spec = inf["proj"].get<std::string>();
      } else if (inf["proj"].is_object()) {
        check_keys(inf["proj"], "inference.proj", {"csv"});
        cfg.proj_spec = inf["proj"]["csv"].get<std::string>();
      } else {
        fail(ErrorKind::ParseError, "config: inference.proj malformed");
      }
    }
    if (inf.contains("eval_t")) {
      cfg.eval_ts.clear();
      if (inf["eval_t"].is_number()) {
        cfg.eval_ts.push_back(inf["eval_t"].get<double>());
      } else if (inf["eval_t"].is_array()) {
        for (const auto& e : inf["eval_t"]) {
          cfg.eval_ts.push_back(e.get<double>());
        }
      } else {
        fail(ErrorKind::ParseError,
             "config: inference.eval_t must be a number or a list");
      }
    }
    if (inf.contains("level")) cfg.level = inf["level"].get<double>();
  }

  if (root.contains("study")) {
    const json& st = root["study"];
    check_keys(st, "study", {"M", "n", "out", "threads"});
    if (st.contains("M")) cfg.M = st["M"].get<int>();
    if (st.contains("n")) cfg.n_list = int_or_list(st["n"], "study.n");
    if (st.contains("out")) cfg.out = st["out"].get<std::string>();
    if (st.contains("threads")) cfg.threads = st["threads"].get<int>();
  }

  if (cfg.n_list.empty()) cfg.n_list.push_back(cfg.scenario.n);
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
    fail(ErrorKind::ParseError, "config: level must lie in (0,1)");
  }
  return cfg;
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorKind::ParseError, path + ": cannot open");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  StudyConfig cfg = parse_study_config(ss.str(), path);
  if (const char* env = std::getenv("FOFR_SEED")) {
    cfg.seed = std::strtoull(env, nullptr, 10);
  }
  return cfg;
}

Fn resolve_projection(const std::string& spec, const GridPtr& grid) {
  if (spec == "cubic") {
    VectorXd v(grid->size());
    for (int i = 0; i < grid->size(); ++i) {
      const double t = grid->points()[i];
      v[i] =
          10.0 * std::pow(t, 3) - 15.0 * std::pow(t, 4) + 6.0 * std::pow(t, 5);
    }
    return Fn{grid, std::move(v)};
  }
  if (spec == "constant") {
    return Fn{grid, VectorXd::Ones(grid->size())};
  }
  const CurveTable table = read_curve_table(spec);
  if (table.rows.rows() != 1) {
    fail(ErrorKind::InvalidArgument,
         spec + ": projection table must hold exactly one curve");
  }
  if (!Grid::same(table.grid, grid)) {
    fail(ErrorKind::IncompatibleGrid,
         spec + ": projection curve grid does not match the data grid");
  }
  return Fn{grid, table.rows.row(0).transpose()};
}

}  // namespace fofr
