#include "nhrm/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "nhrm/parallel.hpp"

namespace nhrm {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << "\r\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << "\r\n";
  }
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      out.push_back(cell);
    }
    return out;
  };
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(std::stod(cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
}

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field \"" + field + "\": " + why);
}

double need_number(const json& j, const std::string& field) {
  if (!j.contains(field)) fail(field, "missing");
  if (!j.at(field).is_number()) fail(field, "must be a number");
  return j.at(field).get<double>();
}

int need_int(const json& j, const std::string& field) {
  if (!j.contains(field)) fail(field, "missing");
  if (!j.at(field).is_number_integer()) fail(field, "must be an integer");
  return j.at(field).get<int>();
}

std::string need_string(const json& j, const std::string& field) {
  if (!j.contains(field)) fail(field, "missing");
  if (!j.at(field).is_string()) fail(field, "must be a string");
  return j.at(field).get<std::string>();
}

}  // namespace

ModelParams model_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config field \"model\": must be an object");
  ModelParams p;
  p.lambda = need_number(j, "lambda");
  p.N = need_int(j, "N");
  p.delta = j.value("delta", 0.0);
  p.V = j.value("V", 0.0);
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config field \"model\": ") + e.what());
  }
  return p;
}

PumpLoop loop_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config field \"loop\": must be an object");
  const std::string kind = need_string(j, "kind");
  const int nq = j.value("nq", 256);
  if (kind == "circle") {
    if (!j.contains("center") || !j.at("center").is_array() ||
        j.at("center").size() != 2)
      fail("loop.center", "must be [delta_c, V_c]");
    return PumpLoop::circle(j.at("center").at(0).get<double>(),
                            j.at("center").at(1).get<double>(),
                            need_number(j, "radius"),
                            j.value("orientation", 1), nq);
  }
  if (kind == "polyline") {
    if (!j.contains("vertices") || !j.at("vertices").is_array())
      fail("loop.vertices", "must be an array of [delta, V] pairs");
    std::vector<std::array<double, 2>> v;
    for (const auto& vv : j.at("vertices")) {
      if (!vv.is_array() || vv.size() != 2)
        fail("loop.vertices", "each vertex must be [delta, V]");
      v.push_back({vv.at(0).get<double>(), vv.at(1).get<double>()});
    }
    return PumpLoop::polyline(std::move(v), nq);
  }
  fail("loop.kind", "must be \"circle\" or \"polyline\"");
}

Band band_from_json(const std::string& name) {
  if (name == "lower") return Band::lower;
  if (name == "upper") return Band::upper;
  throw ConfigError("config field \"band\": must be \"lower\" or \"upper\"");
}

json parse_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
}

json validate_config(const json& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  const std::string exp = need_string(config, "experiment");
  json cfg = config;
  if (!cfg.contains("model")) fail("model", "missing");
  const ModelParams p = model_from_json(cfg.at("model"));
  cfg["model"] = {{"lambda", p.lambda}, {"delta", p.delta}, {"V", p.V}, {"N", p.N}};

  if (exp == "spectrum_scan") {
    if (p.N < 2) fail("model.N", "spectrum scan needs N >= 2");
    if (!cfg.contains("path") || !cfg.at("path").is_array() ||
        cfg.at("path").size() < 2)
      fail("path", "must list at least two [delta, V] vertices");
    for (const auto& v : cfg.at("path"))
      if (!v.is_array() || v.size() != 2 || !v.at(0).is_number() ||
          !v.at(1).is_number())
        fail("path", "each vertex must be [delta, V]");
    cfg["closed"] = cfg.value("closed", true);
    cfg["samples_per_edge"] = cfg.value("samples_per_edge", 25);
    if (cfg["samples_per_edge"].get<int>() < 2)
      fail("samples_per_edge", "must be at least 2");
    if (!cfg.contains("boundaries")) cfg["boundaries"] = {"ring", "open"};
    const std::set<std::string> allowed{"ring", "open", "weak_link"};
    if (!cfg["boundaries"].is_array() || cfg["boundaries"].empty())
      fail("boundaries", "must be a non-empty list");
    for (const auto& b : cfg["boundaries"])
      if (!b.is_string() || !allowed.count(b.get<std::string>()))
        fail("boundaries", "entries must be ring, open or weak_link");
    cfg["kappa"] = cfg.value("kappa", 0.05);
    if (cfg["kappa"].get<double>() < 0.0) fail("kappa", "must be >= 0");
  } else if (exp == "chern") {
    if (!cfg.contains("loop")) fail("loop", "missing");
    (void)loop_from_json(cfg.at("loop"));
    cfg["band"] = cfg.value("band", "upper");
    (void)band_from_json(cfg["band"].get<std::string>());
    cfg["nk"] = cfg.value("nk", 256);
    cfg["nq"] = cfg.value("nq", 256);
    if (cfg["nk"].get<int>() < 8 || cfg["nq"].get<int>() < 8)
      fail("nk/nq", "grid must be at least 8 in each direction");
  } else if (exp == "zak") {
    cfg["band"] = cfg.value("band", "lower");
    (void)band_from_json(cfg["band"].get<std::string>());
    cfg["nk"] = cfg.value("nk", 4096);
    if (cfg["nk"].get<int>() < 8) fail("nk", "must be at least 8");
  } else if (exp == "edge_profile") {
    if (p.N < 2) fail("model.N", "edge profile needs N >= 2");
  } else if (exp == "pump") {
    if (p.N < 2) fail("model.N", "pump needs N >= 2");
    cfg["kappa"] = cfg.value("kappa", 0.05);
    if (cfg["kappa"].get<double>() < 0.0) fail("kappa", "must be >= 0");
    cfg["ramp"] = cfg.value("ramp", "V");
    const std::string ramp = cfg["ramp"].get<std::string>();
    if (ramp != "V" && ramp != "delta") fail("ramp", "must be \"V\" or \"delta\"");
    cfg["ramp_from"] = cfg.value("ramp_from", 1.0);
    if (!(cfg["ramp_from"].get<double>() > 0.0)) fail("ramp_from", "must be > 0");
    if (!cfg.contains("omegas") || !cfg.at("omegas").is_array() ||
        cfg.at("omegas").empty())
      fail("omegas", "must be a non-empty list of sweep rates");
    for (const auto& w : cfg.at("omegas"))
      if (!w.is_number() || !(w.get<double>() > 0.0))
        fail("omegas", "entries must be positive numbers");
    cfg["n_steps"] = cfg.value("n_steps", 0);
    if (cfg["n_steps"].get<int>() < 0) fail("n_steps", "must be >= 0");
    cfg["csv_stride"] = cfg.value("csv_stride", 1);
    if (cfg["csv_stride"].get<int>() < 1) fail("csv_stride", "must be >= 1");
  } else {
    fail("experiment",
         "unknown experiment \"" + exp +
             "\" (spectrum_scan, chern, zak, edge_profile, pump)");
  }
  return cfg;
}

namespace {

void emit_run_files(const fs::path& outdir, const json& cfg,
                    const json& summary,
                    const std::vector<std::pair<fs::path, CsvTable>>& tables,
                    const std::string& plot_script) {
  fs::create_directories(outdir);
  write_text(outdir / "config.echo", cfg.dump(2) + "\n");
  for (const auto& [name, table] : tables) write_csv(outdir / name, table);
  if (!plot_script.empty()) write_text(outdir / "plot.gp", plot_script);
  write_text(outdir / "summary.json", summary.dump(2) + "\n");
}

std::vector<std::array<double, 2>> path_samples(const json& cfg) {
  const auto& path = cfg.at("path");
  const bool closed = cfg.at("closed").get<bool>();
  const int spe = cfg.at("samples_per_edge").get<int>();
  const int m = static_cast<int>(path.size());
  const int edges = closed ? m : m - 1;
  std::vector<std::array<double, 2>> pts;
  for (int e = 0; e < edges; ++e) {
    const auto& a = path.at(e);
    const auto& b = path.at((e + 1) % m);
    for (int s = 0; s < spe; ++s) {
      const double t = static_cast<double>(s) / spe;
      pts.push_back({a.at(0).get<double>() * (1 - t) + b.at(0).get<double>() * t,
                     a.at(1).get<double>() * (1 - t) + b.at(1).get<double>() * t});
    }
  }
  if (!closed)
    pts.push_back({path.at(m - 1).at(0).get<double>(),
                   path.at(m - 1).at(1).get<double>()});
  return pts;
}

}  // namespace

json run_spectrum_scan(const json& config, const fs::path& outdir,
                       int threads) {
  const json cfg = validate_config(config);
  if (cfg.at("experiment") != "spectrum_scan")
    throw ConfigError("run_spectrum_scan: wrong experiment type");
  const ModelParams base = model_from_json(cfg.at("model"));
  const double kappa = cfg.at("kappa").get<double>();
  const auto pts = path_samples(cfg);
  const int n = static_cast<int>(pts.size());

  std::vector<std::pair<fs::path, CsvTable>> tables;
  json files = json::object();
  for (const auto& bj : cfg.at("boundaries")) {
    const std::string bname = bj.get<std::string>();
    Boundary boundary = Boundary::ring();
    if (bname == "open") boundary = Boundary::open();
    if (bname == "weak_link") boundary = Boundary::weak_link(kappa);

    CsvTable t;
    t.header = {"idx", "s", "delta", "V"};
    for (int i = 1; i <= 2 * base.N; ++i)
      t.header.push_back("e" + std::to_string(i));
    t.rows.resize(n);
    parallel_for(n, threads, [&](int i) {
      ModelParams p = base;
      p.delta = pts[i][0];
      p.V = pts[i][1];
      const auto eigs = spectrum(build_hamiltonian(p, boundary));
      std::vector<double> row = {static_cast<double>(i),
                                 static_cast<double>(i) / n, p.delta, p.V};
      row.insert(row.end(), eigs.begin(), eigs.end());
      t.rows[i] = std::move(row);
    });
    const std::string fname = "spectrum_" + bname + ".csv";
    files[bname] = fname;
    tables.emplace_back(fname, std::move(t));
  }

  std::string plot =
      "set datafile separator ','\n"
      "set key off\nset xlabel 'path parameter s'\nset ylabel 'energy'\n";
  plot += "set terminal pngcairo size 1200,400*" +
          std::to_string(tables.size()) + "\nset output 'spectrum.png'\n";
  plot += "set multiplot layout " + std::to_string(tables.size()) + ",1\n";
  for (const auto& [name, table] : tables) {
    plot += "set title '" + name.string() + "'\n";
    plot += "plot for [i=5:" + std::to_string(4 + 2 * base.N) + "] '" +
            name.string() + "' every ::1 u 2:i w l lc rgb 'navy'\n";
  }
  plot += "unset multiplot\n";

  json summary = {{"experiment", "spectrum_scan"},
                  {"n_samples", n},
                  {"sites", 2 * base.N},
                  {"files", files}};
  emit_run_files(outdir, cfg, summary, tables, plot);
  return summary;
}

json run_chern(const json& config, const fs::path& outdir, int threads) {
  const json cfg = validate_config(config);
  if (cfg.at("experiment") != "chern")
    throw ConfigError("run_chern: wrong experiment type");
  const ModelParams p = model_from_json(cfg.at("model"));
  const PumpLoop loop = loop_from_json(cfg.at("loop"));
  const Band band = band_from_json(cfg.at("band").get<std::string>());
  const int nk = cfg.at("nk").get<int>();
  const int nq = cfg.at("nq").get<int>();

  const ChernLineResult line = chern_line_integral(loop, p, band, nq, nk);
  const int plq = chern_plaquette(loop, p, band, nk, nq, threads);

  json summary = {{"experiment", "chern"},
                  {"band", cfg.at("band")},
                  {"line_integral", line.value},
                  {"line_imag_residual", line.imag_residual},
                  {"plaquette", plq},
                  {"agree", std::abs(line.value - plq) <= 1e-3},
                  {"grid", {{"nk", nk}, {"nq", nq}}},
                  {"loop_min_distance_to_origin", loop.min_distance_to_origin()}};
  emit_run_files(outdir, cfg, summary, {}, "");
  return summary;
}

json run_zak(const json& config, const fs::path& outdir, int /*threads*/) {
  const json cfg = validate_config(config);
  if (cfg.at("experiment") != "zak")
    throw ConfigError("run_zak: wrong experiment type");
  const ModelParams p = model_from_json(cfg.at("model"));
  const Band band = band_from_json(cfg.at("band").get<std::string>());
  const int nk = cfg.at("nk").get<int>();
  const double z = zak_phase(p.delta, p.V, p, band, nk);
  json summary = {{"experiment", "zak"},
                  {"band", cfg.at("band")},
                  {"nk", nk},
                  {"zak_phase_mod_1", z}};
  emit_run_files(outdir, cfg, summary, {}, "");
  return summary;
}

json run_edge_profile(const json& config, const fs::path& outdir,
                      int /*threads*/) {
  const json cfg = validate_config(config);
  if (cfg.at("experiment") != "edge_profile")
    throw ConfigError("run_edge_profile: wrong experiment type");
  const ModelParams p = model_from_json(cfg.at("model"));
  const auto [modeL, modeR] = edge_modes(p);
  const RealSpaceModel m = build_hamiltonian(p, Boundary::open());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.balanced());
  const Eigen::VectorXd d = m.balance();
  // Lower mid-gap level sits at index N-1, upper at N; energies -V and +V
  // for V > 0, swapped for V < 0.
  int idxL = p.N - 1, idxR = p.N;
  if (p.V < 0.0) std::swap(idxL, idxR);
  auto right_vec = [&](int idx) {
    Eigen::VectorXd v = d.cwiseInverse().asDiagonal() * es.eigenvectors().col(idx);
    v.normalize();
    return v;
  };
  Eigen::VectorXd numL = right_vec(idxL), numR = right_vec(idxR);
  if (numL.dot(modeL.amplitude) < 0.0) numL = -numL;
  if (numR.dot(modeR.amplitude) < 0.0) numR = -numR;

  CsvTable t;
  t.header = {"l", "P_L", "P_R", "P_L_diag", "P_R_diag"};
  double devL = 0.0, devR = 0.0;
  for (int l = 1; l <= 2 * p.N; ++l) {
    const double pl = edge_probability(modeL, l);
    const double pr = edge_probability(modeR, l);
    const double dl = numL(l - 1) * numL(l - 1);
    const double dr = numR(l - 1) * numR(l - 1);
    devL = std::max(devL, std::abs(pl - dl));
    devR = std::max(devR, std::abs(pr - dr));
    t.rows.push_back({static_cast<double>(l), pl, pr, dl, dr});
  }

  std::string plot =
      "set datafile separator ','\n"
      "set xlabel 'site l'\nset ylabel 'P(l)'\n"
      "set terminal pngcairo size 900,500\nset output 'edge_profile.png'\n"
      "plot 'edge_profile.csv' every ::1 u 1:2 w impulses t 'L', "
      "'edge_profile.csv' every ::1 u 1:3 w points pt 7 t 'R'\n";

  json summary = {{"experiment", "edge_profile"},
                  {"ratio", modeL.ratio},
                  {"norm_factor", modeL.norm_factor},
                  {"midgap_energies",
                   {es.eigenvalues()(idxL), es.eigenvalues()(idxR)}},
                  {"midgap_targets", {-p.V, p.V}},
                  {"max_deviation_L", devL},
                  {"max_deviation_R", devR}};
  emit_run_files(outdir, cfg, summary, {{"edge_profile.csv", t}}, plot);
  return summary;
}

json run_pump(const json& config, const fs::path& outdir, int threads) {
  const json cfg = validate_config(config);
  if (cfg.at("experiment") != "pump")
    throw ConfigError("run_pump: wrong experiment type");
  PumpConfig pc;
  pc.params = model_from_json(cfg.at("model"));
  pc.kappa = cfg.at("kappa").get<double>();
  pc.ramp = cfg.at("ramp") == "V" ? RampKind::V : RampKind::delta;
  pc.ramp_from = cfg.at("ramp_from").get<double>();
  pc.n_steps = cfg.at("n_steps").get<int>();
  for (const auto& w : cfg.at("omegas")) pc.omegas.push_back(w.get<double>());
  const int stride = cfg.at("csv_stride").get<int>();

  const std::vector<PumpRun> runs = pump_experiment(pc, threads);

  std::vector<std::pair<fs::path, CsvTable>> tables;
  json run_summaries = json::array();
  for (size_t i = 0; i < runs.size(); ++i) {
    const PumpRun& r = runs[i];
    CsvTable t;
    t.header = {"t", "V_t", "j_end", "q_end", "f", "norm_drift"};
    for (size_t s = 0; s < r.t.size(); s += stride)
      t.rows.push_back(
          {r.t[s], r.V_t[s], r.j_end[s], r.q_end[s], r.fidelity[s],
           r.norm_drift[s]});
    if ((r.t.size() - 1) % stride != 0)  // keep the final sample
      t.rows.push_back({r.t.back(), r.V_t.back(), r.j_end.back(),
                        r.q_end.back(), r.fidelity.back(),
                        r.norm_drift.back()});
    const std::string fname = "pump_omega_" + std::to_string(i) + ".csv";
    tables.emplace_back(fname, std::move(t));
    run_summaries.push_back({{"omega", r.omega},
                             {"n_steps", r.n_steps},
                             {"file", fname},
                             {"final_charge", r.final_charge},
                             {"final_charge_instleft", r.final_charge_instleft},
                             {"final_site_charge_sum", r.final_site_charge_sum},
                             {"min_fidelity", r.min_fidelity},
                             {"max_fidelity_deviation", r.max_fidelity_deviation},
                             {"max_norm_drift", r.max_norm_drift},
                             {"max_imag_current", r.max_imag_current},
                             {"final_overlap_R", r.final_overlap_R}});
  }

  std::string plot =
      "set datafile separator ','\n"
      "set terminal pngcairo size 1000,350*" + std::to_string(runs.size()) +
      "\nset output 'pump.png'\n"
      "set multiplot layout " + std::to_string(runs.size()) + ",2\n";
  for (size_t i = 0; i < runs.size(); ++i) {
    const std::string f = "pump_omega_" + std::to_string(i) + ".csv";
    char omega_label[32];
    std::snprintf(omega_label, sizeof(omega_label), "%.6g", runs[i].omega);
    plot += "set title 'omega = " + std::string(omega_label) +
            " current'\nplot '" + f + "' every ::1 u 1:3 w l t 'j_end'\n";
    plot += "set title 'omega = " + std::string(omega_label) +
            " charge'\nplot '" + f + "' every ::1 u 1:4 w l t 'q_end'\n";
  }
  plot += "unset multiplot\n";

  json summary = {
      {"experiment", "pump"},
      {"sign_convention",
       "positive j_l is flow from site l+1 into site l, so that "
       "d rho_l/dt = j_l - j_{l-1}; charge crossing the end bond from "
       "site 2N to site 1 accumulates negatively"},
      {"runs", run_summaries}};
  emit_run_files(outdir, cfg, summary, tables, plot);
  return summary;
}

json run_experiment(const json& config, const fs::path& outdir, int threads) {
  const json cfg = validate_config(config);
  const std::string exp = cfg.at("experiment").get<std::string>();
  if (exp == "spectrum_scan") return run_spectrum_scan(cfg, outdir, threads);
  if (exp == "chern") return run_chern(cfg, outdir, threads);
  if (exp == "zak") return run_zak(cfg, outdir, threads);
  if (exp == "edge_profile") return run_edge_profile(cfg, outdir, threads);
  return run_pump(cfg, outdir, threads);
}

}  // namespace nhrm
