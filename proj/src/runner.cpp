#include "qratio/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "json.hpp"
#include "qratio/catalog.hpp"
#include "qratio/constants.hpp"
#include "qratio/decoherence.hpp"
#include "qratio/error.hpp"
#include "qratio/gaussian_packet.hpp"
#include "qratio/quantum_ratio.hpp"
#include "qratio/spin_coherent.hpp"
#include "qratio/stern_gerlach.hpp"
#include "qratio/talbot.hpp"
#include "qratio/tunneling.hpp"

namespace qratio::io {

namespace {

using json = nlohmann::ordered_json;

std::size_t count(const ScenarioConfig& c, std::string_view key) {
  return static_cast<std::size_t>(c.integer(key));
}

std::string table_name(std::string_view stem, TableFormat f) {
  return std::string(stem) + "." + std::string(format_extension(f));
}

void add_table(RunOutput& out, std::string_view stem, const Table& t, TableFormat f) {
  out.files.push_back({table_name(stem, f), render_table(t, f)});
}

// One-row table of named scalars; the summary of scenario runs.
Table scalar_table(const std::vector<std::pair<std::string, Cell>>& values) {
  Table t;
  std::vector<Cell> row;
  for (const auto& [k, v] : values) {
    t.columns.push_back(k);
    row.push_back(v);
  }
  t.add(std::move(row));
  return t;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json cell_json(const Cell& v) {
  if (const auto* d = std::get_if<double>(&v)) return finite_or_null(*d);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  return std::get<std::string>(v);
}

// Scenario summaries are JSON objects whatever the table format.
void add_summary(RunOutput& out, const std::vector<std::pair<std::string, Cell>>& values) {
  json j = json::object();
  for (const auto& [k, v] : values) j[k] = cell_json(v);
  out.files.push_back({"summary.json", json_text(j)});
}

constexpr const char* kKernelNote = "F(d) = Lambda (1 - exp(-d^2 / lambda^2))";

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

Heatmap density_map(const grid::Grid& g, std::vector<double> values) {
  Heatmap m;
  m.rows = g.points[0];
  m.cols = g.dims == 1 ? 1 : g.points[1];
  m.row_origin = g.coord(0, 0);
  m.row_step = g.spacing(0);
  if (g.dims == 2) {
    m.col_origin = g.coord(1, 0);
    m.col_step = g.spacing(1);
  }
  m.values = std::move(values);
  return m;
}

json heatmap_axes(const Heatmap& m, std::string_view row_axis, std::string_view col_axis) {
  return json{{"format", "QRGRID"},
              {"version", kQrgridVersion},
              {"rows", {{"axis", row_axis}, {"unit", "m"}, {"count", m.rows}, {"origin", m.row_origin},
                        {"step", m.row_step}}},
              {"cols", {{"axis", col_axis}, {"unit", "m"}, {"count", m.cols}, {"origin", m.col_origin},
                        {"step", m.col_step}}}};
}

void add_heatmap(RunOutput& out, std::string_view stem, const Heatmap& m, std::string_view row_axis,
                 std::string_view col_axis, std::string_view render, json extra = json::object()) {
  out.files.push_back({std::string(stem) + ".qrgrid", encode_qrgrid(m)});
  json meta = heatmap_axes(m, row_axis, col_axis);
  for (auto& [k, v] : extra.items()) meta[k] = v;
  out.files.push_back({std::string(stem) + ".json", json_text(meta)});
  if (render == "pgm") out.files.push_back({std::string(stem) + ".pgm", render_pgm(m)});
  if (render == "svg") out.files.push_back({std::string(stem) + ".svg", render_svg_heatmap(m)});
}

// ---- ratio ------------------------------------------------------------------

RunOutput run_ratio(const ScenarioConfig& c, TableFormat f) {
  Table t{{"name", "size_m", "quantum_range_m", "Q", "class"}, {}};
  json objects = json::array();
  auto add = [&](const std::string& name, double size, double range) {
    const auto q = quantum_ratio(range, size);
    t.add({name, size, range, q.value, std::string(regime_name(q.regime))});
    objects.push_back({{"name", name}, {"size_m", size}, {"quantum_range_m", range},
                       {"Q", finite_or_null(q.value)}, {"class", regime_name(q.regime)}});
  };
  if (c.has("experiments")) {
    for (const auto& name : c.texts("experiments")) {
      const auto& e = Catalog::builtin().experiment(name);
      add(e.name, e.size_L0, e.quantum_range_Rq);
    }
  }
  for (const auto& b : c.bodies) add(b.name, body_real(b, "size"), body_real(b, "quantum_range"));

  RunOutput out;
  const json doc = objects.size() == 1 ? objects[0] : objects;
  if (f == TableFormat::Json) {
    out.primary = json_text(doc);
    out.files.push_back({"ratio.json", out.primary});
  } else {
    out.primary = to_csv(t);
    out.files.push_back({"ratio.csv", out.primary});
  }
  return out;
}

// ---- diffuse ----------------------------------------------------------------

RunOutput run_diffuse(const ScenarioConfig& c, TableFormat f) {
  Table t{{"name", "mass_kg", "width_m", "doubling_time_s"}, {}};
  const double width = c.real("width");
  if (c.has("particles")) {
    for (const auto& name : c.texts("particles")) {
      const auto& e = Catalog::builtin().lookup(name);
      const double mass = std::visit([](const auto& r) { return r.mass; }, e);
      t.add({name, mass, width, doubling_time(mass, width)});
    }
  }
  for (const auto& b : c.bodies) {
    const double w = body_has(b, "width") ? body_real(b, "width") : width;
    const double mass = body_real(b, "mass");
    t.add({b.name, mass, w, doubling_time(mass, w)});
  }
  RunOutput out;
  out.primary = render_table(t, f);
  add_table(out, "diffusion", t, f);
  return out;
}

// ---- spin-dist --------------------------------------------------------------

RunOutput run_spin(const ScenarioConfig& c, TableFormat f) {
  const auto& thetas = c.reals("theta");
  const double min_weight = c.real("min_weight");
  const bool exact = c.mode == "exact";
  RunOutput out;
  json summary = json::array();
  Table combined{{"theta", "k", "m", "weight"}, {}};
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const auto state = spin::SpinCoherentState::from_j(c.real("j"), thetas[i], c.real("phi"));
    const auto dist = exact ? spin::distribution(state) : spin::stirling_distribution(state);
    Table t{{"k", "m", "weight"}, {}};
    for (std::size_t k = 0; k < dist.weights.size(); ++k) {
      if (dist.weights[k] < min_weight) continue;
      const double m = dist.m(static_cast<int>(k));
      const auto ki = static_cast<std::int64_t>(k);
      t.add({ki, m, dist.weights[k]});
      combined.add({thetas[i], ki, m, dist.weights[k]});
    }
    add_table(out, thetas.size() == 1 ? "distribution" : "distribution_" + std::to_string(i), t, f);
    json entry{{"theta", thetas[i]},
               {"argmax_m", dist.m(dist.argmax())},
               {"j_cos_theta", state.j() * std::cos(thetas[i])},
               {"mean_m", dist.mean_m()},
               {"stddev_m", dist.stddev_m()},
               {"relative_width", dist.stddev_m() / state.j()}};
    // the large-spin weights are normalized over k by construction
    if (exact) {
      entry["normalization_defect"] = dist.normalization_defect;
      out.diagnostics["normalization_defect_" + std::to_string(i)] = dist.normalization_defect;
    }
    summary.push_back(std::move(entry));
  }
  out.files.push_back({"summary.json", json_text(json{{"j", c.real("j")}, {"method", c.mode}, {"states", summary}})});
  out.primary = thetas.size() == 1 ? out.files.front().bytes : render_table(combined, f);
  return out;
}

// ---- sg ---------------------------------------------------------------------

RunOutput run_sg_bands(const ScenarioConfig& c, TableFormat f) {
  sg::SGFieldConfig field{0.0, c.real("gradient"), c.real("region_length"), c.real("transit_speed")};
  const auto bands = sg::large_spin_bands(c.real("j"), c.real("theta"), c.real("phi"), field, c.real("drift_time"),
                                          c.real("mass"), c.real("moment") * kBohrMagneton);
  Table t{{"m", "z", "weight"}, {}};
  std::vector<double> zs, ws;
  for (const auto& b : bands) {
    t.add({b.m, b.z, b.weight});
    zs.push_back(b.z);
    ws.push_back(b.weight);
  }
  RunOutput out;
  out.primary = render_table(t, f);
  add_table(out, "bands", t, f);
  out.files.push_back({"bands.svg", render_svg_bars(zs, ws, "z (m)")});
  return out;
}

RunOutput run_sg_grid(const ScenarioConfig& c, TableFormat f) {
  const auto g = grid::Grid::plane(c.real("extent_y"), count(c, "points_y"), c.real("extent_z"), count(c, "points_z"));
  const double mass = c.real("mass");
  const std::array<GaussianPacket, 2> packets{GaussianPacket{0.0, c.real("width"), 0.0, mass},
                                              GaussianPacket{0.0, c.real("width"), 0.0, mass}};
  const double w = c.real("up_weight");
  const auto s0 = sg::make_spinor(g, packets, std::sqrt(w), std::sqrt(1.0 - w));
  const sg::SGFieldConfig field{c.real("field"), c.real("gradient"), 0.0, 0.0};
  const std::size_t steps = count(c, "steps");
  const double dt = c.real("duration") / static_cast<double>(steps);
  grid::PropagationOptions opt;
  opt.record_every = count(c, "record_every");

  RunOutput out;
  const auto decoupled = sg::propagate_decoupled(s0, field, dt, steps, opt);
  out.diagnostics["norm_drift_per_step"] =
      std::max(decoupled.stats[0].max_norm_drift_per_step, decoupled.stats[1].max_norm_drift_per_step);
  sg::SpinorField final = decoupled.spinor;
  if (c.mode == "coupled") {
    const auto coupled = sg::propagate_coupled(s0, field, dt, steps);
    out.diagnostics["coupled_norm_drift_per_step"] = coupled.max_norm_drift_per_step;
    out.diagnostics["population_change"] = coupled.max_population_change;
    out.diagnostics["l1_distance_to_decoupled"] = sg::density_l1_distance(coupled.spinor, decoupled.spinor);
    final = coupled.spinor;
  }
  std::optional<json> comparison;
  if (c.mode == "coupled") {
    comparison = json{{"field_T", field.B0},
                      {"gradient_T_per_m", field.gradient_b0},
                      {"field_ratio", std::abs(field.B0) / std::abs(field.gradient_b0 * 0.5 * c.real("extent_y"))},
                      {"l1_distance_to_decoupled", out.diagnostics["l1_distance_to_decoupled"]},
                      {"population_change", out.diagnostics["population_change"]},
                      {"coupled_norm_drift_per_step", out.diagnostics["coupled_norm_drift_per_step"]},
                      {"decoupled_norm_drift_per_step", out.diagnostics["norm_drift_per_step"]}};
  }

  Table bands{{"m", "z", "weight"}, {}};
  const double weights[2] = {std::norm(final.c_up), std::norm(final.c_down)};
  for (int a = 0; a < 2; ++a) {
    const auto& field_a = a == 0 ? final.up : final.down;
    bands.add({a == 0 ? 0.5 : -0.5, grid::observables(field_a).mean_position[1], weights[a]});
  }
  out.primary = render_table(bands, f);
  add_table(out, "bands", bands, f);

  const auto& tu = decoupled.traces[0];
  const auto& td = decoupled.traces[1];
  if (tu.size() > 0) {
    Table trace{{"t", "pz_up", "pz_down", "pz_expected"}, {}};
    double worst = 0.0;
    for (std::size_t i = 0; i < tu.size(); ++i) {
      const double expected = kBohrMagneton * field.gradient_b0 * tu.times[i];
      trace.add({tu.times[i], tu.mean_momentum[i][1], td.mean_momentum[i][1], expected});
      if (expected != 0.0) worst = std::max(worst, std::abs(tu.mean_momentum[i][1] / expected - 1.0));
    }
    out.diagnostics["momentum_relative_error"] = worst;
    add_table(out, "trace", trace, f);
  }
  auto up = final.density(0);
  const auto down = final.density(1);
  for (std::size_t i = 0; i < up.size(); ++i) up[i] += down[i];
  add_heatmap(out, "density", density_map(g, std::move(up)), "y", "z", "pgm");
  if (comparison) out.files.push_back({"comparison.json", json_text(*comparison)});
  return out;
}

// ---- tunnel -----------------------------------------------------------------

tunnel::BarrierSpec barrier_of(const ScenarioConfig& c) {
  if (c.text("barrier") == "rectangular") {
    return tunnel::BarrierSpec(tunnel::Rectangular{c.real("height"), 0.5 * c.real("width")});
  }
  return tunnel::BarrierSpec(tunnel::GaussianBarrier{c.real("height"), c.real("sigma")});
}

RunOutput run_tunnel_sweep(const ScenarioConfig& c, TableFormat f) {
  const auto barrier = barrier_of(c);
  const double mass = c.real("mass");
  Table t{{"E", "T_wkb", "T_exact"}, {}};
  for (double e : linspace(c.real("energy_min"), c.real("energy_max"), count(c, "energy_points"))) {
    t.add({e, tunnel::wkb_transmission(barrier, e, mass), tunnel::exact_transmission(barrier, e, mass)});
  }
  RunOutput out;
  out.primary = render_table(t, f);
  add_table(out, "transmission", t, f);
  return out;
}

RunOutput run_tunnel_scenario(const ScenarioConfig& c, TableFormat f) {
  const double mass = c.real("mass");
  tunnel::TunnelScenario sc;
  sc.barrier = barrier_of(c);
  sc.longitudinal = GaussianPacket{c.real("start"), c.real("longitudinal_width"),
                                   std::sqrt(2.0 * mass * c.real("energy")), mass};
  const double half = 0.5 * c.real("separation");
  sc.transverse = {GaussianPacket{-half, c.real("transverse_width"), 0.0, mass},
                   GaussianPacket{half, c.real("transverse_width"), 0.0, mass}};
  sc.c1 = std::sqrt(c.real("c1_weight"));
  sc.c2 = std::sqrt(1.0 - c.real("c1_weight"));
  sc.grid = grid::Grid::plane(c.real("extent_x"), count(c, "points_x"), c.real("extent_z"), count(c, "points_z"));
  sc.dt = c.real("dt");
  sc.max_steps = count(c, "max_steps");
  sc.check_every = count(c, "check_every");
  const bool decohered = c.mode == "decohered";
  std::optional<decoherence::EnvironmentSpec> env;
  if (decohered) env = decoherence::EnvironmentSpec{c.real("env_wavelength"), c.real("env_rate")};
  const auto r = tunnel::run_tunnel_scenario(sc, decohered, env);

  std::vector<std::pair<std::string, Cell>> s{
      {"mode", c.mode},
      {"tunneling_regime", std::int64_t{r.tunneling_regime}},
      {"energy_J", r.energy},
      {"steps", static_cast<std::int64_t>(r.steps)},
      {"elapsed_s", r.elapsed},
      {"transmitted", r.transmitted},
      {"reflected", r.reflected},
      {"expected_transmission", r.expected_transmission},
      {"central_transmission", r.central_transmission},
      {"wkb_central", r.wkb_central},
      {"input_visibility", r.input_visibility},
      {"output_visibility", r.output_visibility},
      {"coherence", r.coherence},
      {"weight_1", r.weights[0]},
      {"weight_2", r.weights[1]},
  };
  if (r.factorization_error) s.emplace_back("factorization_error", *r.factorization_error);
  const Table summary = scalar_table(s);

  RunOutput out;
  out.primary = render_table(summary, f);
  add_summary(out, s);
  Table transverse{{"x", "density"}, {}};
  for (std::size_t i = 0; i < r.transverse_density.size(); ++i) {
    transverse.add({sc.grid.coord(0, i), r.transverse_density[i]});
  }
  add_table(out, "transverse", transverse, f);
  add_heatmap(out, "density", density_map(sc.grid, r.density), "x", "z", "pgm");
  out.diagnostics["flux_error"] = std::abs(r.transmitted + r.reflected - 1.0);
  if (r.factorization_error) out.diagnostics["factorization_error"] = *r.factorization_error;
  if (decohered) out.notes["localization_kernel"] = kKernelNote;
  return out;
}

// ---- talbot -----------------------------------------------------------------

talbot::GratingSpec grating_of(const ScenarioConfig& c) {
  talbot::GratingSpec g;
  g.period = c.real("period");
  g.open_fraction = c.real("open_fraction");
  g.slit_count = static_cast<int>(c.integer("slits"));
  if (c.has("grating") && c.text("grating") == "phase") {
    g.kind = talbot::GratingKind::Phase;
    g.phase = c.real("phase");
  }
  return g;
}

RunOutput run_talbot_carpet(const ScenarioConfig& c, TableFormat f) {
  const auto g = grating_of(c);
  talbot::CarpetOptions opt;
  opt.points_per_period = count(c, "points_per_period");
  const double z_max = c.real("z_max");
  const auto carpet = talbot::propagate_carpet(g, c.real("wavelength"), z_max, count(c, "planes"), opt);

  Heatmap m;
  m.rows = carpet.z.size();
  m.cols = carpet.window_hi - carpet.window_lo;
  m.row_origin = 0.0;
  m.row_step = carpet.z.size() > 1 ? carpet.z[1] : 0.0;
  m.col_origin = carpet.x[carpet.window_lo];
  m.col_step = carpet.x[1] - carpet.x[0];
  m.values.reserve(m.rows * m.cols);
  for (std::size_t k = 0; k < m.rows; ++k) {
    const auto plane = carpet.plane(k);
    m.values.insert(m.values.end(), plane.begin() + static_cast<std::ptrdiff_t>(carpet.window_lo),
                    plane.begin() + static_cast<std::ptrdiff_t>(carpet.window_hi));
  }

  double drift = 0.0;
  for (double p : carpet.power) drift = std::max(drift, std::abs(p / carpet.power[0] - 1.0));
  const double lt = carpet.talbot_length;
  std::vector<std::pair<std::string, Cell>> s{
      {"talbot_length_m", lt}, {"z_max_m", z_max}, {"planes", static_cast<std::int64_t>(m.rows)},
      {"power_drift", drift}};
  for (const double frac : {0.5, 1.0, 2.0}) {
    if (frac * lt > z_max) continue;
    const std::string tag = frac == 0.5 ? "half" : frac == 1.0 ? "one" : "two";
    s.emplace_back("fidelity_" + tag + "_LT", talbot::revival_fidelity(carpet, frac * lt));
    s.emplace_back("shifted_" + tag + "_LT", talbot::shifted_correlation(carpet, frac * lt, 0.5 * g.period));
  }
  const Table summary = scalar_table(s);

  RunOutput out;
  out.primary = render_table(summary, f);
  add_summary(out, s);
  add_heatmap(out, "carpet", m, "z", "x", c.text("render"),
              json{{"quantity", "intensity, mean 1 over the window at z = 0+"},
                   {"period_m", g.period},
                   {"wavelength_m", c.real("wavelength")},
                   {"talbot_length_m", lt}});
  out.diagnostics["power_drift"] = drift;
  return out;
}

RunOutput run_talbot_lau(const ScenarioConfig& c, TableFormat f) {
  talbot::LauConfig cfg;
  cfg.source = cfg.diffraction = cfg.scan = grating_of(c);
  cfg.L1 = c.real("L1");
  cfg.L2 = c.real("L2");
  cfg.wavelength = c.real("wavelength");
  cfg.sources_per_slit = count(c, "sources_per_slit");
  cfg.points_per_period = count(c, "points_per_period");
  const double d = cfg.scan.period;
  const auto offsets = linspace(-d, d, count(c, "scan_points"));
  const auto curve = talbot::lau_scan(cfg, offsets);
  Table t{{"offset", "flux"}, {}};
  for (std::size_t i = 0; i < offsets.size(); ++i) t.add({offsets[i], curve.flux[i]});
  RunOutput out;
  out.primary = render_table(t, f);
  add_table(out, "lau", t, f);
  out.files.push_back({"summary.json", json_text(json{{"visibility", curve.visibility},
                                                       {"talbot_length_m", talbot::talbot_length(d, cfg.wavelength)},
                                                       {"L1_m", cfg.L1},
                                                       {"L2_m", cfg.L2}})});
  out.diagnostics["visibility"] = curve.visibility;
  return out;
}

// ---- decohere ---------------------------------------------------------------

RunOutput run_decohere_packets(const ScenarioConfig& c, TableFormat f) {
  const auto g = grid::Grid::line(c.real("extent"), count(c, "points"));
  const double mass = c.real("mass");
  const double half = 0.5 * c.real("separation");
  grid::WaveField field;
  field.grid = g;
  field.mass = mass;
  field.psi = ComplexBuffer(g.size());
  const auto a = grid::gaussian_samples(g, 0, GaussianPacket{-half, c.real("width"), 0.0, mass});
  const auto b = grid::gaussian_samples(g, 0, GaussianPacket{half, c.real("width"), 0.0, mass});
  for (std::size_t i = 0; i < g.size(); ++i) field.psi[i] = a[i] + b[i];
  const double scale = 1.0 / std::sqrt(field.norm());
  for (std::size_t i = 0; i < g.size(); ++i) field.psi[i] *= scale;

  const decoherence::EnvironmentSpec env{c.real("env_wavelength"), c.real("env_rate")};
  const std::size_t steps = count(c, "steps");
  const double dt = c.real("duration") / static_cast<double>(steps);
  std::optional<grid::PotentialSpec> potential;
  if (c.text("hamiltonian") == "free") potential = grid::PotentialSpec::free();
  const decoherence::Decoherer engine(g, mass, env, potential, dt);

  auto rho = decoherence::pure_to_density(field);
  const double trace0 = rho.trace();
  const double rate = decoherence::localization_rate(env, 2.0 * half);
  const std::size_t every = count(c, "record_every");
  Table t{{"t", "coherence", "trace", "damping"}, {}};
  Table purity{{"t", "purity"}, {}};
  double max_drift = 0.0, purity_rise = 0.0, last_purity = rho.purity();
  t.add({0.0, decoherence::coherence(rho, -half, half), trace0, 1.0});
  purity.add({0.0, last_purity});
  for (std::size_t s = 1; s <= steps; ++s) {
    engine.step(rho);
    const double tr = rho.trace();
    max_drift = std::max(max_drift, std::abs(tr - trace0));
    if (s % every == 0 || s == steps) {
      const double p = rho.purity();
      purity_rise = std::max(purity_rise, p - last_purity);
      last_purity = p;
      const double time = dt * static_cast<double>(s);
      t.add({time, decoherence::coherence(rho, -half, half), tr, std::exp(-rate * time)});
      purity.add({time, p});
    }
  }
  RunOutput out;
  out.primary = render_table(t, f);
  add_table(out, "coherence", t, f);
  add_table(out, "purity", purity, f);
  std::vector<double> mag(rho.rho.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(rho.rho[i]);
  Heatmap m;
  m.rows = m.cols = rho.n();
  m.row_origin = m.col_origin = g.coord(0, 0);
  m.row_step = m.col_step = g.spacing(0);
  m.values = std::move(mag);
  add_heatmap(out, "density_matrix", m, "x", "x'", "pgm", json{{"quantity", "|rho(x, x')|, 1/m"}});
  out.diagnostics["max_trace_drift"] = max_drift;
  out.diagnostics["max_purity_increase"] = purity_rise;
  out.diagnostics["min_eigenvalue"] = decoherence::min_eigenvalue(rho);
  out.notes["localization_kernel"] = kKernelNote;
  return out;
}

RunOutput run_decohere_sg(const ScenarioConfig& c, TableFormat f) {
  decoherence::SGDecoherenceConfig cfg;
  cfg.grid = grid::Grid::line(c.real("extent"), count(c, "points"));
  cfg.packet = GaussianPacket{0.0, c.real("width"), 0.0, c.real("mass")};
  cfg.c_up = std::sqrt(c.real("up_weight"));
  cfg.c_down = std::sqrt(1.0 - c.real("up_weight"));
  cfg.field = sg::SGFieldConfig{0.0, c.real("gradient"), 0.0, 0.0};
  cfg.env = {c.real("env_wavelength"), c.real("env_rate")};
  cfg.duration = c.real("duration");
  cfg.steps = count(c, "steps");
  cfg.record_every = count(c, "record_every");
  const auto r = decoherence::decohered_sg_scenario(cfg);

  Table bands{{"m", "z", "intensity", "pure_intensity", "weight"}, {}};
  for (int a = 0; a < 2; ++a) {
    bands.add({a == 0 ? 0.5 : -0.5, r.band_centres[a], r.intensities[a], r.pure_intensities[a], r.band_weights[a]});
  }
  RunOutput out;
  out.primary = render_table(bands, f);
  add_table(out, "bands", bands, f);
  if (!r.times.empty()) {
    Table t{{"t", "coherence"}, {}};
    for (std::size_t i = 0; i < r.times.size(); ++i) t.add({r.times[i], r.coherence_trace[i]});
    add_table(out, "coherence", t, f);
  }
  out.files.push_back({"summary.json", json_text(json{{"expected_ratio", r.expected_ratio},
                                                       {"interband_coherence", r.interband_coherence},
                                                       {"max_trace_drift", r.max_trace_drift}})});
  out.diagnostics["max_trace_drift"] = r.max_trace_drift;
  out.diagnostics["intensity_deviation"] = std::abs(r.intensities[0] - r.pure_intensities[0]);
  out.notes["localization_kernel"] = kKernelNote;
  return out;
}

RunOutput run_decohere_timescales(const ScenarioConfig& c, TableFormat) {
  decoherence::TimescaleInputs in;
  in.packet_width = c.real("width");
  in.separation = c.real("separation");
  in.env = {c.real("env_wavelength"), c.real("env_rate")};
  in.transit_length = c.real("transit_length");
  in.transit_speed = c.real("transit_speed");
  in.mass = c.real("mass");
  in.tau_diss = c.real("tau_diss");
  const auto r = decoherence::timescale_report(in);
  RunOutput out;
  out.primary = json_text(json{{"tau_dec_s", r.tau_dec},
                               {"tau_trans_s", r.tau_trans},
                               {"tau_diff_s", r.tau_diff},
                               {"tau_diss_s", r.tau_diss},
                               {"timescales_ordered", r.timescales_ordered},
                               {"packets_separated", r.packets_separated},
                               {"wavelength_between", r.wavelength_between},
                               {"random_motion", r.random_motion},
                               {"verdict", r.verdict}});
  out.files.push_back({"timescales.json", out.primary});
  out.notes["localization_kernel"] = kKernelNote;
  return out;
}

}  // namespace

TableFormat default_format(ScenarioKind kind) {
  return kind == ScenarioKind::Ratio ? TableFormat::Json : TableFormat::Csv;
}

RunOutput execute(const ScenarioConfig& c, const RunOptions& options) {
  const TableFormat f = options.format.value_or(default_format(c.kind));
  using K = ScenarioKind;
  switch (c.kind) {
    case K::Ratio: return run_ratio(c, f);
    case K::Diffuse: return run_diffuse(c, f);
    case K::SpinDist: return run_spin(c, f);
    case K::SG: return c.mode == "bands" ? run_sg_bands(c, f) : run_sg_grid(c, f);
    case K::Tunnel: return c.mode == "sweep" ? run_tunnel_sweep(c, f) : run_tunnel_scenario(c, f);
    case K::Talbot: return c.mode == "carpet" ? run_talbot_carpet(c, f) : run_talbot_lau(c, f);
    case K::Decohere:
      if (c.mode == "packets") return run_decohere_packets(c, f);
      if (c.mode == "sg") return run_decohere_sg(c, f);
      return run_decohere_timescales(c, f);
  }
  throw ConfigError("unhandled scenario kind");
}

std::string RunManifest::to_json() const {
  json files_json = json::array();
  for (const auto& e : files) files_json.push_back({{"name", e.name}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  json diag = json::object();
  for (const auto& [k, v] : diagnostics) diag[k] = finite_or_null(v);
  json notes_json = json::object();
  for (const auto& [k, v] : notes) notes_json[k] = v;
  return json_text(json{{"tool", "qratio"},
                        {"version", tool_version},
                        {"kind", kind},
                        {"mode", mode},
                        {"seed", seed},
                        {"config_hash", config_hash},
                        {"wall_time_s", wall_time},
                        {"diagnostics", diag},
                        {"notes", notes_json},
                        {"files", files_json}});
}

RunManifest write_run(const std::filesystem::path& dir, const ScenarioConfig& config, const RunOutput& output,
                      double wall_time) {
  std::filesystem::create_directories(dir);
  const std::string canonical = serialize_config(config);
  RunManifest m;
  m.tool_version = QRATIO_VERSION;
  m.kind = std::string(kind_name(config.kind));
  m.mode = config.mode;
  m.seed = config.seed;
  m.config_hash = sha256_hex(canonical);
  m.wall_time = wall_time;
  m.diagnostics = output.diagnostics;
  m.notes = output.notes;
  auto write = [&](const std::string& name, const std::string& bytes) {
    if (name == kManifestName || name.find('/') != std::string::npos) throw Error("invalid output name '" + name + "'");
    write_file_atomic(dir / name, bytes);
    m.files.push_back({name, bytes.size(), sha256_hex(bytes)});
  };
  write(kConfigCopyName, canonical);
  for (const auto& a : output.files) write(a.name, a.bytes);
  write_file_atomic(dir / kManifestName, m.to_json());
  return m;
}

RunManifest run(const ScenarioConfig& config, const std::filesystem::path& dir, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto output = execute(config, options);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return write_run(dir, config, output, wall);
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  const auto doc = json::parse(read_file(dir / kManifestName));
  std::vector<std::string> bad;
  for (const auto& e : doc.at("files")) {
    const auto name = e.at("name").get<std::string>();
    std::error_code ec;
    if (!std::filesystem::exists(dir / name, ec)) {
      bad.push_back(name);
      continue;
    }
    const auto bytes = read_file(dir / name);
    if (bytes.size() != e.at("bytes").get<std::uint64_t>() || sha256_hex(bytes) != e.at("sha256").get<std::string>()) {
      bad.push_back(name);
    }
  }
  return bad;
}

std::vector<BatchItem> run_batch(const std::vector<ScenarioConfig>& configs, const std::filesystem::path& root,
                                 unsigned threads, const RunOptions& options) {
  std::vector<BatchItem> items(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%03zu", i);
    items[i].dir = root / (std::string(prefix) + "-" + std::string(kind_name(configs[i].kind)) + "-" + configs[i].mode);
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        items[i].manifest = run(configs[i], items[i].dir, options);
      } catch (const Error& e) {
        items[i].error_kind = e.kind();
        items[i].error = e.what();
      } catch (const std::exception& e) {
        items[i].error_kind = "error";
        items[i].error = e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  return items;
}

}  // namespace qratio::io
