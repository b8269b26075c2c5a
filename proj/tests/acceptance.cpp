// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "vqrf/baseline.hpp"
#include "vqrf/harness.hpp"

using namespace vqrf;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- counts

void counts() {
  const auto lstm = count_parameters(Lstm{});
  report(1, "LSTM parameter count", lstm == 17282, fmt("%zu (expected 17282)", lstm));

  const auto head = Head{}.num_params();
  const auto ansatz = build_ansatz(AnsatzShape{}).num_params();
  report(2, "MLP head and ansatz parameter counts", head == 9794 && ansatz == 145,
         fmt("head %zu (expected 9794), ansatz %zu (expected 145)", head, ansatz));
}

// ------------------------------------------------------------- gradients

void gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi), w(-1, 1);

  double worst_ps = 0;
  for (int i = 0; i < 20; ++i) {
    const auto circuit = test::random_circuit(3, 8, 16, rng);
    std::vector<double> p(8);
    for (auto& x : p) x = ang(rng);
    const std::vector<double> weights{w(rng), w(rng), w(rng)};
    const StateFunctional f = [&](const StateVector& s) {
      const auto z = expectations_z(s);
      return weights[0] * z[0] + weights[1] * z[1] + weights[2] * z[2];
    };
    const auto ps = parameter_shift_grad(circuit, p, f);
    const auto fd = test::finite_difference(
        [&](std::span<const double> x) { return f(circuit.prepare(x)); }, p, 1e-5);
    worst_ps = std::max(worst_ps, test::relative_error(ps, fd));
  }

  // Full-size hybrid model, dropout off, two samples; every lambda and gamma.
  Rng mrng(11);
  HybridModel model;
  model.init(mrng);
  const std::vector<Example> batch{{interaction_params({0.9, -0.4}, 1.0), 0},
                                   {interaction_params({-0.3, 0.2}, 1.0), 1}};
  const auto g = model.grad(batch, LossKind::kCrossEntropy, false, nullptr);
  std::vector<double> joint(g.d_lambda);
  joint.insert(joint.end(), g.d_gamma.begin(), g.d_gamma.end());
  std::vector<double> x0(model.lambda().begin(), model.lambda().end());
  x0.insert(x0.end(), model.head().params().begin(), model.head().params().end());
  const std::size_t nl = model.lambda().size();
  auto hybrid_loss = [&](std::span<const double> x) {
    HybridModel m = model;
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nl), m.lambda().begin());
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(nl), x.end(), m.head().params().begin());
    double total = 0;
    for (const auto& ex : batch) {
      total += cross_entropy(m.forward(ex.field).logits, ex.label);
    }
    return total / static_cast<double>(batch.size());
  };
  // gamma differences reuse the probe features.
  std::vector<Eigen::VectorXd> feats;
  for (const auto& ex : batch) feats.push_back(model.sense(ex.field));
  auto head_loss = [&](std::span<const double> gamma) {
    Head h(model.head().shape());
    std::copy(gamma.begin(), gamma.end(), h.params().begin());
    double total = 0;
    for (std::size_t m = 0; m < batch.size(); ++m) {
      total += cross_entropy(h.forward(feats[m], false, nullptr), batch[m].label);
    }
    return total / static_cast<double>(batch.size());
  };
  auto fd = test::finite_difference(
      [&](std::span<const double> l) {
        std::vector<double> x(x0);
        std::copy(l.begin(), l.end(), x.begin());
        return hybrid_loss(x);
      },
      std::vector<double>(x0.begin(), x0.begin() + static_cast<std::ptrdiff_t>(nl)), 1e-6);
  const auto fd_gamma = test::finite_difference(
      head_loss, std::vector<double>(x0.begin() + static_cast<std::ptrdiff_t>(nl), x0.end()), 1e-6);
  fd.insert(fd.end(), fd_gamma.begin(), fd_gamma.end());
  const double hybrid_err = test::relative_error(joint, fd);

  Rng lrng(5);
  Lstm lstm;
  lstm.init_uniform(lrng);
  const std::vector<double> seq{0.7, -2.4, 1.9};
  std::vector<double> lg(lstm.num_params(), 0.0);
  lstm.backward(seq, 1, LossKind::kCrossEntropy, lg);
  std::vector<double> lp(lstm.params().begin(), lstm.params().end());
  const auto lfd = test::finite_difference(
      [&](std::span<const double> p) {
        Lstm l;
        std::copy(p.begin(), p.end(), l.params().begin());
        return cross_entropy(l.forward(seq), 1);
      },
      lp, 1e-6);
  const double lstm_err = test::relative_error(lg, lfd);

  const double secs = seconds_since(t0);
  report(3, "gradient correctness",
         worst_ps < 1e-5 && hybrid_err < 1e-4 && lstm_err < 1e-4 && secs < 60,
         fmt("parameter shift %.2e (<1e-5), hybrid %.2e (<1e-4), LSTM %.2e (<1e-4), %.1f s",
             worst_ps, hybrid_err, lstm_err, secs));
}

// -------------------------------------------------------------- physics

void physics() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi), u(-2, 2);
  std::uniform_int_distribution<int> q(0, 4), kind(0, 3);

  auto s = test::random_state(5, rng);
  double worst_norm = 0;
  for (int i = 0; i < 1000; ++i) {
    const int a = q(rng);
    int b = q(rng);
    while (b == a) b = q(rng);
    switch (kind(rng)) {
      case 0: apply_gate(s, GateOp::rx(a, ang(rng))); break;
      case 1: apply_gate(s, GateOp::ry(a, ang(rng))); break;
      case 2: apply_gate(s, GateOp::rz(a, ang(rng))); break;
      default: apply_gate(s, GateOp::rzz(a, b, ang(rng)));
    }
    worst_norm = std::max(worst_norm, std::abs(s.norm_squared() - 1.0));
  }

  double worst_unitary = 0, worst_branch = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto fi = interaction_params({u(rng), u(rng)}, std::abs(u(rng)) + 0.01,
                                       i % 2 ? u(rng) : 0.0);
    const Mat2 m = interaction_unitary(fi);
    const Mat2 p = matmul(m, adjoint(m));
    const Mat2 id{1, 0, 0, 1};
    for (int k = 0; k < 4; ++k) worst_unitary = std::max(worst_unitary, std::abs(p[k] - id[k]));
    if (fi.detuning == 0.0) {
      const Mat2 axis = interaction_unitary_axis(fi);
      const Mat2 dec =
          matmul(rz_matrix(fi.phi), matmul(rx_matrix(fi.omega * fi.t_int), rz_matrix(-fi.phi)));
      for (int k = 0; k < 4; ++k) worst_branch = std::max(worst_branch, std::abs(axis[k] - dec[k]));
    }
  }

  // Omega t = pi on the all-zeros probe.
  HybridModel model;
  const auto before = model.sense(interaction_params({0, 0}, 1.0));
  const auto after = model.sense(interaction_params({0.37, -1.1}, std::numbers::pi / std::abs(Complex{0.37, -1.1})));
  double worst_flip = 0;
  for (Eigen::Index n = 0; n < after.size(); ++n) {
    worst_flip = std::max({worst_flip, std::abs(before[n] - 1.0), std::abs(after[n] + 1.0)});
  }

  report(4, "physics invariants",
         worst_norm < 1e-10 && worst_unitary < 1e-12 && worst_branch < 1e-12 && worst_flip < 1e-10,
         fmt("norm drift %.1e, unitarity %.1e, axis vs Rz.Rx.Rz %.1e, pi-pulse %.1e", worst_norm,
             worst_unitary, worst_branch, worst_flip));
}

// ------------------------------------------------------------ ray tracer

void raytracer() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2718);
  int matched = 0;
  bool delay_exact = true;
  for (int i = 0; i < 100; ++i) {
    const auto rs = test::random_small_scene(rng);
    matched += validate_against_oracle(rs.scene, rs.receiver, RadioConfig{}) ? 1 : 0;
    for (const auto& p : trace_paths(rs.scene, rs.receiver, RadioConfig{}).paths) {
      delay_exact = delay_exact && p.delay_s == p.length_m / kSpeedOfLight;
    }
  }
  const auto wall = test::open_scene({{0, 0}}, {{-20, 20, 5, 6}, {4.9, 5.1, -1, 1}});
  RadioConfig one;
  one.max_order = 1;
  const auto set = trace_paths(wall, {10, 0}, one);
  const double d = set.paths.size() == 1 ? set.paths[0].length_m : -1.0;
  const double secs = seconds_since(t0);
  report(5, "ray tracer oracle equivalence",
         matched == 100 && delay_exact && std::abs(d - std::sqrt(200.0)) < 1e-9 && secs < 60,
         fmt("%d/100 scenes match, tau = d/c %s, one-wall d = %.10f, %.1f s", matched,
             delay_exact ? "exact" : "violated", d, secs));
}

// ---------------------------------------------------------------- field

void field() {
  const double w = angular_frequency(2.14e9);
  const auto scene = load_scene_file(test::canonical_scene_path());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(-70, 70), uy(-30, 70), shift(0, 1e-6);
  double worst_shift = 0;
  for (int i = 0; i < 200; ++i) {
    const Vec2 rx{ux(rng), uy(rng)};
    if (scene.inside_building(rx)) continue;
    auto set = trace_paths(scene, rx, RadioConfig{});
    const double base = std::abs(superpose(set, w));
    if (base == 0.0) continue;
    const double dt = shift(rng);
    for (auto& p : set.paths) p.delay_s += dt;
    worst_shift = std::max(worst_shift, std::abs(std::abs(superpose(set, w)) - base) / base);
  }

  const Mat2 empty = interaction_unitary(interaction_params(superpose(PathSet{}, w), 1.0));
  double id_err = 0;
  const Mat2 id{1, 0, 0, 1};
  for (int k = 0; k < 4; ++k) id_err = std::max(id_err, std::abs(empty[k] - id[k]));

  // Two equal paths half a carrier period apart.
  PathSet pair;
  Path a;
  a.length_m = 30.0;
  a.delay_s = a.length_m / kSpeedOfLight;
  a.gain = path_gain(a.length_m, 0, kSpeedOfLight / 2.14e9, RadioConfig{});
  Path b = a;
  b.delay_s += 0.5 / 2.14e9;
  pair.paths = {a, b};
  const double cancel = std::abs(superpose(pair, w));

  report(6, "field-model invariants", worst_shift < 1e-10 && id_err == 0.0 && cancel < 1e-12,
         fmt("delay-shift |Xi| drift %.1e, empty field identity error %.1e, cancellation |Xi| = %.1e",
             worst_shift, id_err, cancel));
}

// -------------------------------------------------------------- learning

struct TrialOutcome {
  std::string csv;
  std::string dataset;
  double first_loss = 0;
  double final_loss = 0;
  double final_accuracy = 0;
  double majority = 0;
  double seconds = 0;
};

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "vqrf_acceptance";
  fs::create_directories(dir);
  return dir;
}

TrialOutcome run_trials_cli(const std::string& target, const std::string& tag) {
  ExperimentConfig c;
  c.scene_path = test::canonical_scene_path();
  c.target = target;
  c.epochs = 30;
  c.models = {ModelKind::kHybrid};
  const fs::path dir = work_dir() / tag;
  fs::create_directories(dir);
  const fs::path config = dir / "config.json";
  write_text_file(config.string(), to_json(c).dump(2));

  std::string a0 = "vqrf", a1 = "trials", a2 = "--config", a3 = config.string(), a4 = "--out",
              a5 = (dir / "out").string();
  char* argv[] = {a0.data(), a1.data(), a2.data(), a3.data(), a4.data(), a5.data()};
  const auto t0 = Clock::now();
  if (run_cli(6, argv) != 0) throw std::runtime_error("trials run failed for target " + target);

  TrialOutcome out;
  out.seconds = seconds_since(t0);
  out.csv = read_text_file((dir / "out" / "metrics_hybrid.csv").string());
  out.dataset = read_text_file((dir / "out" / "dataset.jsonl").string());

  std::istringstream in(out.csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6 || cells[1] != "mean") continue;
    const int epoch = std::stoi(cells[0]);
    if (epoch == 1) out.first_loss = std::stod(cells[2]);
    if (epoch == static_cast<int>(c.epochs)) {
      out.final_loss = std::stod(cells[2]);
      out.final_accuracy = std::stod(cells[5]);
    }
  }
  std::vector<int> test_labels;
  for (const auto& r : parse_dataset(out.dataset).records) {
    if (r.split == Split::kTest) test_labels.push_back(r.label);
  }
  out.majority = majority_rate(test_labels);
  return out;
}

bool loss_halves(const TrialOutcome& o) { return o.final_loss < 0.5 * o.first_loss; }

void learning() {
  const auto a = run_trials_cli("A", "target_a");
  const bool a_ok = loss_halves(a) && a.final_accuracy >= a.majority + 0.15 && a.seconds < 1800;
  report(7, "learning sanity, target A", a_ok,
         fmt("train loss %.4f -> %.4f (ratio %.3f, need < 0.5); accuracy %.4f vs majority %.4f "
             "(need >= +0.15); %.0f s",
             a.first_loss, a.final_loss, a.final_loss / a.first_loss, a.final_accuracy, a.majority,
             a.seconds));

  const auto b = run_trials_cli("B", "target_b");
  report(8, "occluded target B", loss_halves(b) && a.final_accuracy >= b.final_accuracy,
         fmt("train loss %.4f -> %.4f (ratio %.3f, need < 0.5); accuracy A %.4f >= B %.4f", b.first_loss,
             b.final_loss, b.final_loss / b.first_loss, a.final_accuracy, b.final_accuracy));

  const auto again = run_trials_cli("A", "target_a_repeat");
  report(9, "determinism", again.csv == a.csv && again.dataset == a.dataset,
         fmt("metrics CSV %s, dataset %s across two runs",
             again.csv == a.csv ? "identical" : "differs",
             again.dataset == a.dataset ? "identical" : "differs"));
}

}  // namespace

int main() {
  try {
    counts();
    gradients();
    physics();
    raytracer();
    field();
    learning();
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
