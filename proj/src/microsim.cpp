#include "wasep/microsim.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <random>
#include <thread>

namespace wasep {
namespace {

constexpr int kMaxExactN = 7;

}  // namespace

double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

LatticeConfig::LatticeConfig(int n) : N(n), occupation(static_cast<std::size_t>(2 * n - 1), 0) {
  if (n < 2) throw NumericalError(ErrorKind::invalid_input, "lattice needs N >= 2");
}

LatticeConfig::LatticeConfig(int n, std::vector<std::uint8_t> occ) : N(n), occupation(std::move(occ)) {
  if (n < 2 || occupation.size() != static_cast<std::size_t>(2 * n - 1))
    throw NumericalError(ErrorKind::invalid_input, "lattice needs N >= 2 and 2N - 1 sites");
  for (auto o : occupation)
    if (o > 1) throw NumericalError(ErrorKind::invalid_input, "occupations must be 0 or 1");
}

LatticeConfig LatticeConfig::from_state(int n, std::uint32_t bits) {
  LatticeConfig c(n);
  for (int i = 0; i < c.sites(); ++i) c.occupation[i] = (bits >> i) & 1u;
  return c;
}

std::uint32_t LatticeConfig::state() const {
  std::uint32_t s = 0;
  for (int i = 0; i < sites(); ++i) s |= static_cast<std::uint32_t>(occupation[i]) << i;
  return s;
}

int LatticeConfig::particles() const {
  int k = 0;
  for (auto o : occupation) k += o;
  return k;
}

std::vector<Transition> jump_rates(const LatticeConfig& c, const Params& p, int N) {
  const double scale = 0.5 * N * N;
  const double w = p.field() / (2.0 * N);
  const double right = scale * std::exp(w), left = scale * std::exp(-w);
  const int L = c.sites();
  std::vector<Transition> out;
  out.reserve(static_cast<std::size_t>(L) + 2);
  for (int i = 0; i + 1 < L; ++i) {
    if (c.occupation[i] && !c.occupation[i + 1]) out.push_back({MoveKind::hop_right, i, right});
    if (!c.occupation[i] && c.occupation[i + 1]) out.push_back({MoveKind::hop_left, i + 1, left});
  }
  // c_-(z) = rho_- e^{E/2N} (1 - z) + (1 - rho_-) e^{-E/2N} z, mirrored at the right end.
  if (c.occupation[0]) out.push_back({MoveKind::annihilate, 0, scale * (1.0 - p.rho_minus()) * std::exp(-w)});
  else out.push_back({MoveKind::create, 0, scale * p.rho_minus() * std::exp(w)});
  if (c.occupation[L - 1]) out.push_back({MoveKind::annihilate, L - 1, scale * (1.0 - p.rho_plus()) * std::exp(w)});
  else out.push_back({MoveKind::create, L - 1, scale * p.rho_plus() * std::exp(-w)});
  return out;
}

LatticeConfig apply(const LatticeConfig& c, const Transition& m) {
  LatticeConfig out = c;
  switch (m.kind) {
    case MoveKind::hop_right: out.occupation[m.site] = 0; out.occupation[m.site + 1] = 1; break;
    case MoveKind::hop_left: out.occupation[m.site] = 0; out.occupation[m.site - 1] = 1; break;
    case MoveKind::create: out.occupation[m.site] = 1; break;
    case MoveKind::annihilate: out.occupation[m.site] = 0; break;
  }
  return out;
}

double product_measure(const LatticeConfig& c, const Params& p) {
  const int N = c.N;
  double mu = 1.0;
  for (int i = 0; i < c.sites(); ++i) {
    const int x = i - N + 1;
    const double phi = p.phi_minus() * (N - x) / (2.0 * N) + p.phi_plus() * (N + x) / (2.0 * N);
    const double r = density_of_potential(phi);
    mu *= c.occupation[i] ? r : 1.0 - r;
  }
  return mu;
}

namespace {

void check_exact_size(int N) {
  if (N < 2 || N > kMaxExactN)
    throw NumericalError(ErrorKind::dimension_guard, "exact solves limited to 2 <= N <= 7");
}

// Generator entries (from, to, rate), the diagonal included.
std::vector<Eigen::Triplet<double>> generator_entries(const Params& p, int N) {
  const Index S = Index{1} << (2 * N - 1);
  std::vector<Eigen::Triplet<double>> entries;
  for (Index s = 0; s < S; ++s) {
    const LatticeConfig c = LatticeConfig::from_state(N, static_cast<std::uint32_t>(s));
    double out = 0.0;
    for (const Transition& t : jump_rates(c, p, N)) {
      entries.emplace_back(s, apply(c, t).state(), t.rate);
      out += t.rate;
    }
    entries.emplace_back(s, s, -out);
  }
  return entries;
}

}  // namespace

Eigen::SparseMatrix<double> generator_matrix(const Params& p, int N) {
  check_exact_size(N);
  const Index S = Index{1} << (2 * N - 1);
  const auto entries = generator_entries(p, N);
  Eigen::SparseMatrix<double> Q(S, S);
  Q.setFromTriplets(entries.begin(), entries.end());
  return Q;
}

ExactStationary exact_stationary(const Params& p, int N) {
  // mu Q = 0 as Q^T mu = 0, with the last equation replaced by sum mu = 1.
  check_exact_size(N);
  const Index S = Index{1} << (2 * N - 1);
  std::vector<Eigen::Triplet<double>> entries;
  for (const auto& e : generator_entries(p, N))
    if (e.col() != S - 1) entries.emplace_back(e.col(), e.row(), e.value());
  for (Index s = 0; s < S; ++s) entries.emplace_back(S - 1, s, 1.0);
  Eigen::SparseMatrix<double> A(S, S);
  A.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw NumericalError(ErrorKind::singular_matrix, "generator factorization failed");
  Vec rhs = Vec::Zero(S);
  rhs(S - 1) = 1.0;
  Vec mu = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw NumericalError(ErrorKind::singular_matrix, "generator solve failed");
  return {N, mu};
}

double detailed_balance_defect(const ExactStationary& ex, const Params& p) {
  const int N = ex.N;
  double worst = 0.0;
  for (Index s = 0; s < ex.mu.size(); ++s) {
    const LatticeConfig c = LatticeConfig::from_state(N, static_cast<std::uint32_t>(s));
    for (const Transition& t : jump_rates(c, p, N)) {
      const LatticeConfig d = apply(c, t);
      const Index b = d.state();
      double back = 0.0;
      for (const Transition& r : jump_rates(d, p, N))
        if (apply(d, r).state() == static_cast<std::uint32_t>(s)) back = r.rate;
      worst = std::max(worst, std::abs(ex.mu(s) * t.rate - ex.mu(b) * back));
    }
  }
  return worst;
}

Vec site_marginals(const ExactStationary& ex) {
  const int L = 2 * ex.N - 1;
  Vec m = Vec::Zero(L);
  for (Index s = 0; s < ex.mu.size(); ++s)
    for (int i = 0; i < L; ++i)
      if ((s >> i) & 1) m(i) += ex.mu(s);
  return m;
}

double product_fit_distance(const ExactStationary& ex) {
  const Vec m = site_marginals(ex);
  const int L = static_cast<int>(m.size());
  double tv = 0.0;
  for (Index s = 0; s < ex.mu.size(); ++s) {
    double q = 1.0;
    for (int i = 0; i < L; ++i) q *= ((s >> i) & 1) ? m(i) : 1.0 - m(i);
    tv += std::abs(ex.mu(s) - q);
  }
  return 0.5 * tv;
}

EmpiricalDensity empirical_density(const LatticeConfig& c, int N) {
  EmpiricalDensity e{1.0 / N, Vec(c.sites()), Vec(c.sites())};
  for (int i = 0; i < c.sites(); ++i) {
    e.centers(i) = static_cast<double>(i - N + 1) / N;
    e.values(i) = c.occupation[i];
  }
  return e;
}

std::uint64_t replica_seed(std::uint64_t master, int k) {
  std::uint64_t z = master + static_cast<std::uint64_t>(k) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TrajectorySample ctmc_simulate(const SimParams& sim, std::uint64_t seed) {
  if (!(sim.horizon > 0.0)) throw NumericalError(ErrorKind::invalid_input, "horizon must be positive");
  std::mt19937_64 gen(seed);
  LatticeConfig c(sim.N);
  const int L = c.sites();
  const double start = std::min(sim.burn_in, sim.horizon);

  // Uniformization: proposals arrive at the constant rate `total`; a proposal
  // is accepted with probability (actual rate) / (rate bound of its slot).
  const Params& p = sim.params;
  const double scale = 0.5 * sim.N * sim.N, w = p.field() / (2.0 * sim.N);
  const double right = scale * std::exp(w), left = scale * std::exp(-w), pair = right + left;
  const double in_l = scale * p.rho_minus() * std::exp(w), out_l = scale * (1.0 - p.rho_minus()) * std::exp(-w);
  const double in_r = scale * p.rho_plus() * std::exp(-w), out_r = scale * (1.0 - p.rho_plus()) * std::exp(w);
  const double bound_l = std::max(in_l, out_l), bound_r = std::max(in_r, out_r);
  const double bulk = (L - 1) * pair, total = bulk + bound_l + bound_r;

  TrajectorySample out{seed, sim.observe, {}, Vec::Zero(L), 0};
  std::vector<double> observe = sim.observe;
  std::sort(observe.begin(), observe.end());
  std::size_t next_obs = 0;

  // Lazy occupation integrals: site i has been in its current state since since[i].
  std::vector<double> since(static_cast<std::size_t>(L), start);
  auto flip = [&](int i, double t) {
    if (c.occupation[i] && t > since[i]) out.time_average(i) += t - since[i];
    since[i] = std::max(t, start);
    c.occupation[i] ^= 1u;
  };

  double t = 0.0;
  while (true) {
    const double t_next = t - std::log(1.0 - unit_uniform(gen)) / total;
    while (next_obs < observe.size() && observe[next_obs] < std::min(t_next, sim.horizon)) {
      out.snapshots.push_back(c);
      ++next_obs;
    }
    if (t_next >= sim.horizon) break;
    t = t_next;
    double x = unit_uniform(gen) * total;
    if (x < bulk) {
      const int i = std::min(static_cast<int>(x / pair), L - 2);
      x -= i * pair;
      const bool a = c.occupation[i], b = c.occupation[i + 1];
      if (x < right ? (a && !b) : (!a && b)) {
        flip(i, t);
        flip(i + 1, t);
        ++out.events;
      }
      continue;
    }
    x -= bulk;
    const bool left_end = x < bound_l;
    const int i = left_end ? 0 : L - 1;
    if (!left_end) x -= bound_l;
    const double rate = c.occupation[i] ? (left_end ? out_l : out_r) : (left_end ? in_l : in_r);
    if (x < rate) {
      flip(i, t);
      ++out.events;
    }
  }
  while (next_obs < observe.size() && observe[next_obs] <= sim.horizon) {
    out.snapshots.push_back(c);
    ++next_obs;
  }
  for (int i = 0; i < L; ++i)
    if (c.occupation[i] && sim.horizon > since[i]) out.time_average(i) += sim.horizon - since[i];
  const double span = sim.horizon - start;
  if (span > 0.0) out.time_average /= span;
  return out;
}

ProfileEstimate stationary_estimate(const SimParams& sim, int threads) {
  const int n = std::max(1, sim.n_samples);
  std::vector<TrajectorySample> runs(static_cast<std::size_t>(n), TrajectorySample{});
  threads = std::clamp(threads, 1, n);
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (int k = w; k < n; k += threads) runs[k] = ctmc_simulate(sim, replica_seed(sim.seed, k));
    });
  }
  for (auto& th : pool) th.join();

  const int L = 2 * sim.N - 1;
  ProfileEstimate est{Vec(L), Vec::Zero(L), Vec::Zero(L), 0};
  for (int i = 0; i < L; ++i) est.u(i) = static_cast<double>(i - sim.N + 1) / sim.N;
  for (const auto& r : runs) {
    est.mean += r.time_average;
    est.events += r.events;
  }
  est.mean /= n;
  if (n > 1) {
    Vec var = Vec::Zero(L);
    for (const auto& r : runs) var += (r.time_average - est.mean).cwiseAbs2();
    est.std_error = (var / (n - 1)).cwiseSqrt() / std::sqrt(static_cast<double>(n));
  }
  return est;
}

}  // namespace wasep
