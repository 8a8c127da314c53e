#include "altproj/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

namespace altproj {
namespace {

// Neumaier summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::map<long, long> prime_exponents(long p, long q) {
  std::map<long, long> out;
  auto factor = [&](long n, long sign) {
    for (long f = 2; f * f <= n; ++f) {
      while (n % f == 0) {
        out[f] += sign;
        n /= f;
      }
    }
    if (n > 1) out[n] += sign;
  };
  factor(p, 1);
  factor(q, -1);
  std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
  return out;
}

std::array<long, 2> reduced(long p, long q) {
  const long g = std::gcd(p, q);
  return {p / g, q / g};
}

}  // namespace

void BlockConstruction::validate() const {
  if (angles.empty()) throw PreconditionError("BlockConstruction: at least one block is required");
  if (coeffs.size() != angles.size()) {
    throw PreconditionError("BlockConstruction: angles and coeffs differ in length");
  }
  for (double a : angles) {
    if (!(a > 0.0 && a <= std::numbers::pi / 2)) {
      throw PreconditionError("BlockConstruction: angles must lie in (0, pi/2]");
    }
  }
  for (double c : coeffs) {
    if (!(c > 0.0 && std::isfinite(c))) throw PreconditionError("BlockConstruction: coeffs must be positive");
  }
}

BlockConstruction BlockConstruction::preset(double epsilon, std::size_t blocks) {
  if (!(epsilon > 0.0)) throw PreconditionError("BlockConstruction::preset: epsilon must be positive");
  if (blocks < 1) throw PreconditionError("BlockConstruction::preset: blocks must be >= 1");
  BlockConstruction cfg;
  cfg.epsilon = epsilon;
  for (std::size_t m = 1; m <= blocks; ++m) {
    const double md = static_cast<double>(m);
    cfg.angles.push_back(1.0 / md);
    cfg.coeffs.push_back(std::pow(md, -0.5 - epsilon));
  }
  return cfg;
}

BlockInstance block_family(const BlockConstruction& cfg) {
  cfg.validate();
  const Index M = static_cast<Index>(cfg.blocks());
  const Index d = 2 * M;
  Matrix b1 = Matrix::Zero(d, M), b2 = Matrix::Zero(d, M);
  Vector x0 = Vector::Zero(d);
  for (Index m = 0; m < M; ++m) {
    const double a = cfg.angles[static_cast<std::size_t>(m)];
    const double c = cfg.coeffs[static_cast<std::size_t>(m)];
    b1(2 * m, m) = 1.0;
    b2(2 * m, m) = std::cos(a);
    b2(2 * m + 1, m) = std::sin(a);
    // y1 + y2 = (0,1) + (sin a, -cos a)
    x0(2 * m) = c * std::sin(a);
    x0(2 * m + 1) = c * (1.0 - std::cos(a));
  }
  std::vector<Subspace> members{Subspace::from_orthonormal(std::move(b1)),
                                Subspace::from_orthonormal(std::move(b2))};
  double tail = std::numeric_limits<double>::quiet_NaN();
  if (!std::isnan(cfg.epsilon)) {
    const double e = cfg.epsilon;
    tail = std::pow(static_cast<double>(M), -2.0 - 2.0 * e) / (2.0 + 2.0 * e);
  }
  return {SubspaceFamily(std::move(members)), std::move(x0), tail};
}

double block_cyclic_norm_sq(const BlockConstruction& cfg, std::size_t n) {
  cfg.validate();
  if (n < 1) throw PreconditionError("block_cyclic_norm: n must be >= 1");
  CompensatedSum sum;
  const double power = 4.0 * static_cast<double>(n) - 2.0;
  for (std::size_t m = 0; m < cfg.blocks(); ++m) {
    const double a = cfg.angles[m];
    const double c = cfg.coeffs[m];
    const double s = std::sin(a);
    sum.add(c * c * s * s * std::pow(std::cos(a), power));
  }
  return sum.value();
}

double block_cyclic_norm(const BlockConstruction& cfg, std::size_t n) {
  return std::sqrt(block_cyclic_norm_sq(cfg, n));
}

BakersParams BakersParams::from_angles(double alpha, double beta, double gamma, double delta,
                                       double lambda0) {
  BakersParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.gamma = gamma;
  p.delta = delta;
  const double ca = std::cos(alpha), cb = std::cos(beta), cg = std::cos(gamma), cd = std::cos(delta);
  p.a = std::log((cb * cb) / (cg * cg));
  p.b = std::log((cd * cd) / (ca * ca));
  p.lambda0 = lambda0;
  return p;
}

BakersParams BakersParams::from_rational_cos2(std::array<long, 4> num, long den, double lambda0) {
  if (den <= 0) throw PreconditionError("BakersParams: denominator must be positive");
  for (long n : num) {
    if (n <= 0 || n >= den) throw PreconditionError("BakersParams: cos^2 values must lie in (0,1)");
  }
  auto angle = [&](long n) { return std::acos(std::sqrt(static_cast<double>(n) / static_cast<double>(den))); };
  BakersParams p;
  p.alpha = angle(num[0]);
  p.beta = angle(num[1]);
  p.gamma = angle(num[2]);
  p.delta = angle(num[3]);
  // Logs of exact ratios, not of rounded cosines.
  p.a = std::log(static_cast<double>(num[1]) / static_cast<double>(num[2]));
  p.b = std::log(static_cast<double>(num[3]) / static_cast<double>(num[0]));
  p.lambda0 = lambda0;
  p.cos2_numerators = num;
  p.cos2_denominator = den;
  return p;
}

BakersParams BakersParams::preset(double lambda0) { return from_rational_cos2({1, 3, 2, 4}, 11, lambda0); }

bool rational_powers_never_coincide(long p1, long q1, long p2, long q2) {
  if (p1 <= 0 || q1 <= 0 || p2 <= 0 || q2 <= 0) {
    throw PreconditionError("rational_powers_never_coincide: positive integers required");
  }
  const auto v1 = prime_exponents(p1, q1);
  const auto v2 = prime_exponents(p2, q2);
  if (v1.empty() || v2.empty()) return !(v1.empty() && v2.empty());
  // r1^m = r2^n with m, n >= 1 iff v2 is a positive multiple of v1.
  if (v1.size() != v2.size()) return true;
  const auto& [p0, e1] = *v1.begin();
  const auto it0 = v2.find(p0);
  if (it0 == v2.end()) return true;
  const long e2 = it0->second;
  if ((e1 > 0) != (e2 > 0)) return true;
  for (const auto& [prime, x1] : v1) {
    const auto it = v2.find(prime);
    if (it == v2.end() || it->second * e1 != x1 * e2) return true;
  }
  return false;
}

BakersConditions check_conditions(const BakersParams& p) {
  BakersConditions c;
  c.ordering = p.alpha > p.gamma && p.gamma > p.beta && p.beta > p.delta && p.delta > p.alpha / 2;
  if (p.cos2_denominator > 0) {
    const auto& n = p.cos2_numerators;
    // Exact in integers.
    c.balance_defect = std::abs(static_cast<double>((n[3] - n[2]) - (n[1] - n[0]))) /
                       static_cast<double>(p.cos2_denominator);
    c.rational = true;
    c.r1 = reduced(n[0], n[3]);
    c.r2 = reduced(n[2], n[1]);
    c.no_common_power = rational_powers_never_coincide(c.r1[0], c.r1[1], c.r2[0], c.r2[1]);
  } else {
    const double ca2 = std::pow(std::cos(p.alpha), 2);
    const double cb2 = std::pow(std::cos(p.beta), 2);
    const double cg2 = std::pow(std::cos(p.gamma), 2);
    const double cd2 = std::pow(std::cos(p.delta), 2);
    c.balance_defect = std::abs((cd2 - cg2) - (cb2 - ca2));
  }
  c.balance = c.balance_defect <= 1e-12;
  c.shifts_ordered = p.b > p.a && p.a > 0.0;
  return c;
}

PlanesInstance planes_family(const BakersParams& params, double xi, double eta) {
  if (!(xi > 0.0 && eta > 0.0)) throw PreconditionError("planes_family: xi and eta must be positive");
  auto vec4 = [](double a, double b, double c, double d) {
    Vector v(4);
    v << a, b, c, d;
    return v;
  };
  const std::array<Vector, 3> e{vec4(1, 0, 0, 0), vec4(std::cos(params.alpha), std::sin(params.alpha), 0, 0),
                                vec4(std::cos(params.beta), std::sin(params.beta), 0, 0)};
  const std::array<Vector, 3> u{vec4(0, 0, 1, 0), vec4(0, 0, std::cos(params.delta), std::sin(params.delta)),
                                vec4(0, 0, std::cos(params.gamma), std::sin(params.gamma))};
  std::vector<Subspace> members;
  for (std::size_t j = 0; j < 3; ++j) {
    Matrix b(4, 2);
    b.col(0) = e[j];
    b.col(1) = u[j];
    members.push_back(Subspace::from_orthonormal(std::move(b)));
  }
  BakersParams p = params;
  p.lambda0 = std::log(eta / xi);
  return {SubspaceFamily(std::move(members)), p, e, u, xi * e[0] + eta * u[0]};
}

PlanesInstance planes_preset(double xi, double eta) {
  return planes_family(BakersParams::preset(std::log(eta / xi)), xi, eta);
}

int BakersOrbit::predicted_index(std::size_t step) const {
  if (step % 2 == 1) return 1;
  const std::size_t k = step / 2;
  if (k >= even_indices.size()) throw PreconditionError("BakersOrbit: step beyond the computed orbit");
  return even_indices[k];
}

BakersOrbit bakers_orbit(const BakersParams& p, std::size_t n) {
  if (n < 1) throw PreconditionError("bakers_orbit: n must be >= 1");
  BakersOrbit o;
  long l = 0, m = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lambda = p.lambda0 - static_cast<double>(l) * p.a + static_cast<double>(m) * p.b;
    o.lambda.push_back(lambda);
    o.a_count.push_back(l);
    o.b_count.push_back(m);
    if (std::abs(lambda) < 1e-12) o.tie = true;
    if (lambda >= 0.0) {
      o.even_indices.push_back(3);
      ++l;
    } else {
      o.even_indices.push_back(2);
      ++m;
    }
  }
  return o;
}

SubspaceFamily four_lines_family(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw PreconditionError("four_lines_family: eps must lie in (0, 0.5)");
  auto line = [](double x, double y) {
    Matrix b(2, 1);
    b << x, y;
    b /= b.norm();
    return Subspace::from_orthonormal(std::move(b));
  };
  return SubspaceFamily({line(1, 0), line(0, 1), line(1, 1), line(1, eps - 1)});
}

SlowWitness slow_witness(const BlockConstruction& cfg, std::span<const double> target, std::size_t horizon) {
  cfg.validate();
  if (horizon < 1) throw PreconditionError("slow_witness: horizon must be >= 1");
  if (target.size() < horizon) throw PreconditionError("slow_witness: target shorter than the horizon");
  double peak = 0.0;
  for (std::size_t n = 0; n < horizon; ++n) {
    if (!(target[n] >= 0.0 && std::isfinite(target[n]))) {
      throw PreconditionError("slow_witness: target values must be finite and nonnegative");
    }
    peak = std::max(peak, target[n]);
  }
  const std::size_t M = cfg.blocks();
  auto bisector = [&](std::size_t block) {
    Vector w = Vector::Zero(static_cast<Index>(2 * M));
    const double a = cfg.angles[block - 1];
    w(static_cast<Index>(2 * block - 2)) = std::cos(a / 2);
    w(static_cast<Index>(2 * block - 1)) = std::sin(a / 2);
    return w;
  };

  SlowWitness out;
  if (peak == 0.0) {
    out.x0 = bisector(1);
    out.m = {1};
    out.blocks = {1};
    out.incoherence = {std::sin(cfg.angles[0] / 2)};
    return out;
  }
  const bool constant = std::all_of(target.begin(), target.begin() + static_cast<long>(horizon),
                                    [&](double t) { return t == target[0]; });
  if (constant && horizon > 1) throw PreconditionError("slow_witness: target must decrease to 0");

  out.scale = peak > 0.5 ? 2.0 * peak : 1.0;
  std::vector<double> t(horizon);
  for (std::size_t n = 0; n < horizon; ++n) t[n] = target[n] / out.scale;

  double smallest = std::numeric_limits<double>::infinity();
  for (double v : t) {
    if (v > 0.0) smallest = std::min(smallest, v);
  }
  // Residual index m with 1/(2n+2) <= t_m <= 1/(2n) is protected by level n.
  const std::size_t levels = static_cast<std::size_t>(std::floor(1.0 / (2.0 * smallest)));

  std::size_t prev_m = 0;
  std::size_t next_block = 1;
  for (std::size_t n = 1; n <= levels; ++n) {
    const double bar = 1.0 / (2.0 * static_cast<double>(n) + 2.0);
    // First index after which t stays below bar, within the horizon.
    std::size_t first = horizon + 1;
    for (std::size_t j = horizon; j >= 1; --j) {
      if (!(t[j - 1] < bar)) break;
      first = j;
    }
    const std::size_t m_n = std::max({4 * n * (first - 1), prev_m + 1, std::size_t{1}});
    std::size_t block = next_block;
    while (block <= M && std::sin(cfg.angles[block - 1] / 2) > 1.0 / static_cast<double>(m_n)) ++block;
    if (block > M) {
      // Blocks needed if the remaining ones followed the preset angles 1/m.
      const double need = 1.0 / (2.0 * std::asin(1.0 / static_cast<double>(m_n)));
      throw TruncationError("slow_witness: no block with half-angle sine <= 1/" + std::to_string(m_n) +
                                " among " + std::to_string(M),
                            std::max(M + 1, static_cast<std::size_t>(std::ceil(need)) + levels - n));
    }
    out.m.push_back(m_n);
    out.blocks.push_back(block);
    out.incoherence.push_back(std::sin(cfg.angles[block - 1] / 2));
    prev_m = m_n;
    next_block = block + 1;
  }
  out.x0 = Vector::Zero(static_cast<Index>(2 * M));
  for (std::size_t n = 1; n <= out.blocks.size(); ++n) {
    out.x0 += bisector(out.blocks[n - 1]) / static_cast<double>(n);
  }
  out.x0 *= out.scale;
  return out;
}

SubspaceFamily random_family(Index d, std::size_t K, std::uint64_t seed, const std::vector<Index>& ranks) {
  if (d < 2) throw PreconditionError("random_family: d must be >= 2");
  if (K < 2) throw PreconditionError("random_family: K must be >= 2");
  if (!ranks.empty()) {
    if (ranks.size() != K) throw PreconditionError("random_family: one rank per member required");
    Index codim = 0;
    for (Index r : ranks) {
      if (r < 0 || r > d) throw PreconditionError("random_family: rank outside 0..d");
      codim += d - r;
    }
    if (codim < d) throw PreconditionError("random_family: complement ranks cannot span R^d");
  }
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    std::mt19937_64 rng = make_rng(seed, attempt);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<Index> pick(1, d - 1);
    std::vector<Subspace> members;
    for (std::size_t k = 0; k < K; ++k) {
      const Index r = ranks.empty() ? pick(rng) : ranks[k];
      Matrix g(d, r);
      for (Index j = 0; j < r; ++j) {
        for (Index i = 0; i < d; ++i) g(i, j) = normal(rng);
      }
      members.push_back(r == 0 ? Subspace(d) : Subspace::from_columns(g));
    }
    if (sum_of_complements_is_full(std::span<const Subspace>(members))) {
      return SubspaceFamily(std::move(members));
    }
  }
  throw std::runtime_error("random_family: no family with trivial intersection after 1000 draws");
}

Vector random_unit_vector(Index d, std::uint64_t seed) {
  if (d < 1) throw PreconditionError("random_unit_vector: d must be >= 1");
  std::mt19937_64 rng = make_rng(seed, 0xfeedULL);
  std::normal_distribution<double> normal;
  Vector v(d);
  do {
    for (Index i = 0; i < d; ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace altproj
